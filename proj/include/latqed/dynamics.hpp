#pragma once

// Time evolution of the single-particle chain under a switched potential and
// the pair content of the resulting scattering matrix.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "latqed/chain.hpp"
#include "latqed/error.hpp"
#include "latqed/parallel.hpp"
#include "latqed/spectral.hpp"

namespace latqed::dynamics {

using cplx = std::complex<double>;

/// Phi(t, n) = envelope(t) * base[n].
struct DrivenPotential {
  std::vector<double> base;
  RampProfile ramp;
};

/// Crank-Nicolson stepper for i d/dt psi = H(t) psi with H(t) = H0 + f(t) V.
///
/// Each step uses H at the step midpoint. The mean of the diagonal is split
/// off and applied as an exact phase, so a uniform shift of the potential
/// only changes a global phase.
class CrankNicolson {
 public:
  CrankNicolson(const ChainModel& chain, DrivenPotential potential)
      : chain_(chain), potential_(std::move(potential)) {
    chain_.validate();
    potential_.ramp.validate();
    if (static_cast<int>(potential_.base.size()) != chain_.num_sites)
      throw ConfigError("evolve: potential has " + std::to_string(potential_.base.size()) +
                        " entries, chain has " + std::to_string(chain_.num_sites));
    const std::vector<double> zero(chain_.num_sites, 0.0);
    free_ = build_hamiltonian(chain_, zero);
    // The spectral radius of H0 + f V is convex in f, so the envelope ends
    // bound it for every intermediate time.
    max_energy_ = 0.0;
    for (double f : {0.0, 1.0}) {
      auto h = free_;
      for (int n = 0; n < chain_.num_sites; ++n) h.diagonal[n] += f * potential_.base[n];
      max_energy_ = std::max({max_energy_, std::abs(spectral::eigenvalue_at(h, 0)),
                              std::abs(spectral::eigenvalue_at(h, chain_.num_sites - 1))});
    }
  }

  /// Largest |E| of the instantaneous Hamiltonian over the whole protocol.
  double max_abs_energy() const { return max_energy_; }

  /// Largest admissible step, 0.05 / max|E|.
  double max_step() const { return 0.05 / max_energy_; }

  /// Number of steps of size <= dt covering [t0, t1].
  static long step_count(double t0, double t1, double dt) {
    return static_cast<long>(std::ceil(std::abs(t1 - t0) / dt - 1e-9));
  }

  /// Advances every column of `psi` from t0 to t1 (t1 < t0 runs backwards)
  /// in equal steps no longer than dt.
  void advance(Eigen::MatrixXcd& psi, double t0, double t1, double dt) const {
    if (psi.rows() != chain_.num_sites) throw ConfigError("advance: state dimension mismatch");
    if (!(dt > 0.0)) throw ConfigError("evolve: dt must be > 0");
    if (dt > max_step() * (1.0 + 1e-12))
      throw ConfigError("evolve: dt = " + std::to_string(dt) + " exceeds 0.05/max|E| = " +
                        std::to_string(max_step()));
    const long steps = step_count(t0, t1, dt);
    if (steps == 0) return;
    const double h = (t1 - t0) / static_cast<double>(steps);
    // Site-major split storage: the columns are independent, so the inner
    // loops run over contiguous columns.
    const int n = chain_.num_sites;
    const Eigen::Index k = psi.cols();
    Planes state(n, k);
    for (int i = 0; i < n; ++i)
      for (Eigen::Index c = 0; c < k; ++c) {
        state.re[i * k + c] = psi(i, c).real();
        state.im[i * k + c] = psi(i, c).imag();
      }
    Planes rhs(n, k);
    for (long s = 0; s < steps; ++s) step(state, rhs, t0 + (s + 0.5) * h, h);
    for (int i = 0; i < n; ++i)
      for (Eigen::Index c = 0; c < k; ++c) psi(i, c) = cplx(state.re[i * k + c], state.im[i * k + c]);
  }

  const ChainModel& chain() const { return chain_; }
  const DrivenPotential& potential() const { return potential_; }
  const TridiagonalOperator& free_hamiltonian() const { return free_; }

 private:
  struct Planes {
    Planes(int rows, Eigen::Index cols) : re(rows * cols), im(rows * cols) {}
    std::vector<double> re, im;
  };

  void step(Planes& v, Planes& r, double t_mid, double h) const {
    const int n = chain_.num_sites;
    const std::size_t k = v.re.size() / n;
    const double f = potential_.ramp.envelope(t_mid);
    diag_.resize(n);
    double mean = 0.0;
    for (int i = 0; i < n; ++i) {
      diag_[i] = free_.diagonal[i] + f * potential_.base[i];
      mean += diag_[i];
    }
    mean /= n;
    for (int i = 0; i < n; ++i) diag_[i] -= mean;

    // (1 + i h/2 H) x = (1 - i h/2 H) psi, Thomas factorization shared by all
    // columns.
    const cplx half(0.0, 0.5 * h);
    const auto& off = free_.off_diagonal;
    upper_.resize(n);
    inv_pivot_.resize(n);
    cplx pivot = 1.0 + half * diag_[0];
    if (std::abs(pivot) < 1e-300) throw NumericError("Crank-Nicolson: singular pivot");
    inv_pivot_[0] = 1.0 / pivot;
    for (int i = 1; i < n; ++i) {
      const cplx lower = half * off[i - 1];
      upper_[i - 1] = half * off[i - 1] * inv_pivot_[i - 1];
      pivot = 1.0 + half * diag_[i] - lower * upper_[i - 1];
      if (std::abs(pivot) < 1e-300) throw NumericError("Crank-Nicolson: singular pivot");
      inv_pivot_[i] = 1.0 / pivot;
    }
    const cplx phase = std::exp(cplx(0.0, -mean * h));
    const double pr = phase.real(), pi = phase.imag();
    const double hh = 0.5 * h;

    // rhs = phase * (v - i hh H v)
    for (int i = 0; i < n; ++i) {
      const double d = diag_[i];
      const double lo = i > 0 ? off[i - 1] : 0.0;
      const double up = i + 1 < n ? off[i] : 0.0;
      const double* vr = &v.re[i * k];
      const double* vi = &v.im[i * k];
      const double* vr_lo = i > 0 ? vr - k : vr;
      const double* vi_lo = i > 0 ? vi - k : vi;
      const double* vr_up = i + 1 < n ? vr + k : vr;
      const double* vi_up = i + 1 < n ? vi + k : vi;
      double* rr = &r.re[i * k];
      double* ri = &r.im[i * k];
      for (std::size_t c = 0; c < k; ++c) {
        const double hr = d * vr[c] + lo * vr_lo[c] + up * vr_up[c];
        const double hi = d * vi[c] + lo * vi_lo[c] + up * vi_up[c];
        const double xr = vr[c] + hh * hi, xi = vi[c] - hh * hr;
        rr[c] = xr * pr - xi * pi;
        ri[c] = xr * pi + xi * pr;
      }
    }
    // forward sweep: v_i = (rhs_i - i hh off_{i-1} v_{i-1}) / pivot_i
    for (int i = 0; i < n; ++i) {
      const double a = i > 0 ? hh * off[i - 1] : 0.0;
      const double br = inv_pivot_[i].real(), bi = inv_pivot_[i].imag();
      const double* pr_ = i > 0 ? &v.re[(i - 1) * k] : &r.re[0];
      const double* pi_ = i > 0 ? &v.im[(i - 1) * k] : &r.im[0];
      const double* rr = &r.re[i * k];
      const double* ri = &r.im[i * k];
      double* vr = &v.re[i * k];
      double* vi = &v.im[i * k];
      for (std::size_t c = 0; c < k; ++c) {
        const double xr = rr[c] + a * pi_[c];
        const double xi = ri[c] - a * pr_[c];
        vr[c] = xr * br - xi * bi;
        vi[c] = xr * bi + xi * br;
      }
    }
    // back substitution: v_i -= upper_i v_{i+1}
    for (int i = n - 2; i >= 0; --i) {
      const double ur = upper_[i].real(), ui = upper_[i].imag();
      const double* yr = &v.re[(i + 1) * k];
      const double* yi = &v.im[(i + 1) * k];
      double* vr = &v.re[i * k];
      double* vi = &v.im[i * k];
      for (std::size_t c = 0; c < k; ++c) {
        const double ar = yr[c], ai = yi[c];
        vr[c] -= ar * ur - ai * ui;
        vi[c] -= ar * ui + ai * ur;
      }
    }
  }

  ChainModel chain_;
  DrivenPotential potential_;
  TridiagonalOperator free_;
  double max_energy_ = 0.0;
  mutable std::vector<double> diag_;
  mutable std::vector<cplx> upper_, inv_pivot_;
};

inline double unitarity_error(const Eigen::MatrixXcd& u) {
  return (u.adjoint() * u - Eigen::MatrixXcd::Identity(u.cols(), u.cols())).cwiseAbs().maxCoeff();
}

inline double norm_drift(const Eigen::MatrixXcd& u) {
  double worst = 0.0;
  for (Eigen::Index c = 0; c < u.cols(); ++c) worst = std::max(worst, std::abs(u.col(c).norm() - 1.0));
  return worst;
}

struct EvolutionResult {
  Eigen::MatrixXcd propagator;  // U(T, 0)
  std::vector<double> times;    // step boundaries
  double dt = 0.0;
  double norm_drift = 0.0;
  double unitarity_error = 0.0;
};

/// Full single-particle propagator over [0, T_total]. dt <= 0 selects the
/// largest admissible step.
inline EvolutionResult evolve(const ChainModel& chain, const DrivenPotential& potential,
                              double T_total, double dt = 0.0) {
  if (!(T_total >= 0.0) || !std::isfinite(T_total))
    throw ConfigError("evolve: T_total must be finite and >= 0");
  const CrankNicolson cn(chain, potential);
  if (dt <= 0.0) dt = cn.max_step();
  EvolutionResult r;
  r.propagator = Eigen::MatrixXcd::Identity(chain.num_sites, chain.num_sites);
  cn.advance(r.propagator, 0.0, T_total, dt);
  const long steps = CrankNicolson::step_count(0.0, T_total, dt);
  r.dt = steps > 0 ? T_total / steps : 0.0;
  r.times.resize(steps + 1);
  for (long s = 0; s <= steps; ++s) r.times[s] = s * r.dt;
  r.norm_drift = norm_drift(r.propagator);
  r.unitarity_error = unitarity_error(r.propagator);
  return r;
}

// ---------------------------------------------------------------------------
// In/out modes and pair counting

struct ModeSplit {
  Eigen::MatrixXd positive;  // columns: eigenvectors with E > 0, ascending
  Eigen::MatrixXd negative;  // columns: eigenvectors with E < 0, ascending
  Eigen::VectorXd positive_energies;
  Eigen::VectorXd negative_energies;
};

/// Splits the free chain's eigenbasis by the sign of the energy.
inline ModeSplit in_out_split(const TridiagonalOperator& h_free) {
  const auto spec = spectral::solve_spectrum(h_free);
  const int n = spec.count();
  int negatives = 0;
  for (int k = 0; k < n; ++k) {
    if (std::abs(spec.eigenvalues[k]) < 1e-12)
      throw NumericError("in_out_split: eigenvalue " + std::to_string(spec.eigenvalues[k]) +
                         " at zero, the positive/negative split is degenerate");
    if (spec.eigenvalues[k] < 0.0) ++negatives;
  }
  if (2 * negatives != n)
    throw NumericError("in_out_split: " + std::to_string(negatives) + " negative modes out of " +
                       std::to_string(n));
  ModeSplit s;
  s.negative = spec.eigenvectors.leftCols(negatives);
  s.positive = spec.eigenvectors.rightCols(n - negatives);
  s.negative_energies = spec.eigenvalues.head(negatives);
  s.positive_energies = spec.eigenvalues.tail(n - negatives);
  return s;
}

struct PairCreationResult {
  Eigen::MatrixXcd beta;              // beta(k, q) = <out k+| U |in q->
  double n_pairs = 0.0;               // sum |beta|^2
  std::vector<double> mode_spectrum;  // per out-positive mode: sum_q |beta_kq|^2
  int dominant_k = -1;                // entry with the largest |beta|^2
  int dominant_q = -1;
  double dominant_entry = 0.0;
  double dominant_fraction = 0.0;     // leading singular value^2 / n_pairs
  Eigen::VectorXcd particle_mode;     // leading left singular vector (out-positive coefficients)
};

namespace detail {

inline PairCreationResult pairs_from_beta(Eigen::MatrixXcd beta) {
  PairCreationResult r;
  r.beta = std::move(beta);
  r.n_pairs = r.beta.cwiseAbs2().sum();
  r.mode_spectrum.resize(r.beta.rows());
  for (Eigen::Index k = 0; k < r.beta.rows(); ++k) r.mode_spectrum[k] = r.beta.row(k).squaredNorm();
  Eigen::Index k = 0, q = 0;
  r.dominant_entry = r.beta.cwiseAbs2().maxCoeff(&k, &q);
  r.dominant_k = static_cast<int>(k);
  r.dominant_q = static_cast<int>(q);
  // Created pairs occupy the natural orbitals of beta; the leading one is the
  // dominant pair mode.
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(r.beta, Eigen::ComputeThinU);
  const double s0 = svd.singularValues().size() > 0 ? svd.singularValues()[0] : 0.0;
  r.dominant_fraction = r.n_pairs > 0.0 ? s0 * s0 / r.n_pairs : 0.0;
  if (svd.matrixU().cols() > 0) r.particle_mode = svd.matrixU().col(0);
  return r;
}

}  // namespace detail

/// Pair content of a propagator: beta = P+^T U P-.
inline PairCreationResult count_pairs(const Eigen::MatrixXcd& U, const ModeSplit& split) {
  if (U.rows() != split.positive.rows() || U.cols() != split.positive.rows())
    throw ConfigError("count_pairs: propagator dimension mismatch");
  const Eigen::MatrixXcd pos = split.positive.cast<cplx>();
  const Eigen::MatrixXcd neg = split.negative.cast<cplx>();
  return detail::pairs_from_beta(pos.adjoint() * (U * neg));
}

/// Pair content from the evolved Dirac sea only (columns U P-).
inline PairCreationResult count_pairs_from_sea(const Eigen::MatrixXcd& evolved_sea,
                                               const ModeSplit& split) {
  return detail::pairs_from_beta(split.positive.cast<cplx>().adjoint() * evolved_sea);
}

// ---------------------------------------------------------------------------
// Protocols

struct RunSummary {
  double n_pairs = 0.0;
  double dominant_fraction = 0.0;
  double dominant_entry = 0.0;
  double unitarity_error = 0.0;
  double norm_drift = 0.0;
  double max_mode_occupation = 0.0;
  std::vector<double> mode_spectrum;
};

inline RunSummary summarize(const PairCreationResult& p, double unitarity, double drift) {
  RunSummary s;
  s.n_pairs = p.n_pairs;
  s.dominant_fraction = p.dominant_fraction;
  s.dominant_entry = p.dominant_entry;
  s.unitarity_error = unitarity;
  s.norm_drift = drift;
  s.mode_spectrum = p.mode_spectrum;
  for (double m : p.mode_spectrum) s.max_mode_occupation = std::max(s.max_mode_occupation, m);
  return s;
}

/// One switch-on / hold / switch-off run with the full propagator.
inline RunSummary run_protocol(const ChainModel& chain, const DrivenPotential& potential,
                               double dt_factor = 1.0) {
  const CrankNicolson cn(chain, potential);
  const double T = potential.ramp.total();
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(chain.num_sites, chain.num_sites);
  cn.advance(u, 0.0, T, dt_factor * cn.max_step());
  const auto split = in_out_split(cn.free_hamiltonian());
  return summarize(count_pairs(u, split), unitarity_error(u), norm_drift(u));
}

struct AdiabaticRow {
  double duration = 0.0;
  RunSummary summary;
};

/// One run per ramp duration (switch-on and switch-off both last `duration`).
inline std::vector<AdiabaticRow> adiabatic_scan(const ChainModel& chain,
                                                const std::vector<double>& base,
                                                const std::vector<double>& durations,
                                                double plateau,
                                                RampShape shape = RampShape::SmoothCos,
                                                double dt_factor = 1.0, unsigned jobs = 1) {
  for (std::size_t i = 0; i < durations.size(); ++i) {
    if (!(durations[i] >= 0.0)) throw ConfigError("adiabatic_scan: durations must be >= 0");
    if (i > 0 && !(durations[i] > durations[i - 1]))
      throw ConfigError("adiabatic_scan: durations must ascend");
  }
  return parallel_map<AdiabaticRow>(durations.size(), jobs, [&](std::size_t i) {
    const DrivenPotential pot{base, RampProfile{durations[i], plateau, durations[i], shape}};
    return AdiabaticRow{durations[i], run_protocol(chain, pot, dt_factor)};
  });
}

/// Spatial structure of the dominant pair at the end of the plateau.
struct PairOrbitals {
  Eigen::VectorXcd particle;  // leading created particle, pulled back to the plateau end
  Eigen::VectorXcd hole;      // least occupied out-negative direction, pulled back
  double particle_participation = 0.0;
  double hole_participation = 0.0;
  PairCreationResult pairs;
};

inline PairOrbitals pair_orbitals(const ChainModel& chain, const DrivenPotential& potential,
                                  double dt_factor = 1.0) {
  const CrankNicolson cn(chain, potential);
  const auto& r = potential.ramp;
  const double t_mid = r.t_on + r.t_plateau, T = r.total();
  const double dt = dt_factor * cn.max_step();
  const int n = chain.num_sites;
  Eigen::MatrixXcd u1 = Eigen::MatrixXcd::Identity(n, n);
  cn.advance(u1, 0.0, t_mid, dt);
  Eigen::MatrixXcd u2 = Eigen::MatrixXcd::Identity(n, n);
  cn.advance(u2, t_mid, T, dt);
  const Eigen::MatrixXcd u = u2 * u1;
  const auto split = in_out_split(cn.free_hamiltonian());

  PairOrbitals out;
  out.pairs = count_pairs(u, split);
  const Eigen::MatrixXcd pos = split.positive.cast<cplx>();
  const Eigen::MatrixXcd neg = split.negative.cast<cplx>();
  out.particle = u2.adjoint() * (pos * out.pairs.particle_mode);
  // Occupation of an out-negative direction v is |G^dagger v|^2 with
  // G = P-^T U P-; the hole is the direction of smallest occupation.
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(neg.adjoint() * (u * neg), Eigen::ComputeThinU);
  const Eigen::VectorXcd hole_coeff = svd.matrixU().col(svd.matrixU().cols() - 1);
  out.hole = u2.adjoint() * (neg * hole_coeff);
  out.particle_participation = spectral::participation_ratio(out.particle);
  out.hole_participation = spectral::participation_ratio(out.hole);
  return out;
}

// ---------------------------------------------------------------------------
// Constant field

struct SchwingerPoint {
  double field = 0.0;
  double n_pairs = 0.0;
  double rate = 0.0;
  bool used_in_fit = false;
  double norm_drift = 0.0;
};

struct SchwingerScan {
  std::vector<SchwingerPoint> points;
  double plateau = 0.0;
  double ramp = 0.0;
  double rate_floor = 0.0;  // points at or below 10x this are excluded
  double fit_slope = 0.0;
  double fit_intercept = 0.0;
  double r_squared = 0.0;
  int fit_points = 0;
};

/// Constant field E inside the site window (clamped outside), switched on
/// over `ramp`, held for `plateau` and switched off. rate = n_pairs / plateau;
/// ln(rate) is fitted against 1/E over the points above the noise floor.
inline SchwingerScan schwinger_scan(const ChainModel& chain, const std::vector<double>& fields,
                                    int first_site, int last_site, double plateau, double ramp,
                                    RampShape shape = RampShape::SmoothCos,
                                    double dt_factor = 1.0, unsigned jobs = 1,
                                    double pair_floor = 1e-10) {
  if (!(plateau > 0.0)) throw ConfigError("schwinger_scan: plateau must be > 0");
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (!(fields[i] > 0.0)) throw ConfigError("schwinger_scan: fields must be > 0");
    if (i > 0 && !(fields[i] > fields[i - 1]))
      throw ConfigError("schwinger_scan: fields must ascend");
  }
  const auto split = in_out_split(free_hamiltonian(chain));
  SchwingerScan scan;
  scan.plateau = plateau;
  scan.ramp = ramp;
  scan.rate_floor = pair_floor / plateau;
  scan.points = parallel_map<SchwingerPoint>(fields.size(), jobs, [&](std::size_t i) {
    const auto base = sample_potential(LinearField{fields[i], first_site, last_site}, chain);
    const DrivenPotential pot{base, RampProfile{ramp, plateau, ramp, shape}};
    const CrankNicolson cn(chain, pot);
    // Only the Dirac sea is needed for the pair count.
    Eigen::MatrixXcd sea = split.negative.cast<cplx>();
    cn.advance(sea, 0.0, pot.ramp.total(), dt_factor * cn.max_step());
    SchwingerPoint p;
    p.field = fields[i];
    p.n_pairs = count_pairs_from_sea(sea, split).n_pairs;
    p.rate = p.n_pairs / plateau;
    p.norm_drift = norm_drift(sea);
    return p;
  });
  std::vector<double> x, y;
  for (auto& p : scan.points) {
    p.used_in_fit = p.rate > 10.0 * scan.rate_floor;
    if (!p.used_in_fit) continue;
    x.push_back(1.0 / p.field);
    y.push_back(std::log(p.rate));
  }
  scan.fit_points = static_cast<int>(x.size());
  if (x.size() >= 2) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      sx += x[i];
      sy += y[i];
      sxx += x[i] * x[i];
      sxy += x[i] * y[i];
      syy += y[i] * y[i];
    }
    const double cov = sxy - sx * sy / n, vx = sxx - sx * sx / n, vy = syy - sy * sy / n;
    scan.fit_slope = cov / vx;
    scan.fit_intercept = (sy - scan.fit_slope * sx) / n;
    scan.r_squared = vy > 0.0 ? cov * cov / (vx * vy) : 1.0;
  }
  return scan;
}

}  // namespace latqed::dynamics
