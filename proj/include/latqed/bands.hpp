#pragma once

// Bichromatic optical lattice W(x) = W0 sin^2(2kx) + dW sin^2(kx) in units
// with 2 M_atom = hbar = 1, so the recoil energy is k^2. Lowest-band physics:
// semiclassical band condition, plane-wave Bloch oracle, effective Dirac
// parameters, Wannier orbitals, and the experimental scale hierarchy.

#include <lapacke.h>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "latqed/error.hpp"
#include "latqed/parallel.hpp"

namespace latqed::bands {

using cplx = std::complex<double>;

struct BichromaticPotential {
  double W0 = 10.0;
  double dW = 1.0;
  double k = 1.0;

  double spacing() const { return std::numbers::pi / (2.0 * k); }
  double recoil() const { return k * k; }
  double operator()(double x) const {
    const double s2 = std::sin(2.0 * k * x), s1 = std::sin(k * x);
    return W0 * s2 * s2 + dW * s1 * s1;
  }
  /// Outside the dW << W0 regime the two-minimum picture degrades.
  bool strongly_perturbed() const { return dW > W0 / 3.0; }

  // Maxima sit where cos(2kx) = -dW / (4 W0).
  double barrier_position() const { return std::acos(-dW / (4.0 * W0)) / (2.0 * k); }
  double barrier_top() const { return (*this)(barrier_position()); }

  void validate() const {
    if (!(W0 > 0.0) || !(dW >= 0.0) || !(k > 0.0) || !std::isfinite(W0 + dW + k))
      throw ConfigError("bichromatic potential needs W0 > 0, dW >= 0, k > 0");
  }
};

inline double potential_value(double x, const BichromaticPotential& pot) { return pot(x); }

/// Positions of the lower minimum, upper minimum and the barrier between them
/// within one period [0, pi/k).
struct Extrema {
  double lower_min = 0.0;
  double upper_min = 0.0;
  double barrier = 0.0;
  double barrier_height = 0.0;
};

inline Extrema locate_extrema(const BichromaticPotential& pot) {
  return {0.0, pot.spacing(), pot.barrier_position(), pot.barrier_top()};
}

// ---------------------------------------------------------------------------
// Semiclassical phases

struct WkbData {
  double energy = 0.0;
  double y1 = 0.0, z1 = 0.0, y2 = 0.0, z2 = 0.0;
  double phi1 = 0.0, phi2 = 0.0;
  double phase_sum = 0.0, phase_diff = 0.0;
  double transmission = 0.0;
};

namespace detail {

inline double bisect_root(auto&& f, double lo, double hi) {
  auto tol = [](double a, double b) { return std::abs(b - a) <= 1e-13; };
  std::uintmax_t iters = 200;
  const auto r = boost::math::tools::bisect(f, lo, hi, tol, iters);
  return 0.5 * (r.first + r.second);
}

// integral of sqrt(max(s * (E - W), 0)) over [a, b] with x = a + (b - a) sin^2(t),
// which removes the square-root behaviour at both ends.
inline double sqrt_integral(const BichromaticPotential& pot, double E, double a, double b,
                            double sign) {
  const double w = b - a;
  auto f = [&](double t) {
    const double s = std::sin(t), c = std::cos(t);
    const double v = sign * (E - pot(a + w * s * s));
    return v > 0.0 ? std::sqrt(v) * 2.0 * w * s * c : 0.0;
  };
  double err = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      f, 0.0, std::numbers::pi / 2.0, 8, 1e-12, &err);
}

inline void check_energy(const BichromaticPotential& pot, double E, bool need_upper) {
  pot.validate();
  if (!(E > 0.0)) throw RegimeError("WKB: energy must lie above the lower minimum");
  if (!(E < pot.barrier_top()))
    throw RegimeError("WKB: energy " + std::to_string(E) + " above the barrier top " +
                      std::to_string(pot.barrier_top()));
  if (need_upper && !(E > pot.dW))
    throw RegimeError("WKB: energy below the upper minimum, only the lower-well phase exists");
}

}  // namespace detail

/// Phase integral of one well: which = 1 (lower minimum at 0) or 2 (upper
/// minimum at the spacing).
inline double well_phase(double E, const BichromaticPotential& pot, int which) {
  detail::check_energy(pot, E, which == 2);
  const double xm = pot.barrier_position(), l = pot.spacing();
  auto g = [&](double x) { return pot(x) - E; };
  if (which == 1) {
    const double z = detail::bisect_root(g, 0.0, xm);
    return detail::sqrt_integral(pot, E, -z, z, 1.0);
  }
  const double y = detail::bisect_root(g, xm, l);
  return detail::sqrt_integral(pot, E, y, 2.0 * l - y, 1.0);
}

inline WkbData wkb_phases(double E, const BichromaticPotential& pot) {
  detail::check_energy(pot, E, true);
  const double xm = pot.barrier_position(), l = pot.spacing();
  auto g = [&](double x) { return pot(x) - E; };
  WkbData d;
  d.energy = E;
  d.z1 = detail::bisect_root(g, 0.0, xm);
  d.y1 = -d.z1;
  d.y2 = detail::bisect_root(g, xm, l);
  d.z2 = 2.0 * l - d.y2;
  d.phi1 = detail::sqrt_integral(pot, E, d.y1, d.z1, 1.0);
  d.phi2 = detail::sqrt_integral(pot, E, d.y2, d.z2, 1.0);
  d.phase_sum = d.phi1 + d.phi2;
  d.phase_diff = d.phi1 - d.phi2;
  d.transmission = std::exp(-2.0 * detail::sqrt_integral(pot, E, d.z1, d.y2, -1.0));
  return d;
}

// ---------------------------------------------------------------------------
// Band structures

enum class BandSource { WKB, ExactBloch };

inline const char* to_string(BandSource s) { return s == BandSource::WKB ? "wkb" : "exact"; }

struct BandStructure {
  std::vector<double> p;
  std::vector<double> E_minus;
  std::vector<double> E_plus;
  BandSource source = BandSource::ExactBloch;
  double spacing = 0.0;

  double gap() const {
    return *std::min_element(E_plus.begin(), E_plus.end()) -
           *std::max_element(E_minus.begin(), E_minus.end());
  }
  double center() const {
    return 0.5 * (*std::min_element(E_plus.begin(), E_plus.end()) +
                  *std::max_element(E_minus.begin(), E_minus.end()));
  }
  double width() const {
    return *std::max_element(E_plus.begin(), E_plus.end()) -
           *std::min_element(E_minus.begin(), E_minus.end());
  }
};

/// n points over the half-open reduced zone [-k, k), zone edge included.
inline std::vector<double> zone_grid(const BichromaticPotential& pot, int n) {
  if (n < 2) throw ConfigError("zone grid needs at least 2 points");
  std::vector<double> p(n);
  for (int j = 0; j < n; ++j) p[j] = -pot.k + 2.0 * pot.k * j / n;
  return p;
}

/// Solves cos^2(Phi/2) = (1 - T) sin^2(dPhi/2) + T cos^2(l p) for the two
/// lowest roots at every p. Written as cos(Phi/2) = +-sqrt(rhs), each sign is
/// a simple crossing even where the two roots touch.
inline BandStructure wkb_band_solve(const BichromaticPotential& pot, const std::vector<double>& p_grid,
                                    unsigned jobs = 1, int scan_points = 400) {
  pot.validate();
  if (p_grid.empty()) throw ConfigError("wkb_band_solve: empty momentum grid");
  const double l = pot.spacing();
  const double top = pot.barrier_top();
  const double e_lo = pot.dW + 1e-9 * pot.W0;
  const double e_hi = top * (1.0 - 1e-9);
  std::vector<double> grid(scan_points);
  for (int i = 0; i < scan_points; ++i) grid[i] = e_lo + (e_hi - e_lo) * i / (scan_points - 1);
  const auto scan = parallel_map<WkbData>(grid.size(), jobs,
                                          [&](std::size_t i) { return wkb_phases(grid[i], pot); });

  auto residual = [&](const WkbData& d, double c2, double sign) {
    const double s = std::sin(0.5 * d.phase_diff);
    const double rhs = (1.0 - d.transmission) * s * s + d.transmission * c2;
    return std::cos(0.5 * d.phase_sum) - sign * std::sqrt(rhs);
  };

  BandStructure out;
  out.p = p_grid;
  out.source = BandSource::WKB;
  out.spacing = l;
  out.E_minus.resize(p_grid.size());
  out.E_plus.resize(p_grid.size());
  parallel_for(p_grid.size(), jobs, [&](std::size_t j) {
    const double c = std::cos(l * p_grid[j]);
    const double c2 = c * c;
    std::size_t start = 0;
    for (int branch = 0; branch < 2; ++branch) {
      const double sign = branch == 0 ? 1.0 : -1.0;
      std::size_t i = start;
      while (i + 1 < scan.size() &&
             !(residual(scan[i], c2, sign) > 0.0 && residual(scan[i + 1], c2, sign) <= 0.0))
        ++i;
      if (i + 1 >= scan.size()) {
        std::ostringstream msg;
        msg << "WKB regime violation: no " << (branch == 0 ? "lower" : "upper")
            << " band root below the barrier at p = " << p_grid[j];
        throw RegimeError(msg.str());
      }
      auto f = [&](double E) { return residual(wkb_phases(E, pot), c2, sign); };
      std::uintmax_t iters = 100;
      auto tol = [](double a, double b) { return std::abs(b - a) <= 1e-12 * std::max(1.0, std::abs(a)); };
      const auto r = boost::math::tools::toms748_solve(f, grid[i], grid[i + 1],
                                                       residual(scan[i], c2, sign),
                                                       residual(scan[i + 1], c2, sign), tol, iters);
      (branch == 0 ? out.E_minus : out.E_plus)[j] = 0.5 * (r.first + r.second);
      start = i;
    }
  });
  return out;
}

namespace detail {

// Lowest n_bands eigenpairs of the central-equation matrix at Bloch momentum p
// with plane waves exp(i (p + 2 k m) x), |m| <= half.
inline void central_equation(const BichromaticPotential& pot, double p, int half, int n_bands,
                             Eigen::VectorXd& values, Eigen::MatrixXd* vectors) {
  const int n = 2 * half + 1;
  const int kd = 2;
  std::vector<double> ab(static_cast<std::size_t>(kd + 1) * n, 0.0);
  // column-major upper band storage: ab[kd + i - j + j * (kd + 1)] = A(i, j)
  for (int j = 0; j < n; ++j) {
    const double q = p + 2.0 * pot.k * (j - half);
    ab[kd + j * (kd + 1)] = q * q + 0.5 * (pot.W0 + pot.dW);
    if (j >= 1) ab[kd - 1 + j * (kd + 1)] = -0.25 * pot.dW;
    if (j >= 2) ab[kd - 2 + j * (kd + 1)] = -0.25 * pot.W0;
  }
  std::vector<double> q(static_cast<std::size_t>(n) * n), w(n), z(static_cast<std::size_t>(n) * n_bands);
  std::vector<lapack_int> ifail(n);
  lapack_int found = 0;
  const lapack_int info = LAPACKE_dsbevx(LAPACK_COL_MAJOR, vectors ? 'V' : 'N', 'I', 'U', n, kd,
                                         ab.data(), kd + 1, q.data(), n, 0.0, 0.0, 1, n_bands,
                                         2.0 * LAPACKE_dlamch('S'), &found, w.data(), z.data(), n,
                                         ifail.data());
  if (info != 0 || found != n_bands)
    throw NumericError("central equation: dsbevx failed, info = " + std::to_string(info));
  values = Eigen::Map<Eigen::VectorXd>(w.data(), n_bands);
  if (vectors) *vectors = Eigen::Map<Eigen::MatrixXd>(z.data(), n, n_bands);
}

}  // namespace detail

/// Bloch energies and plane-wave coefficients of the lowest bands.
struct BlochStates {
  std::vector<double> p;
  int half_width = 0;                    // plane waves m = -half_width .. half_width
  Eigen::MatrixXd energies;              // p x band
  std::vector<Eigen::MatrixXd> vectors;  // per p: coefficients x band
};

/// Plane-wave solution, checked against a run with twice the plane waves.
inline BlochStates exact_bloch_states(const BichromaticPotential& pot, const std::vector<double>& p_grid,
                                      int n_bands = 2, int n_planewaves = 64, unsigned jobs = 1,
                                      bool keep_vectors = true) {
  pot.validate();
  if (n_planewaves < 64) throw ConfigError("exact_bloch: at least 64 plane waves required");
  if (n_bands < 1 || n_bands > n_planewaves) throw ConfigError("exact_bloch: bad band count");
  if (p_grid.empty()) throw ConfigError("exact_bloch: empty momentum grid");
  const int half = n_planewaves / 2;
  BlochStates out;
  out.p = p_grid;
  out.half_width = half;
  out.energies.resize(static_cast<Eigen::Index>(p_grid.size()), n_bands);
  if (keep_vectors) out.vectors.resize(p_grid.size());
  std::vector<double> drift(p_grid.size());
  parallel_for(p_grid.size(), jobs, [&](std::size_t j) {
    Eigen::VectorXd e, e2;
    detail::central_equation(pot, p_grid[j], half, n_bands, e, keep_vectors ? &out.vectors[j] : nullptr);
    detail::central_equation(pot, p_grid[j], 2 * half, n_bands, e2, nullptr);
    drift[j] = (e - e2).cwiseAbs().maxCoeff();
    out.energies.row(static_cast<Eigen::Index>(j)) = e.transpose();
  });
  const double worst = *std::max_element(drift.begin(), drift.end());
  if (worst > 1e-8 * pot.recoil())
    throw NumericError("exact_bloch: not converged under plane-wave doubling, dE = " +
                       std::to_string(worst));
  return out;
}

inline BandStructure exact_bloch(const BichromaticPotential& pot, const std::vector<double>& p_grid,
                                 int n_planewaves = 64, unsigned jobs = 1) {
  const auto s = exact_bloch_states(pot, p_grid, 2, n_planewaves, jobs, false);
  BandStructure out;
  out.p = p_grid;
  out.source = BandSource::ExactBloch;
  out.spacing = pot.spacing();
  for (Eigen::Index j = 0; j < s.energies.rows(); ++j) {
    out.E_minus.push_back(s.energies(j, 0));
    out.E_plus.push_back(s.energies(j, 1));
  }
  return out;
}

/// Gap at the zone edge p = -k.
inline double zone_edge_gap(const BichromaticPotential& pot, int n_planewaves = 64) {
  const auto b = exact_bloch(pot, {-pot.k}, n_planewaves);
  return b.E_plus[0] - b.E_minus[0];
}

/// Relative gap error and band-shape RMS (both bands, each measured from its
/// own center) in units of the reference width.
struct BandComparison {
  double gap_relative_error = 0.0;
  double shape_rms = 0.0;
};

inline BandComparison compare_bands(const BandStructure& test, const BandStructure& ref) {
  if (test.p != ref.p) throw ConfigError("compare_bands: momentum grids differ");
  const double c_test = test.center(), c_ref = ref.center();
  double sum = 0.0;
  for (std::size_t j = 0; j < ref.p.size(); ++j) {
    const double a = (test.E_minus[j] - c_test) - (ref.E_minus[j] - c_ref);
    const double b = (test.E_plus[j] - c_test) - (ref.E_plus[j] - c_ref);
    sum += a * a + b * b;
  }
  BandComparison out;
  out.gap_relative_error = std::abs(test.gap() - ref.gap()) / ref.gap();
  out.shape_rms = std::sqrt(sum / (2.0 * ref.p.size())) / ref.width();
  return out;
}

// ---------------------------------------------------------------------------
// Effective Dirac parameters E0 +- sqrt(M^2 + J^2 cos^2(l p))

struct EffectiveParams {
  double J = 0.0;
  double M = 0.0;
  double E0 = 0.0;
  double rms_residual = 0.0;
};

inline EffectiveParams effective_params(const BandStructure& band) {
  const std::size_t n = band.p.size();
  if (n < 3 || band.E_minus.size() != n || band.E_plus.size() != n)
    throw ConfigError("effective_params: need at least 3 momenta with both bands");
  const double l = band.spacing;
  // Start: E0 from the band means, (M^2, J^2) linear in the squared half splitting.
  double e0 = 0.0;
  for (std::size_t j = 0; j < n; ++j) e0 += 0.5 * (band.E_plus[j] + band.E_minus[j]);
  e0 /= static_cast<double>(n);
  Eigen::MatrixXd A(n, 2);
  Eigen::VectorXd y(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double c = std::cos(l * band.p[j]);
    const double h = 0.5 * (band.E_plus[j] - band.E_minus[j]);
    A(j, 0) = 1.0;
    A(j, 1) = c * c;
    y[j] = h * h;
  }
  Eigen::Vector2d sq = A.colPivHouseholderQr().solve(y);
  Eigen::Vector3d x(e0, std::sqrt(std::max(sq[0], 1e-30)), std::sqrt(std::max(sq[1], 1e-30)));

  auto residuals = [&](const Eigen::Vector3d& v, Eigen::VectorXd& r, Eigen::MatrixXd* jac) {
    r.resize(2 * n);
    if (jac) jac->resize(2 * n, 3);
    for (std::size_t j = 0; j < n; ++j) {
      const double c = std::cos(l * band.p[j]);
      const double s = std::sqrt(v[1] * v[1] + v[2] * v[2] * c * c);
      r[2 * j] = v[0] + s - band.E_plus[j];
      r[2 * j + 1] = v[0] - s - band.E_minus[j];
      if (jac) {
        const double dm = s > 0.0 ? v[1] / s : 0.0, dj = s > 0.0 ? v[2] * c * c / s : 0.0;
        jac->row(2 * j) << 1.0, dm, dj;
        jac->row(2 * j + 1) << 1.0, -dm, -dj;
      }
    }
  };
  Eigen::VectorXd r;
  Eigen::MatrixXd jac;
  residuals(x, r, &jac);
  double cost = r.squaredNorm();
  for (int it = 0; it < 100; ++it) {
    const Eigen::Vector3d step = jac.colPivHouseholderQr().solve(-r);
    double t = 1.0;
    Eigen::VectorXd rn;
    Eigen::Vector3d xn;
    for (; t > 1e-8; t *= 0.5) {
      xn = x + t * step;
      residuals(xn, rn, nullptr);
      if (rn.squaredNorm() <= cost) break;
    }
    if (t <= 1e-8) break;
    x = xn;
    const double old = cost;
    residuals(x, r, &jac);
    cost = r.squaredNorm();
    if (old - cost <= 1e-30 + 1e-15 * old && step.norm() * t < 1e-14 * (1.0 + x.norm())) break;
  }
  if (!x.allFinite()) {
    std::ostringstream msg;
    msg << "effective_params: fit diverged; residuals:";
    for (Eigen::Index i = 0; i < r.size(); ++i) msg << ' ' << r[i];
    throw NumericError(msg.str());
  }
  return {std::abs(x[2]), std::abs(x[1]), x[0], std::sqrt(cost / (2.0 * n))};
}

/// Parameters read off the semiclassical data at the energy where Phi = pi,
/// with Phi linearized as alpha (E - E0) over +-window of the band width.
struct WkbEstimate {
  double E0 = 0.0;
  double alpha = 0.0;
  double transmission = 0.0;
  double phase_diff = 0.0;
  double J = 0.0;
  double M = 0.0;
  double alpha_sensitivity = 0.0;  // relative change of alpha for half / double window
};

inline WkbEstimate wkb_estimate(const BichromaticPotential& pot, const BandStructure& band,
                                double window = 0.1) {
  pot.validate();
  const double lo = pot.dW + 1e-9 * pot.W0, hi = pot.barrier_top() * (1.0 - 1e-9);
  auto f = [&](double E) { return wkb_phases(E, pot).phase_sum - std::numbers::pi; };
  if (!(f(lo) < 0.0 && f(hi) > 0.0)) throw RegimeError("wkb_estimate: Phi = pi not reached below the barrier");
  WkbEstimate w;
  w.E0 = detail::bisect_root(f, lo, hi);
  auto slope = [&](double frac) {
    const double d = std::min(frac * band.width(), 0.99 * std::min(w.E0 - lo, hi - w.E0));
    return (f(w.E0 + d) - f(w.E0 - d)) / (2.0 * d);
  };
  w.alpha = slope(window);
  w.alpha_sensitivity = std::max(std::abs(slope(0.5 * window) / w.alpha - 1.0),
                                 std::abs(slope(2.0 * window) / w.alpha - 1.0));
  const auto d = wkb_phases(w.E0, pot);
  w.transmission = d.transmission;
  w.phase_diff = d.phase_diff;
  w.J = 2.0 * std::sqrt(d.transmission) / w.alpha;
  w.M = 2.0 * std::sqrt(1.0 - d.transmission) * std::abs(std::sin(0.5 * d.phase_diff)) / w.alpha;
  return w;
}

/// Closed-form deep-lattice estimates.
inline double hopping_estimate(double W0, double E_R) {
  return 4.0 / std::numbers::pi * std::sqrt(W0 * E_R) *
         std::exp(-0.25 * std::numbers::pi * std::sqrt(W0 / E_R));
}
inline double mass_estimate(double dW) { return 0.5 * dW; }
inline double oscillator_frequency(double W0, double E_R) { return 4.0 * std::sqrt(W0 * E_R); }

// ---------------------------------------------------------------------------
// Wannier orbitals

struct Orbital {
  std::vector<cplx> amplitude;  // on WannierResult::x
  double center = 0.0;
  double width = 0.0;        // RMS spread
  double decay_rate = 0.0;   // fitted slope of ln(site weight) per site, negative when decaying
  double decay_r2 = 0.0;
};

struct WannierResult {
  double M = 0.0;  // half gap at the zone edge
  int cells = 0;   // momenta per zone = doubled cells in the periodic box
  std::vector<double> x;
  Orbital psi;  // lower band, even site 0
  Orbital chi;  // upper band, odd site 1
  Orbital a;    // mixed, even site 0
  Orbital b;    // mixed, odd site 1
  double overlap_a = 0.0;      // |<a_0 | (chi_0 - psi_0)/sqrt 2>|
  double overlap_b = 0.0;      // |<b_1 | (chi_1 + psi_1)/sqrt 2>|
  double orthonormality = 0.0; // max deviation of the Gram matrix of {a_2n, b_2n+1}
};

namespace detail {

// Evaluates sum_p w_p sum_m c_{p,m} exp(i (p + 2 k m) x) / N on the grid.
inline std::vector<cplx> synthesize(const BlochStates& s, const std::vector<Eigen::VectorXcd>& coef,
                                    double k, double cell, const std::vector<double>& x) {
  const std::size_t np = s.p.size();
  const int half = s.half_width;
  std::vector<cplx> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    cplx acc = 0.0;
    for (std::size_t j = 0; j < np; ++j) {
      const cplx base = std::polar(1.0, (s.p[j] - 2.0 * k * half) * x[i]);
      const cplx step = std::polar(1.0, 2.0 * k * x[i]);
      cplx ph = base, sum = 0.0;
      for (int m = 0; m < 2 * half + 1; ++m) {
        sum += coef[j][m] * ph;
        ph *= step;
      }
      acc += sum;
    }
    out[i] = acc / (static_cast<double>(np) * std::sqrt(cell));
  }
  return out;
}

inline Orbital measure(std::vector<cplx> amp, const std::vector<double>& x, double dx, double site_x,
                       double spacing) {
  Orbital o;
  double w = 0.0, m1 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = std::norm(amp[i]) * dx;
    w += d;
    m1 += d * x[i];
  }
  o.center = m1 / w;
  double m2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) m2 += std::norm(amp[i]) * dx * (x[i] - o.center) * (x[i] - o.center);
  o.width = std::sqrt(m2 / w);
  // weight per site cell at distance j sites from the home site, both sides pooled
  const int reach = static_cast<int>(std::floor((x.back() - x.front()) / (2.0 * spacing))) - 1;
  std::vector<double> site(reach + 1, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const int j = static_cast<int>(std::lround(std::abs(x[i] - site_x) / spacing));
    if (j <= reach) site[j] += std::norm(amp[i]) * dx;
  }
  std::vector<double> js, ls;
  const double floor = site[0] * 1e-24;
  for (int j = 1; j <= reach; ++j) {
    if (site[j] <= floor) break;
    js.push_back(j);
    ls.push_back(std::log(site[j]));
  }
  if (js.size() >= 3) {
    const double n = static_cast<double>(js.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < js.size(); ++i) {
      sx += js[i]; sy += ls[i]; sxx += js[i] * js[i]; sxy += js[i] * ls[i]; syy += ls[i] * ls[i];
    }
    const double cov = sxy - sx * sy / n, vx = sxx - sx * sx / n, vy = syy - sy * sy / n;
    o.decay_rate = cov / vx;
    o.decay_r2 = vy > 0.0 ? cov * cov / (vx * vy) : 1.0;
  }
  o.amplitude = std::move(amp);
  return o;
}

}  // namespace detail

/// Single-band and mixed Wannier orbitals from the two lowest Bloch bands on
/// `cells` momenta. Gauge: lower-band Bloch functions real positive at the
/// lower minimum, upper-band ones at the upper minimum.
inline WannierResult compute_wannier(const BichromaticPotential& pot, int cells = 64,
                                     int n_planewaves = 64, int samples_per_site = 16,
                                     unsigned jobs = 1) {
  pot.validate();
  if (!(pot.dW > 0.0)) throw RegimeError("compute_wannier: needs dW > 0 to split the band");
  if (cells < 8 || samples_per_site < 4) throw ConfigError("compute_wannier: grid too coarse");
  const double l = pot.spacing(), k = pot.k, cell = 2.0 * l;
  const auto s = exact_bloch_states(pot, zone_grid(pot, cells), 2, n_planewaves, jobs, true);
  const int half = s.half_width, nm = 2 * half + 1;
  const std::size_t np = s.p.size();

  // Bloch amplitude at x from coefficients (without the 1/sqrt(cell) factor).
  auto value_at = [&](const Eigen::VectorXd& c, double p, double x) {
    cplx sum = 0.0;
    for (int m = 0; m < nm; ++m) sum += c[m] * std::polar(1.0, (p + 2.0 * k * (m - half)) * x);
    return sum;
  };

  WannierResult out;
  out.cells = cells;
  std::vector<double> split(np);
  for (std::size_t j = 0; j < np; ++j)
    split[j] = 0.5 * (s.energies(static_cast<Eigen::Index>(j), 1) - s.energies(static_cast<Eigen::Index>(j), 0));
  out.M = *std::min_element(split.begin(), split.end());

  std::vector<Eigen::VectorXcd> psi(np), chi(np), a(np), b(np);
  for (std::size_t j = 0; j < np; ++j) {
    const double p = s.p[j];
    const Eigen::VectorXd lower = s.vectors[j].col(0), upper = s.vectors[j].col(1);
    const cplx v0 = value_at(lower, p, 0.0), v1 = value_at(upper, p, l);
    const double scale = lower.cwiseAbs().maxCoeff() + upper.cwiseAbs().maxCoeff();
    if (std::abs(v0) < 1e-8 * scale || std::abs(v1) < 1e-8 * scale)
      throw NumericError("compute_wannier: Bloch function vanishes at the gauge site, p = " +
                         std::to_string(p));
    psi[j] = lower.cast<cplx>() * (std::abs(v0) / v0);
    // upper band carries the odd-site Bloch phase exp(i p l)
    chi[j] = upper.cast<cplx>() * (std::abs(v1) / v1) * std::polar(1.0, p * l);
    const double E = split[j], M = out.M;
    const double cp = std::sqrt((E + M) / (2.0 * E)), cm = std::sqrt(std::max(E - M, 0.0) / (2.0 * E));
    a[j] = cp * psi[j] - cm * chi[j];
    b[j] = cm * psi[j] + cp * chi[j];
  }

  // Gram matrix of a_{2n}, b_{2n+1}: <w_s|w_t> = (1/N) sum_p exp(i p (s - t) l) <c_p|c'_p>.
  {
    Eigen::MatrixXcd g(2 * cells, 2 * cells);
    auto coef = [&](int idx, std::size_t j) -> const Eigen::VectorXcd& { return idx % 2 == 0 ? a[j] : b[j]; };
    for (int s1 = 0; s1 < 2 * cells; ++s1)
      for (int s2 = 0; s2 < 2 * cells; ++s2) {
        cplx acc = 0.0;
        for (std::size_t j = 0; j < np; ++j)
          acc += std::polar(1.0, s.p[j] * (s1 - s2) * l) * coef(s1, j).dot(coef(s2, j));
        g(s1, s2) = acc / static_cast<double>(np);
      }
    out.orthonormality = (g - Eigen::MatrixXcd::Identity(2 * cells, 2 * cells)).cwiseAbs().maxCoeff();
  }
  {
    cplx oa = 0.0, ob = 0.0;
    for (std::size_t j = 0; j < np; ++j) {
      oa += a[j].dot((chi[j] - psi[j]) / std::sqrt(2.0));
      ob += b[j].dot((chi[j] + psi[j]) / std::sqrt(2.0));
    }
    out.overlap_a = std::abs(oa) / static_cast<double>(np);
    out.overlap_b = std::abs(ob) / static_cast<double>(np);
  }

  // Real-space samples over one box period centred between the two home sites.
  const int per_box = 2 * cells * samples_per_site;
  const double dx = cells * cell / per_box;
  out.x.resize(per_box);
  for (int i = 0; i < per_box; ++i) out.x[i] = 0.5 * l - 0.5 * cells * cell + i * dx;
  auto shifted = [&](const std::vector<Eigen::VectorXcd>& c, int site) {
    std::vector<Eigen::VectorXcd> r(np);
    for (std::size_t j = 0; j < np; ++j) r[j] = c[j] * std::polar(1.0, -s.p[j] * site * l);
    return r;
  };
  std::vector<std::vector<Eigen::VectorXcd>> sets = {shifted(psi, 0), shifted(chi, 1), shifted(a, 0),
                                                     shifted(b, 1)};
  const auto amps = parallel_map<std::vector<cplx>>(4, jobs, [&](std::size_t i) {
    return detail::synthesize(s, sets[i], k, cell, out.x);
  });
  out.psi = detail::measure(amps[0], out.x, dx, 0.0, l);
  out.chi = detail::measure(amps[1], out.x, dx, l, l);
  out.a = detail::measure(amps[2], out.x, dx, 0.0, l);
  out.b = detail::measure(amps[3], out.x, dx, l, l);
  return out;
}

// ---------------------------------------------------------------------------
// Scale hierarchy omega_osc >> J >> M >> T

struct PhysicalParams {
  double E_R = 7.0;
  double W0 = 10.0;
  double dW = 1.0;
  double temperature = 0.1;
  double ratio = 3.0;  // threshold for ">>"
};

struct HierarchyItem {
  std::string relation;
  double larger = 0.0;
  double smaller = 0.0;
  double ratio = 0.0;
  bool pass = false;
};

struct HierarchyReport {
  double J = 0.0;
  double M = 0.0;
  double omega_osc = 0.0;
  std::vector<HierarchyItem> items;
  bool all_pass() const {
    return std::all_of(items.begin(), items.end(), [](const HierarchyItem& i) { return i.pass; });
  }
};

inline HierarchyReport check_hierarchy(const PhysicalParams& phys) {
  if (!(phys.E_R > 0.0 && phys.W0 > 0.0 && phys.dW > 0.0 && phys.temperature > 0.0 && phys.ratio > 0.0))
    throw ConfigError("check_hierarchy: all scales must be positive");
  HierarchyReport r;
  r.J = hopping_estimate(phys.W0, phys.E_R);
  r.M = mass_estimate(phys.dW);
  r.omega_osc = oscillator_frequency(phys.W0, phys.E_R);
  auto add = [&](std::string rel, double big, double small) {
    r.items.push_back({std::move(rel), big, small, big / small, big / small >= phys.ratio});
  };
  add("omega_osc >> J", r.omega_osc, r.J);
  add("J >> M", r.J, r.M);
  add("M >> T", r.M, phys.temperature);
  return r;
}

}  // namespace latqed::bands
