#pragma once

// Eigen-decomposition of the staggered chain, in-gap bound states and their
// evolution with the depth of an attractive potential.

#include <Eigen/Dense>
#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "latqed/chain.hpp"
#include "latqed/error.hpp"
#include "latqed/parallel.hpp"

namespace latqed::spectral {

/// Eigenpairs in ascending order; column k of `eigenvectors` belongs to
/// eigenvalue k.
struct SpectrumResult {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;

  int count() const { return static_cast<int>(eigenvalues.size()); }
};

namespace detail {

inline SpectrumResult stevr(const TridiagonalOperator& h, char jobz, char range, double lo,
                            double hi, int il, int iu) {
  const lapack_int n = h.size();
  if (n < 1) throw ConfigError("eigensolver: empty operator");
  std::vector<double> d = h.diagonal;
  std::vector<double> e(n, 0.0);
  std::copy(h.off_diagonal.begin(), h.off_diagonal.end(), e.begin());
  lapack_int found = 0;
  std::vector<double> w(n);
  const bool vectors = jobz == 'V';
  const lapack_int cols = range == 'A' ? n : (range == 'I' ? iu - il + 1 : n);
  std::vector<double> z(vectors ? static_cast<std::size_t>(n) * cols : 1);
  std::vector<lapack_int> support(2 * static_cast<std::size_t>(std::max<lapack_int>(cols, 1)));
  const lapack_int info =
      LAPACKE_dstevr(LAPACK_COL_MAJOR, jobz, range, n, d.data(), e.data(), lo, hi, il, iu, 0.0,
                     &found, w.data(), z.data(), vectors ? n : 1, support.data());
  if (info != 0)
    throw NumericError("tridiagonal eigensolver (dstevr) failed, info = " + std::to_string(info) +
                       ", n = " + std::to_string(n));
  SpectrumResult out;
  out.eigenvalues = Eigen::Map<Eigen::VectorXd>(w.data(), found);
  if (vectors) out.eigenvectors = Eigen::Map<Eigen::MatrixXd>(z.data(), n, found);
  return out;
}

}  // namespace detail

/// Full eigen-decomposition.
inline SpectrumResult solve_spectrum(const TridiagonalOperator& h) {
  if (h.size() < 2) throw ConfigError("solve_spectrum: need N >= 2");
  return detail::stevr(h, 'V', 'A', 0.0, 0.0, 0, 0);
}

/// Eigenpairs with eigenvalues in the half-open interval (lo, hi].
inline SpectrumResult solve_window(const TridiagonalOperator& h, double lo, double hi) {
  if (!(lo < hi)) return {};
  return detail::stevr(h, 'V', 'V', lo, hi, 0, 0);
}

/// Eigenvalue number `index` (0-based, ascending).
inline double eigenvalue_at(const TridiagonalOperator& h, int index) {
  if (index < 0 || index >= h.size()) throw ConfigError("eigenvalue_at: index out of range");
  const auto r = detail::stevr(h, 'N', 'I', 0.0, 0.0, index + 1, index + 1);
  if (r.count() != 1) throw NumericError("eigenvalue_at: eigensolver returned no value");
  return r.eigenvalues[0];
}

inline Eigen::VectorXd eigenvalues(const TridiagonalOperator& h) {
  return detail::stevr(h, 'N', 'A', 0.0, 0.0, 0, 0).eigenvalues;
}

/// (sum |v|^2)^2 / sum |v|^4: number of sites the state effectively covers.
template <typename Vec>
double participation_ratio(const Vec& v) {
  double s2 = 0.0, s4 = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double p = std::norm(v[i]);
    s2 += p;
    s4 += p * p;
  }
  return s4 > 0.0 ? s2 * s2 / s4 : 0.0;
}

/// Sign changes among entries above `relative_floor` times the peak.
inline int count_sign_changes(std::span<const double> v, double relative_floor = 1e-3) {
  double peak = 0.0;
  for (double x : v) peak = std::max(peak, std::abs(x));
  int changes = 0;
  int last_sign = 0;
  for (double x : v) {
    if (std::abs(x) <= relative_floor * peak) continue;
    const int s = x > 0.0 ? 1 : -1;
    if (last_sign != 0 && s != last_sign) ++changes;
    last_sign = s;
  }
  return changes;
}

struct BoundState {
  double energy = 0.0;
  std::vector<double> psi1;  // even sites, one entry per two-site cell
  std::vector<double> psi2;  // odd sites
  std::vector<double> cell_position;
  double localization_length = 0.0;
  double participation_ratio = 0.0;
  bool finite_size = false;  // tail at the chain edges above 1e-6 of the peak
};

/// Chain amplitudes -> discrete spinor (Psi^1_n, Psi^2_n). Undoes the
/// alternating local phases that turn the Dirac hopping into -J/2.
inline void split_spinor(const Eigen::VectorXd& c, std::vector<double>& psi1,
                         std::vector<double>& psi2) {
  const int cells = static_cast<int>(c.size()) / 2;
  psi1.resize(cells);
  psi2.resize(cells);
  for (int j = 0; j < cells; ++j) {
    const double phase = (j % 2 == 0) ? 1.0 : -1.0;
    psi1[j] = phase * c[2 * j];
    psi2[j] = -phase * c[2 * j + 1];
  }
}

/// Decay length of the amplitude from a log-linear fit of the cell density
/// tails; falls back to the RMS width when the tails are too short.
inline double localization_length(const Eigen::VectorXd& c, const ChainModel& chain) {
  const int cells = static_cast<int>(c.size()) / 2;
  std::vector<double> rho(cells), x(cells);
  int peak = 0;
  for (int j = 0; j < cells; ++j) {
    rho[j] = c[2 * j] * c[2 * j] + c[2 * j + 1] * c[2 * j + 1];
    x[j] = chain.position(2 * j);
    if (rho[j] > rho[peak]) peak = j;
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int used = 0;
  for (int j = 0; j < cells; ++j) {
    const double rel = rho[j] / rho[peak];
    if (rel > 1e-2 || rel < 1e-12) continue;
    const double dx = std::abs(x[j] - x[peak]);
    const double y = std::log(rel);
    sx += dx;
    sy += y;
    sxx += dx * dx;
    sxy += dx * y;
    ++used;
  }
  if (used >= 4) {
    const double slope = (used * sxy - sx * sy) / (used * sxx - sx * sx);
    if (slope < 0.0) return -2.0 / slope;
  }
  double m1 = 0, m2 = 0, norm = 0;
  for (int j = 0; j < cells; ++j) {
    norm += rho[j];
    m1 += rho[j] * x[j];
    m2 += rho[j] * x[j] * x[j];
  }
  m1 /= norm;
  return std::sqrt(std::max(m2 / norm - m1 * m1, 0.0));
}

inline BoundState make_bound_state(double energy, const Eigen::VectorXd& c,
                                   const ChainModel& chain) {
  BoundState b;
  b.energy = energy;
  split_spinor(c, b.psi1, b.psi2);
  const int cells = static_cast<int>(b.psi1.size());
  b.cell_position.resize(cells);
  for (int j = 0; j < cells; ++j) b.cell_position[j] = chain.position(2 * j);
  b.participation_ratio = participation_ratio(c);
  b.localization_length = localization_length(c, chain);
  const double peak = c.cwiseAbs().maxCoeff();
  const int n = static_cast<int>(c.size());
  const double edge = std::max({std::abs(c[0]), std::abs(c[1]), std::abs(c[n - 2]),
                                std::abs(c[n - 1])});
  b.finite_size = edge > 1e-6 * peak;
  return b;
}

/// Localization test used for in-gap classification.
inline bool is_localized(const Eigen::VectorXd& c) {
  return participation_ratio(c) < static_cast<double>(c.size()) / 4.0;
}

/// Eigenpairs with |E| < M - edge_margin that pass the localization test.
inline std::vector<BoundState> find_gap_states(const SpectrumResult& spectrum,
                                               const ChainModel& chain,
                                               double edge_margin = 1e-6) {
  std::vector<BoundState> out;
  const double limit = chain.mass - edge_margin;
  for (int k = 0; k < spectrum.count(); ++k) {
    const double e = spectrum.eigenvalues[k];
    if (std::abs(e) >= limit) continue;
    const Eigen::VectorXd v = spectrum.eigenvectors.col(k);
    if (!is_localized(v)) continue;
    out.push_back(make_bound_state(e, v, chain));
  }
  return out;
}

/// Gap window solve followed by bound-state extraction.
inline std::vector<BoundState> find_gap_states(const TridiagonalOperator& h,
                                               const ChainModel& chain,
                                               double edge_margin = 1e-6) {
  const double limit = chain.mass - edge_margin;
  return find_gap_states(solve_window(h, -limit, limit), chain, edge_margin);
}

// ---------------------------------------------------------------------------
// Woods-Saxon depth scans

struct CriticalityTrace {
  std::vector<double> W_values;
  std::vector<double> E0_values;  // NaN once the state has left the gap
  std::vector<bool> localized;
  std::optional<double> W_cr;     // midpoint of the grid interval where it left
};

inline TridiagonalOperator woods_saxon_hamiltonian(const ChainModel& chain, double depth,
                                                   double steepness, double half_width) {
  const auto phi = sample_potential(WoodsSaxon{depth, steepness, half_width}, chain);
  return build_hamiltonian(chain, phi);
}

namespace detail {

struct TrackPoint {
  double energy;
  Eigen::VectorXd vector;
};

// Gap candidate with maximal overlap to `previous`; nullopt when no candidate
// overlaps by at least one half.
inline std::optional<TrackPoint> continue_track(const SpectrumResult& window,
                                                const Eigen::VectorXd& previous) {
  int best = -1;
  double best_overlap = 0.5;
  for (int k = 0; k < window.count(); ++k) {
    const double o = std::abs(window.eigenvectors.col(k).dot(previous));
    if (o > best_overlap) {
      best_overlap = o;
      best = k;
    }
  }
  if (best < 0) return std::nullopt;
  Eigen::VectorXd v = window.eigenvectors.col(best);
  if (v.dot(previous) < 0.0) v = -v;
  return TrackPoint{window.eigenvalues[best], std::move(v)};
}

}  // namespace detail

/// Follows the lowest bound state E0(W) across an ascending depth grid by
/// maximal wavefunction overlap, refining between grid points when a step is
/// ambiguous or moves E0 by more than 0.1 M.
inline CriticalityTrace trace_bound_state(const ChainModel& chain, double steepness,
                                          double half_width, const std::vector<double>& W_grid,
                                          double edge_margin = 1e-6, unsigned jobs = 1) {
  chain.validate();
  for (std::size_t i = 1; i < W_grid.size(); ++i)
    if (!(W_grid[i] > W_grid[i - 1])) throw ConfigError("trace_bound_state: grid must ascend");
  for (double w : W_grid)
    if (!(w >= 0.0) || !std::isfinite(w))
      throw ConfigError("trace_bound_state: depths must be finite and >= 0");

  const double M = chain.mass;
  const double lo = -M + edge_margin, hi = M - edge_margin;
  auto window_at = [&](double W) {
    return solve_window(woods_saxon_hamiltonian(chain, W, steepness, half_width), lo, hi);
  };
  const auto windows = parallel_map<SpectrumResult>(W_grid.size(), jobs,
                                                    [&](std::size_t i) { return window_at(W_grid[i]); });

  CriticalityTrace trace;
  trace.W_values = W_grid;
  trace.E0_values.assign(W_grid.size(), std::numeric_limits<double>::quiet_NaN());
  trace.localized.assign(W_grid.size(), false);

  std::optional<detail::TrackPoint> current;
  double current_W = 0.0;
  bool crossed = false;

  // Recursive refinement of (W_from, W_to]; returns nullopt if the state
  // leaves the gap inside the interval.
  auto advance = [&](auto&& self, const detail::TrackPoint& from, double W_from, double W_to,
                     const SpectrumResult& at_to, int depth) -> std::optional<detail::TrackPoint> {
    auto next = detail::continue_track(at_to, from.vector);
    if (next && std::abs(next->energy - from.energy) <= 0.1 * M) return next;
    if (depth < 16) {
      const double mid = 0.5 * (W_from + W_to);
      const auto mid_window = window_at(mid);
      auto at_mid = self(self, from, W_from, mid, mid_window, depth + 1);
      if (!at_mid) return std::nullopt;
      return self(self, *at_mid, mid, W_to, at_to, depth + 1);
    }
    if (next) return next;
    if (from.energy < -M + 0.1 * M) return std::nullopt;
    throw NumericError("trace_bound_state: lost track of the bound state between W = " +
                       std::to_string(W_from) + " and W = " + std::to_string(W_to) +
                       " at E0 = " + std::to_string(from.energy));
  };

  for (std::size_t i = 0; i < W_grid.size(); ++i) {
    const double W = W_grid[i];
    const auto& win = windows[i];
    if (crossed) continue;
    if (!current) {
      if (W > 0.0 && win.count() > 0) {
        current = detail::TrackPoint{win.eigenvalues[0], win.eigenvectors.col(0)};
        current_W = W;
      }
    } else {
      auto next = advance(advance, *current, current_W, W, win, 0);
      if (!next) {
        crossed = true;
        trace.W_cr = 0.5 * (W_grid[i - 1] + W);
        current.reset();
        continue;
      }
      current = std::move(next);
      current_W = W;
    }
    if (current) {
      trace.E0_values[i] = current->energy;
      trace.localized[i] = is_localized(current->vector);
    }
  }
  return trace;
}

/// Bisection on the strength s of `unit_profile` (attractive, <= 0 everywhere)
/// for the point where eigenvalue N/2 - the lowest state detached from the
/// upper band - reaches -M + edge_margin. Attractive profiles make every
/// eigenvalue non-increasing in s, so the bracket is monotone.
inline double find_critical_strength(const ChainModel& chain, std::span<const double> unit_profile,
                                     double s_lo, double s_hi, double tol = 1e-4,
                                     double edge_margin = 1e-6) {
  chain.validate();
  if (static_cast<int>(unit_profile.size()) != chain.num_sites)
    throw ConfigError("find_critical_strength: profile length mismatch");
  for (double v : unit_profile)
    if (v > 0.0) throw ConfigError("find_critical_strength: profile must be attractive (<= 0)");
  if (!(s_lo < s_hi) || !(tol > 0.0)) throw ConfigError("find_critical_strength: bad bracket");

  const int index = chain.num_sites / 2;
  const double target = -chain.mass + edge_margin;
  std::vector<double> phi(unit_profile.size());
  auto above = [&](double s) {
    for (std::size_t n = 0; n < phi.size(); ++n) phi[n] = s * unit_profile[n];
    return eigenvalue_at(build_hamiltonian(chain, phi), index) > target;
  };
  if (!above(s_lo))
    throw RegimeError("find_critical_strength: already supercritical at the lower bracket s = " +
                      std::to_string(s_lo));
  if (above(s_hi))
    throw RegimeError("supercriticality not reached: lowest bound state stays above -M + " +
                      std::to_string(edge_margin) + " up to strength " + std::to_string(s_hi));
  while (s_hi - s_lo >= tol) {
    const double mid = 0.5 * (s_lo + s_hi);
    (above(mid) ? s_lo : s_hi) = mid;
  }
  return 0.5 * (s_lo + s_hi);
}

/// Critical Woods-Saxon depth W_cr for fixed steepness and half-width.
inline double find_critical_depth(const ChainModel& chain, double steepness, double half_width,
                                  double W_max = 10.0, double tol = 1e-4,
                                  double edge_margin = 1e-6) {
  const auto unit = sample_potential(WoodsSaxon{1.0, steepness, half_width}, chain);
  return find_critical_strength(chain, unit, 0.0, W_max, tol, edge_margin);
}

// ---------------------------------------------------------------------------
// Parabolic approach to the band edges, E(W) ~ +-M + C (W - W_edge)^2

struct EdgeFit {
  double curvature = 0.0;  // C
  double vertex = 0.0;     // W at which E touches the edge
  double rms_residual = 0.0;
  int points = 0;
};

struct ParabolicFit {
  EdgeFit plus;   // C < 0: E falls away from +M
  EdgeFit minus;  // C > 0: E approaches -M from above
};

namespace detail {

// Least squares for E - edge = C (W - W0)^2. A free quadratic supplies the
// starting point, Gauss-Newton then pins the vertex to the edge.
inline EdgeFit fit_edge(const std::vector<double>& W, const std::vector<double>& E, double edge) {
  const int n = static_cast<int>(W.size());
  Eigen::MatrixXd A(n, 3);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    A(i, 0) = 1.0;
    A(i, 1) = W[i];
    A(i, 2) = W[i] * W[i];
    y[i] = E[i] - edge;
  }
  const Eigen::Vector3d q = A.colPivHouseholderQr().solve(y);
  double C = q[2];
  double W0 = q[2] != 0.0 ? -q[1] / (2.0 * q[2]) : W[0];
  for (int iter = 0; iter < 50; ++iter) {
    Eigen::Matrix2d jtj = Eigen::Matrix2d::Zero();
    Eigen::Vector2d jtr = Eigen::Vector2d::Zero();
    for (int i = 0; i < n; ++i) {
      const double d = W[i] - W0;
      const double r = edge + C * d * d - E[i];
      const Eigen::Vector2d g(d * d, -2.0 * C * d);
      jtj += g * g.transpose();
      jtr += g * r;
    }
    const Eigen::Vector2d step = jtj.ldlt().solve(jtr);
    if (!step.allFinite()) break;
    C -= step[0];
    W0 -= step[1];
    if (step.norm() < 1e-14 * (1.0 + std::abs(W0))) break;
  }
  double ss = 0.0;
  for (int i = 0; i < n; ++i) {
    const double d = W[i] - W0;
    const double r = edge + C * d * d - E[i];
    ss += r * r;
  }
  return EdgeFit{C, W0, std::sqrt(ss / n), n};
}

}  // namespace detail

/// Fits both edges using the trace points within window*M of +M and -M.
inline ParabolicFit fit_parabolic_edges(const CriticalityTrace& trace, double mass,
                                        double window = 0.05) {
  std::vector<double> wu, eu, wl, el;
  for (std::size_t i = 0; i < trace.W_values.size(); ++i) {
    const double e = trace.E0_values[i];
    if (!std::isfinite(e)) continue;
    if (mass - e <= window * mass) {
      wu.push_back(trace.W_values[i]);
      eu.push_back(e);
    } else if (e + mass <= window * mass) {
      wl.push_back(trace.W_values[i]);
      el.push_back(e);
    }
  }
  if (wu.size() < 5 || wl.size() < 5)
    throw NumericError("fit_parabolic_edges: need >= 5 points near each edge, have " +
                       std::to_string(wu.size()) + " (upper) and " + std::to_string(wl.size()) +
                       " (lower)");
  return ParabolicFit{detail::fit_edge(wu, eu, mass), detail::fit_edge(wl, el, -mass)};
}

}  // namespace latqed::spectral
