#pragma once

// Closed-form and semi-analytic reference results: the continuum Woods-Saxon
// bound-state condition, the continuum and lattice delta potentials.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "latqed/chain.hpp"
#include "latqed/error.hpp"
#include "latqed/parallel.hpp"

namespace latqed::oracles {

using cplx = std::complex<double>;

// ---------------------------------------------------------------------------
// Gamma function of a complex argument (Lanczos, g = 7, nine terms)

namespace detail {

inline constexpr double lanczos_g = 7.0;
inline constexpr std::array<double, 9> lanczos_coef = {
    0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
    771.32342877765313,   -176.61502916214059,   12.507343278686905,
    -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};

inline bool is_pole(cplx z) {
  return z.imag() == 0.0 && z.real() <= 0.0 && z.real() == std::round(z.real());
}

}  // namespace detail

/// log Gamma(z); the imaginary part is continuous for Re z >= 1/2 and
/// correct modulo 2 pi elsewhere.
inline cplx log_gamma(cplx z) {
  using namespace std::complex_literals;
  if (detail::is_pole(z))
    throw NumericError("gamma: pole at z = " + std::to_string(z.real()));
  if (z.real() < 0.5) {
    // Gamma(z) Gamma(1 - z) = pi / sin(pi z)
    return std::log(std::numbers::pi) - std::log(std::sin(std::numbers::pi * z)) -
           log_gamma(1.0 - z);
  }
  z -= 1.0;
  cplx x = detail::lanczos_coef[0];
  for (int i = 1; i < 9; ++i) x += detail::lanczos_coef[i] / (z + static_cast<double>(i));
  const cplx t = z + detail::lanczos_g + 0.5;
  return 0.5 * std::log(2.0 * std::numbers::pi) + (z + 0.5) * std::log(t) - t + std::log(x);
}

inline cplx complex_gamma(cplx z) {
  if (detail::is_pole(z))
    throw NumericError("gamma: pole at z = " + std::to_string(z.real()));
  if (z.real() < 0.5)
    return std::numbers::pi / (std::sin(std::numbers::pi * z) * complex_gamma(1.0 - z));
  return std::exp(log_gamma(z));
}

// ---------------------------------------------------------------------------
// Continuum Woods-Saxon well

struct WsParameters {
  double W = 0.0;  // depth
  double a = 0.0;  // steepness
  double L = 0.0;  // half-width
  double M = 1.0;

  void validate() const {
    if (!(a > 0.0) || !(L > 0.0)) throw ConfigError("woods-saxon: a and L must be > 0");
    if (!(M > 0.0)) throw ConfigError("woods-saxon oracle: M must be > 0");
    if (!std::isfinite(W)) throw ConfigError("woods-saxon: W must be finite");
  }

  /// Lower end of the energy range where the well can hold a state.
  double scan_floor() const { return std::max(-M, M - W); }
};

/// Residual of the bound-state condition for M - W < E < M.
///
/// Above the floor g and lambda are purely imaginary, so the two sides of
/// the condition are unimodular and only their phases differ. The residual
/// is sin of that phase difference,
///   sin(2 arg B(-2g, g + s - lambda) - 2 |g| a L - arg((s - g)^2 - lambda^2)),
/// with arg B from log-Gamma. It vanishes exactly at the roots.
inline double ws_residual(double E, const WsParameters& p) {
  if (!(E > -p.M && E < p.M))
    throw ConfigError("ws_residual: E = " + std::to_string(E) + " outside the gap");
  const double k2 = (E + p.W) * (E + p.W) - p.M * p.M;
  if (!(k2 > 0.0) || E + p.W <= 0.0)
    throw ConfigError("ws_residual: E = " + std::to_string(E) + " below M - W");
  const double s = std::sqrt(p.M * p.M - E * E) / p.a;
  const double gamma = std::sqrt(k2) / p.a;
  const cplx g(0.0, gamma);
  const cplx lambda(0.0, p.W / p.a);
  const double arg_beta =
      (log_gamma(-2.0 * g) + log_gamma(g + s - lambda) - log_gamma(-g + s - lambda)).imag();
  const double phase = 2.0 * arg_beta - 2.0 * gamma * p.a * p.L -
                       std::arg((s - g) * (s - g) - lambda * lambda);
  return std::sin(phase);
}

/// Roots of ws_residual on (max(-M, M - W), M): sign changes on a grid of
/// `grid_points`, each bisected to `tol`.
inline std::vector<double> solve_ws_bound_states(const WsParameters& p, int grid_points = 10000,
                                                 double tol = 1e-10, unsigned jobs = 1) {
  p.validate();
  if (!(p.W > 0.0)) return {};
  const double lo = p.scan_floor(), hi = p.M;
  const double h = (hi - lo) / grid_points;
  auto eval = [&](double E) {
    try {
      return ws_residual(E, p);
    } catch (const NumericError&) {
      return ws_residual(E + 1e-12, p);
    }
  };
  // Interior points only: both ends are singular for the residual.
  const auto values = parallel_map<double>(grid_points - 1, jobs,
                                           [&](std::size_t i) { return eval(lo + (i + 1) * h); });
  std::vector<double> roots;
  for (int i = 0; i + 1 < grid_points - 1; ++i) {
    double fa = values[i], fb = values[i + 1];
    if (fa == 0.0) {
      roots.push_back(lo + (i + 1) * h);
      continue;
    }
    if (fa * fb > 0.0) continue;
    double a = lo + (i + 1) * h, b = lo + (i + 2) * h;
    while (b - a > tol) {
      const double m = 0.5 * (a + b);
      const double fm = eval(m);
      if ((fm < 0.0) == (fa < 0.0)) {
        a = m;
        fa = fm;
      } else {
        b = m;
      }
    }
    roots.push_back(0.5 * (a + b));
  }
  return roots;
}

// ---------------------------------------------------------------------------
// Delta potentials

/// Continuum delta well phi delta(x): lambda = M (1 - phi^2) / (1 + phi^2).
inline double continuum_delta_energy(double phi, double M) {
  return M * (1.0 - phi * phi) / (1.0 + phi * phi);
}

enum class DeltaBranch { FromUpperEdge, FromLowerEdge };

struct DeltaLatticeSolution {
  double lambda = 0.0;
  DeltaBranch branch = DeltaBranch::FromUpperEdge;
  double phi = 0.0;
  double M = 0.0;
  double J = 0.0;
  std::vector<double> p_grid;
  std::vector<double> A_of_p;
  std::vector<double> B_of_p;
  double Abar = 0.0;
  double Bbar = 0.0;
};

namespace detail {

// Real roots of lambda^3 - M lambda^2 - (M^2 + J^2 + phi^2) lambda
// + M (M^2 + J^2 - phi^2) = 0, the expanded form of
// (M - lambda)(M^2 + J^2 - lambda^2) = phi^2 (M + lambda).
inline std::vector<double> delta_cubic_roots(double phi, double M, double J) {
  const double a2 = -M;
  const double a1 = -(M * M + J * J + phi * phi);
  const double a0 = M * (M * M + J * J - phi * phi);
  // lambda = t - a2/3 gives t^3 + p t + q = 0
  const double p = a1 - a2 * a2 / 3.0;
  const double q = 2.0 * a2 * a2 * a2 / 27.0 - a2 * a1 / 3.0 + a0;
  const double shift = -a2 / 3.0;
  std::vector<double> roots;
  const double disc = q * q / 4.0 + p * p * p / 27.0;
  if (p < 0.0 && disc <= 0.0) {
    const double r = 2.0 * std::sqrt(-p / 3.0);
    const double arg = std::clamp(3.0 * q / (p * r), -1.0, 1.0);
    const double theta = std::acos(arg) / 3.0;
    for (int k = 0; k < 3; ++k)
      roots.push_back(r * std::cos(theta - 2.0 * std::numbers::pi * k / 3.0) + shift);
  } else {
    const double sq = std::sqrt(std::max(disc, 0.0));
    roots.push_back(std::cbrt(-q / 2.0 + sq) + std::cbrt(-q / 2.0 - sq) + shift);
  }
  // One Newton polish per root against the unexpanded form.
  for (double& x : roots) {
    const double f = (M - x) * (M * M + J * J - x * x) - phi * phi * (M + x);
    const double df = -(M * M + J * J - x * x) - 2.0 * x * (M - x) - phi * phi;
    if (df != 0.0) x -= f / df;
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

}  // namespace detail

/// Bound-state energy of a single-site coupling phi on the infinite chain with
/// hopping J. For phi <= 0 (well on a +M site) the state detaches from +M and
/// is followed by continuity in phi with steps of at most 0.01 max(M, J). For
/// phi > 0 the mirrored branch lambda -> -lambda is returned; on the chain it
/// belongs to a repulsive site on a -M site (a repulsive +M site binds
/// nothing).
inline DeltaLatticeSolution lattice_delta_energy(double phi, double M, double J) {
  if (!std::isfinite(phi) || !(M > 0.0) || !(J > 0.0))
    throw ConfigError("lattice_delta_energy: need finite phi, M > 0 and J > 0");
  DeltaLatticeSolution out;
  out.phi = phi;
  out.M = M;
  out.J = J;
  out.branch = phi > 0.0 ? DeltaBranch::FromLowerEdge : DeltaBranch::FromUpperEdge;
  const double target = std::abs(phi);
  const double max_step = 0.01 * std::max(M, J);
  const int steps = std::max(1, static_cast<int>(std::ceil(target / max_step)));
  double lambda = M;
  for (int i = 1; i <= steps && target > 0.0; ++i) {
    const double f = target * i / steps;
    const auto roots = detail::delta_cubic_roots(f, M, J);
    lambda = *std::min_element(roots.begin(), roots.end(), [&](double x, double y) {
      return std::abs(x - lambda) < std::abs(y - lambda);
    });
  }
  if (target > 0.0 && !(std::abs(lambda) < M))
    throw NumericError("lattice_delta_energy: tracked root left the gap");
  out.lambda = out.branch == DeltaBranch::FromLowerEdge ? -lambda : lambda;
  return out;
}

/// Single site of strength phi / l on a chain with J = 1/l corresponds to a
/// coupling phi / l in the lattice equation.
inline DeltaLatticeSolution chain_delta_energy(double phi, double M, double spacing) {
  return lattice_delta_energy(phi / spacing, M, 1.0 / spacing);
}

/// (l/pi) int_{-pi/2l}^{pi/2l} dp / (lambda^2 - M^2 - J^2 cos^2(l p)).
inline double delta_closed_integral(double lambda, double M, double J) {
  return -1.0 / (std::sqrt(M * M - lambda * lambda) * std::sqrt(M * M + J * J - lambda * lambda));
}

/// Periodic trapezoid average of f(c) over one period of c = cos(theta).
template <typename F>
double period_average(F&& f, int points) {
  double sum = 0.0;
  for (int i = 0; i < points; ++i) sum += f(std::cos(2.0 * std::numbers::pi * i / points));
  return sum / points;
}

/// Momentum profiles of the bound state, for the well on a +M site. A
/// FromLowerEdge solution is mapped back through lambda -> -lambda,
/// phi -> -phi first.
/// Abar is fixed by (l/pi) int over the reduced zone of A^2 + B^2 = 1; Bbar is
/// the average of B over a full period of cos(l p).
inline DeltaLatticeSolution delta_momentum_profile(DeltaLatticeSolution sol, double spacing,
                                                   const std::vector<double>& p_grid,
                                                   int quadrature_points = 4096) {
  const double M = sol.M, J = sol.J;
  const bool mirrored = sol.branch == DeltaBranch::FromLowerEdge;
  const double lambda = mirrored ? -sol.lambda : sol.lambda;
  const double phi = mirrored ? -sol.phi : sol.phi;
  if (!(lambda * lambda < M * M))
    throw ConfigError("delta_momentum_profile: lambda outside the gap");
  if (phi == 0.0) throw ConfigError("delta_momentum_profile: phi = 0 has no bound state");
  auto denom = [&](double c) { return lambda * lambda - M * M - J * J * c * c; };
  const double norm2 = period_average(
      [&](double c) {
        const double d = denom(c);
        return phi * phi * ((lambda + M) * (lambda + M) + J * J * c * c) / (d * d);
      },
      quadrature_points);
  sol.Abar = 1.0 / std::sqrt(norm2);
  sol.Bbar = period_average([&](double c) { return phi * sol.Abar * J * c / denom(c); },
                            quadrature_points);
  sol.p_grid = p_grid;
  sol.A_of_p.resize(p_grid.size());
  sol.B_of_p.resize(p_grid.size());
  for (std::size_t i = 0; i < p_grid.size(); ++i) {
    const double c = std::cos(spacing * p_grid[i]);
    const double d = denom(c);
    sol.A_of_p[i] = phi * sol.Abar * (lambda + M) / d;
    sol.B_of_p[i] = phi * sol.Abar * J * c / d;
  }
  return sol;
}

/// Average of (A^2 + B^2) J cos(l p) over a full period: the lattice momentum
/// of the bound state.
inline double delta_momentum_expectation(const DeltaLatticeSolution& sol,
                                         int quadrature_points = 4096) {
  const bool mirrored = sol.branch == DeltaBranch::FromLowerEdge;
  const double lambda = mirrored ? -sol.lambda : sol.lambda;
  const double phi = mirrored ? -sol.phi : sol.phi;
  const double M = sol.M, J = sol.J;
  return period_average(
      [&](double c) {
        const double d = lambda * lambda - M * M - J * J * c * c;
        const double a = phi * sol.Abar * (lambda + M) / d;
        const double b = phi * sol.Abar * J * c / d;
        return (a * a + b * b) * J * c;
      },
      quadrature_points);
}

/// Two-component discretized Dirac operator on N sites, 2N x 2N, with index
/// 2n for the upper and 2n + 1 for the lower component of site n. Each upper
/// component couples to the lower components of both neighbours with
/// -1/(2l).
inline Eigen::MatrixXd two_component_operator(int num_sites, double M, double spacing,
                                              const std::vector<double>& upper_potential,
                                              const std::vector<double>& lower_potential) {
  if (num_sites < 2) throw ConfigError("two_component_operator: need N >= 2");
  if (static_cast<int>(upper_potential.size()) != num_sites ||
      static_cast<int>(lower_potential.size()) != num_sites)
    throw ConfigError("two_component_operator: potential length mismatch");
  const int dim = 2 * num_sites;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
  const double t = -0.5 / spacing;
  for (int n = 0; n < num_sites; ++n) {
    h(2 * n, 2 * n) = M + upper_potential[n];
    h(2 * n + 1, 2 * n + 1) = -M + lower_potential[n];
    for (int m : {n - 1, n + 1}) {
      if (m < 0 || m >= num_sites) continue;
      h(2 * n, 2 * m + 1) = t;
      h(2 * m + 1, 2 * n) = t;
    }
  }
  return h;
}

}  // namespace latqed::oracles
