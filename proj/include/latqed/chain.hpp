#pragma once

// Lattice model of the 1+1D Dirac field: a staggered tight-binding chain
// with on-site energies Phi_n + (-1)^n M and nearest-neighbour hopping -J/2.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "latqed/error.hpp"

namespace latqed {

enum class Boundary { Open };

/// The discretized Dirac system. Sites sit at x_n = (n - N/2) * spacing.
struct ChainModel {
  int num_sites = 0;
  double spacing = 0.0;
  double mass = 0.0;
  double hopping = 0.0;
  Boundary boundary = Boundary::Open;

  /// Validating constructor. Without an explicit hopping J = 1/spacing, so
  /// the nearest-neighbour amplitude J/2 equals 1/(2*spacing).
  static ChainModel make(int num_sites, double spacing, double mass,
                         std::optional<double> hopping = std::nullopt) {
    ChainModel c{num_sites, spacing, mass, hopping.value_or(1.0 / spacing), Boundary::Open};
    c.validate();
    return c;
  }

  void validate() const {
    if (num_sites < 4 || num_sites % 2 != 0)
      throw ConfigError("chain: num_sites must be even and >= 4, got " +
                        std::to_string(num_sites));
    if (!(spacing > 0.0) || !std::isfinite(spacing))
      throw ConfigError("chain: spacing must be positive");
    if (!(mass >= 0.0) || !std::isfinite(mass)) throw ConfigError("chain: mass must be >= 0");
    if (!(hopping > 0.0) || !std::isfinite(hopping))
      throw ConfigError("chain: hopping must be positive");
  }

  double position(int n) const { return (n - num_sites / 2) * spacing; }

  /// +M on even sites, -M on odd sites.
  double staggered_mass(int n) const { return (n % 2 == 0) ? mass : -mass; }

  double box_length() const { return num_sites * spacing; }
};

// ---------------------------------------------------------------------------
// External potentials

struct ZeroPotential {};

/// -W / (1 + exp(a (|x| - L)))
struct WoodsSaxon {
  double depth = 0.0;      // W
  double steepness = 0.0;  // a
  double half_width = 0.0; // L
};

/// phi / spacing on a single site, zero elsewhere.
struct DeltaSite {
  double strength = 0.0;  // phi
  int site = 0;
};

/// E * x inside [first_site, last_site], held at the window-edge value outside.
struct LinearField {
  double field = 0.0;
  int first_site = 0;
  int last_site = 0;
};

using PotentialSpec = std::variant<ZeroPotential, WoodsSaxon, DeltaSite, LinearField>;

inline double woods_saxon(double x, const WoodsSaxon& ws) {
  return -ws.depth / (1.0 + std::exp(ws.steepness * (std::abs(x) - ws.half_width)));
}

inline void validate_potential(const PotentialSpec& spec, const ChainModel& chain) {
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, WoodsSaxon>) {
          if (!(p.steepness > 0.0) || !(p.half_width > 0.0))
            throw ConfigError("woods-saxon: steepness and half_width must be > 0");
          if (!std::isfinite(p.depth)) throw ConfigError("woods-saxon: depth must be finite");
        } else if constexpr (std::is_same_v<P, DeltaSite>) {
          if (p.site < 0 || p.site >= chain.num_sites)
            throw ConfigError("delta-site: site " + std::to_string(p.site) +
                              " outside [0, " + std::to_string(chain.num_sites) + ")");
          if (!std::isfinite(p.strength)) throw ConfigError("delta-site: strength must be finite");
        } else if constexpr (std::is_same_v<P, LinearField>) {
          if (p.first_site < 0 || p.last_site >= chain.num_sites || p.first_site > p.last_site)
            throw ConfigError("linear field: window [" + std::to_string(p.first_site) + ", " +
                              std::to_string(p.last_site) + "] not inside the chain");
          if (!std::isfinite(p.field)) throw ConfigError("linear field: field must be finite");
        }
      },
      spec);
}

/// Phi_n = Phi(x_n) for every site of the chain.
inline std::vector<double> sample_potential(const PotentialSpec& spec, const ChainModel& chain) {
  validate_potential(spec, chain);
  const int n_sites = chain.num_sites;
  std::vector<double> phi(n_sites, 0.0);
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, WoodsSaxon>) {
          for (int n = 0; n < n_sites; ++n) phi[n] = woods_saxon(chain.position(n), p);
        } else if constexpr (std::is_same_v<P, DeltaSite>) {
          phi[p.site] = p.strength / chain.spacing;
        } else if constexpr (std::is_same_v<P, LinearField>) {
          for (int n = 0; n < n_sites; ++n)
            phi[n] = p.field * chain.position(std::clamp(n, p.first_site, p.last_site));
        }
      },
      spec);
  return phi;
}

// ---------------------------------------------------------------------------
// Time envelope

enum class RampShape { Linear, SmoothCos };

/// 0 -> 1 over t_on, 1 for t_plateau, 1 -> 0 over t_off.
struct RampProfile {
  double t_on = 0.0;
  double t_plateau = 0.0;
  double t_off = 0.0;
  RampShape shape = RampShape::SmoothCos;

  void validate() const {
    if (!(t_on >= 0.0) || !(t_plateau >= 0.0) || !(t_off >= 0.0) || !std::isfinite(total()))
      throw ConfigError("ramp: durations must be finite and >= 0");
  }

  double total() const { return t_on + t_plateau + t_off; }

  double envelope(double t) const {
    if (t <= 0.0 || t >= total()) return 0.0;
    if (t < t_on) return rise(t / t_on);
    if (t <= t_on + t_plateau) return 1.0;
    return rise((total() - t) / t_off);
  }

 private:
  double rise(double s) const {
    if (shape == RampShape::Linear) return s;
    return 0.5 - 0.5 * std::cos(std::numbers::pi * s);
  }
};

// ---------------------------------------------------------------------------
// Single-particle Hamiltonian

/// Real symmetric tridiagonal matrix.
struct TridiagonalOperator {
  std::vector<double> diagonal;
  std::vector<double> off_diagonal;

  int size() const { return static_cast<int>(diagonal.size()); }

  /// Staggered chain: diagonal Phi_n + (-1)^n M, off-diagonal -J/2.
  static TridiagonalOperator staggered(int num_sites, double mass, double hopping,
                                       std::span<const double> phi) {
    if (num_sites < 2) throw ConfigError("tridiagonal operator needs at least 2 sites");
    if (static_cast<int>(phi.size()) != num_sites)
      throw ConfigError("potential has " + std::to_string(phi.size()) + " entries, chain has " +
                        std::to_string(num_sites));
    TridiagonalOperator h;
    h.diagonal.resize(num_sites);
    for (int n = 0; n < num_sites; ++n) h.diagonal[n] = phi[n] + ((n % 2 == 0) ? mass : -mass);
    h.off_diagonal.assign(num_sites - 1, -0.5 * hopping);
    return h;
  }

  Eigen::VectorXd apply(const Eigen::VectorXd& v) const {
    const int n = size();
    Eigen::VectorXd out(n);
    for (int i = 0; i < n; ++i) {
      double s = diagonal[i] * v[i];
      if (i > 0) s += off_diagonal[i - 1] * v[i - 1];
      if (i + 1 < n) s += off_diagonal[i] * v[i + 1];
      out[i] = s;
    }
    return out;
  }

  Eigen::MatrixXd to_dense() const {
    const int n = size();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = diagonal[i];
    for (int i = 0; i + 1 < n; ++i) m(i, i + 1) = m(i + 1, i) = off_diagonal[i];
    return m;
  }

  /// Max-row-sum norm; an upper bound on the spectral radius.
  double norm_bound() const {
    const int n = size();
    double best = 0.0;
    for (int i = 0; i < n; ++i) {
      double s = std::abs(diagonal[i]);
      if (i > 0) s += std::abs(off_diagonal[i - 1]);
      if (i + 1 < n) s += std::abs(off_diagonal[i]);
      best = std::max(best, s);
    }
    return best;
  }
};

inline TridiagonalOperator build_hamiltonian(const ChainModel& chain, std::span<const double> phi) {
  chain.validate();
  return TridiagonalOperator::staggered(chain.num_sites, chain.mass, chain.hopping, phi);
}

inline TridiagonalOperator free_hamiltonian(const ChainModel& chain) {
  std::vector<double> zero(chain.num_sites, 0.0);
  return build_hamiltonian(chain, zero);
}

// ---------------------------------------------------------------------------
// Momentum space of the free chain

/// E(p) = sqrt(M^2 + cos^2(l p) / l^2) on the reduced zone |p| <= pi / (2 l).
inline double free_dispersion(double p, double mass, double spacing) {
  const double c = std::cos(spacing * p) / spacing;
  return std::sqrt(mass * mass + c * c);
}

/// Orthogonal U(p) with (A, B)^T = U (a, b)^T; U K U^T = diag(E, -E) for the
/// kernel K = [[M, cos(lp)/l], [cos(lp)/l, -M]].
inline Eigen::Matrix2d momentum_diagonalizer(double p, double mass, double spacing) {
  const double e = free_dispersion(p, mass, spacing);
  if (!(e > 1e-12 * (mass + 1.0 / spacing)))
    throw NumericError("momentum_diagonalizer: E(p) = 0 (massless zone edge)");
  const double plus = std::sqrt(e + mass);
  // Sign follows cos(lp) so the formula also holds outside the reduced zone.
  const double minus =
      std::copysign(std::sqrt(std::max(e - mass, 0.0)), std::cos(spacing * p));
  Eigen::Matrix2d u;
  u << plus, minus, -minus, plus;
  return u / std::sqrt(2.0 * e);
}

inline Eigen::Matrix2d momentum_kernel(double p, double mass, double spacing) {
  const double c = std::cos(spacing * p) / spacing;
  Eigen::Matrix2d k;
  k << mass, c, c, -mass;
  return k;
}

}  // namespace latqed
