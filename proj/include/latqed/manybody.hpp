#pragma once

// Exact diagonalization of short open chains in the fixed-particle-number
// Fock space: spinless fermions, hard-core bosons, on-site and 1/r^3 terms.

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "latqed/error.hpp"
#include "latqed/parallel.hpp"

namespace latqed::manybody {

inline constexpr int max_sites = 16;
inline constexpr std::size_t max_dimension = 200000;

/// Occupation bitmasks with a fixed popcount, ascending. Bit n is site n.
class FockBasis {
 public:
  FockBasis(int num_sites, int num_particles) : L_(num_sites), Np_(num_particles) {
    if (num_sites < 1 || num_sites > max_sites)
      throw ConfigError("Fock basis: 1 <= L <= " + std::to_string(max_sites) + " required, got " +
                        std::to_string(num_sites));
    if (num_particles < 0 || num_particles > num_sites)
      throw ConfigError("Fock basis: particle number outside [0, L]");
    const std::uint64_t dim = binomial(num_sites, num_particles);
    if (dim > max_dimension)
      throw ConfigError("Fock basis: dimension " + std::to_string(dim) + " exceeds " +
                        std::to_string(max_dimension));
    states_.reserve(dim);
    for (std::uint32_t m = 0; m < (1u << num_sites); ++m)
      if (std::popcount(m) == num_particles) states_.push_back(m);
  }

  int num_sites() const { return L_; }
  int num_particles() const { return Np_; }
  std::size_t dimension() const { return states_.size(); }
  const std::vector<std::uint32_t>& states() const { return states_; }
  std::uint32_t state(std::size_t i) const { return states_[i]; }

  /// Position of a mask in the basis; -1 if absent.
  std::ptrdiff_t index(std::uint32_t mask) const {
    const auto it = std::lower_bound(states_.begin(), states_.end(), mask);
    if (it == states_.end() || *it != mask) return -1;
    return it - states_.begin();
  }

  static std::uint64_t binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    std::uint64_t r = 1;
    for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
    return r;
  }

 private:
  int L_;
  int Np_;
  std::vector<std::uint32_t> states_;
};

enum class OperatorKind { FermiHopping, HardCoreBoseHopping, OnSite, Dipolar };

/// D_nm = D0 / |n - m|^3 for 0 < |n - m| <= cutoff (cutoff 0: all pairs).
struct InteractionSpec {
  double D0 = 0.0;
  int cutoff = 0;
  static constexpr int exponent = 3;

  double coupling(int n, int m) const {
    const int d = std::abs(n - m);
    if (d == 0 || (cutoff > 0 && d > cutoff)) return 0.0;
    return D0 / (static_cast<double>(d) * d * d);
  }
};

struct ManyBodyOperator {
  FockBasis basis;
  Eigen::SparseMatrix<double> matrix;
  OperatorKind kind;

  Eigen::MatrixXd to_dense() const { return Eigen::MatrixXd(matrix); }
};

namespace detail {

// Sign of c_to^dag c_from on `mask` for fermions: parity of occupied sites
// strictly between the two.
inline double hop_sign(std::uint32_t mask, int from, int to) {
  const int lo = std::min(from, to), hi = std::max(from, to);
  const std::uint32_t between = hi - lo > 1 ? ((1u << hi) - 1u) & ~((1u << (lo + 1)) - 1u) : 0u;
  return (std::popcount(mask & between) % 2) ? -1.0 : 1.0;
}

inline double diagonal_energy(std::uint32_t mask, int L, std::span<const double> V,
                              const std::optional<InteractionSpec>& inter) {
  double e = 0.0;
  for (int n = 0; n < L; ++n)
    if (mask >> n & 1u) e += V.empty() ? 0.0 : V[n];
  if (inter && inter->D0 != 0.0)
    for (int n = 0; n < L; ++n)
      if (mask >> n & 1u)
        for (int m = n + 1; m < L; ++m)
          if (mask >> m & 1u) e += inter->coupling(n, m);
  return e;
}

}  // namespace detail

/// H = -J/2 sum_n (c^dag_{n+1} c_n + h.c.) + sum_n V_n n_n + sum_{n<m} D_nm n_n n_m
/// on an open chain. kind selects fermionic or hard-core bosonic hopping.
inline ManyBodyOperator build_fock_hamiltonian(int L, int Np, double J, std::span<const double> V,
                                               OperatorKind kind,
                                               const std::optional<InteractionSpec>& interaction = std::nullopt,
                                               unsigned jobs = 1) {
  if (kind != OperatorKind::FermiHopping && kind != OperatorKind::HardCoreBoseHopping)
    throw ConfigError("build_fock_hamiltonian: kind must be a hopping kind");
  if (!V.empty() && static_cast<int>(V.size()) != L)
    throw ConfigError("build_fock_hamiltonian: potential has " + std::to_string(V.size()) +
                      " entries for " + std::to_string(L) + " sites");
  if (!std::isfinite(J)) throw ConfigError("build_fock_hamiltonian: hopping must be finite");
  FockBasis basis(L, Np);
  const std::size_t dim = basis.dimension();
  const bool fermions = kind == OperatorKind::FermiHopping;

  using Triplet = Eigen::Triplet<double>;
  auto rows = parallel_map<std::vector<Triplet>>(dim, jobs, [&](std::size_t i) {
    std::vector<Triplet> t;
    const std::uint32_t s = basis.state(i);
    t.emplace_back(static_cast<int>(i), static_cast<int>(i), detail::diagonal_energy(s, L, V, interaction));
    // each state emits its own outgoing hops; the reverse hop from the target
    // sees the same sites in between, so the matrix comes out symmetric
    for (int n = 0; n + 1 < L; ++n) {
      const bool a = s >> n & 1u, b = s >> (n + 1) & 1u;
      if (a == b) continue;
      const int from = a ? n : n + 1, to = a ? n + 1 : n;
      const std::uint32_t target = (s & ~(1u << from)) | (1u << to);
      const auto j = basis.index(target);
      const double sign = fermions ? detail::hop_sign(s, from, to) : 1.0;
      t.emplace_back(static_cast<int>(j), static_cast<int>(i), -0.5 * J * sign);
    }
    return t;
  });
  std::vector<Triplet> all;
  for (auto& r : rows) all.insert(all.end(), r.begin(), r.end());
  Eigen::SparseMatrix<double> H(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  H.setFromTriplets(all.begin(), all.end());
  return {std::move(basis), std::move(H), kind};
}

/// Dense spectrum (ascending).
inline Eigen::VectorXd full_spectrum(const ManyBodyOperator& H) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H.to_dense(), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

/// Max |dE| between the sorted fermionic and hard-core bosonic spectra.
inline double jordan_wigner_equivalence(int L, int Np, double J, std::span<const double> V) {
  const auto f = full_spectrum(build_fock_hamiltonian(L, Np, J, V, OperatorKind::FermiHopping));
  const auto b = full_spectrum(build_fock_hamiltonian(L, Np, J, V, OperatorKind::HardCoreBoseHopping));
  return (f - b).cwiseAbs().maxCoeff();
}

/// All sums of Np distinct single-particle energies, ascending.
inline std::vector<double> subset_sums(std::span<const double> single, int Np) {
  const int L = static_cast<int>(single.size());
  FockBasis basis(L, Np);
  std::vector<double> out;
  out.reserve(basis.dimension());
  for (auto m : basis.states()) {
    double e = 0.0;
    for (int n = 0; n < L; ++n)
      if (m >> n & 1u) e += single[n];
    out.push_back(e);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Ground state

namespace detail {

// Lowest eigenpair of a symmetric sparse matrix by Lanczos with full
// reorthogonalization. `deflate` vectors are projected out of the Krylov space.
inline std::pair<double, Eigen::VectorXd> lanczos_lowest(const Eigen::SparseMatrix<double>& H,
                                                         const std::vector<Eigen::VectorXd>& deflate,
                                                         std::uint64_t seed) {
  const Eigen::Index n = H.rows();
  const int max_iter = static_cast<int>(std::min<Eigen::Index>(n, 400));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = uni(rng);
  auto project = [&](Eigen::VectorXd& x) {
    for (const auto& d : deflate) x -= d.dot(x) * d;
  };
  project(v);
  v.normalize();
  std::vector<Eigen::VectorXd> Q{v};
  std::vector<double> alpha, beta;
  double ritz = 0.0;
  Eigen::VectorXd y;
  for (int it = 0; it < max_iter; ++it) {
    Eigen::VectorXd w = H * Q.back();
    project(w);
    alpha.push_back(Q.back().dot(w));
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& q : Q) w -= q.dot(w) * q;
    const double b = w.norm();
    const int m = static_cast<int>(alpha.size());
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) {
      T(i, i) = alpha[i];
      if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    ritz = es.eigenvalues()[0];
    y = es.eigenvectors().col(0);
    if (b * std::abs(y[m - 1]) < 1e-12 * std::max(1.0, std::abs(ritz)) || b < 1e-14 ||
        static_cast<Eigen::Index>(Q.size()) == n - static_cast<Eigen::Index>(deflate.size()))
      break;
    beta.push_back(b);
    Q.push_back(w / b);
  }
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < y.size(); ++i) x += y[i] * Q[static_cast<std::size_t>(i)];
  x.normalize();
  const double residual = (H * x - ritz * x).norm();
  if (residual > 1e-8 * std::max(1.0, std::abs(ritz)))
    throw NumericError("Lanczos: not converged, residual " + std::to_string(residual));
  return {ritz, x};
}

}  // namespace detail

struct GroundState {
  double energy = 0.0;
  double gap = 0.0;  // to the next level in the same particle-number sector
  Eigen::VectorXd vector;
};

/// Dense for small sectors, Lanczos otherwise.
inline GroundState ground_state(const ManyBodyOperator& H, std::size_t dense_limit = 2000) {
  GroundState g;
  if (H.basis.dimension() == 1) {
    g.energy = H.matrix.coeff(0, 0);
    g.gap = std::numeric_limits<double>::infinity();
    g.vector = Eigen::VectorXd::Ones(1);
    return g;
  }
  if (H.basis.dimension() <= dense_limit) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H.to_dense());
    g.energy = es.eigenvalues()[0];
    g.gap = es.eigenvalues()[1] - es.eigenvalues()[0];
    g.vector = es.eigenvectors().col(0);
    return g;
  }
  auto [e0, v0] = detail::lanczos_lowest(H.matrix, {}, 12345);
  auto [e1, v1] = detail::lanczos_lowest(H.matrix, {v0}, 54321);
  g.energy = e0;
  g.gap = e1 - e0;
  g.vector = std::move(v0);
  return g;
}

struct OccupationReport {
  double energy = 0.0;
  double gap = 0.0;
  std::vector<double> densities;
  double upper_density = 0.0;  // summed over the +M (upper) sublattice
};

/// <n_n> in the ground state. Upper sites are those with n % 2 == upper_parity
/// (even sites carry +M in the staggered chain).
inline OccupationReport ground_state_occupations(const ManyBodyOperator& H, int upper_parity = 0,
                                                 double degeneracy_tol = 1e-10) {
  const auto g = ground_state(H);
  if (!(g.gap > degeneracy_tol)) {
    char msg[96];
    std::snprintf(msg, sizeof msg, "ground state degenerate: gap %.3e <= %.3e", g.gap, degeneracy_tol);
    throw NumericError(msg);
  }
  OccupationReport r;
  r.energy = g.energy;
  r.gap = g.gap;
  const int L = H.basis.num_sites();
  r.densities.assign(L, 0.0);
  for (std::size_t i = 0; i < H.basis.dimension(); ++i) {
    const double w = g.vector[static_cast<Eigen::Index>(i)] * g.vector[static_cast<Eigen::Index>(i)];
    const auto s = H.basis.state(i);
    for (int n = 0; n < L; ++n)
      if (s >> n & 1u) r.densities[n] += w;
  }
  for (int n = 0; n < L; ++n)
    if (n % 2 == upper_parity) r.upper_density += r.densities[n];
  return r;
}

/// <psi| sum_{n<m} |n-m|^-3 n_n n_m |psi> (unit amplitude).
inline double dipolar_expectation(const FockBasis& basis, const Eigen::VectorXd& psi, int cutoff = 0) {
  const InteractionSpec unit{1.0, cutoff};
  const int L = basis.num_sites();
  double acc = 0.0;
  for (std::size_t i = 0; i < basis.dimension(); ++i) {
    const double w = psi[static_cast<Eigen::Index>(i)] * psi[static_cast<Eigen::Index>(i)];
    if (w == 0.0) continue;
    acc += w * detail::diagonal_energy(basis.state(i), L, {}, unit);
  }
  return acc;
}

struct InteractionRow {
  double D0 = 0.0;
  double energy = 0.0;
  double upper_density = 0.0;
  double first_order_energy = 0.0;  // E(0) + D0 <K>_0
};

/// Half-filled ground state for each D0 (parallel over D0 points).
inline std::vector<InteractionRow> interaction_shift_scan(int L, double J, std::span<const double> V,
                                                          const std::vector<double>& D0_values,
                                                          OperatorKind kind = OperatorKind::FermiHopping,
                                                          int cutoff = 0, int upper_parity = 0,
                                                          unsigned jobs = 1) {
  if (L > 14) throw ConfigError("interaction_shift_scan: L <= 14 required");
  if (L % 2 != 0) throw ConfigError("interaction_shift_scan: half filling needs even L");
  const auto H0 = build_fock_hamiltonian(L, L / 2, J, V, kind);
  const auto g0 = ground_state(H0);
  const double K0 = dipolar_expectation(H0.basis, g0.vector, cutoff);
  return parallel_map<InteractionRow>(D0_values.size(), jobs, [&](std::size_t i) {
    const double D0 = D0_values[i];
    const auto H = build_fock_hamiltonian(L, L / 2, J, V, kind, InteractionSpec{D0, cutoff});
    const auto occ = ground_state_occupations(H, upper_parity);
    return InteractionRow{D0, occ.energy, occ.upper_density, g0.energy + D0 * K0};
  });
}

}  // namespace latqed::manybody
