#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "latqed/dynamics.hpp"

using namespace latqed;
using namespace latqed::dynamics;

namespace {

std::vector<double> ws_base(const ChainModel& c, double W) {
  return sample_potential(WoodsSaxon{W, 10.0, 1.0}, c);
}

// Product of exact exponentials exp(-i H(t_mid) h) on the same step grid; a
// reference for the Crank-Nicolson stepper on small chains.
Eigen::MatrixXcd exact_midpoint_product(const ChainModel& chain, const DrivenPotential& pot,
                                        double T, long steps) {
  const int n = chain.num_sites;
  const double h = T / steps;
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(n, n);
  const auto h0 = free_hamiltonian(chain).to_dense();
  for (long s = 0; s < steps; ++s) {
    const double f = pot.ramp.envelope((s + 0.5) * h);
    Eigen::MatrixXd hm = h0;
    for (int i = 0; i < n; ++i) hm(i, i) += f * pot.base[i];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hm);
    Eigen::VectorXcd ph(n);
    for (int i = 0; i < n; ++i) ph[i] = std::exp(cplx(0.0, -es.eigenvalues()[i] * h));
    const Eigen::MatrixXcd v = es.eigenvectors().cast<cplx>();
    u = v * ph.asDiagonal() * v.adjoint() * u;
  }
  return u;
}

}  // namespace

TEST(Evolve, ZeroDurationIsIdentity) {
  const auto c = ChainModel::make(10, 0.5, 1.0);
  const auto r = evolve(c, {ws_base(c, 2.0), {1.0, 1.0, 1.0}}, 0.0);
  EXPECT_EQ((r.propagator - Eigen::MatrixXcd::Identity(10, 10)).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Evolve, FreeEvolutionIsDiagonalInEigenbasis) {
  const auto c = ChainModel::make(8, 1.0, 1.0);
  const double T = 1.0;
  const auto r = evolve(c, {std::vector<double>(8, 0.0), {0.0, T, 0.0}}, T, 1e-4);
  const auto spec = spectral::solve_spectrum(free_hamiltonian(c));
  const Eigen::MatrixXcd v = spec.eigenvectors.cast<cplx>();
  const Eigen::MatrixXcd d = v.adjoint() * r.propagator * v;
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) {
      const cplx expect = i == j ? std::exp(cplx(0.0, -spec.eigenvalues[i] * T)) : 0.0;
      EXPECT_LT(std::abs(d(i, j) - expect), 1e-8) << i << "," << j;
    }
}

TEST(Evolve, RejectsTooLargeStep) {
  const auto c = ChainModel::make(10, 0.5, 1.0);
  const CrankNicolson cn(c, {ws_base(c, 2.0), {1.0, 1.0, 1.0}});
  EXPECT_THROW(evolve(c, {ws_base(c, 2.0), {1.0, 1.0, 1.0}}, 3.0, 1.01 * cn.max_step()),
               ConfigError);
  EXPECT_THROW(evolve(c, {std::vector<double>(6, 0.0), {1.0, 1.0, 1.0}}, 3.0), ConfigError);
}

TEST(Evolve, UnitaryForBothRampShapes) {
  const auto c = ChainModel::make(60, 0.2, 1.0);
  for (auto shape : {RampShape::Linear, RampShape::SmoothCos}) {
    const DrivenPotential pot{ws_base(c, 3.5), {2.0, 1.0, 2.0, shape}};
    const auto r = evolve(c, pot, pot.ramp.total());
    EXPECT_LE(r.unitarity_error, 1e-8);
    EXPECT_LE(r.norm_drift, 1e-10);
    EXPECT_NEAR(r.times.back(), pot.ramp.total(), 1e-12);
  }
}

TEST(Evolve, SecondOrderConvergence) {
  const auto c = ChainModel::make(20, 0.5, 1.0);
  const DrivenPotential pot{ws_base(c, 2.0), {1.0, 1.0, 1.0, RampShape::SmoothCos}};
  const CrankNicolson cn(c, pot);
  const double dt = cn.max_step();
  const auto u1 = evolve(c, pot, 3.0, dt).propagator;
  const auto u2 = evolve(c, pot, 3.0, dt / 2).propagator;
  const auto u4 = evolve(c, pot, 3.0, dt / 4).propagator;
  const double ratio = (u1 - u2).norm() / (u2 - u4).norm();
  EXPECT_NEAR(ratio, 4.0, 0.5);
}

TEST(Evolve, AgreesWithExactExponentials) {
  const auto c = ChainModel::make(32, 0.5, 1.0);
  const DrivenPotential pot{ws_base(c, 2.5), {1.0, 0.5, 1.0, RampShape::SmoothCos}};
  const double T = pot.ramp.total();
  const CrankNicolson cn(c, pot);
  double previous = 1e9;
  for (double div : {1.0, 2.0, 4.0}) {
    const double dt = cn.max_step() / div;
    const long steps = CrankNicolson::step_count(0.0, T, dt);
    const auto ucn = evolve(c, pot, T, dt).propagator;
    const double err = (ucn - exact_midpoint_product(c, pot, T, steps)).cwiseAbs().maxCoeff();
    EXPECT_LT(err, previous / 3.0);
    previous = err;
  }
  EXPECT_LT(previous, 1e-4);
}

TEST(Evolve, TimeReversalReturnsIdentity) {
  const auto c = ChainModel::make(50, 0.2, 1.0);
  const DrivenPotential pot{ws_base(c, 3.0), {3.0, 0.0, 3.0, RampShape::SmoothCos}};
  const CrankNicolson cn(c, pot);
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(50, 50);
  cn.advance(u, 0.0, pot.ramp.total(), cn.max_step());
  cn.advance(u, pot.ramp.total(), 0.0, cn.max_step());
  EXPECT_LT((u - Eigen::MatrixXcd::Identity(50, 50)).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Evolve, GlobalShiftIsAPhase) {
  const auto c = ChainModel::make(40, 0.25, 1.0);
  const RampProfile ramp{2.0, 1.0, 2.0, RampShape::SmoothCos};
  auto base = ws_base(c, 3.0);
  const double shift = 0.7;
  auto shifted = base;
  for (double& v : shifted) v += shift;
  const DrivenPotential a{base, ramp}, b{shifted, ramp};
  const double dt = std::min(CrankNicolson(c, a).max_step(), CrankNicolson(c, b).max_step());
  const auto ua = evolve(c, a, ramp.total(), dt).propagator;
  const auto ub = evolve(c, b, ramp.total(), dt).propagator;
  // integral of the envelope: ramps contribute half their length each
  const double area = 0.5 * ramp.t_on + ramp.t_plateau + 0.5 * ramp.t_off;
  const cplx phase = std::exp(cplx(0.0, -shift * area));
  EXPECT_LT((ub - phase * ua).cwiseAbs().maxCoeff(), 1e-6);
  const auto split = in_out_split(free_hamiltonian(c));
  EXPECT_NEAR(count_pairs(ua, split).n_pairs, count_pairs(ub, split).n_pairs, 1e-10);
}

TEST(InOutSplit, HalfNegativeAndComplete) {
  const auto c = ChainModel::make(30, 0.3, 1.0);
  const auto s = in_out_split(free_hamiltonian(c));
  EXPECT_EQ(s.negative.cols(), 15);
  EXPECT_EQ(s.positive.cols(), 15);
  EXPECT_TRUE((s.negative_energies.array() < 0).all());
  EXPECT_TRUE((s.positive_energies.array() > 0).all());
  const Eigen::MatrixXd id = s.positive * s.positive.transpose() + s.negative * s.negative.transpose();
  EXPECT_LT((id - Eigen::MatrixXd::Identity(30, 30)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(InOutSplit, FourSitesMatchDense) {
  const auto c = ChainModel::make(4, 0.5, 1.0);
  const auto s = in_out_split(free_hamiltonian(c));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(free_hamiltonian(c).to_dense());
  for (int k = 0; k < 2; ++k) {
    EXPECT_NEAR(s.negative_energies[k], es.eigenvalues()[k], 1e-12);
    EXPECT_NEAR(s.positive_energies[k], es.eigenvalues()[k + 2], 1e-12);
    EXPECT_NEAR(std::abs(s.negative.col(k).dot(es.eigenvectors().col(k))), 1.0, 1e-12);
    EXPECT_NEAR(std::abs(s.positive.col(k).dot(es.eigenvectors().col(k + 2))), 1.0, 1e-12);
  }
}

TEST(InOutSplit, ZeroModeIsDegenerate) {
  std::vector<double> zero(3, 0.0);
  EXPECT_THROW(in_out_split(TridiagonalOperator::staggered(3, 0.0, 1.0, zero)), NumericError);
}

TEST(CountPairs, IdentityCreatesNothing) {
  const auto c = ChainModel::make(20, 0.3, 1.0);
  const auto s = in_out_split(free_hamiltonian(c));
  const auto p = count_pairs(Eigen::MatrixXcd::Identity(20, 20), s);
  EXPECT_LT(p.n_pairs, 1e-20);
}

TEST(CountPairs, SeaOnlyMatchesFullPropagator) {
  const auto c = ChainModel::make(40, 0.25, 1.0);
  const DrivenPotential pot{ws_base(c, 3.5), {2.0, 1.0, 2.0}};
  const CrankNicolson cn(c, pot);
  const auto split = in_out_split(free_hamiltonian(c));
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(40, 40);
  cn.advance(u, 0.0, pot.ramp.total(), cn.max_step());
  Eigen::MatrixXcd sea = split.negative.cast<cplx>();
  cn.advance(sea, 0.0, pot.ramp.total(), cn.max_step());
  EXPECT_NEAR(count_pairs(u, split).n_pairs, count_pairs_from_sea(sea, split).n_pairs, 1e-12);
}

TEST(AdiabaticScan, ZeroAmplitudeCreatesNothing) {
  const auto c = ChainModel::make(60, 0.2, 1.0);
  const auto rows = adiabatic_scan(c, std::vector<double>(60, 0.0), {1.0, 2.0, 4.0}, 1.0);
  for (const auto& r : rows) EXPECT_LT(r.summary.n_pairs, 1e-10);
}

TEST(AdiabaticScan, RejectsDescendingDurations) {
  const auto c = ChainModel::make(20, 0.2, 1.0);
  EXPECT_THROW(adiabatic_scan(c, std::vector<double>(20, 0.0), {2.0, 1.0}, 1.0), ConfigError);
}

TEST(AdiabaticScan, SubcriticalDiesOut) {
  const auto c = ChainModel::make(120, 0.2, 1.0);
  const auto rows = adiabatic_scan(c, ws_base(c, 1.5), {10.0, 20.0, 40.0, 80.0}, 10.0);
  for (std::size_t i = 1; i < rows.size(); ++i)
    EXPECT_LE(rows[i].summary.n_pairs, 1.05 * rows[i - 1].summary.n_pairs);
  EXPECT_LT(rows.back().summary.n_pairs, 1e-3);
  for (const auto& r : rows) {
    EXPECT_LE(r.summary.unitarity_error, 1e-8);
    EXPECT_LE(r.summary.max_mode_occupation, 1.0 + 1e-9);
  }
}

TEST(AdiabaticScan, SupercriticalCreatesOnePair) {
  const auto c = ChainModel::make(200, 0.2, 1.0);
  const auto rows = adiabatic_scan(c, ws_base(c, 3.5), {20.0, 40.0}, 20.0);
  for (const auto& r : rows) {
    EXPECT_GE(r.summary.n_pairs, 0.5);
    EXPECT_GE(r.summary.dominant_fraction, 0.9);
    EXPECT_LE(r.summary.max_mode_occupation, 1.0 + 1e-9);
    EXPECT_LE(r.summary.unitarity_error, 1e-8);
  }
  EXPECT_LT(std::abs(rows[1].summary.n_pairs - 1.0), std::abs(rows[0].summary.n_pairs - 1.0));
}

TEST(AdiabaticScan, ParallelMatchesSerial) {
  const auto c = ChainModel::make(40, 0.25, 1.0);
  const auto a = adiabatic_scan(c, ws_base(c, 3.5), {1.0, 2.0, 3.0}, 1.0, RampShape::SmoothCos, 1.0, 1);
  const auto b = adiabatic_scan(c, ws_base(c, 3.5), {1.0, 2.0, 3.0}, 1.0, RampShape::SmoothCos, 1.0, 3);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].summary.n_pairs, b[i].summary.n_pairs);
}

TEST(PairOrbitals, ParticleBoundHoleScattered) {
  const auto c = ChainModel::make(200, 0.2, 1.0);
  const auto po = pair_orbitals(c, {ws_base(c, 3.5), {10.0, 20.0, 10.0}});
  EXPECT_GT(po.pairs.n_pairs, 0.5);
  EXPECT_LT(po.particle_participation, 200.0 / 10.0);
  EXPECT_GT(po.hole_participation, 200.0 / 4.0);
}

TEST(Schwinger, WeakFieldBelowFloor) {
  const auto c = ChainModel::make(100, 0.2, 1.0);
  const auto s = schwinger_scan(c, {0.02}, 25, 74, 10.0, 20.0);
  ASSERT_EQ(s.points.size(), 1u);
  EXPECT_FALSE(s.points[0].used_in_fit);
  EXPECT_LT(s.points[0].rate, 10.0 * s.rate_floor);
}

TEST(Schwinger, RejectsBadInput) {
  const auto c = ChainModel::make(100, 0.2, 1.0);
  EXPECT_THROW(schwinger_scan(c, {0.3, 0.2}, 25, 74, 10.0, 10.0), ConfigError);
  EXPECT_THROW(schwinger_scan(c, {0.3}, 25, 74, 0.0, 10.0), ConfigError);
  EXPECT_THROW(schwinger_scan(c, {0.3}, 25, 120, 10.0, 10.0), ConfigError);
}

TEST(Schwinger, ExponentialInInverseField) {
  const auto c = ChainModel::make(200, 0.2, 1.0);
  const auto s = schwinger_scan(c, {0.3, 0.35, 0.4, 0.45, 0.5}, 50, 149, 20.0, 10.0);
  EXPECT_EQ(s.fit_points, 5);
  for (std::size_t i = 1; i < s.points.size(); ++i) EXPECT_GT(s.points[i].rate, s.points[i - 1].rate);
  EXPECT_GT(s.r_squared, 0.95);
  EXPECT_LT(s.fit_slope, 0.0);
}
