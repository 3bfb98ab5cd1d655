#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "sscool/dynamics.hpp"
#include "sscool/model.hpp"
#include "sscool/rates.hpp"

using namespace sscool;

namespace {

// Random draws over the physically interesting box; fixed seed keeps runs reproducible.
class Draws {
 public:
  explicit Draws(std::uint64_t seed) : rng_(seed) {}

  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng_); }

  PhysicalParams params() {
    PhysicalParams p;
    p.Gamma1 = uniform(0.0, 10.0);
    p.Gamma2 = uniform(0.01, 10.0);
    p.Omega = uniform(0.01, 2.0);
    p.Omega_c = uniform(0.1, 2.0);
    p.Delta = uniform(-5.0, 15.0);
    p.nu = uniform(0.5, 2.0);
    p.eta = uniform(0.0, 0.2);
    return p;
  }

 private:
  std::mt19937_64 rng_;
};

}  // namespace

TEST(Property, BuildersAreHermitian) {
  Draws d(11);
  for (int k = 0; k < 20; ++k) {
    const PhysicalParams p = d.params();
    EXPECT_LT(hermiticity_error(three_level_rot_H(p, HilbertLayout(3, {5})).matrix()), 1e-12);
    EXPECT_LT(hermiticity_error(stark_shift_H(p, HilbertLayout(2, {5})).matrix()), 1e-12);
    EXPECT_LT(hermiticity_error(two_level_lab_H(p, HilbertLayout(2, {5}), d.uniform(0.0, 50.0)).matrix()), 1e-12);
  }
}

TEST(Property, APlusIsAMinusWithNegatedNu) {
  Draws d(12);
  for (int k = 0; k < 1000; ++k) {
    const PhysicalParams p = d.params();
    PhysicalParams q = p;
    q.nu = -p.nu;
    EXPECT_EQ(A_plus(p), A_minus(q));
  }
}

TEST(Property, RatioAndExplicitFormsAgree) {
  Draws d(13);
  int tested = 0;
  while (tested < 1000) {
    const PhysicalParams p = d.params();
    if (!(A_minus(p) > A_plus(p))) continue;
    ++tested;
    const double n = n_final(p);
    EXPECT_NEAR(n_final_explicit(p), n, 1e-10 * std::abs(n)) << "draw " << tested;
  }
}

TEST(Property, CoolingSignMatchesRegion) {
  Draws d(14);
  for (int k = 0; k < 500; ++k) {
    PhysicalParams p = d.params();
    p.Omega_c = 0.5 * p.nu;
    p.eta = 0.05;
    p.Delta = d.uniform(0.0, 15.0);
    const double th = cooling_region_threshold(p);
    if (std::abs(p.Omega - th) < 1e-6 * th) continue;
    EXPECT_EQ(cooling_rate(p) > 0.0, p.Omega < th) << "Omega " << p.Omega << " threshold " << th;
  }
}

TEST(Property, RateEquationConservesProbability) {
  Draws d(15);
  for (int k = 0; k < 10; ++k) {
    PhysicalParams p = d.params();
    p.Omega_c = 0.5 * p.nu;
    p.Omega = 0.1;
    p.eta = 0.05;
    std::vector<double> p0(40, 0.0);
    p0[1] = p0[2] = 0.5;
    const auto s = rate_eq_evolve(p0, p, TimeGrid{0.0, 50.0, 0.5, 10});
    EXPECT_LE(s.max_norm_error, 1e-10);
    EXPECT_GE(s.min_probability, -1e-12);
  }
}

TEST(Property, DisplacementCompositionInterior) {
  Draws d(16);
  for (int k = 0; k < 10; ++k) {
    const cplx z(d.uniform(-0.2, 0.2), d.uniform(-0.2, 0.2));
    const Matrix prod = displacement_matrix(12, z) * displacement_matrix(12, -z);
    EXPECT_LT((prod - Matrix::Identity(12, 12)).topLeftCorner(10, 10).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(Property, TrajectoriesAreSeedDeterministic) {
  Draws d(17);
  for (int k = 0; k < 3; ++k) {
    PhysicalParams p = d.params();
    const HilbertLayout layout(3, {3});
    const int zero[1] = {0};
    const auto psi = QuantumState::basis(layout, level::e, zero);
    const TimeGrid grid{0.0, 5.0, 0.02, 10};
    const std::uint64_t seed = derive_seed(99, k);
    const auto a = mc_evolve(three_level_rot_H(p, layout), dissipators(p, layout), psi, grid, seed);
    const auto b = mc_evolve(three_level_rot_H(p, layout), dissipators(p, layout), psi, grid, seed);
    EXPECT_EQ(a.series.channel("n_0"), b.series.channel("n_0"));
    ASSERT_EQ(a.jumps.size(), b.jumps.size());
    for (std::size_t j = 0; j < a.jumps.size(); ++j) EXPECT_EQ(a.jumps[j].time, b.jumps[j].time);
  }
}

TEST(Property, MasterEquationPreservesTrace) {
  Draws d(18);
  for (int k = 0; k < 5; ++k) {
    const PhysicalParams p = d.params();
    const HilbertLayout layout(3, {4});
    const int one[1] = {1};
    MasterOptions opt;
    opt.integrator = Integrator::rk4;
    opt.monitor.enabled = false;
    const auto ts = evolve_master(three_level_rot_H(p, layout), dissipators(p, layout),
                                  QuantumState::basis(layout, level::g1, one), TimeGrid{0.0, 2.0, 0.002, 100}, opt);
    EXPECT_LE(ts.diagnostics.max_trace_error, 1e-8);
    EXPECT_GE(ts.diagnostics.min_eigenvalue, -1e-6);
    for (double n : ts.channel("n_0")) EXPECT_GE(n, -1e-8);
  }
}
