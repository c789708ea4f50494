#include <gtest/gtest.h>

#include <cmath>

#include "boojum/defectlab.hpp"
#include "boojum/energy.hpp"
#include "boojum/flow.hpp"
#include "boojum/seeds.hpp"

using namespace boojum;

namespace {

void expect_monotone(const RelaxReport& rep) {
  for (std::size_t k = 1; k < rep.energy_trace.size(); ++k)
    EXPECT_LE(rep.energy_trace[k].energy.total, rep.energy_trace[k - 1].energy.total + 1e-10) << k;
}

}  // namespace

TEST(StableDt, FormulaAtProductionGrid) {
  const PolarGrid g(128, 512);
  const ModelParams p(0.02, 1.0, pi / 3, 1);
  const double dr = 1.0 / 128;
  const double rmin = 0.5 * dr;
  const double dth = two_pi / 512;
  const double expect = 0.4 / (2 / (dr * dr) + 2 / (rmin * rmin * dth * dth) + 7500 + 2 * 50 / dr);
  EXPECT_NEAR(stable_dt(g, p), expect, 1e-15 * expect);
}

TEST(StableDt, Scaling) {
  const ModelParams p(1e6, 1.0, pi / 3, 1);  // reaction negligible (validated range is eps > 0)
  const double a = stable_dt(PolarGrid(64, 64), p);
  const double b = stable_dt(PolarGrid(128, 64), p);
  EXPECT_NEAR(a / b, 4.0, 0.05);
}

TEST(Step, StationaryConstantUnchanged) {
  const PolarGrid g(16, 32);
  const ModelParams p(0.1, 1.0, pi / 3, 0);
  const auto bd = equivariant_boundary(0, g.n_theta());
  const ComplexField u(g, std::polar(1.0, pi / 3));
  const auto v = step(u, p, g, bd, stable_dt(g, p));
  EXPECT_LT(max_difference(u, v), 1e-12);
}

TEST(Step, EnergyDoesNotIncrease) {
  const PolarGrid g(16, 64);
  const ModelParams p(0.1, 0.72, pi / 3, 1);
  const auto bd = equivariant_boundary(1, g.n_theta());
  for (std::uint64_t k = 0; k < 5; ++k) {
    auto u = random_seed(k, 1.5, g);
    for (int n = 0; n < 20; ++n) {
      const double e0 = total_energy(u, p, g, bd).total;
      u = step(u, p, g, bd, stable_dt(g, p));
      EXPECT_LE(total_energy(u, p, g, bd).total, e0 + 1e-10);
    }
  }
}

TEST(Step, ZeroFieldBoundaryMovesTowardCosAlpha) {
  const PolarGrid g(16, 64);
  const double a = pi / 3;
  const ModelParams p(0.1, 1.0, a, 0);
  const auto bd = equivariant_boundary(0, g.n_theta());
  const ComplexField u(g);
  const auto v = step(u, p, g, bd, stable_dt(g, p));
  for (int j = 0; j < g.n_theta(); ++j) {
    EXPECT_GT(v.trace(j).real(), 0.0);
    EXPECT_NEAR(v.trace(j).imag(), 0.0, 1e-14);
  }
}

TEST(Step, RejectsOversizedDt) {
  const PolarGrid g(16, 32);
  const ModelParams p(0.1, 1.0, pi / 3, 0);
  const auto bd = equivariant_boundary(0, g.n_theta());
  EXPECT_THROW(step(ComplexField(g, 1.0), p, g, bd, 2 * stable_dt(g, p)), ConfigError);
}

TEST(Relax, StationarySeedConvergesImmediately) {
  const PolarGrid g(16, 32);
  const ModelParams p(0.1, 1.0, pi / 3, 0);
  const auto bd = equivariant_boundary(0, g.n_theta());
  const auto r = relax(ComplexField(g, std::polar(1.0, pi / 3)), p, g, bd);
  EXPECT_TRUE(r.report.converged);
  EXPECT_LE(r.report.steps, 1);
}

TEST(Relax, RejectsNonFiniteSeed) {
  const PolarGrid g(16, 32);
  const ModelParams p(0.1, 1.0, pi / 3, 1);
  const auto bd = equivariant_boundary(1, g.n_theta());
  ComplexField u(g, 1.0);
  u.at(2, 2) = cplx(NAN, 0.0);
  EXPECT_THROW(relax(u, p, g, bd), DataError);
}

TEST(Relax, RejectsTooCoarseGrid) {
  const PolarGrid g(16, 64);
  const ModelParams p(0.02, 1.0, pi / 3, 1);
  const auto bd = equivariant_boundary(1, g.n_theta());
  EXPECT_THROW(relax(ComplexField(g, 1.0), p, g, bd), ConfigError);
}

TEST(Relax, SchemesAgreeOnSmallProblem) {
  const PolarGrid g(16, 64);
  const ModelParams p(0.15, 0.8, pi / 3, 1);
  const auto bd = equivariant_boundary(1, g.n_theta());
  const auto seed = random_seed(3, 1.0, g);
  RelaxOptions o;
  o.tol = 1e-7;
  const auto a = relax(seed, p, g, bd, o);
  o.scheme = Scheme::stabilized;
  o.max_steps = 200000;
  const auto b = relax(seed, p, g, bd, o);
  ASSERT_TRUE(a.report.converged);
  ASSERT_TRUE(b.report.converged);
  expect_monotone(a.report);
  expect_monotone(b.report);
  EXPECT_NEAR(total_energy(a.field, p, g, bd).total, total_energy(b.field, p, g, bd).total, 1e-6);
}

TEST(Relax, ExplicitSchemeDecreasesEnergy) {
  const PolarGrid g(8, 32);
  const ModelParams p(0.3, 0.8, pi / 3, 1);
  const auto bd = equivariant_boundary(1, g.n_theta());
  RelaxOptions o;
  o.scheme = Scheme::explicit_euler;
  o.max_steps = 3000;
  o.sample_every = 50;
  const auto r = relax(random_seed(1, 1.0, g), p, g, bd, o);
  expect_monotone(r.report);
  EXPECT_GT(r.report.energy_trace.front().energy.total, r.report.energy_trace.back().energy.total);
}

TEST(Relax, ModulusBoundsFromRandomStart) {
  const PolarGrid g(32, 128);
  const ModelParams p(0.05, 0.5, pi / 3, 1);  // eps^(1-s) ~ 0.22
  const auto bd = equivariant_boundary(1, g.n_theta());
  const auto r = relax(random_seed(11, 2.0, g), p, g, bd);
  EXPECT_LE(r.report.peak_modulus, 2.0);
  for (const auto& m : r.report.max_modulus_trace) EXPECT_LE(m.max_modulus, 2.0);
  expect_monotone(r.report);
}

TEST(Relax, CheckpointsAreCalled) {
  const PolarGrid g(16, 64);
  const ModelParams p(0.15, 0.8, pi / 3, 1);
  const auto bd = equivariant_boundary(1, g.n_theta());
  RelaxOptions o;
  o.checkpoint_every = 5;
  int calls = 0;
  o.checkpoint = [&](long n, const ComplexField& f) {
    EXPECT_EQ(n % 5, 0);
    EXPECT_TRUE(f.all_finite());
    ++calls;
  };
  const auto r = relax(random_seed(5, 1.0, g), p, g, bd, o);
  EXPECT_EQ(calls, r.report.steps / 5);
}

TEST(Relax, VortexSeedStrongAnchoring) {
  const PolarGrid g(128, 512);
  const ModelParams p(0.02, 1.0, pi / 3, 1);
  const auto bd = equivariant_boundary(1, g.n_theta());
  const std::vector<cplx> pos{0.0};
  const std::vector<int> deg{1};
  const auto r = relax(vortex_seed(pos, deg, p, g, bd), p, g, bd);
  ASSERT_TRUE(r.report.converged);
  EXPECT_LE(r.report.final_residual, 1e-6);
  expect_monotone(r.report);
  const auto interior = find_interior_defects(r.field, p, g);
  ASSERT_EQ(interior.size(), 1u);
  EXPECT_EQ(interior[0].degree, 1);
  EXPECT_TRUE(find_boundary_defects(r.field, p, g, bd).empty());
  // Smooth trace: neighbouring trace values stay close.
  for (int j = 0; j < g.n_theta(); ++j) EXPECT_LT(std::abs(r.field.trace(j) - r.field.trace(g.wrap_j(j + 1))), 0.05);
  EXPECT_LE(r.field.max_modulus(), 1.05);
  EXPECT_EQ(degree_conserved(r.field, p, g, bd), std::optional<bool>(true));
}

TEST(Relax, BoojumSeedWeakAnchoring) {
  const PolarGrid g(128, 512);
  const ModelParams p(0.02, 0.72, pi / 3, 1);
  const auto bd = equivariant_boundary(1, g.n_theta());
  const std::vector<double> a{0.0, pi};
  const auto r = relax(boojum_seed(a, p, g, bd), p, g, bd);
  ASSERT_TRUE(r.report.converged);
  expect_monotone(r.report);
  EXPECT_TRUE(find_interior_defects(r.field, p, g).empty());
  EXPECT_EQ(find_boundary_defects(r.field, p, g, bd).size(), 2u);
  EXPECT_EQ(degree_conserved(r.field, p, g, bd), std::optional<bool>(true));
}
