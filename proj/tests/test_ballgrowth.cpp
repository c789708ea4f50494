#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "boojum/ballgrowth.hpp"

using namespace boojum;

namespace {

int total_degree(const std::vector<DefectBall>& balls) {
  int d = 0;
  for (const auto& b : balls) d += b.degree;
  return d;
}

}  // namespace

TEST(Merge, BoundaryPair) {
  const double t = 3.0;
  auto a = DefectBall::boundary(1.0, 0.01, 0, -1);
  auto b = DefectBall::boundary(1.0 + 0.09, 0.02, 1, 1);
  a.radius = a.seed * t;
  b.radius = b.seed * t;
  const std::vector<DefectBall> g{a, b};
  const auto m = merge(g, t, 0.72);
  EXPECT_EQ(m.kind, BallKind::boundary);
  EXPECT_NEAR(m.radius, a.radius + b.radius, 1e-15);
  EXPECT_NEAR(m.seed, a.seed + b.seed, 1e-15);
  EXPECT_EQ(m.degree, 1);
  EXPECT_EQ(m.tau, 0);
  EXPECT_NEAR(m.angle, 0.5 * ((1.0 - a.radius) + (1.09 + b.radius)), 1e-12);
}

TEST(Merge, InteriorPairCancels) {
  const double s = 0.8;
  const double t = 2.0;
  auto a = DefectBall::interior(cplx(0.1, 0.0), 0.02, 1);
  auto b = DefectBall::interior(cplx(0.16, 0.0), 0.02, -1);
  a.radius = b.radius = 0.02 * std::pow(t, 1.0 / s);
  const std::vector<DefectBall> g{a, b};
  const auto m = merge(g, t, s);
  EXPECT_EQ(m.kind, BallKind::interior);
  EXPECT_EQ(m.degree, 0);
  EXPECT_EQ(m.tau, 0);
  EXPECT_NEAR(m.radius, a.radius + b.radius, 1e-15);
}

TEST(Merge, InteriorWithEmptyBoundaryBall) {
  const double s = 0.72;
  auto in = DefectBall::interior(cplx(0.99, 0.0), 0.01, 1);
  auto empty = DefectBall::boundary(0.0, 0.0, 0, 0);
  const std::vector<DefectBall> g{in, empty};
  const auto m = merge(g, 1.0, s);
  EXPECT_EQ(m.kind, BallKind::boundary);
  EXPECT_NEAR(m.radius, std::pow(0.01, s), 1e-15);
  EXPECT_EQ(m.degree, 1);
  EXPECT_EQ(m.tau, 0);
  EXPECT_NEAR(m.angle, 0.0, 1e-15);
}

TEST(Merge, AlternationViolation) {
  const std::vector<DefectBall> g{DefectBall::boundary(0.0, 0.01, 1, 1), DefectBall::boundary(0.02, 0.01, 1, 1)};
  EXPECT_THROW(merge(g, 1.0, 0.72), AlternationError);
  EXPECT_THROW(merge({}, 1.0, 0.72), ConfigError);
}

TEST(Grow, AntipodalBoojumPair) {
  const double eps = 0.02;
  const ModelParams p(eps, 0.72, pi / 3, 1);
  const double seed = std::pow(eps, 0.72);
  std::vector<DefectBall> balls{DefectBall::boundary(0.0, seed, 1, 1), DefectBall::boundary(pi, seed, 0, -1)};
  const auto rep = grow(balls, 0.5, p);
  EXPECT_EQ(rep.final_balls.size(), 2u);
  for (const auto& h : rep.history) EXPECT_EQ(h.event, GrowthEvent::expand);
  EXPECT_EQ(rep.D_b, 1);
  EXPECT_EQ(rep.D_int, 0);
  EXPECT_NEAR(growth_mu(0.72, pi / 3), 10.0 / 9.0, 1e-15);
  EXPECT_NEAR(rep.coefficient, 0.8 * pi, 1e-12);
  // Exit when the boundary radii add up to sigma^s / 2.
  double sum = 0.0;
  for (const auto& b : rep.final_balls) sum += b.radius;
  EXPECT_NEAR(sum, 0.5 * std::pow(0.5, 0.72), 1e-12);
  // Pure pair regime: 2 pi s C_alpha |D|.
  EXPECT_NEAR(rep.coefficient, two_pi * 0.72 * c_alpha(pi / 3), 1e-12);
}

TEST(Grow, SingleInteriorBall) {
  const double eps = 0.02;
  const ModelParams p(eps, 1.0, pi / 3, 1);
  const auto rep = grow({DefectBall::interior(0.0, eps, 1)}, 0.5, p);
  EXPECT_EQ(rep.D_int, 1);
  EXPECT_EQ(rep.D_b, 0);
  EXPECT_NEAR(rep.coefficient, pi, 1e-12);
  ASSERT_EQ(rep.final_balls.size(), 1u);
  EXPECT_EQ(rep.final_balls[0].kind, BallKind::interior);
}

TEST(Grow, MixedMergeNearWall) {
  const double eps = 0.01;
  const double s = 0.72;
  const ModelParams p(eps, s, pi / 3, 1);
  const double bseed = std::pow(eps, s);
  std::vector<DefectBall> balls{DefectBall::boundary(0.0, bseed, 0, -1), DefectBall::boundary(0.6, bseed, 1, 1),
                                DefectBall::interior(std::polar(0.97, 3.0), eps, 0)};
  balls[2].degree = 0;
  const auto rep = grow(balls, 1.0, p);
  bool mixed = false;
  for (const auto& h : rep.history)
    if (h.event == GrowthEvent::merge && h.ball.kind == BallKind::boundary && std::abs(wrap_pi(h.ball.angle - 3.0)) < 0.2)
      mixed = true;
  EXPECT_TRUE(mixed);
  for (const auto& b : rep.final_balls) EXPECT_EQ(b.kind, BallKind::boundary);
  EXPECT_LT(clock_ratio_error(rep.final_balls, rep.final_time, s), 1e-10);
}

TEST(Grow, Errors) {
  const ModelParams p(0.02, 0.72, pi / 3, 1);
  EXPECT_THROW(grow({DefectBall::boundary(0.0, 0.1, 0, -1), DefectBall::boundary(0.15, 0.1, 1, 1)}, 0.5, p),
               ConfigError);
  EXPECT_THROW(grow({DefectBall::interior(0.0, 0.02, 1)}, 0.0, p), ConfigError);
  EXPECT_THROW(grow({DefectBall::interior(0.99, 0.02, 1)}, 0.5, p), ConfigError);
  EXPECT_THROW(grow({DefectBall::boundary(0.0, 0.0, 1, 1)}, 0.5, p), ConfigError);
}

TEST(Grow, FuzzDegreeConservationAndClock) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double s = 0.6 + 0.4 * unif(rng);
    const double eps = 0.005 + 0.02 * unif(rng);
    const ModelParams p(eps, s, pi / 3, 0);
    std::vector<DefectBall> balls;
    // Alternating boojums on the circle, interior vortices inside.
    const int pairs = 1 + static_cast<int>(unif(rng) * 3);
    const double offset = two_pi * unif(rng);
    for (int k = 0; k < 2 * pairs; ++k) {
      const double a = offset + two_pi * (k + 0.3 * unif(rng)) / (2 * pairs);
      const bool light = k % 2 == 0;
      balls.push_back(DefectBall::boundary(wrap_two_pi(a), std::pow(eps, s), light ? 0 : 1, light ? -1 : 1));
    }
    const int nv = static_cast<int>(unif(rng) * 4);
    for (int k = 0; k < nv; ++k) {
      const cplx at = std::polar(0.85 * std::sqrt(unif(rng)), two_pi * unif(rng));
      const auto b = DefectBall::interior(at, eps, unif(rng) < 0.5 ? 1 : -1);
      bool clear = std::abs(at) + eps < 1.0;
      for (const auto& o : balls)
        if (std::abs(o.centre() - at) < o.radius + eps + 1e-9) clear = false;
      if (clear) balls.push_back(b);
    }
    const int D = total_degree(balls);
    const auto rep = grow(balls, 0.3 + 0.7 * unif(rng), p);
    EXPECT_EQ(total_degree(rep.final_balls), D);
    EXPECT_EQ(rep.D_b + rep.D_int, D);
    for (const auto& h : rep.history) EXPECT_GE(h.ball.radius, h.ball.seed * (1 - 1e-12));
    EXPECT_LT(clock_ratio_error(rep.final_balls, rep.final_time, s), 1e-10);
    for (const auto& b : rep.final_balls)
      if (b.kind == BallKind::boundary) {
        EXPECT_GE(b.tau, -1);
        EXPECT_LE(b.tau, 1);
      }
  }
}

TEST(LowerBound, Examples) {
  EXPECT_NEAR(lower_bound_coefficient(1, 0, 0.72, pi / 3), 0.8 * pi, 1e-14);
  EXPECT_NEAR(lower_bound_coefficient(0, 2, 0.72, pi / 3), 2 * pi, 1e-14);
  EXPECT_EQ(lower_bound_coefficient(0, 0, 0.72, pi / 3), 0.0);
  // Strong anchoring side: mu = 1/s caps the boundary contribution at pi.
  EXPECT_NEAR(lower_bound_coefficient(1, 0, 1.0, pi / 3), pi, 1e-14);
}
