#pragma once

// Expansion and merging of defect balls with per-kind growth rates, and the
// resulting lower-bound coefficient of ln(sigma/eps).
//
// A common clock t drives every ball: boundary balls keep R/r = t, interior
// balls keep (R/r)^s = t. Boundary balls are arcs of half-length R around a
// boundary angle; interior balls are Euclidean disks. Contacts are found
// event by event from the closed-form radius laws.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "boojum/combinatorics.hpp"
#include "boojum/core.hpp"

namespace boojum {

/// Boojum numbers of a merged group left {-1, 0, 1}.
struct AlternationError : DataError {
  using DataError::DataError;
};

enum class BallKind { boundary, interior };

inline const char* to_string(BallKind k) { return k == BallKind::boundary ? "boundary" : "interior"; }

struct DefectBall {
  BallKind kind = BallKind::interior;
  double angle = 0.0;  // boundary centre
  cplx point = 0.0;    // interior centre
  double radius = 0.0;
  double seed = 0.0;
  int degree = 0;
  int tau = 0;

  static DefectBall boundary(double angle, double seed, int degree, int tau) {
    DefectBall b;
    b.kind = BallKind::boundary;
    b.angle = angle;
    b.radius = seed;
    b.seed = seed;
    b.degree = degree;
    b.tau = tau;
    return b;
  }
  static DefectBall interior(cplx point, double seed, int degree) {
    DefectBall b;
    b.kind = BallKind::interior;
    b.point = point;
    b.radius = seed;
    b.seed = seed;
    b.degree = degree;
    return b;
  }

  /// Centre as a point of the closed disk.
  cplx centre() const { return kind == BallKind::boundary ? std::polar(1.0, angle) : point; }
};

enum class GrowthEvent { expand, merge };

inline const char* to_string(GrowthEvent e) { return e == GrowthEvent::expand ? "expand" : "merge"; }

struct GrowthStep {
  double time = 0.0;
  GrowthEvent event = GrowthEvent::expand;
  DefectBall ball;
};

struct GrowthReport {
  std::vector<GrowthStep> history;
  std::vector<DefectBall> final_balls;
  double final_time = 1.0;
  int D_b = 0;
  int D_int = 0;
  double coefficient = 0.0;
};

namespace detail {

inline double radius_at(const DefectBall& b, double t, double s) {
  return b.kind == BallKind::boundary ? b.seed * t : b.seed * std::pow(t, 1.0 / s);
}

/// Distance used for contact between two balls.
inline double ball_distance(const DefectBall& a, const DefectBall& b) {
  if (a.kind == BallKind::boundary && b.kind == BallKind::boundary) return std::abs(wrap_pi(a.angle - b.angle));
  return std::abs(a.centre() - b.centre());
}

/// Earliest t >= t_now with R_a(t) + R_b(t) >= d.
inline double contact_time(const DefectBall& a, const DefectBall& b, double t_now, double s) {
  const double d = ball_distance(a, b);
  if (a.kind == b.kind) {
    const double sum = a.seed + b.seed;
    const double t = a.kind == BallKind::boundary ? d / sum : std::pow(d / sum, s);
    return std::max(t, t_now);
  }
  const DefectBall& bb = a.kind == BallKind::boundary ? a : b;
  const DefectBall& ii = a.kind == BallKind::boundary ? b : a;
  auto f = [&](double t) { return bb.seed * t + ii.seed * std::pow(t, 1.0 / s) - d; };
  if (f(t_now) >= 0.0) return t_now;
  double lo = t_now;
  double hi = std::max(2.0 * t_now, 1.0);
  while (f(hi) < 0.0) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  return hi;
}

/// Time at which an interior ball reaches the boundary circle.
inline double wall_time(const DefectBall& b, double t_now, double s) {
  const double gap = 1.0 - std::abs(b.point);
  return std::max(std::pow(gap / b.seed, s), t_now);
}

inline void check_tau(int tau) {
  if (tau < -1 || tau > 1)
    throw AlternationError("merge: boojum numbers sum to " + std::to_string(tau) +
                           ", light and heavy boojums do not alternate");
}

}  // namespace detail

/// Merges a connected group of touching balls at clock t. Same-kind groups
/// add radii and seeds; groups containing a boundary ball (or an interior
/// ball that touched the wall, passed with wall_contact) become a boundary ball
/// with R = sum R_b + sum R_int^s and r = sum r_b + sum r_int^s. The radius is
/// inflated when needed to enclose every member, keeping the clock ratio.
inline DefectBall merge(std::span<const DefectBall> touching, double t, double s, bool wall_contact = false) {
  if (touching.empty()) throw ConfigError("merge: empty group");
  if (!(s > 0.0 && s <= 1.0)) throw ConfigError("merge: s must lie in (0, 1]");
  int degree = 0;
  int tau = 0;
  bool any_boundary = wall_contact;
  for (const auto& b : touching) {
    degree += b.degree;
    tau += b.tau;
    any_boundary = any_boundary || b.kind == BallKind::boundary;
  }
  detail::check_tau(tau);

  DefectBall out;
  out.degree = degree;
  out.tau = tau;
  if (!any_boundary) {
    out.kind = BallKind::interior;
    double R = 0.0;
    double r = 0.0;
    cplx c = 0.0;
    for (const auto& b : touching) {
      R += b.radius;
      r += b.seed;
      c += b.radius * b.point;
    }
    c /= R;
    double need = 0.0;
    for (const auto& b : touching) need = std::max(need, std::abs(c - b.point) + b.radius);
    out.point = c;
    if (need > R * (1.0 + 1e-12)) {
      R = need;
      r = R * std::pow(t, -1.0 / s);
    }
    out.radius = R;
    out.seed = r;
    return out;
  }

  out.kind = BallKind::boundary;
  double R = 0.0;
  double r = 0.0;
  // Angles unwrapped around the first member.
  const double ref = touching.front().kind == BallKind::boundary ? touching.front().angle
                                                                  : std::arg(touching.front().point);
  std::vector<double> ang;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  double weighted = 0.0;
  double weight = 0.0;
  for (const auto& b : touching) {
    const double a = b.kind == BallKind::boundary ? b.angle : std::arg(b.point);
    const double u = ref + wrap_pi(a - ref);
    ang.push_back(u);
    if (b.kind == BallKind::boundary) {
      R += b.radius;
      r += b.seed;
      lo = std::min(lo, u - b.radius);
      hi = std::max(hi, u + b.radius);
    } else {
      const double Rs = std::pow(b.radius, s);
      R += Rs;
      r += std::pow(b.seed, s);
      weighted += Rs * u;
      weight += Rs;
    }
  }
  double centre;
  if (std::isfinite(lo)) {
    centre = 0.5 * (lo + hi);
  } else {
    centre = weighted / weight;
  }
  double need = std::isfinite(lo) ? 0.5 * (hi - lo) : 0.0;
  const cplx q = std::polar(1.0, centre);
  for (std::size_t k = 0; k < touching.size(); ++k) {
    const auto& b = touching[k];
    if (b.kind == BallKind::interior) need = std::max(need, std::abs(q - b.point) + b.radius);
  }
  if (need > R * (1.0 + 1e-12)) {
    R = need;
    r = R / t;
  }
  out.angle = wrap_two_pi(centre);
  out.radius = R;
  out.seed = r;
  return out;
}

/// mu = min(2 C_alpha, 1/s).
inline double growth_mu(double s, double alpha) { return std::min(2.0 * c_alpha(alpha), 1.0 / s); }

/// pi (mu s |D_b| + |D_int|).
inline double lower_bound_coefficient(int D_b, int D_int, double s, double alpha) {
  return pi * (growth_mu(s, alpha) * s * std::abs(D_b) + std::abs(D_int));
}

inline double lower_bound_coefficient(const GrowthReport& report, const ModelParams& params) {
  return lower_bound_coefficient(report.D_b, report.D_int, params.s(), params.alpha());
}

/// Runs the expansion from clock t = 1 (every ball must start with R = r)
/// until sum_b R + sum_int R^s reaches sigma^s / 2.
inline GrowthReport grow(std::vector<DefectBall> balls, double sigma, const ModelParams& params) {
  const double s = params.s();
  if (!(sigma > 0.0)) throw ConfigError("grow: sigma must be positive");
  for (const auto& b : balls) {
    if (!(b.seed > 0.0)) throw ConfigError("grow: ball seed sizes must be positive");
    if (std::abs(b.radius - b.seed) > 1e-12 * b.seed) throw ConfigError("grow: balls must start with radius equal to seed");
    if (b.kind == BallKind::interior) {
      if (!(std::abs(b.point) + b.radius < 1.0)) throw ConfigError("grow: interior ball meets the boundary");
      if (b.tau != 0) throw ConfigError("grow: interior balls carry no boojum number");
    } else if (b.tau < -1 || b.tau > 1) {
      throw ConfigError("grow: boojum number outside {-1, 0, 1}");
    }
  }
  for (std::size_t a = 0; a < balls.size(); ++a)
    for (std::size_t b = a + 1; b < balls.size(); ++b)
      if (detail::ball_distance(balls[a], balls[b]) < balls[a].radius + balls[b].radius)
        throw ConfigError("grow: initial balls overlap");

  GrowthReport rep;
  double t = 1.0;
  const double target = 0.5 * std::pow(sigma, s);
  auto exit_time = [&] {
    double rate = 0.0;
    for (const auto& b : balls) rate += b.kind == BallKind::boundary ? b.seed : std::pow(b.seed, s);
    return rate > 0.0 ? std::max(target / rate, t) : std::numeric_limits<double>::infinity();
  };
  auto advance = [&](double t_new) {
    t = t_new;
    for (auto& b : balls) {
      b.radius = detail::radius_at(b, t, s);
      rep.history.push_back({t, GrowthEvent::expand, b});
    }
  };

  while (!balls.empty()) {
    const std::size_t n = balls.size();
    double t_contact = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < n; ++a) {
      if (balls[a].kind == BallKind::interior)
        t_contact = std::min(t_contact, detail::wall_time(balls[a], t, s));
      for (std::size_t b = a + 1; b < n; ++b)
        t_contact = std::min(t_contact, detail::contact_time(balls[a], balls[b], t, s));
    }
    const double t_exit = exit_time();
    if (t_exit <= t_contact) {
      advance(t_exit);
      break;
    }
    advance(t_contact);

    // Contact graph at this instant; ties within 1e-12 t merge together.
    const double tie = 1e-12 * t;
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    std::vector<char> wall(n, 0);
    for (std::size_t a = 0; a < n; ++a) {
      if (balls[a].kind == BallKind::interior && detail::wall_time(balls[a], t, s) <= t + tie) wall[a] = 1;
      for (std::size_t b = a + 1; b < n; ++b)
        if (detail::contact_time(balls[a], balls[b], t, s) <= t + tie) parent[find(a)] = find(b);
    }
    std::vector<DefectBall> next;
    std::vector<char> done(n, 0);
    for (std::size_t a = 0; a < n; ++a) {
      if (done[a]) continue;
      std::vector<DefectBall> group;
      bool touches_wall = false;
      for (std::size_t b = a; b < n; ++b)
        if (find(b) == find(a)) {
          group.push_back(balls[b]);
          touches_wall = touches_wall || wall[b];
          done[b] = 1;
        }
      if (group.size() == 1 && !touches_wall) {
        next.push_back(group.front());
        continue;
      }
      DefectBall m = merge(group, t, s, touches_wall);
      rep.history.push_back({t, GrowthEvent::merge, m});
      next.push_back(m);
    }
    balls = std::move(next);
  }

  rep.final_time = t;
  rep.final_balls = balls;
  for (const auto& b : balls) (b.kind == BallKind::boundary ? rep.D_b : rep.D_int) += b.degree;
  rep.coefficient = lower_bound_coefficient(rep, params);
  return rep;
}

/// max | R/r - t | over boundary balls and | (R/r)^s - t | over interior ones.
inline double clock_ratio_error(std::span<const DefectBall> balls, double t, double s) {
  double e = 0.0;
  for (const auto& b : balls) {
    const double ratio = b.radius / b.seed;
    const double v = b.kind == BallKind::boundary ? ratio : std::pow(ratio, s);
    e = std::max(e, std::abs(v - t) / t);
  }
  return e;
}

}  // namespace boojum
