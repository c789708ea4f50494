#pragma once

// Renormalized energy of light/heavy boojum pairs on the unit disk with
// equivariant boundary data, its analytic gradient, the conjugate phase and
// a verified minimiser over boojum placements.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "boojum/core.hpp"

namespace boojum {

struct BoojumConfiguration {
  std::vector<double> light_angles;
  std::vector<double> heavy_angles;

  std::size_t size() const { return light_angles.size(); }

  /// Light and heavy angles alternate around the circle.
  bool interleaved() const {
    struct P {
      double a;
      bool light;
    };
    std::vector<P> all;
    for (double a : light_angles) all.push_back({wrap_two_pi(a), true});
    for (double a : heavy_angles) all.push_back({wrap_two_pi(a), false});
    if (all.size() < 2) return false;
    std::sort(all.begin(), all.end(), [](const P& x, const P& y) { return x.a < y.a; });
    for (std::size_t k = 0; k < all.size(); ++k)
      if (all[k].light == all[(k + 1) % all.size()].light) return false;
    return true;
  }
};

/// Chord length |e^{ia} - e^{ib}|.
inline double chord(double a, double b) { return 2.0 * std::abs(std::sin(0.5 * (a - b))); }

namespace detail {

inline void check_config(const BoojumConfiguration& c, int degree) {
  if (degree < 1) throw ConfigError("renormalized energy needs degree >= 1");
  if (c.light_angles.size() != static_cast<std::size_t>(degree) || c.heavy_angles.size() != c.light_angles.size())
    throw ConfigError("renormalized energy: need degree light and degree heavy angles");
  std::vector<double> all(c.light_angles);
  all.insert(all.end(), c.heavy_angles.begin(), c.heavy_angles.end());
  for (std::size_t a = 0; a < all.size(); ++a)
    for (std::size_t b = a + 1; b < all.size(); ++b)
      if (!(chord(all[a], all[b]) > 1e-14)) throw DomainError("renormalized energy: coincident defects (singular configuration)");
}

}  // namespace detail

/// -2 sum_{i!=j} [(a/pi) ln|y_i - y_j| + (1 - a/pi) ln|h_i - h_j|] - 2 sum_{i,j} ln|y_i - h_j|.
inline double renorm_energy_disk(const BoojumConfiguration& c, double alpha, int degree) {
  detail::check_config(c, degree);
  const double w = alpha / pi;
  const auto n = static_cast<std::size_t>(degree);
  double e = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      e -= 4.0 * (w * std::log(chord(c.light_angles[i], c.light_angles[j])) +
                  (1.0 - w) * std::log(chord(c.heavy_angles[i], c.heavy_angles[j])));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) e -= 2.0 * std::log(chord(c.light_angles[i], c.heavy_angles[j]));
  return e;
}

/// Derivatives with respect to the light angles, then the heavy angles.
inline std::vector<double> renorm_gradient_disk(const BoojumConfiguration& c, double alpha, int degree) {
  detail::check_config(c, degree);
  const double w = alpha / pi;
  const auto n = static_cast<std::size_t>(degree);
  // d/da ln chord(a, b) = cot((a - b)/2) / 2
  auto dl = [](double a, double b) { return 0.5 / std::tan(0.5 * (a - b)); };
  std::vector<double> g(2 * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) {
        g[i] -= 4.0 * w * dl(c.light_angles[i], c.light_angles[j]);
        g[n + i] -= 4.0 * (1.0 - w) * dl(c.heavy_angles[i], c.heavy_angles[j]);
      }
      g[i] -= 2.0 * dl(c.light_angles[i], c.heavy_angles[j]);
      g[n + i] -= 2.0 * dl(c.heavy_angles[i], c.light_angles[j]);
    }
  }
  return g;
}

/// Phi(x) = sum_j [(a/pi) 2 ln|x - y_j| + (1 - a/pi) 2 ln|x - h_j|].
inline double conjugate_phase_disk(const BoojumConfiguration& c, double alpha, int degree, cplx x) {
  detail::check_config(c, degree);
  if (std::abs(x) > 1.0 + 1e-12) throw DomainError("conjugate phase: point outside the closed disk");
  const double w = alpha / pi;
  double phi = 0.0;
  auto term = [&](double angle, double weight) {
    const double d = std::abs(x - std::polar(1.0, angle));
    if (!(d > 0.0)) throw DomainError("conjugate phase: evaluation at a defect");
    phi += 2.0 * weight * std::log(d);
  };
  for (double a : c.light_angles) term(a, w);
  for (double a : c.heavy_angles) term(a, 1.0 - w);
  return phi;
}

struct RenormMinimum {
  BoojumConfiguration config;  // first light angle pinned at 0
  double value = 0.0;
  /// Best value over the 5 degree grid and whether the optimum is no worse.
  double grid_value = 0.0;
  bool grid_verified = false;
  int starts = 0;
};

namespace detail {

/// Coordinate descent: each coordinate problem is strictly convex between its
/// neighbours (every term is -c ln chord, c > 0), solved by safeguarded Newton.
inline double coordinate_descent(BoojumConfiguration& c, double alpha, int degree, int sweeps, double tol) {
  const double w = alpha / pi;
  const auto n = static_cast<std::size_t>(degree);
  // Other defects and their weights seen from coordinate (light?, k).
  auto partners = [&](bool light, std::size_t k, std::vector<double>& ang, std::vector<double>& wt) {
    ang.clear();
    wt.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != k) {
        ang.push_back(light ? c.light_angles[j] : c.heavy_angles[j]);
        wt.push_back(4.0 * (light ? w : 1.0 - w));
      }
      ang.push_back(light ? c.heavy_angles[j] : c.light_angles[j]);
      wt.push_back(2.0);
    }
  };
  std::vector<double> ang;
  std::vector<double> wt;
  double max_move = 0.0;
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    max_move = 0.0;
    for (int pass = 0; pass < 2; ++pass) {
      const bool light = pass == 0;
      for (std::size_t k = light ? 1 : 0; k < n; ++k) {
        double& x = light ? c.light_angles[k] : c.heavy_angles[k];
        partners(light, k, ang, wt);
        // Bracket: the open arc between the nearest partners on either side.
        double lo = -two_pi;
        double hi = two_pi;
        for (double a : ang) {
          const double d = wrap_two_pi(a - x);  // partner ahead by d
          hi = std::min(hi, d);
          lo = std::max(lo, d - two_pi);
        }
        auto deriv = [&](double off, double& f1, double& f2) {
          f1 = 0.0;
          f2 = 0.0;
          for (std::size_t q = 0; q < ang.size(); ++q) {
            const double h = 0.5 * (-(wrap_two_pi(ang[q] - x) - off));
            const double sn = std::sin(h);
            f1 -= wt[q] * 0.5 * std::cos(h) / sn;
            f2 += wt[q] * 0.25 / (sn * sn);
          }
        };
        double a = lo;
        double b = hi;
        double off = 0.0;
        for (int it = 0; it < 100; ++it) {
          double f1;
          double f2;
          deriv(off, f1, f2);
          if (f1 > 0.0) b = off; else a = off;
          double next = off - f1 / f2;
          if (!(next > a && next < b)) next = 0.5 * (a + b);
          const double step = std::abs(next - off);
          off = next;
          if (step < 1e-15) break;
        }
        max_move = std::max(max_move, std::abs(off));
        x = wrap_two_pi(x + off);
      }
    }
    if (max_move < tol) break;
  }
  return max_move;
}

/// Best value over all configurations on the grid of step 2 pi / m with the
/// first light at 0. With `alternating` the kinds alternate around the circle,
/// otherwise light and heavy sets are arbitrary disjoint subsets.
inline double grid_minimum(int degree, double alpha, int m, bool alternating = true) {
  const double w = alpha / pi;
  std::vector<double> lc(static_cast<std::size_t>(m));  // ln chord by index difference
  for (int k = 1; k < m; ++k) lc[static_cast<std::size_t>(k)] = std::log(chord(0.0, two_pi * k / m));
  auto L = [&](int a, int b) { return lc[static_cast<std::size_t>(std::abs(a - b))]; };
  const int n = degree;
  std::vector<int> light(static_cast<std::size_t>(n), 0);
  std::vector<int> heavy(static_cast<std::size_t>(n), 0);
  double best = INFINITY;
  auto eval = [&] {
    double e = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        e -= 4.0 * (w * L(light[static_cast<std::size_t>(i)], light[static_cast<std::size_t>(j)]) +
                    (1.0 - w) * L(heavy[static_cast<std::size_t>(i)], heavy[static_cast<std::size_t>(j)]));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) e -= 2.0 * L(light[static_cast<std::size_t>(i)], heavy[static_cast<std::size_t>(j)]);
    best = std::min(best, e);
  };

  if (alternating) {
    // Sorted positions q_0 = 0 < q_1 < ... < q_{2n-1}; even slots light.
    auto rec = [&](auto&& self, int k, int start) -> void {
      if (k == 2 * n) {
        eval();
        return;
      }
      for (int p = start; p <= m - (2 * n - k); ++p) {
        (k % 2 == 0 ? light : heavy)[static_cast<std::size_t>(k / 2)] = p;
        self(self, k + 1, p + 1);
      }
    };
    rec(rec, 1, 1);
    return best;
  }

  std::vector<char> used(static_cast<std::size_t>(m), 0);
  used[0] = 1;
  auto heavy_rec = [&](auto&& self, int k, int start) -> void {
    if (k == n) {
      eval();
      return;
    }
    for (int p = start; p < m; ++p) {
      if (used[static_cast<std::size_t>(p)]) continue;
      heavy[static_cast<std::size_t>(k)] = p;
      self(self, k + 1, p + 1);
    }
  };
  auto light_rec = [&](auto&& self, int k, int start) -> void {
    if (k == n) {
      heavy_rec(heavy_rec, 0, 1);
      return;
    }
    for (int p = start; p < m; ++p) {
      light[static_cast<std::size_t>(k)] = p;
      used[static_cast<std::size_t>(p)] = 1;
      self(self, k + 1, p + 1);
      used[static_cast<std::size_t>(p)] = 0;
    }
  };
  light_rec(light_rec, 1, 1);
  return best;
}

}  // namespace detail

/// Multi-start coordinate descent over the 2D angles (first light pinned at
/// 0), then checked against the 5 degree grid. Descent never moves a defect
/// past a neighbour, so the cyclic order of the start is kept. With
/// `alternating` (the admissible case: the boundary phase switches branch at
/// every boojum) only alternating orders are started; otherwise every order
/// is tried.
inline RenormMinimum minimize_positions(int degree, double alpha, int restarts = 16, std::uint64_t rng_seed = 1,
                                        bool alternating = true) {
  if (degree < 1 || degree > 3) throw ConfigError("minimize_positions: degree must be 1, 2 or 3");
  if (!(alpha > 0.0 && alpha < pi / 2)) throw ConfigError("minimize_positions: alpha must lie in (0, pi/2)");
  if (restarts < 0) throw ConfigError("minimize_positions: negative restart count");
  const int n = degree;
  const int slots = 2 * n - 1;
  std::mt19937_64 gen(rng_seed);
  auto unit = [&gen] { return static_cast<double>(gen() >> 11) * 0x1.0p-53; };

  // Bit k of `mask` marks slot k + 1 (after the pinned light) as light.
  unsigned alternating_mask = 0;
  for (int k = 0; k < slots; ++k)
    if ((k + 1) % 2 == 0) alternating_mask |= 1u << k;

  std::vector<BoojumConfiguration> starts;
  for (unsigned mask = 0; mask < (1u << slots); ++mask) {
    if (std::popcount(mask) != n - 1) continue;
    if (alternating && mask != alternating_mask) continue;
    BoojumConfiguration c;
    c.light_angles.push_back(0.0);
    for (int k = 0; k < slots; ++k) {
      const double a = two_pi * (k + 1) / (2 * n) + 0.05 * (unit() - 0.5) * two_pi / (2 * n);
      ((mask >> k) & 1u ? c.light_angles : c.heavy_angles).push_back(a);
    }
    starts.push_back(std::move(c));
  }
  for (int r = 0; r < restarts; ++r) {
    std::vector<double> a(static_cast<std::size_t>(slots));
    for (auto& x : a) x = two_pi * (0.02 + 0.96 * unit());
    std::sort(a.begin(), a.end());
    BoojumConfiguration c;
    c.light_angles.push_back(0.0);
    if (alternating) {
      for (std::size_t k = 0; k < a.size(); ++k) ((k + 1) % 2 == 0 ? c.light_angles : c.heavy_angles).push_back(a[k]);
    } else {
      std::vector<std::size_t> idx(a.size());
      for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = k;
      std::shuffle(idx.begin(), idx.end(), gen);
      for (std::size_t k = 0; k < idx.size(); ++k)
        (k + 1 < static_cast<std::size_t>(n) ? c.light_angles : c.heavy_angles).push_back(a[idx[k]]);
    }
    starts.push_back(std::move(c));
  }

  RenormMinimum best;
  best.value = INFINITY;
  for (auto& c : starts) {
    ++best.starts;
    try {
      detail::coordinate_descent(c, alpha, degree, 20000, 1e-13);
      const double v = renorm_energy_disk(c, alpha, degree);
      if (std::isfinite(v) && v < best.value) {
        best.value = v;
        best.config = c;
      }
    } catch (const DomainError&) {
      // landed on a singular configuration; the next start takes over
    }
  }
  if (!std::isfinite(best.value)) throw DataError("minimize_positions: every start ended on a singular configuration");
  std::sort(best.config.light_angles.begin() + 1, best.config.light_angles.end());
  std::sort(best.config.heavy_angles.begin(), best.config.heavy_angles.end());
  best.grid_value = detail::grid_minimum(degree, alpha, 72, alternating);
  best.grid_verified = best.value <= best.grid_value + 1e-9;
  return best;
}

}  // namespace boojum
