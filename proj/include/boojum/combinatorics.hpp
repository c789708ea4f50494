#pragma once

// Degree combinatorics of boundary and interior defects: C_alpha, the
// configuration cost and its exhaustive minimisation.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <utility>
#include <vector>

#include "boojum/core.hpp"

namespace boojum {

/// C_alpha = (alpha/pi)^2 + (1 - alpha/pi)^2.
inline double c_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < pi / 2)) throw DomainError("c_alpha: alpha must lie in (0, pi/2)");
  const double a = alpha / pi;
  return a * a + (1.0 - a) * (1.0 - a);
}

/// Anchoring exponent separating interior vortices from boojum pairs.
inline double threshold_s(double alpha) { return 1.0 / (2.0 * c_alpha(alpha)); }

/// Boundary vortices n0_j and boojum pairs (n-_i, n+_i). Stored sorted so that
/// equal multisets compare equal.
class DegreeConfig {
 public:
  DegreeConfig() = default;
  DegreeConfig(std::vector<int> boundary_vortices, std::vector<std::pair<int, int>> boojum_pairs)
      : vortices_(std::move(boundary_vortices)), pairs_(std::move(boojum_pairs)) {
    std::sort(vortices_.begin(), vortices_.end());
    std::sort(pairs_.begin(), pairs_.end());
  }

  const std::vector<int>& boundary_vortices() const { return vortices_; }
  const std::vector<std::pair<int, int>>& boojum_pairs() const { return pairs_; }

  int total_degree() const {
    int d = 0;
    for (int n : vortices_) d += n;
    for (auto [m, p] : pairs_) d += m + p;
    return d;
  }
  /// Pairs count as two defects.
  int defect_count() const { return static_cast<int>(vortices_.size() + 2 * pairs_.size()); }

  friend bool operator==(const DegreeConfig&, const DegreeConfig&) = default;
  friend auto operator<=>(const DegreeConfig&, const DegreeConfig&) = default;

 private:
  std::vector<int> vortices_;
  std::vector<std::pair<int, int>> pairs_;
};

/// sum (n0)^2 + sum [(n- + alpha/pi)^2 + (n+ - alpha/pi)^2].
inline double config_cost(const DegreeConfig& c, double alpha) {
  const double a = alpha / pi;
  double cost = 0.0;
  for (int n : c.boundary_vortices()) cost += static_cast<double>(n) * n;
  for (auto [m, p] : c.boojum_pairs()) cost += (m + a) * (m + a) + (p - a) * (p - a);
  return cost;
}

/// The same cost written per defect with its boojum number tau:
/// sum (n_l - tau_l alpha/pi)^2, light boojums tau = -1, heavy tau = +1.
inline double config_cost_tau(const DegreeConfig& c, double alpha) {
  const double a = alpha / pi;
  double cost = 0.0;
  auto term = [](double n, double tau, double w) { return (n - tau * w) * (n - tau * w); };
  for (int n : c.boundary_vortices()) cost += term(n, 0.0, a);
  for (auto [m, p] : c.boojum_pairs()) cost += term(m, -1.0, a) + term(p, 1.0, a);
  return cost;
}

/// Negates every degree and swaps the roles inside each pair.
inline DegreeConfig negated(const DegreeConfig& c) {
  std::vector<int> v;
  for (int n : c.boundary_vortices()) v.push_back(-n);
  std::vector<std::pair<int, int>> p;
  for (auto [m, q] : c.boojum_pairs()) p.emplace_back(-q, -m);
  return DegreeConfig(std::move(v), std::move(p));
}

struct MinConfigResult {
  double min_cost = 0.0;
  std::vector<DegreeConfig> minimizers;
};

/// Exhaustive search over all multisets of boundary vortices and boojum pairs
/// with at most `max_defects` defects (a pair counts twice) and degrees in
/// [-degree_bound, degree_bound] summing to D. Ties within 1e-12. A boundary
/// vortex of degree 0 is no defect and is not enumerated.
inline MinConfigResult min_config(int D, double alpha, int max_defects = 6, int degree_bound = 4) {
  if (max_defects < 0 || degree_bound < 0) throw ConfigError("min_config: negative budget");
  if (max_defects > 6 || degree_bound > 4) throw ConfigError("min_config: search budget exceeded (6 defects, |degree| <= 4)");
  c_alpha(alpha);  // domain check

  std::vector<int> vortex_values;
  for (int n = -degree_bound; n <= degree_bound; ++n)
    if (n != 0) vortex_values.push_back(n);
  std::vector<std::pair<int, int>> pair_values;
  for (int m = -degree_bound; m <= degree_bound; ++m)
    for (int p = -degree_bound; p <= degree_bound; ++p) pair_values.emplace_back(m, p);

  MinConfigResult res;
  res.min_cost = INFINITY;
  std::vector<int> vs;
  std::vector<std::pair<int, int>> ps;

  auto consider = [&] {
    DegreeConfig c(vs, ps);
    if (c.total_degree() != D) return;
    const double cost = config_cost(c, alpha);
    if (cost < res.min_cost - 1e-12) {
      res.min_cost = cost;
      res.minimizers.clear();
      res.minimizers.push_back(std::move(c));
    } else if (std::abs(cost - res.min_cost) <= 1e-12) {
      res.minimizers.push_back(std::move(c));
    }
  };

  // Non-decreasing index sequences enumerate multisets once each.
  auto pairs_rec = [&](auto&& self, std::size_t start, int budget) -> void {
    consider();
    if (budget < 2) return;
    for (std::size_t k = start; k < pair_values.size(); ++k) {
      ps.push_back(pair_values[k]);
      self(self, k, budget - 2);
      ps.pop_back();
    }
  };
  auto vortex_rec = [&](auto&& self, std::size_t start, int budget) -> void {
    pairs_rec(pairs_rec, 0, budget);
    if (budget < 1) return;
    for (std::size_t k = start; k < vortex_values.size(); ++k) {
      vs.push_back(vortex_values[k]);
      self(self, k, budget - 1);
      vs.pop_back();
    }
  };
  vortex_rec(vortex_rec, 0, max_defects);
  std::sort(res.minimizers.begin(), res.minimizers.end());
  return res;
}

}  // namespace boojum
