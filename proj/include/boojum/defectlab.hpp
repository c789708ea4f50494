#pragma once

// Defect detection and classification on a field snapshot: interior vortices
// by low-modulus clusters and loop windings, boundary defects by the
// anchoring density and the phase branch on either side.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "boojum/core.hpp"
#include "boojum/energy.hpp"

namespace boojum {

enum class DefectKind { interior_vortex, light_boojum, heavy_boojum, boundary_vortex, unclassified };

inline const char* to_string(DefectKind k) {
  switch (k) {
    case DefectKind::interior_vortex: return "interior_vortex";
    case DefectKind::light_boojum: return "light_boojum";
    case DefectKind::heavy_boojum: return "heavy_boojum";
    case DefectKind::boundary_vortex: return "boundary_vortex";
    case DefectKind::unclassified: return "unclassified";
  }
  return "unknown";
}

inline DefectKind defect_kind_from_string(const std::string& s) {
  if (s == "interior_vortex") return DefectKind::interior_vortex;
  if (s == "light_boojum") return DefectKind::light_boojum;
  if (s == "heavy_boojum") return DefectKind::heavy_boojum;
  if (s == "boundary_vortex") return DefectKind::boundary_vortex;
  if (s == "unclassified") return DefectKind::unclassified;
  throw ConfigError("unknown defect kind '" + s + "'");
}

/// One detected defect. Boundary defects sit at r = 1. `confidence` is the
/// minimum |u| over an interior cluster or the maximum W over a boundary one.
/// Unclassified boundary clusters carry degree 0 and tau 0.
struct DefectRecord {
  DefectKind kind = DefectKind::interior_vortex;
  double r = 0.0;
  double theta = 0.0;
  int degree = 0;
  int tau = 0;
  double confidence = 0.0;

  bool on_boundary() const { return kind != DefectKind::interior_vortex; }
};

struct DetectorSettings {
  double modulus_threshold = 0.4;
  double w_threshold = 0.09;
  /// <= 0 selects default_branch_tolerance(alpha).
  double branch_tolerance = 0.0;
  /// Interior clusters closer than this many eps to the boundary are ignored.
  double boundary_clearance = 5.0;
};

// ---------------------------------------------------------------------------
// Winding numbers
// ---------------------------------------------------------------------------

/// Closed polygon of n points on the circle |x - c| = rho, counterclockwise.
inline std::vector<cplx> circle_loop(cplx c, double rho, int n) {
  std::vector<cplx> pts(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) pts[static_cast<std::size_t>(k)] = c + std::polar(rho, two_pi * k / n);
  return pts;
}

/// Degree of u along a closed loop of sample points; |u| must exceed
/// min_modulus on every point.
inline int winding_number(const ComplexField& field, const PolarGrid& grid, std::span<const cplx> loop,
                          double min_modulus = 0.3) {
  require_shape(field, grid, "winding_number");
  if (loop.size() < 3) throw ConfigError("winding_number: loop needs at least three points");
  std::vector<cplx> vals(loop.size());
  for (std::size_t k = 0; k < loop.size(); ++k) {
    vals[k] = sample(field, grid, loop[k]);
    if (!(std::abs(vals[k]) > min_modulus))
      throw DataError("winding_number: loop passes through a near-zero of u");
  }
  return static_cast<int>(std::lround(winding_of_samples(vals)));
}

/// Sample count resolving a loop of the given length at half a cell.
inline int loop_resolution(const PolarGrid& grid, double length) {
  return std::max(64, static_cast<int>(std::ceil(length / (0.5 * grid.dr()))));
}

// ---------------------------------------------------------------------------
// Interior vortices
// ---------------------------------------------------------------------------

inline std::vector<DefectRecord> find_interior_defects(const ComplexField& field, const ModelParams& params,
                                                       const PolarGrid& grid, const DetectorSettings& cfg = {}) {
  require_shape(field, grid, "find_interior_defects");
  const int nr = grid.n_r();
  const int nt = grid.n_theta();
  const double eps = params.epsilon();
  const double r_max = 1.0 - cfg.boundary_clearance * eps;

  std::vector<char> low(grid.size(), 0);
  for (int i = 0; i < nr; ++i) {
    if (grid.r(i) >= r_max) break;
    for (int j = 0; j < nt; ++j)
      if (std::abs(field.at(i, j)) < cfg.modulus_threshold) low[grid.index(i, j)] = 1;
  }

  std::vector<char> seen(grid.size(), 0);
  std::vector<DefectRecord> out;
  std::vector<std::pair<int, int>> stack;
  std::vector<std::pair<int, int>> cluster;
  for (int i0 = 0; i0 < nr; ++i0)
    for (int j0 = 0; j0 < nt; ++j0) {
      const std::size_t id0 = grid.index(i0, j0);
      if (!low[id0] || seen[id0]) continue;
      cluster.clear();
      stack.assign(1, {i0, j0});
      seen[id0] = 1;
      while (!stack.empty()) {
        auto [i, j] = stack.back();
        stack.pop_back();
        cluster.emplace_back(i, j);
        auto visit = [&](int a, int b) {
          if (a < 0 || a >= nr) return;
          const std::size_t id = grid.index(a, b);
          if (low[id] && !seen[id]) {
            seen[id] = 1;
            stack.emplace_back(a, grid.wrap_j(b));
          }
        };
        for (int di = -1; di <= 1; ++di)
          for (int dj = -1; dj <= 1; ++dj)
            if (di != 0 || dj != 0) visit(i + di, j + dj);
        if (i == 0) {
          visit(0, grid.opposite(j));
          visit(0, grid.opposite(j) + 1);
          visit(0, grid.opposite(j) - 1);
        }
      }

      // Centroid weighted by depth below the threshold.
      cplx c = 0.0;
      double wsum = 0.0;
      double min_mod = INFINITY;
      for (auto [i, j] : cluster) {
        const double m = std::abs(field.at(i, j));
        const double w = grid.cell_area(i) * (cfg.modulus_threshold - m);
        c += w * grid.point(i, j);
        wsum += w;
        min_mod = std::min(min_mod, m);
      }
      c /= wsum;
      double extent = 0.0;
      for (auto [i, j] : cluster) extent = std::max(extent, std::abs(grid.point(i, j) - c));

      const double room = 1.0 - std::abs(c) - grid.dr();
      double rho = std::max(5.0 * eps, extent + 3.0 * grid.dr());
      rho = std::min(rho, room);
      int degree = 0;
      bool ok = false;
      for (double f : {1.0, 1.3, 0.8, 1.6}) {
        const double rr = std::min(rho * f, room);
        if (!(rr > extent)) continue;
        try {
          degree = winding_number(field, grid, circle_loop(c, rr, loop_resolution(grid, two_pi * rr)));
          ok = true;
          break;
        } catch (const DataError&) {
        }
      }
      if (!ok || degree == 0) continue;
      DefectRecord rec;
      rec.kind = DefectKind::interior_vortex;
      rec.r = std::abs(c);
      rec.theta = wrap_two_pi(std::arg(c));
      rec.degree = degree;
      rec.tau = 0;
      rec.confidence = min_mod;
      out.push_back(rec);
    }
  std::sort(out.begin(), out.end(), [](const DefectRecord& a, const DefectRecord& b) {
    return a.theta != b.theta ? a.theta < b.theta : a.r < b.r;
  });
  return out;
}

// ---------------------------------------------------------------------------
// Boundary defects
// ---------------------------------------------------------------------------

enum class Branch { plus, minus, neither };

inline double default_branch_tolerance(double alpha) {
  return std::min({0.3, 0.5 * std::sin(alpha), 0.5 * std::sin(pi / 2 - alpha)});
}

/// Which anchoring minimum u_b g_b^* sits near: phase +alpha (plus), -alpha
/// (minus), or neither within tolerance a0.
inline Branch phase_branch(cplx u_b, cplx g_b, double alpha, double a0) {
  const double d = std::arg(u_b * std::conj(g_b));
  if (std::abs(d - alpha) < a0) return Branch::plus;
  if (std::abs(d + alpha) < a0) return Branch::minus;
  return Branch::neither;
}

namespace detail {

struct BoundaryCluster {
  int start = 0;   // first node (may exceed n_theta after unwrapping)
  int length = 0;  // node count
};

/// Maximal cyclic runs of flagged nodes, merged across short gaps.
inline std::vector<BoundaryCluster> boundary_clusters(const std::vector<char>& flag, int merge_gap_nodes) {
  const int n = static_cast<int>(flag.size());
  int anchor = -1;
  for (int j = 0; j < n; ++j)
    if (!flag[static_cast<std::size_t>(j)]) {
      anchor = j;
      break;
    }
  if (anchor < 0) return {{0, n}};
  std::vector<BoundaryCluster> runs;
  for (int k = 1; k <= n; ++k) {
    const int j = (anchor + k) % n;
    if (!flag[static_cast<std::size_t>(j)]) continue;
    if (!runs.empty() && runs.back().start + runs.back().length == anchor + k) {
      ++runs.back().length;
    } else {
      runs.push_back({anchor + k, 1});
    }
  }
  if (runs.size() <= 1) return runs;
  // Gap i sits after run i (cyclically). Merge every short gap.
  const std::size_t m = runs.size();
  std::vector<char> short_gap(m, 0);
  for (std::size_t i = 0; i < m; ++i) {
    const int end = runs[i].start + runs[i].length;
    const int next = i + 1 < m ? runs[i + 1].start : runs[0].start + n;
    short_gap[i] = (next - end) < merge_gap_nodes;
  }
  std::size_t first = 0;
  while (first < m && short_gap[(first + m - 1) % m]) ++first;
  if (first == m) return {{0, n}};
  std::vector<BoundaryCluster> merged;
  for (std::size_t c = 0; c < m; ++c) {
    const std::size_t i = (first + c) % m;
    BoundaryCluster r = runs[i];
    if (i < first) r.start += n;
    const bool continues = c > 0 && short_gap[(i + m - 1) % m];
    if (continues) {
      merged.back().length = r.start + r.length - merged.back().start;
    } else {
      merged.push_back(r);
    }
  }
  for (auto& r : merged) r.start %= n;
  std::sort(merged.begin(), merged.end(), [](auto& a, auto& b) { return a.start < b.start; });
  return merged;
}

}  // namespace detail

inline std::vector<DefectRecord> find_boundary_defects(const ComplexField& field, const ModelParams& params,
                                                       const PolarGrid& grid, const BoundaryData& bd,
                                                       const DetectorSettings& cfg = {}) {
  require_shape(field, grid, "find_boundary_defects");
  require_boundary(bd, grid, "find_boundary_defects");
  const int nt = grid.n_theta();
  const double dth = grid.dtheta();
  const double alpha = params.alpha();
  const double core = params.boundary_core();
  const double a0 = cfg.branch_tolerance > 0.0 ? cfg.branch_tolerance : default_branch_tolerance(alpha);

  std::vector<double> W(static_cast<std::size_t>(nt));
  std::vector<char> flag(static_cast<std::size_t>(nt));
  for (int j = 0; j < nt; ++j) {
    W[static_cast<std::size_t>(j)] = anchoring_density(field.trace(j), bd.g(j), alpha);
    flag[static_cast<std::size_t>(j)] = W[static_cast<std::size_t>(j)] > cfg.w_threshold;
  }
  const int merge_nodes = static_cast<int>(std::ceil(4.0 * core / dth));
  const auto clusters = detail::boundary_clusters(flag, merge_nodes);
  const auto nc = static_cast<int>(clusters.size());

  std::vector<DefectRecord> out;
  if (nc == 0) return out;

  auto node_angle = [&](int j) { return j * dth; };
  // Unwrapped angular extent of every cluster.
  std::vector<double> lo(static_cast<std::size_t>(nc));
  std::vector<double> hi(static_cast<std::size_t>(nc));
  std::vector<double> centre(static_cast<std::size_t>(nc));
  std::vector<double> peak(static_cast<std::size_t>(nc));
  for (int c = 0; c < nc; ++c) {
    const auto& cl = clusters[static_cast<std::size_t>(c)];
    lo[static_cast<std::size_t>(c)] = node_angle(cl.start);
    hi[static_cast<std::size_t>(c)] = node_angle(cl.start + cl.length - 1);
    double wsum = 0.0;
    double tsum = 0.0;
    double pk = 0.0;
    for (int k = 0; k < cl.length; ++k) {
      const double w = W[static_cast<std::size_t>(grid.wrap_j(cl.start + k))];
      wsum += w;
      tsum += w * node_angle(cl.start + k);
      pk = std::max(pk, w);
    }
    centre[static_cast<std::size_t>(c)] = tsum / wsum;
    peak[static_cast<std::size_t>(c)] = pk;
  }

  const bool whole_circle = nc == 1 && clusters[0].length >= nt;
  for (int c = 0; c < nc; ++c) {
    const auto uc = static_cast<std::size_t>(c);
    DefectRecord rec;
    rec.r = 1.0;
    rec.theta = wrap_two_pi(centre[uc]);
    rec.confidence = peak[uc];
    rec.kind = DefectKind::unclassified;
    if (whole_circle) {
      out.push_back(rec);
      continue;
    }
    // Clean gaps to the neighbouring clusters.
    const auto prev = static_cast<std::size_t>((c + nc - 1) % nc);
    const auto next = static_cast<std::size_t>((c + 1) % nc);
    double gap_before = nc == 1 ? two_pi - (hi[uc] - lo[uc]) : wrap_two_pi(lo[uc] - hi[prev]);
    double gap_after = nc == 1 ? gap_before : wrap_two_pi(lo[next] - hi[uc]);

    auto vote = [&](double from, double to) {
      int plus = 0;
      int minus = 0;
      int neither = 0;
      const int j_from = static_cast<int>(std::ceil(from / dth));
      int j_to = static_cast<int>(std::floor(to / dth));
      if (j_to < j_from) j_to = j_from;
      for (int j = j_from; j <= j_to; ++j) {
        const int jj = grid.wrap_j(j);
        switch (phase_branch(field.trace(jj), bd.g(jj), alpha, a0)) {
          case Branch::plus: ++plus; break;
          case Branch::minus: ++minus; break;
          case Branch::neither: ++neither; break;
        }
      }
      if (plus > minus && plus > neither) return Branch::plus;
      if (minus > plus && minus > neither) return Branch::minus;
      return Branch::neither;
    };
    auto offsets = [&](double gap) {
      const double outer = std::min(10.0 * core, 0.5 * gap);
      const double inner = std::min(6.0 * core, 0.6 * outer);
      return std::pair{inner, outer};
    };
    const auto [in_b, out_b] = offsets(gap_before);
    const auto [in_a, out_a] = offsets(gap_after);
    const Branch before = vote(lo[uc] - out_b, lo[uc] - in_b);
    const Branch after = vote(hi[uc] + in_a, hi[uc] + out_a);
    if (before == Branch::neither || after == Branch::neither) {
      out.push_back(rec);
      continue;
    }
    if (before == Branch::plus && after == Branch::minus) {
      rec.kind = DefectKind::light_boojum;
      rec.tau = -1;
    } else if (before == Branch::minus && after == Branch::plus) {
      rec.kind = DefectKind::heavy_boojum;
      rec.tau = 1;
    } else {
      rec.kind = DefectKind::boundary_vortex;
      rec.tau = 0;
    }
    const double b_before = before == Branch::plus ? alpha : -alpha;
    const double b_after = after == Branch::plus ? alpha : -alpha;

    // Degree: phase increment along a half circle around the defect, closed
    // along the boundary by the branch-consistent extension.
    const double half_width = std::max(centre[uc] - lo[uc], hi[uc] - centre[uc]);
    const double room = std::min(centre[uc] - lo[uc] + gap_before, hi[uc] - centre[uc] + gap_after);
    const cplx q = std::polar(1.0, centre[uc]);
    const cplx tangent = cplx(0.0, 1.0) * q;
    bool ok = false;
    for (double f : {1.0, 1.4, 0.7, 2.0}) {
      double delta = 2.0 * std::asin(std::min(1.0, 0.5 * 8.0 * core * f));
      delta = std::min(delta, 0.8 * room);
      delta = std::max(delta, std::min(half_width + 2.0 * core, 0.8 * room));
      if (delta >= pi * 0.9) delta = pi * 0.9;
      const double rho = 2.0 * std::sin(0.5 * delta);
      const double t0 = 0.5 * delta;
      const double t1 = pi - 0.5 * delta;
      const int n = loop_resolution(grid, rho * (t1 - t0));
      std::vector<cplx> vals(static_cast<std::size_t>(n + 1));
      bool clean = true;
      for (int k = 0; k <= n; ++k) {
        const double t = t0 + (t1 - t0) * k / n;
        const cplx x = q + rho * tangent * std::polar(1.0, t);
        vals[static_cast<std::size_t>(k)] = sample(field, grid, x);
        if (!(std::abs(vals[static_cast<std::size_t>(k)]) > 0.3)) clean = false;
      }
      if (!clean) continue;
      double inc = 0.0;
      for (int k = 0; k < n; ++k)
        inc += std::arg(vals[static_cast<std::size_t>(k + 1)] / vals[static_cast<std::size_t>(k)]);
      const double th_after = centre[uc] + delta;
      const double th_before = centre[uc] - delta;
      const double g_after = bd.gamma_at(th_after);
      const double g_before = bd.gamma_at(th_before);
      const double dev_after = wrap_pi(std::arg(vals.front()) - g_after - b_after);
      const double dev_before = wrap_pi(std::arg(vals.back()) - g_before - b_before);
      const double closing = (g_after - g_before) + (b_after - b_before) + dev_after - dev_before;
      rec.degree = static_cast<int>(std::lround((inc + closing) / two_pi));
      ok = true;
      break;
    }
    if (!ok) {
      rec.kind = DefectKind::unclassified;
      rec.tau = 0;
      rec.degree = 0;
    }
    out.push_back(rec);
  }
  std::sort(out.begin(), out.end(), [](const DefectRecord& a, const DefectRecord& b) { return a.theta < b.theta; });
  return out;
}

// ---------------------------------------------------------------------------
// Bookkeeping
// ---------------------------------------------------------------------------

/// Interior degrees plus boundary degrees equal D; any unclassified cluster
/// makes the check fail.
inline bool check_degree_sum(std::span<const DefectRecord> defects, int degree) {
  int total = 0;
  for (const auto& d : defects) {
    if (d.kind == DefectKind::unclassified) return false;
    total += d.degree;
  }
  return total == degree;
}

/// Light and heavy boojums alternate around the circle (boundary vortices and
/// interior defects are skipped).
inline bool boojums_alternate(std::span<const DefectRecord> defects) {
  std::vector<DefectRecord> b;
  for (const auto& d : defects)
    if (d.kind == DefectKind::light_boojum || d.kind == DefectKind::heavy_boojum) b.push_back(d);
  std::sort(b.begin(), b.end(), [](auto& x, auto& y) { return x.theta < y.theta; });
  if (b.size() % 2 != 0) return false;
  for (std::size_t k = 0; k < b.size(); ++k)
    if (b[k].kind == b[(k + 1) % b.size()].kind) return false;
  return true;
}

struct DefectSummary {
  bool degree_sum_ok = false;
  int n_interior = 0;
  int n_light = 0;
  int n_heavy = 0;
  int n_bvortex = 0;
  int n_unclassified = 0;
};

struct DefectReport {
  std::vector<DefectRecord> defects;  // boundary first (by angle), then interior
  DefectSummary summary;

  std::vector<DefectRecord> of_kind(DefectKind k) const {
    std::vector<DefectRecord> v;
    for (const auto& d : defects)
      if (d.kind == k) v.push_back(d);
    return v;
  }
};

inline DefectSummary summarize(std::span<const DefectRecord> defects, int degree) {
  DefectSummary s;
  for (const auto& d : defects) {
    switch (d.kind) {
      case DefectKind::interior_vortex: ++s.n_interior; break;
      case DefectKind::light_boojum: ++s.n_light; break;
      case DefectKind::heavy_boojum: ++s.n_heavy; break;
      case DefectKind::boundary_vortex: ++s.n_bvortex; break;
      case DefectKind::unclassified: ++s.n_unclassified; break;
    }
  }
  s.degree_sum_ok = check_degree_sum(defects, degree);
  return s;
}

inline DefectReport analyze_defects(const ComplexField& field, const ModelParams& params, const PolarGrid& grid,
                                    const BoundaryData& bd, const DetectorSettings& cfg = {}) {
  DefectReport rep;
  rep.defects = find_boundary_defects(field, params, grid, bd, cfg);
  for (auto& d : find_interior_defects(field, params, grid, cfg)) rep.defects.push_back(d);
  rep.summary = summarize(rep.defects, bd.degree());
  return rep;
}

/// Winding of u on the circle r = radius, or nothing when |u| <= 0.5 there.
inline std::optional<int> circle_winding(const ComplexField& field, const PolarGrid& grid, double radius) {
  try {
    return winding_number(field, grid, circle_loop(0.0, radius, loop_resolution(grid, two_pi * radius)), 0.5);
  } catch (const DataError&) {
    return std::nullopt;
  }
}

/// Winding on r = 1 - 5 eps plus all boundary defect degrees equals D.
/// Nothing when the winding circle passes through a low-modulus region.
inline std::optional<bool> degree_conserved(const ComplexField& field, const ModelParams& params,
                                            const PolarGrid& grid, const BoundaryData& bd,
                                            const DetectorSettings& cfg = {}) {
  const auto w = circle_winding(field, grid, 1.0 - 5.0 * params.epsilon());
  if (!w) return std::nullopt;
  int total = *w;
  for (const auto& d : find_boundary_defects(field, params, grid, bd, cfg)) {
    if (d.kind == DefectKind::unclassified) return false;
    total += d.degree;
  }
  return total == bd.degree();
}

}  // namespace boojum
