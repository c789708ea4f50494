#pragma once

// End-to-end runs: seed, relax, classify defects, compare boundary defect
// positions with the renormalized-energy optimum, and write artifacts.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "boojum/combinatorics.hpp"
#include "boojum/config.hpp"
#include "boojum/defectlab.hpp"
#include "boojum/energy.hpp"
#include "boojum/flow.hpp"
#include "boojum/io.hpp"
#include "boojum/renorm.hpp"
#include "boojum/seeds.hpp"

namespace boojum {

namespace fs = std::filesystem;

/// |D| unit vortices: the centre for |D| = 1, otherwise a ring of radius 1/2.
inline void default_vortex_layout(int degree, std::vector<cplx>& positions, std::vector<int>& degrees) {
  positions.clear();
  degrees.clear();
  const int n = std::abs(degree);
  const int sign = degree > 0 ? 1 : -1;
  for (int k = 0; k < n; ++k) {
    positions.push_back(n == 1 ? cplx(0.0, 0.0) : std::polar(0.5, two_pi * k / n));
    degrees.push_back(sign);
  }
}

/// 2D equally spaced boundary angles starting at 0 (light first).
inline std::vector<double> default_boojum_angles(int degree) {
  std::vector<double> a;
  for (int k = 0; k < 2 * degree; ++k) a.push_back(k * pi / degree);
  return a;
}

inline BoundaryData boundary_for(const RunConfig& cfg, const PolarGrid& grid) {
  if (cfg.boundary_file.empty()) return equivariant_boundary(cfg.degree, grid.n_theta());
  return boundary_from_csv(read_text(cfg.boundary_file), cfg.degree, grid);
}

inline ComplexField make_seed(SeedKind kind, const RunConfig& cfg, const ModelParams& params, const PolarGrid& grid,
                              const BoundaryData& bd) {
  switch (kind) {
    case SeedKind::vortex: {
      std::vector<cplx> pos;
      std::vector<int> deg;
      default_vortex_layout(params.degree(), pos, deg);
      return vortex_seed(pos, deg, params, grid, bd);
    }
    case SeedKind::boojum: {
      const auto a = default_boojum_angles(params.degree());
      return boojum_seed(a, params, grid, bd);
    }
    case SeedKind::random: return random_seed(cfg.rng_seed, cfg.amplitude, grid);
    case SeedKind::both: break;
  }
  throw ConfigError("make_seed: 'both' is not a single seed kind");
}

struct RenormComparison {
  bool available = false;
  double detected_value = 0.0;
  double optimal_value = 0.0;
  std::vector<double> spacings;  // consecutive boundary defect gaps, cyclic
};

/// Only meaningful when exactly D light and D heavy boojums were found.
inline RenormComparison compare_with_renorm(const DefectReport& rep, const ModelParams& params) {
  RenormComparison c;
  const int D = params.degree();
  if (D < 1 || D > 3 || rep.summary.n_light != D || rep.summary.n_heavy != D || rep.summary.n_interior != 0 ||
      rep.summary.n_bvortex != 0 || rep.summary.n_unclassified != 0)
    return c;
  BoojumConfiguration conf;
  std::vector<double> all;
  for (const auto& d : rep.defects) {
    if (d.kind == DefectKind::light_boojum) conf.light_angles.push_back(d.theta);
    if (d.kind == DefectKind::heavy_boojum) conf.heavy_angles.push_back(d.theta);
    if (d.kind == DefectKind::light_boojum || d.kind == DefectKind::heavy_boojum) all.push_back(wrap_two_pi(d.theta));
  }
  std::sort(all.begin(), all.end());
  for (std::size_t k = 0; k < all.size(); ++k)
    c.spacings.push_back(k + 1 < all.size() ? all[k + 1] - all[k] : all.front() + two_pi - all[k]);
  try {
    c.detected_value = renorm_energy_disk(conf, params.alpha(), D);
  } catch (const DomainError&) {
    return c;
  }
  c.optimal_value = minimize_positions(D, params.alpha()).value;
  c.available = true;
  return c;
}

struct CompetitorOutcome {
  SeedKind seed = SeedKind::vortex;
  RelaxResult relaxed;
  EnergyBreakdown energy;
  DefectReport defects;
  RenormComparison renorm;
};

enum class Regime { interior, boojum, mixed };

inline const char* to_string(Regime r) {
  switch (r) {
    case Regime::interior: return "interior";
    case Regime::boojum: return "boojum";
    case Regime::mixed: return "mixed";
  }
  return "?";
}

inline Regime classify_regime(const DefectSummary& s, int degree) {
  const int D = std::abs(degree);
  const int boundary = s.n_light + s.n_heavy + s.n_bvortex + s.n_unclassified;
  if (s.n_interior == D && boundary == 0) return Regime::interior;
  if (s.n_interior == 0 && s.n_light == D && s.n_heavy == D && boundary == 2 * D) return Regime::boojum;
  return Regime::mixed;
}

inline RelaxOptions relax_options(const RunConfig& cfg) {
  RelaxOptions o;
  o.tol = cfg.tol;
  o.max_steps = static_cast<long>(cfg.max_steps);
  o.max_seconds = cfg.max_seconds;
  o.checkpoint_every = static_cast<long>(cfg.checkpoint_every);
  return o;
}

inline CompetitorOutcome run_competitor(SeedKind kind, const RunConfig& cfg, const ModelParams& params,
                                        const PolarGrid& grid, const BoundaryData& bd,
                                        const std::string& checkpoint_dir = "") {
  CompetitorOutcome out;
  out.seed = kind;
  RelaxOptions o = relax_options(cfg);
  if (!checkpoint_dir.empty() && o.checkpoint_every > 0)
    o.checkpoint = [&](long n, const ComplexField& f) {
      save_field((fs::path(checkpoint_dir) / ("checkpoint_" + std::to_string(n))).string(), f, grid, params);
    };
  out.relaxed = relax(make_seed(kind, cfg, params, grid, bd), params, grid, bd, o);
  out.energy = total_energy(out.relaxed.field, params, grid, bd);
  out.defects = analyze_defects(out.relaxed.field, params, grid, bd);
  out.renorm = compare_with_renorm(out.defects, params);
  return out;
}

inline json outcome_json(const CompetitorOutcome& c) {
  json j{{"seed", to_string(c.seed)},
         {"energy", to_json(c.energy)},
         {"converged", c.relaxed.report.converged},
         {"steps", c.relaxed.report.steps},
         {"final_residual", c.relaxed.report.final_residual},
         {"peak_modulus", c.relaxed.report.peak_modulus},
         {"final_max_modulus", c.relaxed.field.max_modulus()},
         {"defects", to_json(c.defects)}};
  if (c.renorm.available)
    j["renorm"] = {{"detected_value", c.renorm.detected_value},
                   {"optimal_value", c.renorm.optimal_value},
                   {"spacings", c.renorm.spacings}};
  return j;
}

inline void write_competitor(const fs::path& dir, const CompetitorOutcome& c, const ModelParams& params,
                             const PolarGrid& grid, int image_size) {
  fs::create_directories(dir);
  save_field((dir / "field").string(), c.relaxed.field, grid, params);
  write_text((dir / "energy_trace.csv").string(), energy_trace_csv(c.relaxed.report));
  write_text((dir / "defects.json").string(), to_json(c.defects).dump(2) + "\n");
  write_text((dir / "director.csv").string(), export_director(c.relaxed.field, grid));
  write_text((dir / "modulus.ppm").string(),
             render_field(c.relaxed.field, grid, RenderMode::modulus, image_size).ppm());
  write_text((dir / "director.ppm").string(),
             render_field(c.relaxed.field, grid, RenderMode::director, image_size).ppm());
  write_text((dir / "summary.json").string(), outcome_json(c).dump(2) + "\n");
}

struct SimulationResult {
  std::vector<CompetitorOutcome> competitors;  // in seed order vortex, boojum, random
  std::size_t selected = 0;                    // lowest final energy

  const CompetitorOutcome& best() const { return competitors.at(selected); }
  bool all_converged() const {
    return std::all_of(competitors.begin(), competitors.end(),
                       [](const CompetitorOutcome& c) { return c.relaxed.report.converged; });
  }
};

inline std::vector<SeedKind> seeds_of(SeedKind k) {
  if (k == SeedKind::both) return {SeedKind::vortex, SeedKind::boojum};
  return {k};
}

/// Runs every requested seed. With `output` non-empty, writes one
/// subdirectory per seed plus the winner's defects and a top-level summary.
inline SimulationResult simulate(const RunConfig& cfg, const std::string& output) {
  const ModelParams params = cfg.params();
  const PolarGrid grid = cfg.grid();
  const BoundaryData bd = boundary_for(cfg, grid);
  SimulationResult res;
  for (SeedKind k : seeds_of(cfg.seed)) {
    const std::string sub = output.empty() ? "" : (fs::path(output) / to_string(k)).string();
    if (!sub.empty()) fs::create_directories(sub);
    res.competitors.push_back(run_competitor(k, cfg, params, grid, bd, sub));
  }
  for (std::size_t k = 1; k < res.competitors.size(); ++k)
    if (res.competitors[k].energy.total < res.competitors[res.selected].energy.total) res.selected = k;

  if (!output.empty()) {
    const fs::path root(output);
    json comp = json::array();
    for (const auto& c : res.competitors) {
      write_competitor(root / to_string(c.seed), c, params, grid, cfg.image_size);
      comp.push_back(outcome_json(c));
    }
    const auto& b = res.best();
    write_text((root / "defects.json").string(), to_json(b.defects).dump(2) + "\n");
    json top{{"params", params_to_json(params, grid)},
             {"selected", to_string(b.seed)},
             {"regime", to_string(classify_regime(b.defects.summary, params.degree()))},
             {"threshold_s", threshold_s(params.alpha())},
             {"converged", res.all_converged()},
             {"competitors", comp}};
    write_text((root / "summary.json").string(), top.dump(2) + "\n");
  }
  return res;
}

// ---------------------------------------------------------------------------
// Sweep
// ---------------------------------------------------------------------------

struct SweepRow {
  double s = 0.0;
  double alpha = 0.0;
  std::optional<double> e_vortex;
  std::optional<double> e_boojum;
  std::string selected;
  DefectSummary census;
  std::string regime;
  std::string status = "ok";
};

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out =
      "s,alpha,e_vortex,e_boojum,selected,n_interior,n_light,n_heavy,n_bvortex,n_unclassified,degree_sum_ok,regime,"
      "status\n";
  auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  for (const auto& r : rows) {
    std::string status = r.status;
    std::replace(status.begin(), status.end(), ',', ';');
    std::replace(status.begin(), status.end(), '\n', ' ');
    out += format_double(r.s) + ',' + format_double(r.alpha) + ',' + opt(r.e_vortex) + ',' + opt(r.e_boojum) + ',' +
           r.selected + ',' + std::to_string(r.census.n_interior) + ',' + std::to_string(r.census.n_light) + ',' +
           std::to_string(r.census.n_heavy) + ',' + std::to_string(r.census.n_bvortex) + ',' +
           std::to_string(r.census.n_unclassified) + ',' + (r.census.degree_sum_ok ? "1" : "0") + ',' + r.regime +
           ',' + status + '\n';
  }
  return out;
}

/// One point per (alpha, s) pair, rows sorted by alpha then s. Failures of a
/// point are recorded in its status column and do not stop the sweep.
inline std::vector<SweepRow> run_sweep(const RunConfig& base, const std::string& output, int workers = 1) {
  std::vector<double> ss = base.sweep_s;
  std::vector<double> as = base.sweep_alpha.empty() ? std::vector<double>{base.alpha} : base.sweep_alpha;
  std::sort(ss.begin(), ss.end());
  std::sort(as.begin(), as.end());
  ss.erase(std::unique(ss.begin(), ss.end()), ss.end());
  as.erase(std::unique(as.begin(), as.end()), as.end());

  std::vector<SweepRow> rows;
  for (double a : as)
    for (double s : ss) {
      SweepRow r;
      r.s = s;
      r.alpha = a;
      rows.push_back(r);
    }

  auto run_point = [&](std::size_t idx) {
    SweepRow& row = rows[idx];
    try {
      RunConfig cfg = base;
      cfg.s = row.s;
      cfg.alpha = row.alpha;
      cfg.seed = SeedKind::both;
      const std::string dir = output.empty() ? "" : (fs::path(output) / ("point_" + std::to_string(idx))).string();
      const SimulationResult res = simulate(cfg, dir);
      for (const auto& c : res.competitors) {
        if (c.seed == SeedKind::vortex) row.e_vortex = c.energy.total;
        if (c.seed == SeedKind::boojum) row.e_boojum = c.energy.total;
      }
      const auto& b = res.best();
      row.selected = to_string(b.seed);
      row.census = b.defects.summary;
      row.regime = to_string(classify_regime(row.census, cfg.degree));
      if (!res.all_converged()) row.status = "not converged";
    } catch (const std::exception& e) {
      row.status = std::string("error: ") + e.what();
    }
  };

  const int n = std::max(1, std::min<int>(workers, static_cast<int>(rows.size())));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < rows.size(); k = next++) run_point(k);
  };
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < n; ++k) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  if (!output.empty()) {
    fs::create_directories(output);
    write_text((fs::path(output) / "sweep.csv").string(), sweep_csv(rows));
  }
  return rows;
}

/// Boojum-to-interior transition within one alpha column; found only when the
/// column splits cleanly into a boojum block below an interior block.
struct RegimeFlip {
  bool found = false;
  double s_below = 0.0;  // largest boojum-regime s
  double s_above = 0.0;  // smallest interior-regime s
};

inline RegimeFlip find_flip(const std::vector<SweepRow>& rows, double alpha) {
  std::vector<const SweepRow*> col;
  for (const auto& r : rows)
    if (r.alpha == alpha && r.status == "ok") col.push_back(&r);
  RegimeFlip f;
  for (std::size_t k = 0; k + 1 < col.size(); ++k) {
    if (col[k]->regime != "boojum" || col[k + 1]->regime != "interior") continue;
    bool lower_ok = std::all_of(col.begin(), col.begin() + static_cast<long>(k) + 1,
                                [](const SweepRow* r) { return r->regime == "boojum"; });
    bool upper_ok = std::all_of(col.begin() + static_cast<long>(k) + 1, col.end(),
                                [](const SweepRow* r) { return r->regime == "interior"; });
    if (lower_ok && upper_ok) {
      f.found = true;
      f.s_below = col[k]->s;
      f.s_above = col[k + 1]->s;
    }
  }
  return f;
}

// ---------------------------------------------------------------------------
// Seed-energy scaling
// ---------------------------------------------------------------------------

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
};

inline LinearFit least_squares(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw ConfigError("least_squares: need at least two paired samples");
  const double n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
  }
  if (sxx == 0.0) throw ConfigError("least_squares: abscissae coincide");
  return {sxy / sxx, my - sxy / sxx * mx};
}

struct SeedEnergyPoint {
  double epsilon = 0.0;
  EnergyBreakdown energy;
  int n_r = 0;
};

/// Smallest multiple of 32 radial cells keeping the trace problem convex
/// with a margin, at least `min_n_r`.
inline int grid_for(const ModelParams& p, int min_n_r) {
  int n = std::max(32, min_n_r);
  while (!trace_problem_convex(PolarGrid(n, 4 * n), p) || p.upsilon() / n > 0.5)
    n += 32;
  return n;
}

/// Energy of the unrelaxed boojum seed (relaxed = false) or of the relaxed
/// vortex seed (relaxed = true) for each epsilon.
inline std::vector<SeedEnergyPoint> seed_energies(std::span<const double> eps_list, double s, double alpha,
                                                  int degree, bool relaxed, int min_n_r = 128) {
  std::vector<SeedEnergyPoint> out;
  for (double eps : eps_list) {
    const ModelParams p(eps, s, alpha, degree);
    const int nr = grid_for(p, min_n_r);
    const PolarGrid grid(nr, 4 * nr);
    const BoundaryData bd = equivariant_boundary(degree, grid.n_theta());
    SeedEnergyPoint pt;
    pt.epsilon = eps;
    pt.n_r = nr;
    if (relaxed) {
      std::vector<cplx> pos;
      std::vector<int> deg;
      default_vortex_layout(degree, pos, deg);
      const auto r = relax(vortex_seed(pos, deg, p, grid, bd), p, grid, bd);
      pt.energy = total_energy(r.field, p, grid, bd);
    } else {
      const auto a = default_boojum_angles(degree);
      pt.energy = total_energy(boojum_seed(a, p, grid, bd), p, grid, bd);
    }
    out.push_back(pt);
  }
  return out;
}

inline LinearFit log_slope(const std::vector<SeedEnergyPoint>& pts) {
  std::vector<double> x;
  std::vector<double> y;
  for (const auto& p : pts) {
    x.push_back(std::abs(std::log(p.epsilon)));
    y.push_back(p.energy.total);
  }
  return least_squares(x, y);
}

}  // namespace boojum
