// boojumlab: command-line front end.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error,
// 3 relaxation did not converge.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "boojum/ballgrowth.hpp"
#include "boojum/combinatorics.hpp"
#include "boojum/config.hpp"
#include "boojum/defectlab.hpp"
#include "boojum/io.hpp"
#include "boojum/pipeline.hpp"
#include "boojum/renorm.hpp"

using namespace boojum;
namespace fs = std::filesystem;

namespace {

constexpr int exit_runtime = 1;
constexpr int exit_usage = 2;
constexpr int exit_unconverged = 3;

void emit(const json& j, const std::string& out) {
  const std::string text = j.dump(2) + "\n";
  if (out.empty()) std::cout << text;
  else write_text(out, text);
}

double real_arg(const std::string& v, const char* name) { return parse_real(v, name); }

int cmd_simulate(const std::string& path, const std::vector<std::string>& sets, const std::string& output_flag) {
  const RunConfig cfg = parse_config(read_text(path), sets);
  const std::string out = output_flag.empty() ? cfg.output : output_flag;
  const SimulationResult res = simulate(cfg, out);
  for (const auto& c : res.competitors) {
    const auto& s = c.defects.summary;
    std::fprintf(stderr, "%-7s E=%.8f steps=%ld residual=%.3g %s  interior=%d light=%d heavy=%d bvortex=%d (%.1fs)\n",
                 to_string(c.seed), c.energy.total, c.relaxed.report.steps, c.relaxed.report.final_residual,
                 c.relaxed.report.converged ? "converged" : "NOT converged", s.n_interior, s.n_light, s.n_heavy,
                 s.n_bvortex, c.relaxed.report.seconds);
  }
  const auto& b = res.best();
  std::printf("selected %s regime %s energy %.10g -> %s\n", to_string(b.seed),
              to_string(classify_regime(b.defects.summary, cfg.degree)), b.energy.total, out.c_str());
  return res.all_converged() ? 0 : exit_unconverged;
}

int cmd_sweep(const std::string& path, const std::vector<std::string>& sets, const std::string& output_flag,
              int workers) {
  const RunConfig cfg = parse_config(read_text(path), sets, true);
  const std::string out = output_flag.empty() ? cfg.output : output_flag;
  const auto rows = run_sweep(cfg, out, workers);
  std::cout << sweep_csv(rows);
  return 0;
}

int cmd_defects(const std::string& field_path, std::string params_path, const std::string& boundary_path,
                const std::string& out) {
  const LoadedField lf = field_from_csv(read_text(field_path));
  if (params_path.empty()) params_path = fs::path(field_path).replace_extension(".json").string();
  const ModelParams p = params_from_json(json::parse(read_text(params_path)));
  const BoundaryData bd = boundary_path.empty() ? equivariant_boundary(p.degree(), lf.grid.n_theta())
                                                : boundary_from_csv(read_text(boundary_path), p.degree(), lf.grid);
  emit(to_json(analyze_defects(lf.field, p, lf.grid, bd)), out);
  return 0;
}

int cmd_render(const std::string& field_path, const std::string& mode, int size, const std::string& out) {
  const LoadedField lf = field_from_csv(read_text(field_path));
  write_text(out, render_field(lf.field, lf.grid, render_mode_from_string(mode), size).ppm());
  return 0;
}

int cmd_renorm(int degree, const std::string& alpha, int restarts, std::uint64_t seed, bool any_order,
               const std::string& out) {
  emit(to_json(minimize_positions(degree, real_arg(alpha, "--alpha"), restarts, seed, !any_order)), out);
  return 0;
}

int cmd_degree_check(int D, const std::string& alpha_s, int max_defects, int bound, const std::string& out) {
  const double alpha = real_arg(alpha_s, "--alpha");
  const MinConfigResult r = min_config(D, alpha, max_defects, bound);
  json j = to_json(r);
  j["D"] = D;
  j["alpha"] = alpha;
  j["c_alpha"] = c_alpha(alpha);
  j["lower_bound"] = std::abs(D) * c_alpha(alpha);
  j["threshold_s"] = threshold_s(alpha);
  emit(j, out);
  return 0;
}

int cmd_balls(const std::string& path, double sigma, const std::vector<std::string>& sets, const std::string& out) {
  json in = json::parse(read_text(path));
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
    in[s.substr(0, eq)] = parse_real(s.substr(eq + 1), s.substr(0, eq));
  }
  for (const char* key : {"epsilon", "s", "alpha", "balls"})
    if (!in.contains(key)) throw ConfigError(std::string("balls file: missing '") + key + "'");
  std::vector<DefectBall> balls;
  int degree = 0;
  for (const auto& b : in.at("balls")) {
    balls.push_back(ball_from_json(b));
    degree += balls.back().degree;
  }
  auto num = [&](const char* key) {
    const auto& v = in.at(key);
    return v.is_string() ? parse_real(v.get<std::string>(), key) : v.get<double>();
  };
  const ModelParams p(num("epsilon"), num("s"), num("alpha"), degree);
  const GrowthReport rep = grow(std::move(balls), sigma, p);
  json j = to_json(rep);
  j["expected_coefficient"] = lower_bound_coefficient(rep.D_b, rep.D_int, p.s(), p.alpha());
  j["clock_ratio_error"] = clock_ratio_error(rep.final_balls, rep.final_time, p.s());
  emit(j, out);
  return 0;
}

int cmd_seed_energy(const std::string& eps_list, const std::string& s, const std::string& alpha, int degree,
                    bool relaxed, int min_n_r, const std::string& out) {
  const std::vector<double> eps = parse_real_list(eps_list, "--eps-list");
  if (eps.size() < 2) throw ConfigError("--eps-list needs at least two values");
  const double sv = real_arg(s, "--s");
  const double av = real_arg(alpha, "--alpha");
  const auto pts = seed_energies(eps, sv, av, degree, relaxed, min_n_r);
  const LinearFit fit = log_slope(pts);
  json rows = json::array();
  for (const auto& p : pts) rows.push_back({{"epsilon", p.epsilon}, {"n_r", p.n_r}, {"energy", to_json(p.energy)}});
  const double predicted = relaxed ? pi * std::abs(degree) : two_pi * degree * sv * c_alpha(av);
  emit(json{{"seed", relaxed ? "vortex_relaxed" : "boojum"},
            {"points", rows},
            {"slope", fit.slope},
            {"intercept", fit.intercept},
            {"predicted_slope", predicted}},
       out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"boojumlab: boundary defects of a 2D Landau-de Gennes type model in the disk"};
  app.require_subcommand(1);

  std::vector<std::string> sets;
  std::string output;
  std::string out;

  std::string sim_cfg;
  auto* sim = app.add_subcommand("simulate", "seed, relax and analyse one configuration");
  sim->add_option("config", sim_cfg, "config file")->required()->check(CLI::ExistingFile);
  sim->add_option("--set", sets, "override, e.g. model.s=0.72 (repeatable)");
  sim->add_option("-o,--output", output, "artifact directory (defaults to run.output)");

  std::string sw_cfg;
  int workers = 1;
  auto* sw = app.add_subcommand("sweep", "run both seeds over a grid of s (and alpha)");
  sw->add_option("config", sw_cfg, "config file")->required()->check(CLI::ExistingFile);
  sw->add_option("--set", sets, "override, e.g. sweep.s=[0.6,0.8]");
  sw->add_option("-o,--output", output, "artifact directory (defaults to run.output)");
  sw->add_option("-j,--workers", workers, "concurrent sweep points")->check(CLI::PositiveNumber);

  std::string field_path, params_path, boundary_path;
  auto* def = app.add_subcommand("defects", "classify defects of a saved field");
  def->add_option("field", field_path, "field CSV")->required()->check(CLI::ExistingFile);
  def->add_option("--params", params_path, "parameter sidecar JSON (defaults to <field>.json)");
  def->add_option("--boundary", boundary_path, "boundary lifting CSV theta,gamma");
  def->add_option("--out", out, "write JSON here instead of stdout");

  std::string mode = "modulus";
  int size = 512;
  auto* ren = app.add_subcommand("render", "render a saved field as a binary PPM");
  ren->add_option("field", field_path, "field CSV")->required()->check(CLI::ExistingFile);
  ren->add_option("--mode", mode, "modulus, phase or director");
  ren->add_option("--size", size, "image edge in pixels");
  ren->add_option("--out", out, "output PPM")->required();

  int degree = 1;
  std::string alpha = "pi/3";
  int restarts = 16;
  std::uint64_t rng = 1;
  auto* rn = app.add_subcommand("renorm", "minimise the boundary renormalized energy");
  rn->add_option("--degree", degree, "boundary degree (1..3)")->required();
  rn->add_option("--alpha", alpha, "anchoring angle in radians, e.g. pi/3");
  rn->add_option("--restarts", restarts, "random restarts");
  rn->add_option("--rng-seed", rng, "restart seed");
  bool any_order = false;
  rn->add_flag("--any-order", any_order, "drop the light/heavy alternation constraint");
  rn->add_option("--out", out, "write JSON here instead of stdout");

  int D = 1, max_defects = 6, bound = 4;
  auto* dc = app.add_subcommand("degree-check", "exhaustive minimum of the degree cost");
  dc->add_option("--D", D, "total degree")->required();
  dc->add_option("--alpha", alpha, "anchoring angle in radians");
  dc->add_option("--max-defects", max_defects, "defect budget (pairs count twice)");
  dc->add_option("--degree-bound", bound, "largest |degree| per defect");
  dc->add_option("--out", out, "write JSON here instead of stdout");

  std::string balls_path;
  double sigma = 0.0;
  auto* bl = app.add_subcommand("balls", "run the ball-growth lower-bound procedure");
  bl->add_option("balls", balls_path, "JSON with epsilon, s, alpha and balls")->required()->check(CLI::ExistingFile);
  bl->add_option("--sigma", sigma, "final radius scale")->required();
  bl->add_option("--set", sets, "override a top-level number, e.g. s=0.8");
  bl->add_option("--out", out, "write JSON here instead of stdout");

  std::string eps_list = "0.08,0.04,0.02";
  std::string s_val = "0.72";
  bool relaxed = false;
  int min_n_r = 128;
  auto* se = app.add_subcommand("seed-energy", "energy scaling of the test constructions in |ln eps|");
  se->add_option("--eps-list", eps_list, "comma separated epsilons");
  se->add_option("--s", s_val, "anchoring exponent");
  se->add_option("--alpha", alpha, "anchoring angle in radians");
  se->add_option("--degree", degree, "boundary degree");
  se->add_flag("--relaxed-vortex", relaxed, "use the relaxed vortex seed instead of the boojum seed");
  se->add_option("--min-n-r", min_n_r, "smallest radial resolution");
  se->add_option("--out", out, "write JSON here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : exit_usage;
  }

  try {
    if (*sim) return cmd_simulate(sim_cfg, sets, output);
    if (*sw) return cmd_sweep(sw_cfg, sets, output, workers);
    if (*def) return cmd_defects(field_path, params_path, boundary_path, out);
    if (*ren) return cmd_render(field_path, mode, size, out);
    if (*rn) return cmd_renorm(degree, alpha, restarts, rng, any_order, out);
    if (*dc) return cmd_degree_check(D, alpha, max_defects, bound, out);
    if (*bl) return cmd_balls(balls_path, sigma, sets, out);
    if (*se) return cmd_seed_energy(eps_list, s_val, alpha, degree, relaxed, min_n_r, out);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return exit_usage;
  } catch (const json::exception& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return exit_usage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_runtime;
  }
  return exit_usage;
}
