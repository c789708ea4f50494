#pragma once

// Gradient-flow relaxation of the discrete energy.
//
// Two time steppers share the same gradient:
//  * step(): forward Euler u <- u - dt grad E, valid for dt <= stable_dt().
//  * the stabilised linearly implicit stepper used by relax() by default:
//        (sigma M + K) delta = -M grad E(u)
//    with K the Dirichlet stiffness (trace included), M the lumped measure and
//    sigma a shift bounding the reaction and anchoring curvature. K is
//    circulant in theta, so every solve is one batched FFT plus one
//    tridiagonal sweep per angular mode. Steps are accepted only if the
//    energy does not increase.
//
// After every update the boundary trace is re-eliminated (solve_trace).

#include <fftw3.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "boojum/core.hpp"
#include "boojum/energy.hpp"

namespace boojum {

/// Explicit Euler stability bound
/// 0.4 / (2/dr^2 + 2/(r_min^2 dtheta^2) + 3/eps^2 + 2 Upsilon/dr).
inline double stable_dt(const PolarGrid& grid, const ModelParams& params) {
  const double dr = grid.dr();
  const double rmin = grid.r(0);
  const double dth = grid.dtheta();
  const double e = params.epsilon();
  const double denom = 2.0 / (dr * dr) + 2.0 / (rmin * rmin * dth * dth) + 3.0 / (e * e) +
                       2.0 * params.upsilon() / dr;
  return 0.4 / denom;
}

/// One forward Euler step followed by trace elimination. Throws
/// StabilityError if the energy grows beyond round-off.
inline ComplexField step(const ComplexField& u, const ModelParams& params, const PolarGrid& grid,
                         const BoundaryData& bd, double dt) {
  if (!(dt > 0.0)) throw ConfigError("step: dt must be positive");
  if (dt > stable_dt(grid, params) * (1.0 + 1e-12)) throw ConfigError("step: dt exceeds stable_dt");
  const double e0 = total_energy(u, params, grid, bd).total;
  const ComplexField grad = energy_gradient(u, params, grid, bd);
  ComplexField next = u;
  for (std::size_t k = 0; k < next.values.size(); ++k) next.values[k] -= dt * grad.values[k];
  solve_trace(next, params, grid, bd);
  if (!next.all_finite()) throw StabilityError("step: non-finite values after update");
  const double e1 = total_energy(next, params, grid, bd).total;
  if (e1 > e0 + 1e-10)
    throw StabilityError("step: energy increased from " + std::to_string(e0) + " to " + std::to_string(e1));
  return next;
}

namespace detail {

inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace detail

/// Solver for (sigma M + sigma_b M_b + K) x = b on the (n_r + 1) x n_theta
/// unknowns, row n_r being the trace.
class ShiftedStiffnessSolver {
 public:
  explicit ShiftedStiffnessSolver(const PolarGrid& grid)
      : grid_(grid), rows_(grid.n_r() + 1), nt_(grid.n_theta()), buffer_(static_cast<std::size_t>(rows_ * nt_)) {
    auto* data = reinterpret_cast<fftw_complex*>(buffer_.data());
    std::lock_guard lock(detail::fftw_planner_mutex());
    int n = nt_;
    forward_ = fftw_plan_many_dft(1, &n, rows_, data, nullptr, 1, nt_, data, nullptr, 1, nt_, FFTW_FORWARD,
                                  FFTW_ESTIMATE);
    backward_ = fftw_plan_many_dft(1, &n, rows_, data, nullptr, 1, nt_, data, nullptr, 1, nt_, FFTW_BACKWARD,
                                   FFTW_ESTIMATE);
    lambda_.resize(static_cast<std::size_t>(nt_));
    for (int k = 0; k < nt_; ++k)
      lambda_[static_cast<std::size_t>(k)] = 2.0 - 2.0 * std::cos(two_pi * k / nt_);
  }
  ShiftedStiffnessSolver(const ShiftedStiffnessSolver&) = delete;
  ShiftedStiffnessSolver& operator=(const ShiftedStiffnessSolver&) = delete;
  ~ShiftedStiffnessSolver() {
    std::lock_guard lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
  }

  /// Overwrites `rhs` (cells then trace, row-major) with the solution.
  void solve(std::vector<cplx>& rhs, double sigma, double sigma_b) {
    std::copy(rhs.begin(), rhs.end(), buffer_.begin());
    fftw_execute(forward_);
    const int nr = grid_.n_r();
    const double wb = trace_weight(grid_);
    std::vector<double> c_prime(static_cast<std::size_t>(rows_));
    std::vector<cplx> d_prime(static_cast<std::size_t>(rows_));
    for (int k = 0; k < nt_; ++k) {
      const double lam = lambda_[static_cast<std::size_t>(k)];
      // Thomas algorithm down the radial line of mode k.
      double prev_c = 0.0;
      cplx prev_d = 0.0;
      for (int i = 0; i <= nr; ++i) {
        double diag;
        double lower;
        double upper;
        if (i < nr) {
          diag = sigma * grid_.cell_area(i) + lam * angular_weight(grid_, i);
          lower = i > 0 ? -radial_weight(grid_, i - 1) : 0.0;
          diag -= lower;
          upper = i + 1 < nr ? -radial_weight(grid_, i) : -wb;
          diag -= upper;
        } else {
          lower = -wb;
          upper = 0.0;
          diag = sigma_b * grid_.dtheta() + wb;
        }
        const cplx b = buffer_[static_cast<std::size_t>(i * nt_ + k)];
        const double denom = diag - lower * prev_c;
        prev_c = upper / denom;
        prev_d = (b - lower * prev_d) / denom;
        c_prime[static_cast<std::size_t>(i)] = prev_c;
        d_prime[static_cast<std::size_t>(i)] = prev_d;
      }
      cplx x = d_prime[static_cast<std::size_t>(nr)];
      buffer_[static_cast<std::size_t>(nr * nt_ + k)] = x;
      for (int i = nr - 1; i >= 0; --i) {
        x = d_prime[static_cast<std::size_t>(i)] - c_prime[static_cast<std::size_t>(i)] * x;
        buffer_[static_cast<std::size_t>(i * nt_ + k)] = x;
      }
    }
    fftw_execute(backward_);
    const double scale = 1.0 / nt_;
    for (std::size_t q = 0; q < rhs.size(); ++q) rhs[q] = buffer_[q] * scale;
  }

 private:
  const PolarGrid& grid_;
  int rows_;
  int nt_;
  std::vector<cplx> buffer_;
  std::vector<double> lambda_;
  fftw_plan forward_{};
  fftw_plan backward_{};
};

enum class Scheme { lbfgs, stabilized, explicit_euler };

struct RelaxOptions {
  double tol = 1e-6;
  long max_steps = 2'000'000;
  Scheme scheme = Scheme::lbfgs;
  int lbfgs_memory = 8;
  long sample_every = 200;
  long checkpoint_every = 0;  // 0 disables
  std::function<void(long, const ComplexField&)> checkpoint;
  double max_seconds = 0.0;   // 0 disables the wall-clock cap
};

struct EnergySample {
  long step = 0;
  EnergyBreakdown energy;
};

struct ModulusSample {
  long step = 0;
  double max_modulus = 0.0;
};

struct RelaxReport {
  long steps = 0;
  double final_residual = 0.0;
  std::vector<EnergySample> energy_trace;
  bool converged = false;
  std::vector<ModulusSample> max_modulus_trace;
  long rejected_steps = 0;
  double seconds = 0.0;
  /// Largest max|u| seen at any accepted iterate.
  double peak_modulus = 0.0;
};

struct RelaxResult {
  ComplexField field;
  RelaxReport report;
};

namespace detail {

/// Preconditioned L-BFGS on all unknowns (cells and trace) with the shifted
/// stiffness inverse as initial Hessian and a backtracking Armijo search on
/// the exact energy increment.
inline void relax_lbfgs(ComplexField& u, RelaxReport& rep, EnergyBreakdown& energy, const ModelParams& params,
                        const PolarGrid& grid, const BoundaryData& bd, const RelaxOptions& opts,
                        const std::function<void(long)>& on_accept,
                        const std::chrono::steady_clock::time_point t_start) {
  const int nr = grid.n_r();
  const int nt = grid.n_theta();
  const std::size_t n_cells = grid.size();
  const std::size_t n_all = n_cells + static_cast<std::size_t>(nt);
  const double sigma = 1.0 / (params.epsilon() * params.epsilon());
  const double sigma_b = params.upsilon();
  ShiftedStiffnessSolver solver(grid);

  using Vec = std::vector<cplx>;
  auto vdot = [](const Vec& a, const Vec& b) {
    double acc = 0.0;
    for (std::size_t q = 0; q < a.size(); ++q) acc += dot(a[q], b[q]);
    return acc;
  };
  // Euclidean gradient: measure-scaled gradient times the measure.
  auto euclid = [&](const ComplexField& grad, Vec& out) {
    out.resize(n_all);
    for (int i = 0; i < nr; ++i) {
      const double a = grid.cell_area(i);
      for (int j = 0; j < nt; ++j) out[static_cast<std::size_t>(i * nt + j)] = a * grad.at(i, j);
    }
    for (int j = 0; j < nt; ++j) out[n_cells + static_cast<std::size_t>(j)] = grid.dtheta() * grad.trace(j);
  };

  const std::size_t mem = static_cast<std::size_t>(std::max(opts.lbfgs_memory, 1));
  std::vector<Vec> s_hist;
  std::vector<Vec> y_hist;
  std::vector<double> rho_hist;

  ComplexField grad = energy_gradient(u, params, grid, bd);
  double residual = gradient_max_norm(grad);
  Vec G;
  euclid(grad, G);
  Vec dir(n_all);
  std::vector<double> alpha_k;
  long n = 0;
  while (true) {
    if (residual <= opts.tol) {
      rep.converged = true;
      break;
    }
    if (n >= opts.max_steps) break;
    if (opts.max_seconds > 0.0) {
      const std::chrono::duration<double> el = std::chrono::steady_clock::now() - t_start;
      if (el.count() > opts.max_seconds) break;
    }

    // Two-loop recursion.
    for (std::size_t q = 0; q < n_all; ++q) dir[q] = -G[q];
    alpha_k.assign(s_hist.size(), 0.0);
    for (std::size_t k = s_hist.size(); k-- > 0;) {
      alpha_k[k] = rho_hist[k] * vdot(s_hist[k], dir);
      for (std::size_t q = 0; q < n_all; ++q) dir[q] -= alpha_k[k] * y_hist[k][q];
    }
    solver.solve(dir, sigma, sigma_b);
    for (std::size_t k = 0; k < s_hist.size(); ++k) {
      const double beta = rho_hist[k] * vdot(y_hist[k], dir);
      for (std::size_t q = 0; q < n_all; ++q) dir[q] += (alpha_k[k] - beta) * s_hist[k][q];
    }
    double slope = vdot(G, dir);
    if (!(slope < 0.0)) {
      // Lost descent: restart from the preconditioned gradient.
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      for (std::size_t q = 0; q < n_all; ++q) dir[q] = -G[q];
      solver.solve(dir, sigma, sigma_b);
      slope = vdot(G, dir);
    }

    const double noise = 1e-13 * std::max(1.0, std::abs(energy.total));
    double t = 1.0;
    ComplexField trial = u;
    double change = 0.0;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      for (std::size_t q = 0; q < n_cells; ++q) trial.values[q] = u.values[q] + t * dir[q];
      for (int j = 0; j < nt; ++j) trial.trace(j) = u.trace(j) + t * dir[n_cells + static_cast<std::size_t>(j)];
      if (!trial.all_finite()) throw StabilityError("relax: non-finite values at step " + std::to_string(n + 1));
      change = energy_change(u, trial, params, grid, bd);
      if (change <= 1e-4 * t * slope) {
        accepted = true;
        break;
      }
      // Below the resolution of the energy the sufficient-decrease test is
      // blind; fall back to a curvature test on the directional derivative.
      if (change <= noise) {
        const ComplexField gt = energy_gradient(trial, params, grid, bd);
        Vec Gt;
        euclid(gt, Gt);
        const double st = vdot(Gt, dir);
        if (st >= 0.9 * slope && st <= -0.8 * slope) {
          accepted = true;
          break;
        }
      }
      ++rep.rejected_steps;
      t *= 0.5;
    }
    if (!accepted) {
      if (s_hist.empty()) break;  // no further descent possible at this precision
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      continue;
    }

    ComplexField next_grad = energy_gradient(trial, params, grid, bd);
    Vec G_next;
    euclid(next_grad, G_next);
    Vec sv(n_all);
    Vec yv(n_all);
    for (std::size_t q = 0; q < n_all; ++q) {
      sv[q] = t * dir[q];
      yv[q] = G_next[q] - G[q];
    }
    const double sy = vdot(sv, yv);
    if (sy > 1e-12 * std::sqrt(vdot(sv, sv) * vdot(yv, yv))) {
      if (s_hist.size() == mem) {
        s_hist.erase(s_hist.begin());
        y_hist.erase(y_hist.begin());
        rho_hist.erase(rho_hist.begin());
      }
      s_hist.push_back(std::move(sv));
      y_hist.push_back(std::move(yv));
      rho_hist.push_back(1.0 / sy);
    }
    u = std::move(trial);
    grad = std::move(next_grad);
    G = std::move(G_next);
    residual = gradient_max_norm(grad);
    ++n;
    energy = total_energy(u, params, grid, bd);
    rep.peak_modulus = std::max(rep.peak_modulus, u.max_modulus());
    on_accept(n);
  }
  rep.steps = n;
  rep.final_residual = residual;
}

}  // namespace detail

/// Relaxes `seed` by gradient flow until el_residual <= tol or the step
/// budget is spent. The trace of the seed is eliminated before the first step.
inline RelaxResult relax(const ComplexField& seed, const ModelParams& params, const PolarGrid& grid,
                         const BoundaryData& bd, const RelaxOptions& opts = {}) {
  require_shape(seed, grid, "relax");
  require_boundary(bd, grid, "relax");
  if (!trace_problem_convex(grid, params))
    throw ConfigError("relax: grid too coarse for the anchoring strength (need Upsilon * dr < 2 - dr/2)");
  if (!seed.all_finite()) throw DataError("relax: seed has non-finite entries");
  const auto t_start = std::chrono::steady_clock::now();

  RelaxResult out{seed, {}};
  ComplexField& u = out.field;
  RelaxReport& rep = out.report;
  solve_trace(u, params, grid, bd);

  EnergyBreakdown energy = total_energy(u, params, grid, bd);
  auto record = [&](long n) {
    rep.energy_trace.push_back({n, energy});
    rep.max_modulus_trace.push_back({n, u.max_modulus()});
  };
  record(0);
  rep.peak_modulus = u.max_modulus();

  if (opts.scheme == Scheme::lbfgs) {
    auto on_accept = [&](long n) {
      if (opts.sample_every > 0 && n % opts.sample_every == 0) record(n);
      if (opts.checkpoint_every > 0 && opts.checkpoint && n % opts.checkpoint_every == 0) opts.checkpoint(n, u);
    };
    detail::relax_lbfgs(u, rep, energy, params, grid, bd, opts, on_accept, t_start);
    if (rep.energy_trace.back().step != rep.steps) record(rep.steps);
    const std::chrono::duration<double> el = std::chrono::steady_clock::now() - t_start;
    rep.seconds = el.count();
    return out;
  }

  const double eps2 = params.epsilon() * params.epsilon();
  const double ups = params.upsilon();
  std::unique_ptr<ShiftedStiffnessSolver> solver;
  if (opts.scheme == Scheme::stabilized) solver = std::make_unique<ShiftedStiffnessSolver>(grid);
  const double dt_explicit = stable_dt(grid, params);
  const int nr = grid.n_r();
  const int nt = grid.n_theta();
  std::vector<cplx> rhs(static_cast<std::size_t>((nr + 1) * nt));
  double factor = 1.0;

  ComplexField grad = energy_gradient(u, params, grid, bd);
  double residual = gradient_max_norm(grad);
  long n = 0;
  while (true) {
    if (residual <= opts.tol) {
      rep.converged = true;
      break;
    }
    if (n >= opts.max_steps) break;
    if (opts.max_seconds > 0.0) {
      const std::chrono::duration<double> el = std::chrono::steady_clock::now() - t_start;
      if (el.count() > opts.max_seconds) break;
    }

    ComplexField trial = u;
    if (opts.scheme == Scheme::explicit_euler) {
      for (std::size_t k = 0; k < trial.values.size(); ++k) trial.values[k] -= dt_explicit * grad.values[k];
    } else {
      const double m = std::max(1.0, u.max_modulus());
      const double sigma = factor * std::max(3.0 * m * m - 1.0, 1.0) / (2.0 * eps2);
      const double sigma_b = factor * 1.5 * ups * m * m;
      for (int i = 0; i < nr; ++i) {
        const double a = grid.cell_area(i);
        for (int j = 0; j < nt; ++j) rhs[static_cast<std::size_t>(i * nt + j)] = -a * grad.at(i, j);
      }
      for (int j = 0; j < nt; ++j) rhs[static_cast<std::size_t>(nr * nt + j)] = -grid.dtheta() * grad.trace(j);
      solver->solve(rhs, sigma, sigma_b);
      for (std::size_t q = 0; q < trial.values.size(); ++q) trial.values[q] += rhs[q];
      for (int j = 0; j < nt; ++j) trial.trace(j) += rhs[static_cast<std::size_t>(nr * nt + j)];
    }
    solve_trace(trial, params, grid, bd);
    if (!trial.all_finite()) throw StabilityError("relax: non-finite values at step " + std::to_string(n + 1));
    const double change = energy_change(u, trial, params, grid, bd);
    bool accept = change <= 0.0;
    if (!accept && opts.scheme == Scheme::stabilized && change <= 1e-13 * std::max(1.0, std::abs(energy.total))) {
      // Increment is round-off: accept when the residual still improves.
      accept = gradient_max_norm(energy_gradient(trial, params, grid, bd)) < residual;
    }
    if (!accept) {
      if (opts.scheme == Scheme::explicit_euler)
        throw StabilityError("relax: energy increased at step " + std::to_string(n + 1));
      ++rep.rejected_steps;
      factor *= 2.0;
      if (factor > 1e6) throw StabilityError("relax: no descent step found at step " + std::to_string(n + 1));
      continue;
    }
    factor = std::max(factor * 0.8, 0.02);
    u = std::move(trial);
    energy = total_energy(u, params, grid, bd);
    ++n;
    grad = energy_gradient(u, params, grid, bd);
    residual = gradient_max_norm(grad);
    rep.peak_modulus = std::max(rep.peak_modulus, u.max_modulus());
    if (opts.sample_every > 0 && n % opts.sample_every == 0) record(n);
    if (opts.checkpoint_every > 0 && opts.checkpoint && n % opts.checkpoint_every == 0) opts.checkpoint(n, u);
  }
  if (rep.energy_trace.back().step != n) record(n);
  rep.steps = n;
  rep.final_residual = residual;
  const std::chrono::duration<double> el = std::chrono::steady_clock::now() - t_start;
  rep.seconds = el.count();
  return out;
}

}  // namespace boojum
