#pragma once

// Initial conditions: vortex products, the boojum-pair test construction and
// reproducible random fields.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "boojum/core.hpp"

namespace boojum {

/// prod_k ((z - p_k)/|z - p_k|)^{d_k} exp(i phi0), modulus cut off linearly
/// inside radius eps of every p_k. phi0 is the circular mean of
/// gamma + alpha - arg(product) on the boundary, so the trace sits near g e^{i alpha}.
inline ComplexField vortex_seed(std::span<const cplx> positions, std::span<const int> degrees,
                                const ModelParams& params, const PolarGrid& grid, const BoundaryData& bd) {
  require_boundary(bd, grid, "vortex_seed");
  if (positions.size() != degrees.size()) throw ConfigError("vortex_seed: positions and degrees differ in length");
  int total = 0;
  for (std::size_t k = 0; k < positions.size(); ++k) {
    if (!(std::abs(positions[k]) < 1.0)) throw ConfigError("vortex_seed: vortex position outside the disk");
    total += degrees[k];
  }
  if (total != bd.degree()) throw ConfigError("vortex_seed: vortex degrees do not sum to the boundary degree");

  const double eps = params.epsilon();
  auto product = [&](cplx z) {
    cplx phase = 1.0;
    double modulus = 1.0;
    for (std::size_t k = 0; k < positions.size(); ++k) {
      const cplx d = z - positions[k];
      const double a = std::abs(d);
      if (a == 0.0) return cplx(0.0, 0.0);
      phase *= std::pow(d / a, degrees[k]);
      modulus *= std::min(1.0, a / eps);
    }
    return modulus * phase;
  };

  cplx mean = 0.0;
  for (int j = 0; j < grid.n_theta(); ++j) {
    const cplx p = product(std::polar(1.0, grid.theta(j)));
    const double a = std::arg(p);
    mean += std::polar(1.0, bd.gamma(j) + params.alpha() - a);
  }
  const cplx rot = mean / std::abs(mean);

  ComplexField u(grid);
  for (int i = 0; i < grid.n_r(); ++i)
    for (int j = 0; j < grid.n_theta(); ++j) u.at(i, j) = rot * product(grid.point(i, j));
  for (int j = 0; j < grid.n_theta(); ++j) u.trace(j) = rot * product(std::polar(1.0, grid.theta(j)));
  return u;
}

struct BoojumSeedOptions {
  /// Half-disk radius around each defect; <= 0 selects min(0.5, half the
  /// smallest chord between defects).
  double half_disk_radius = 0.0;
  int jacobi_max_sweeps = 4000;
  double jacobi_tol = 1e-9;
};

namespace detail {

/// Boundary phase of the boojum construction: gamma + alpha before a light
/// boojum, gamma - alpha after it, and 2 pi lower after each heavy boojum so
/// that the lift closes.
class BoojumBoundaryPhase {
 public:
  BoojumBoundaryPhase(std::span<const double> angles, const BoundaryData& bd, double alpha)
      : q_(angles.begin(), angles.end()), bd_(bd), alpha_(alpha) {}

  /// Offset beta on the arc that starts at defect k (k = -1: before q_0).
  double beta(int k) const {
    if (k < 0) return alpha_;
    if (k % 2 == 0) return -alpha_ - two_pi * (k / 2);
    return alpha_ - two_pi * ((k + 1) / 2);
  }

  /// Arc index of theta in [q_0, q_0 + 2 pi).
  int arc(double theta) const {
    const auto n = static_cast<int>(q_.size());
    int k = n - 1;
    for (int m = 0; m + 1 < n; ++m)
      if (theta < q_[static_cast<std::size_t>(m + 1)]) {
        k = m;
        break;
      }
    return k;
  }

  double reduce(double theta) const {
    if (q_.empty()) return theta;
    const double t0 = q_.front();
    return t0 + wrap_two_pi(theta - t0);
  }

  double operator()(double theta) const {
    if (q_.empty()) return bd_.gamma_at(theta) + alpha_;
    const double t = reduce(theta);
    return bd_.gamma_at(t) + beta(arc(t));
  }

  /// One-sided limits at defect k.
  double after(int k) const { return bd_.gamma_at(q_[static_cast<std::size_t>(k)]) + beta(k); }
  double before(int k) const {
    if (k == 0) return bd_.gamma_at(q_.front() + two_pi) + beta(static_cast<int>(q_.size()) - 1);
    return bd_.gamma_at(q_[static_cast<std::size_t>(k)]) + beta(k - 1);
  }

  std::size_t size() const { return q_.size(); }
  double angle(int k) const { return q_[static_cast<std::size_t>(k)]; }

 private:
  std::vector<double> q_;
  const BoundaryData& bd_;
  double alpha_;
};

inline double smoothstep(double t) {
  t = std::clamp(t, 0.0, 1.0);
  return t * t * (3.0 - 2.0 * t);
}

}  // namespace detail

/// Light/heavy boojum pairs at the given boundary angles (even positions
/// light, odd positions heavy). |u| = 1 everywhere; near each defect the
/// phase interpolates linearly in the angle between the two boundary branches
/// and is frozen inside radius eps^s; elsewhere the phase is harmonic.
inline ComplexField boojum_seed(std::span<const double> pair_angles, const ModelParams& params,
                                const PolarGrid& grid, const BoundaryData& bd,
                                const BoojumSeedOptions& opts = {}) {
  require_boundary(bd, grid, "boojum_seed");
  const int n_def = static_cast<int>(pair_angles.size());
  if (bd.degree() < 0) throw ConfigError("boojum_seed: negative boundary degree is not supported");
  if (n_def != 2 * bd.degree())
    throw ConfigError("boojum_seed: need exactly 2*degree defect angles");
  for (int k = 0; k + 1 < n_def; ++k)
    if (!(pair_angles[static_cast<std::size_t>(k + 1)] > pair_angles[static_cast<std::size_t>(k)]))
      throw ConfigError("boojum_seed: defect angles must be strictly increasing");
  if (n_def > 0 && !(pair_angles.back() - pair_angles.front() < two_pi))
    throw ConfigError("boojum_seed: defect angles must span less than one turn");

  const double alpha = params.alpha();
  const double core = params.boundary_core();
  const detail::BoojumBoundaryPhase psi_b(pair_angles, bd, alpha);

  std::vector<cplx> q(static_cast<std::size_t>(n_def));
  for (int k = 0; k < n_def; ++k) q[static_cast<std::size_t>(k)] = std::polar(1.0, pair_angles[static_cast<std::size_t>(k)]);
  double min_chord = 2.0;
  for (int a = 0; a < n_def; ++a)
    for (int b = a + 1; b < n_def; ++b) min_chord = std::min(min_chord, std::abs(q[static_cast<std::size_t>(a)] - q[static_cast<std::size_t>(b)]));
  const double R = opts.half_disk_radius > 0.0 ? opts.half_disk_radius : std::min(0.5, 0.5 * min_chord);
  if (n_def > 0 && !(2.0 * core < R))
    throw ConfigError("boojum_seed: core scale eps^s too large for the half-disk radius");

  auto chi = [&](double rho) { return detail::smoothstep((rho - core) / (0.8 * core)); };

  // Phase of the construction near defect k; nullopt-like flag when outside.
  auto local_phase = [&](cplx x, int& which) -> double {
    which = -1;
    for (int k = 0; k < n_def; ++k) {
      const cplx d = x - q[static_cast<std::size_t>(k)];
      const double rho = std::abs(d);
      if (rho >= R) continue;
      which = k;
      const double core_phase = 0.5 * (psi_b.after(k) + psi_b.before(k));
      if (rho == 0.0) return core_phase;
      const double th_q = pair_angles[static_cast<std::size_t>(k)];
      const cplx tau = std::polar(1.0, th_q + 0.5 * pi);
      const double theta_local = std::arg(d / tau);  // in (-pi, pi]
      const double delta = 2.0 * std::asin(std::min(1.0, 0.5 * rho));
      const double lo = 0.5 * delta;
      const double hi = pi - 0.5 * delta;
      const double t = std::clamp((theta_local - lo) / (hi - lo), 0.0, 1.0);
      // h_+ is read just after the defect, h_- just before it, on the same lift.
      const double h_plus = bd.gamma_at(th_q + delta) - bd.gamma_at(th_q) + psi_b.after(k);
      const double h_minus = bd.gamma_at(th_q - delta) - bd.gamma_at(th_q) + psi_b.before(k);
      const double psi = h_plus * (1.0 - t) + h_minus * t;
      const double c = chi(rho);
      return c * psi + (1.0 - c) * core_phase;
    }
    return 0.0;
  };

  const int nr = grid.n_r();
  const int nt = grid.n_theta();

  // Boundary trace phase.
  std::vector<double> trace_phase(static_cast<std::size_t>(nt));
  for (int j = 0; j < nt; ++j) {
    const double th = grid.theta(j);
    int which = -1;
    const double lp = local_phase(std::polar(1.0, th), which);
    trace_phase[static_cast<std::size_t>(j)] = which >= 0 ? lp : psi_b(th);
  }

  // Initial guess: harmonic extension of the boundary phase. The jump part is
  // the closed form sum_k (-J_k/pi) Im log(1 - conj(q_k) z); the smooth
  // remainder is extended through its Fourier series.
  std::vector<double> jump(static_cast<std::size_t>(n_def));
  for (int k = 0; k < n_def; ++k) jump[static_cast<std::size_t>(k)] = psi_b.after(k) - psi_b.before(k);
  auto singular = [&](cplx z) {
    double s = 0.0;
    for (int k = 0; k < n_def; ++k) {
      const cplx w = 1.0 - std::conj(q[static_cast<std::size_t>(k)]) * z;
      s += (-jump[static_cast<std::size_t>(k)] / pi) * std::arg(w);
    }
    return s;
  };
  std::vector<double> remainder(static_cast<std::size_t>(nt));
  for (int j = 0; j < nt; ++j) {
    const double th = grid.theta(j);
    remainder[static_cast<std::size_t>(j)] = psi_b(th) - singular(std::polar(1.0, th) * (1.0 - 1e-12));
  }
  std::vector<cplx> coeff(static_cast<std::size_t>(nt));
  for (int k = 0; k < nt; ++k) {
    cplx c = 0.0;
    for (int j = 0; j < nt; ++j) c += remainder[static_cast<std::size_t>(j)] * std::polar(1.0, -two_pi * k * j / nt);
    coeff[static_cast<std::size_t>(k)] = c / static_cast<double>(nt);
  }
  auto smooth_part = [&](double r, double th) {
    double s = coeff[0].real();
    for (int k = 1; k <= nt / 2; ++k) {
      const double weight = (k == nt / 2) ? 1.0 : 2.0;
      s += weight * std::pow(r, k) * (coeff[static_cast<std::size_t>(k)] * std::polar(1.0, k * th)).real();
    }
    return s;
  };
  const bool smooth_is_constant = [&] {
    double lo = remainder.front();
    double hi = remainder.front();
    for (double v : remainder) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    return hi - lo < 1e-9;
  }();

  std::vector<double> phase(grid.size());
  std::vector<char> fixed(grid.size(), 0);
  for (int i = 0; i < nr; ++i)
    for (int j = 0; j < nt; ++j) {
      const cplx x = grid.point(i, j);
      int which = -1;
      const double lp = local_phase(x, which);
      const std::size_t id = grid.index(i, j);
      if (which >= 0) {
        phase[id] = lp;
        fixed[id] = 1;
      } else {
        phase[id] = singular(x) + (smooth_is_constant ? remainder.front() : smooth_part(grid.r(i), grid.theta(j)));
      }
    }

  // Jacobi sweeps on the free cells with the Dirichlet stiffness weights.
  if (n_def > 0) {
    const double wb = 2.0 * (1.0 - 0.25 * grid.dr()) * grid.dtheta() / grid.dr();
    std::vector<double> next = phase;
    for (int sweep = 0; sweep < opts.jacobi_max_sweeps; ++sweep) {
      double change = 0.0;
      for (int i = 0; i < nr; ++i) {
        const double wa = grid.dr() / (grid.r(i) * grid.dtheta());
        const double w_in = i > 0 ? i * grid.dtheta() : 0.0;
        const double w_out = i + 1 < nr ? (i + 1) * grid.dtheta() : wb;
        for (int j = 0; j < nt; ++j) {
          const std::size_t id = grid.index(i, j);
          if (fixed[id]) continue;
          double num = wa * (phase[grid.index(i, j + 1)] + phase[grid.index(i, j - 1)]);
          double den = 2.0 * wa;
          if (i > 0) {
            num += w_in * phase[grid.index(i - 1, j)];
            den += w_in;
          }
          num += w_out * (i + 1 < nr ? phase[grid.index(i + 1, j)] : trace_phase[static_cast<std::size_t>(j)]);
          den += w_out;
          const double v = num / den;
          change = std::max(change, std::abs(v - phase[id]));
          next[id] = v;
        }
      }
      for (std::size_t id = 0; id < phase.size(); ++id)
        if (!fixed[id]) phase[id] = next[id];
      if (change < opts.jacobi_tol) break;
    }
  }

  ComplexField u(grid);
  for (std::size_t id = 0; id < phase.size(); ++id) u.values[id] = std::polar(1.0, phase[id]);
  for (int j = 0; j < nt; ++j) u.trace(j) = std::polar(1.0, trace_phase[static_cast<std::size_t>(j)]);
  return u;
}

/// Reproducible pseudo-random field with |u| <= amplitude (cells and trace).
inline ComplexField random_seed(std::uint64_t rng_seed, double amplitude, const PolarGrid& grid) {
  if (!(amplitude > 0.0 && amplitude <= 2.0)) throw ConfigError("random_seed: amplitude must lie in (0, 2]");
  std::mt19937_64 gen(rng_seed);
  auto unit = [&gen] { return static_cast<double>(gen() >> 11) * 0x1.0p-53; };
  auto draw = [&] {
    const double r = amplitude * std::sqrt(unit());
    return std::polar(r, two_pi * unit());
  };
  ComplexField u(grid);
  for (auto& z : u.values) z = draw();
  for (auto& z : u.boundary_trace) z = draw();
  return u;
}

}  // namespace boojum
