#pragma once

// Discrete energy, its exact gradient, and the boundary trace elimination.
//
// Discrete energy on the cell-centred polar grid:
//
//   dirichlet = 1/2 sum_faces w |u_a - u_b|^2
//       radial faces r_{i+1/2} between rings i and i+1:  w = r_{i+1/2} dtheta / dr
//       angular faces inside ring i:                     w = dr / (r_i dtheta)
//       outer half cell between ring n_r-1 and trace:    w = 2 (1 - dr/4) dtheta / dr
//   potential = sum_cells r_i dr dtheta (|u|^2 - 1)^2 / (4 eps^2)
//   anchoring = Upsilon/2 sum_j dtheta W(u_b, g_j)
//
// The face through r = 0 has zero length, so the across-origin neighbour
// carries no weight in the energy.

#include <algorithm>
#include <cmath>

#include "boojum/core.hpp"

namespace boojum {

/// W(u, g) = 1/2 (|u|^2 - 1)^2 + ((u, g) - cos alpha)^2.
inline double anchoring_density(cplx u_b, cplx g_b, double alpha) {
  const double m = std::norm(u_b) - 1.0;
  const double c = dot(u_b, g_b) - std::cos(alpha);
  return 0.5 * m * m + c * c;
}

/// Gradient of W/2 with respect to u: (|u|^2 - 1) u + ((u, g) - cos alpha) g.
inline cplx anchoring_force(cplx u_b, cplx g_b, double alpha) {
  return (std::norm(u_b) - 1.0) * u_b + (dot(u_b, g_b) - std::cos(alpha)) * g_b;
}

struct EnergyBreakdown {
  double dirichlet = 0.0;
  double potential = 0.0;
  double anchoring = 0.0;
  double total = 0.0;
};

/// Weight of the coupling between the outer ring and the boundary trace.
inline double trace_weight(const PolarGrid& grid) {
  return 2.0 * (1.0 - 0.25 * grid.dr()) * grid.dtheta() / grid.dr();
}

inline double radial_weight(const PolarGrid& grid, int i) {
  return (i + 1) * grid.dr() * grid.dtheta() / grid.dr();
}

inline double angular_weight(const PolarGrid& grid, int i) {
  return grid.dr() / (grid.r(i) * grid.dtheta());
}

inline EnergyBreakdown total_energy(const ComplexField& u, const ModelParams& params, const PolarGrid& grid,
                                    const BoundaryData& bd) {
  require_shape(u, grid, "total_energy");
  require_boundary(bd, grid, "total_energy");
  if (!u.all_finite()) throw DataError("total_energy: field has non-finite entries");

  const int nr = grid.n_r();
  const int nt = grid.n_theta();
  const double inv4e2 = 0.25 / (params.epsilon() * params.epsilon());

  EnergyBreakdown e;
  double dir = 0.0;
  double pot = 0.0;
  for (int i = 0; i < nr; ++i) {
    const double wa = angular_weight(grid, i);
    const double wr = i + 1 < nr ? radial_weight(grid, i) : 0.0;
    const double area = grid.cell_area(i);
    double ring_dir = 0.0;
    double ring_pot = 0.0;
    for (int j = 0; j < nt; ++j) {
      const cplx v = u.at(i, j);
      const cplx vn = u.at(i, j + 1 < nt ? j + 1 : 0);
      ring_dir += wa * std::norm(vn - v);
      if (i + 1 < nr) ring_dir += wr * std::norm(u.at(i + 1, j) - v);
      const double m = std::norm(v) - 1.0;
      ring_pot += m * m;
    }
    dir += ring_dir;
    pot += area * ring_pot;
  }
  const double wb = trace_weight(grid);
  double anch = 0.0;
  const double alpha = params.alpha();
  for (int j = 0; j < nt; ++j) {
    dir += wb * std::norm(u.trace(j) - u.at(nr - 1, j));
    anch += anchoring_density(u.trace(j), bd.g(j), alpha);
  }
  e.dirichlet = 0.5 * dir;
  e.potential = inv4e2 * pot;
  e.anchoring = 0.5 * params.upsilon() * grid.dtheta() * anch;
  e.total = e.dirichlet + e.potential + e.anchoring;
  return e;
}

/// E(v) - E(u) assembled term by term from the local increments, so that
/// the difference keeps full relative precision even when it is far below
/// round-off of the totals.
inline double energy_change(const ComplexField& u, const ComplexField& v, const ModelParams& params,
                            const PolarGrid& grid, const BoundaryData& bd) {
  require_shape(u, grid, "energy_change");
  require_shape(v, grid, "energy_change");
  require_boundary(bd, grid, "energy_change");
  const int nr = grid.n_r();
  const int nt = grid.n_theta();
  // |b|^2 - |a|^2 = Re((b - a) conj(b + a))
  auto dnorm = [](cplx a, cplx b) { return dot(b - a, b + a); };
  double dir = 0.0;
  double pot = 0.0;
  for (int i = 0; i < nr; ++i) {
    const double wa = angular_weight(grid, i);
    const double wr = i + 1 < nr ? radial_weight(grid, i) : 0.0;
    double ring_dir = 0.0;
    double ring_pot = 0.0;
    for (int j = 0; j < nt; ++j) {
      const int jp = j + 1 < nt ? j + 1 : 0;
      ring_dir += wa * dnorm(u.at(i, jp) - u.at(i, j), v.at(i, jp) - v.at(i, j));
      if (i + 1 < nr) ring_dir += wr * dnorm(u.at(i + 1, j) - u.at(i, j), v.at(i + 1, j) - v.at(i, j));
      const double nu = std::norm(u.at(i, j));
      const double dn = dnorm(u.at(i, j), v.at(i, j));
      ring_pot += dn * (2.0 * nu + dn - 2.0);
    }
    dir += ring_dir;
    pot += grid.cell_area(i) * ring_pot;
  }
  const double wb = trace_weight(grid);
  const double ca = std::cos(params.alpha());
  double anch = 0.0;
  for (int j = 0; j < nt; ++j) {
    dir += wb * dnorm(u.trace(j) - u.at(nr - 1, j), v.trace(j) - v.at(nr - 1, j));
    const cplx a = u.trace(j);
    const cplx b = v.trace(j);
    const cplx g = bd.g(j);
    const double nu = std::norm(a);
    const double dn = dnorm(a, b);
    const double da = dot(b - a, g);
    anch += 0.5 * dn * (2.0 * nu + dn - 2.0) + da * (dot(a, g) + dot(b, g) - 2.0 * ca);
  }
  const double inv4e2 = 0.25 / (params.epsilon() * params.epsilon());
  return 0.5 * dir + inv4e2 * pot + 0.5 * params.upsilon() * grid.dtheta() * anch;
}

/// Exact gradient of the discrete energy with respect to every cell value and
/// every trace value, divided by the cell measure (r_i dr dtheta for cells,
/// dtheta for trace nodes). The trace component is the discrete Robin
/// residual (2 kappa/dr)(u_b - u_{n_r-1}) + Upsilon[(|u|^2-1)u + ((u,g)-cos a)g]
/// and vanishes once the trace has been eliminated with solve_trace.
inline ComplexField energy_gradient(const ComplexField& u, const ModelParams& params, const PolarGrid& grid,
                                    const BoundaryData& bd) {
  require_shape(u, grid, "energy_gradient");
  require_boundary(bd, grid, "energy_gradient");
  const int nr = grid.n_r();
  const int nt = grid.n_theta();
  const double inv_e2 = 1.0 / (params.epsilon() * params.epsilon());
  const double wb = trace_weight(grid);
  ComplexField grad(grid);
  for (int i = 0; i < nr; ++i) {
    const double wa = angular_weight(grid, i);
    const double w_out = i + 1 < nr ? radial_weight(grid, i) : 0.0;
    const double w_in = i > 0 ? radial_weight(grid, i - 1) : 0.0;
    const double inv_area = 1.0 / grid.cell_area(i);
    for (int j = 0; j < nt; ++j) {
      const cplx v = u.at(i, j);
      const int jp = j + 1 < nt ? j + 1 : 0;
      const int jm = j > 0 ? j - 1 : nt - 1;
      cplx flux = wa * ((v - u.at(i, jp)) + (v - u.at(i, jm)));
      if (i + 1 < nr) flux += w_out * (v - u.at(i + 1, j));
      else flux += wb * (v - u.trace(j));
      if (i > 0) flux += w_in * (v - u.at(i - 1, j));
      grad.at(i, j) = flux * inv_area + inv_e2 * (std::norm(v) - 1.0) * v;
    }
  }
  const double ups = params.upsilon();
  const double inv_dt = 1.0 / grid.dtheta();
  for (int j = 0; j < nt; ++j) {
    const cplx b = u.trace(j);
    grad.trace(j) = wb * inv_dt * (b - u.at(nr - 1, j)) + ups * anchoring_force(b, bd.g(j), params.alpha());
  }
  return grad;
}

/// Inner product matching the gradient scaling: sum of measure * Re(conj(a) b).
inline double measure_dot(const ComplexField& a, const ComplexField& b, const PolarGrid& grid) {
  double s = 0.0;
  for (int i = 0; i < grid.n_r(); ++i) {
    double ring = 0.0;
    for (int j = 0; j < grid.n_theta(); ++j) ring += dot(a.at(i, j), b.at(i, j));
    s += grid.cell_area(i) * ring;
  }
  double tr = 0.0;
  for (int j = 0; j < grid.n_theta(); ++j) tr += dot(a.trace(j), b.trace(j));
  return s + grid.dtheta() * tr;
}

/// Max-norm of the gradient over cells and trace nodes.
inline double gradient_max_norm(const ComplexField& grad) {
  double m = 0.0;
  for (auto z : grad.values) m = std::max(m, std::abs(z));
  for (auto z : grad.boundary_trace) m = std::max(m, std::abs(z));
  return m;
}

inline double el_residual(const ComplexField& u, const ModelParams& params, const PolarGrid& grid,
                          const BoundaryData& bd) {
  return gradient_max_norm(energy_gradient(u, params, grid, bd));
}

// ---------------------------------------------------------------------------
// Trace elimination
// ---------------------------------------------------------------------------

/// The per-node trace problem min_b c|b - a|^2 + (U/2) W(b, g), c = kappa/dr,
/// is strictly convex iff 2c > U. Returns false when the grid is too coarse.
inline bool trace_problem_convex(const PolarGrid& grid, const ModelParams& params) {
  const double c = (1.0 - 0.25 * grid.dr()) / grid.dr();
  return 2.0 * c > params.upsilon();
}

/// Minimises c|b - a|^2 + (U/2) W(b, 1) over b in the frame where g = 1.
/// Damped Newton from `start`; the objective is strictly convex when 2c > U.
inline cplx solve_trace_node(cplx a, cplx start, double c, double ups, double alpha) {
  const double ca = std::cos(alpha);
  auto objective = [&](cplx b) {
    const double m = std::norm(b) - 1.0;
    const double d = b.real() - ca;
    return c * std::norm(b - a) + 0.5 * ups * (0.5 * m * m + d * d);
  };
  cplx b = start;
  double fb = objective(b);
  for (int it = 0; it < 60; ++it) {
    const double x = b.real();
    const double y = b.imag();
    const double m = x * x + y * y - 1.0;
    const double gx = 2.0 * c * (x - a.real()) + ups * (m * x + (x - ca));
    const double gy = 2.0 * c * (y - a.imag()) + ups * (m * y);
    const double hxx = 2.0 * c + ups * (m + 2.0 * x * x + 1.0);
    const double hyy = 2.0 * c + ups * (m + 2.0 * y * y);
    const double hxy = ups * 2.0 * x * y;
    const double det = hxx * hyy - hxy * hxy;
    double sx;
    double sy;
    if (det > 0.0 && hxx > 0.0) {
      sx = -(hyy * gx - hxy * gy) / det;
      sy = -(hxx * gy - hxy * gx) / det;
    } else {
      const double h = 2.0 * c + 3.0 * ups * (std::norm(b) + 1.0);
      sx = -gx / h;
      sy = -gy / h;
    }
    // Increases below round-off are accepted so Newton can finish.
    const double slack = 1e-14 * (1.0 + std::abs(fb));
    double step = 1.0;
    cplx trial = b + cplx(step * sx, step * sy);
    double ft = objective(trial);
    while (ft > fb + slack && step > 1e-8) {
      step *= 0.5;
      trial = b + cplx(step * sx, step * sy);
      ft = objective(trial);
    }
    if (ft > fb + slack) break;
    const double move = step * std::hypot(sx, sy);
    b = trial;
    fb = ft;
    if (move <= 1e-15 * (1.0 + std::abs(b))) break;
  }
  return b;
}

/// Replaces every trace value by the minimiser of the energy with the cell
/// values held fixed (ghost-cell elimination of the Robin condition).
inline void solve_trace(ComplexField& u, const ModelParams& params, const PolarGrid& grid,
                        const BoundaryData& bd) {
  require_shape(u, grid, "solve_trace");
  require_boundary(bd, grid, "solve_trace");
  const double c = (1.0 - 0.25 * grid.dr()) / grid.dr();
  const double ups = params.upsilon();
  const int last = grid.n_r() - 1;
  for (int j = 0; j < grid.n_theta(); ++j) {
    const cplx g = bd.g(j);
    const cplx gc = std::conj(g);
    const cplx a = u.at(last, j) * gc;
    const cplx start = u.trace(j) * gc;
    u.trace(j) = solve_trace_node(a, start, c, ups, params.alpha()) * g;
  }
}

}  // namespace boojum
