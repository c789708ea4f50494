#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "boojum/core.hpp"
#include "boojum/seeds.hpp"

namespace testing_support {

using boojum::cplx;

/// Smooth non-trivial field u(x) = (0.8 + 0.3 x - 0.2 y^2) exp(i(x + 0.5 x y)).
inline cplx smooth_field(cplx x) {
  const double a = x.real();
  const double b = x.imag();
  return (0.8 + 0.3 * a - 0.2 * b * b) * std::polar(1.0, a + 0.5 * a * b);
}

inline boojum::ComplexField sample_smooth(const boojum::PolarGrid& grid) {
  boojum::ComplexField u(grid);
  for (int i = 0; i < grid.n_r(); ++i)
    for (int j = 0; j < grid.n_theta(); ++j) u.at(i, j) = smooth_field(grid.point(i, j));
  for (int j = 0; j < grid.n_theta(); ++j) u.trace(j) = smooth_field(std::polar(1.0, grid.theta(j)));
  return u;
}

/// Rotates a field by k angular nodes for equivariant data of degree D:
/// u'(r, theta) = e^{i D c} u(r, theta - c), c = k dtheta.
inline boojum::ComplexField rotate(const boojum::ComplexField& u, const boojum::PolarGrid& grid, int k, int D) {
  boojum::ComplexField out(grid);
  const cplx f = std::polar(1.0, D * k * grid.dtheta());
  for (int i = 0; i < grid.n_r(); ++i)
    for (int j = 0; j < grid.n_theta(); ++j) out.at(i, j) = f * u.at(i, grid.wrap_j(j - k));
  for (int j = 0; j < grid.n_theta(); ++j) out.trace(j) = f * u.trace(grid.wrap_j(j - k));
  return out;
}

}  // namespace testing_support
