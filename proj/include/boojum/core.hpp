#pragma once

// Model parameters, the polar grid over the unit disk, boundary data and the
// complex field container shared by every other module.

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace boojum {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

// ---------------------------------------------------------------------------
// Error types
// ---------------------------------------------------------------------------

/// Invalid user-supplied configuration (sizes, missing keys, malformed files).
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Argument outside the mathematical domain of a function.
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

/// Field data that violates an invariant (non-finite entries, shape mismatch).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Energy increase or NaN during a relaxation.
struct StabilityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Small numeric helpers
// ---------------------------------------------------------------------------

/// Principal value in (-pi, pi].
inline double wrap_pi(double a) {
  a = std::remainder(a, two_pi);
  if (a <= -pi) a += two_pi;
  return a;
}

/// Representative in [0, 2pi).
inline double wrap_two_pi(double a) {
  a = std::fmod(a, two_pi);
  if (a < 0.0) a += two_pi;
  if (a >= two_pi) a -= two_pi;
  return a;
}

/// Real scalar product (u, v) = Re(u conj(v)).
inline double dot(cplx u, cplx v) { return u.real() * v.real() + u.imag() * v.imag(); }

inline bool is_finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

// ---------------------------------------------------------------------------
// ModelParams
// ---------------------------------------------------------------------------

/// Upsilon(eps) = eps^(-s).
inline double anchoring_strength(double epsilon, double s) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon))
    throw DomainError("anchoring_strength: epsilon must be positive");
  if (!(s > 0.0 && s <= 1.0))
    throw DomainError("anchoring_strength: s must lie in (0, 1]");
  return std::pow(epsilon, -s);
}

class ModelParams {
 public:
  ModelParams(double epsilon, double s, double alpha, int degree)
      : epsilon_(epsilon), s_(s), alpha_(alpha), degree_(degree) {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon))
      throw ConfigError("epsilon must be positive");
    if (!(s > 0.0 && s <= 1.0)) throw ConfigError("s must lie in (0, 1]");
    if (!(alpha > 0.0 && alpha < pi / 2)) throw ConfigError("alpha must lie in (0, pi/2)");
  }

  double epsilon() const { return epsilon_; }
  double s() const { return s_; }
  double alpha() const { return alpha_; }
  int degree() const { return degree_; }
  double upsilon() const { return anchoring_strength(epsilon_, s_); }
  /// Boundary core scale eps^s.
  double boundary_core() const { return std::pow(epsilon_, s_); }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;

 private:
  double epsilon_;
  double s_;
  double alpha_;
  int degree_;
};

// ---------------------------------------------------------------------------
// PolarGrid
// ---------------------------------------------------------------------------

/// Cell-centred polar grid on the unit disk. Radial cells i = 0..n_r-1 sit at
/// r_i = (i + 1/2) dr, angular nodes j = 0..n_theta-1 at theta_j = j dtheta.
/// No node lies on r = 0; the innermost ring talks to itself across the
/// origin through cell (0, j + n_theta/2).
class PolarGrid {
 public:
  PolarGrid(int n_r, int n_theta) : n_r_(n_r), n_theta_(n_theta) {
    if (n_r < 8) throw ConfigError("n_r must be at least 8");
    if (n_theta < 16) throw ConfigError("n_theta must be at least 16");
    if (n_theta % 2 != 0) throw ConfigError("n_theta must be even");
    dr_ = 1.0 / n_r;
    dtheta_ = two_pi / n_theta;
    radii_.resize(static_cast<std::size_t>(n_r));
    for (int i = 0; i < n_r; ++i) radii_[static_cast<std::size_t>(i)] = (i + 0.5) * dr_;
  }

  int n_r() const { return n_r_; }
  int n_theta() const { return n_theta_; }
  double dr() const { return dr_; }
  double dtheta() const { return dtheta_; }
  std::span<const double> radii() const { return radii_; }
  double r(int i) const { return radii_[static_cast<std::size_t>(i)]; }
  double theta(int j) const { return wrap_j(j) * dtheta_; }
  std::size_t size() const { return static_cast<std::size_t>(n_r_) * static_cast<std::size_t>(n_theta_); }

  int wrap_j(int j) const {
    j %= n_theta_;
    return j < 0 ? j + n_theta_ : j;
  }
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(n_theta_) +
           static_cast<std::size_t>(wrap_j(j));
  }
  /// Angular partner across the origin.
  int opposite(int j) const { return wrap_j(j + n_theta_ / 2); }

  /// Polar cell measure r_i dr dtheta.
  double cell_area(int i) const { return r(i) * dr_ * dtheta_; }

  cplx point(int i, int j) const { return std::polar(r(i), theta(j)); }

  friend bool operator==(const PolarGrid& a, const PolarGrid& b) {
    return a.n_r_ == b.n_r_ && a.n_theta_ == b.n_theta_;
  }

 private:
  int n_r_;
  int n_theta_;
  double dr_;
  double dtheta_;
  std::vector<double> radii_;
};

inline PolarGrid make_polar_grid(int n_r, int n_theta) { return PolarGrid(n_r, n_theta); }

// ---------------------------------------------------------------------------
// BoundaryData
// ---------------------------------------------------------------------------

/// Winding of a closed sequence of nonzero complex samples.
inline double winding_of_samples(std::span<const cplx> z) {
  double total = 0.0;
  const std::size_t n = z.size();
  for (std::size_t k = 0; k < n; ++k) total += std::arg(z[(k + 1) % n] / z[k]);
  return total / two_pi;
}

/// Boundary map g = exp(i gamma) sampled at the angular nodes, stored through
/// its lifting gamma. The lifting closes up to 2 pi * degree.
class BoundaryData {
 public:
  BoundaryData(std::vector<double> gamma, int degree) : gamma_(std::move(gamma)), degree_(degree) {
    if (gamma_.size() < 2) throw ConfigError("boundary data needs at least two samples");
    g_.resize(gamma_.size());
    for (std::size_t j = 0; j < gamma_.size(); ++j) {
      if (!std::isfinite(gamma_[j])) throw DataError("boundary lifting must be finite");
      g_[j] = std::polar(1.0, gamma_[j]);
    }
    const double w = winding_of_samples(g_);
    if (std::abs(w - degree_) > 1e-6)
      throw DataError("boundary lifting winding " + std::to_string(w) + " does not match degree " +
                      std::to_string(degree_));
  }

  std::span<const double> gamma() const { return gamma_; }
  std::span<const cplx> g() const { return g_; }
  double gamma(int j) const { return gamma_[static_cast<std::size_t>(j)]; }
  cplx g(int j) const { return g_[static_cast<std::size_t>(j)]; }
  int degree() const { return degree_; }
  std::size_t size() const { return gamma_.size(); }
  double winding() const { return winding_of_samples(g_); }

  /// Lifting at an arbitrary boundary angle, continued by 2 pi * degree per turn.
  double gamma_at(double theta) const {
    const auto n = static_cast<int>(gamma_.size());
    const double h = two_pi / n;
    const double turns = std::floor(theta / two_pi);
    const double t = (theta - turns * two_pi) / h;
    int j0 = static_cast<int>(std::floor(t));
    if (j0 >= n) j0 = n - 1;
    const double f = t - j0;
    const double a = gamma_[static_cast<std::size_t>(j0)];
    const double b = j0 + 1 < n ? gamma_[static_cast<std::size_t>(j0 + 1)] : gamma_[0] + two_pi * degree_;
    return (1.0 - f) * a + f * b + turns * two_pi * degree_;
  }
  cplx g_at(double theta) const { return std::polar(1.0, gamma_at(theta)); }

 private:
  std::vector<double> gamma_;
  std::vector<cplx> g_;
  int degree_;
};

/// g(theta) = exp(i D theta).
inline BoundaryData equivariant_boundary(int degree, int n_theta) {
  if (n_theta < 2) throw ConfigError("n_theta must be at least 2");
  std::vector<double> gamma(static_cast<std::size_t>(n_theta));
  const double h = two_pi / n_theta;
  for (int j = 0; j < n_theta; ++j) gamma[static_cast<std::size_t>(j)] = degree * (j * h);
  return BoundaryData(std::move(gamma), degree);
}

// ---------------------------------------------------------------------------
// ComplexField
// ---------------------------------------------------------------------------

/// Order parameter on the grid cells plus its trace on the circle r = 1.
/// Single writer, many readers between mutations.
struct ComplexField {
  int n_r = 0;
  int n_theta = 0;
  std::vector<cplx> values;          // row-major, radius outer
  std::vector<cplx> boundary_trace;  // one per angular node

  ComplexField() = default;
  explicit ComplexField(const PolarGrid& grid, cplx fill = {0.0, 0.0})
      : n_r(grid.n_r()),
        n_theta(grid.n_theta()),
        values(grid.size(), fill),
        boundary_trace(static_cast<std::size_t>(grid.n_theta()), fill) {}

  cplx& at(int i, int j) {
    return values[static_cast<std::size_t>(i) * static_cast<std::size_t>(n_theta) + static_cast<std::size_t>(j)];
  }
  cplx at(int i, int j) const {
    return values[static_cast<std::size_t>(i) * static_cast<std::size_t>(n_theta) + static_cast<std::size_t>(j)];
  }
  cplx& trace(int j) { return boundary_trace[static_cast<std::size_t>(j)]; }
  cplx trace(int j) const { return boundary_trace[static_cast<std::size_t>(j)]; }

  bool matches(const PolarGrid& grid) const {
    return n_r == grid.n_r() && n_theta == grid.n_theta() && values.size() == grid.size() &&
           boundary_trace.size() == static_cast<std::size_t>(grid.n_theta());
  }
  bool all_finite() const {
    for (auto z : values)
      if (!is_finite(z)) return false;
    for (auto z : boundary_trace)
      if (!is_finite(z)) return false;
    return true;
  }
  double max_modulus() const {
    double m = 0.0;
    for (auto z : values) m = std::max(m, std::abs(z));
    for (auto z : boundary_trace) m = std::max(m, std::abs(z));
    return m;
  }

  friend bool operator==(const ComplexField&, const ComplexField&) = default;
};

inline void require_shape(const ComplexField& f, const PolarGrid& grid, const char* where) {
  if (!f.matches(grid)) throw DataError(std::string(where) + ": field does not match grid");
}

inline void require_boundary(const BoundaryData& bd, const PolarGrid& grid, const char* where) {
  if (bd.size() != static_cast<std::size_t>(grid.n_theta()))
    throw ConfigError(std::string(where) + ": boundary data size does not match n_theta");
}

/// Max-norm distance between two fields of equal shape (interior and trace).
inline double max_difference(const ComplexField& a, const ComplexField& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.values.size(); ++k) m = std::max(m, std::abs(a.values[k] - b.values[k]));
  for (std::size_t k = 0; k < a.boundary_trace.size(); ++k)
    m = std::max(m, std::abs(a.boundary_trace[k] - b.boundary_trace[k]));
  return m;
}

/// Value of the field at a Cartesian point of the closed disk. Bilinear in
/// (r, theta) between cell centres; the outermost half cell interpolates to
/// the trace and the innermost one to the opposite cell across the origin.
inline cplx sample(const ComplexField& f, const PolarGrid& grid, cplx x) {
  const double r = std::min(std::abs(x), 1.0);
  const double th = wrap_two_pi(std::arg(x));
  const double t = th / grid.dtheta();
  const int j0 = grid.wrap_j(static_cast<int>(std::floor(t)));
  const int j1 = grid.wrap_j(j0 + 1);
  const double ft = t - std::floor(t);
  auto ring = [&](int i) { return (1.0 - ft) * f.at(i, j0) + ft * f.at(i, j1); };
  auto trace = [&]() { return (1.0 - ft) * f.trace(j0) + ft * f.trace(j1); };

  const double s = r / grid.dr() - 0.5;
  const int last = grid.n_r() - 1;
  if (s < 0.0) {
    const double r0 = grid.r(0);
    const cplx near = ring(0);
    const cplx far = (1.0 - ft) * f.at(0, grid.opposite(j0)) + ft * f.at(0, grid.opposite(j1));
    const double w = (r + r0) / (2.0 * r0);
    return w * near + (1.0 - w) * far;
  }
  if (s >= last) {
    const double w = (r - grid.r(last)) / (0.5 * grid.dr());
    return (1.0 - w) * ring(last) + w * trace();
  }
  const int i0 = static_cast<int>(std::floor(s));
  const double fr = s - i0;
  return (1.0 - fr) * ring(i0) + fr * ring(i0 + 1);
}

}  // namespace boojum
