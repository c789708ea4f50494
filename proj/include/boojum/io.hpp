#pragma once

// File formats: field CSV with a parameter sidecar, energy traces, defect and
// renormalized-energy reports, ball-growth histories, director line fields
// and binary PPM renderings.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "boojum/ballgrowth.hpp"
#include "boojum/combinatorics.hpp"
#include "boojum/core.hpp"
#include "boojum/defectlab.hpp"
#include "boojum/energy.hpp"
#include "boojum/flow.hpp"
#include "boojum/renorm.hpp"

namespace boojum {

using json = nlohmann::json;

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw DataError("write to '" + path + "' failed");
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------
// Field CSV
// ---------------------------------------------------------------------------

/// Rows r,theta,re_u,im_u: cells with radius outer, then the trace at r = 1.
inline std::string field_to_csv(const ComplexField& f, const PolarGrid& grid) {
  require_shape(f, grid, "field_to_csv");
  std::string out = "r,theta,re_u,im_u\n";
  out.reserve(out.size() + (grid.size() + static_cast<std::size_t>(grid.n_theta())) * 80);
  auto row = [&](double r, double th, cplx z) {
    out += format_double(r);
    out += ',';
    out += format_double(th);
    out += ',';
    out += format_double(z.real());
    out += ',';
    out += format_double(z.imag());
    out += '\n';
  };
  for (int i = 0; i < grid.n_r(); ++i)
    for (int j = 0; j < grid.n_theta(); ++j) row(grid.r(i), grid.theta(j), f.at(i, j));
  for (int j = 0; j < grid.n_theta(); ++j) row(1.0, grid.theta(j), f.trace(j));
  return out;
}

struct LoadedField {
  PolarGrid grid;
  ComplexField field;
};

/// Inverse of field_to_csv; the grid is recovered from the row layout.
inline LoadedField field_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw DataError("field CSV: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "r,theta,re_u,im_u") throw DataError("field CSV: unexpected header '" + line + "'");
  struct Row {
    double r, th, re, im;
  };
  std::vector<Row> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    Row r{};
    const char* p = line.c_str();
    char* end = nullptr;
    double* dst[4] = {&r.r, &r.th, &r.re, &r.im};
    for (int k = 0; k < 4; ++k) {
      *dst[k] = std::strtod(p, &end);
      if (end == p) throw DataError("field CSV: malformed number on line " + std::to_string(line_no));
      p = end;
      if (k < 3) {
        if (*p != ',') throw DataError("field CSV: expected ',' on line " + std::to_string(line_no));
        ++p;
      }
    }
    rows.push_back(r);
  }
  std::size_t n_trace = 0;
  while (n_trace < rows.size() && rows[rows.size() - 1 - n_trace].r == 1.0) ++n_trace;
  if (n_trace == 0 || (rows.size() - n_trace) % n_trace != 0) throw DataError("field CSV: inconsistent row layout");
  const int nt = static_cast<int>(n_trace);
  const int nr = static_cast<int>((rows.size() - n_trace) / n_trace);
  PolarGrid grid(nr, nt);
  ComplexField f(grid);
  std::size_t k = 0;
  auto check = [&](const Row& row, double r, double th) {
    if (std::abs(row.r - r) > 1e-12 || std::abs(row.th - th) > 1e-12)
      throw DataError("field CSV: coordinates do not match a polar grid at row " + std::to_string(k + 2));
  };
  for (int i = 0; i < nr; ++i)
    for (int j = 0; j < nt; ++j, ++k) {
      check(rows[k], grid.r(i), grid.theta(j));
      f.at(i, j) = {rows[k].re, rows[k].im};
    }
  for (int j = 0; j < nt; ++j, ++k) {
    check(rows[k], 1.0, grid.theta(j));
    f.trace(j) = {rows[k].re, rows[k].im};
  }
  if (!f.all_finite()) throw DataError("field CSV: non-finite entries");
  return {std::move(grid), std::move(f)};
}

inline json params_to_json(const ModelParams& p, const PolarGrid& grid) {
  return json{{"epsilon", p.epsilon()}, {"s", p.s()},           {"alpha", p.alpha()},    {"degree", p.degree()},
              {"upsilon", p.upsilon()}, {"n_r", grid.n_r()}, {"n_theta", grid.n_theta()}};
}

inline ModelParams params_from_json(const json& j) {
  for (const char* key : {"epsilon", "s", "alpha", "degree"})
    if (!j.contains(key)) throw ConfigError(std::string("parameter sidecar: missing '") + key + "'");
  return ModelParams(j.at("epsilon").get<double>(), j.at("s").get<double>(), j.at("alpha").get<double>(),
                     j.at("degree").get<int>());
}

/// Writes <stem>.csv and <stem>.json.
inline void save_field(const std::string& stem, const ComplexField& f, const PolarGrid& grid,
                       const ModelParams& p) {
  write_text(stem + ".csv", field_to_csv(f, grid));
  write_text(stem + ".json", params_to_json(p, grid).dump(2) + "\n");
}

/// Boundary lifting from a CSV with columns theta,gamma on the grid nodes.
inline BoundaryData boundary_from_csv(const std::string& text, int degree, const PolarGrid& grid) {
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  std::vector<double> gamma;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw DataError("boundary CSV: expected theta,gamma");
    gamma.push_back(std::stod(line.substr(comma + 1)));
  }
  if (gamma.size() != static_cast<std::size_t>(grid.n_theta()))
    throw ConfigError("boundary CSV: row count does not match n_theta");
  return BoundaryData(std::move(gamma), degree);
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

inline json to_json(const EnergyBreakdown& e) {
  return json{{"dirichlet", e.dirichlet}, {"potential", e.potential}, {"anchoring", e.anchoring}, {"total", e.total}};
}

inline std::string energy_trace_csv(const RelaxReport& rep) {
  std::string out = "step,dirichlet,potential,anchoring,total\n";
  for (const auto& s : rep.energy_trace) {
    out += std::to_string(s.step) + ',' + format_double(s.energy.dirichlet) + ',' + format_double(s.energy.potential) +
           ',' + format_double(s.energy.anchoring) + ',' + format_double(s.energy.total) + '\n';
  }
  return out;
}

inline json to_json(const DefectRecord& d) {
  return json{{"kind", to_string(d.kind)}, {"r", d.r},     {"theta", d.theta},
              {"degree", d.degree},      {"tau", d.tau}, {"confidence", d.confidence}};
}

inline json to_json(const DefectReport& rep) {
  json arr = json::array();
  for (const auto& d : rep.defects) arr.push_back(to_json(d));
  const auto& s = rep.summary;
  return json{{"defects", arr},
              {"summary",
               {{"degree_sum_ok", s.degree_sum_ok},
                {"n_interior", s.n_interior},
                {"n_light", s.n_light},
                {"n_heavy", s.n_heavy},
                {"n_bvortex", s.n_bvortex},
                {"n_unclassified", s.n_unclassified}}}};
}

inline json to_json(const RenormMinimum& m) {
  json angles = json::array();
  json kinds = json::array();
  struct P {
    double a;
    const char* k;
  };
  std::vector<P> all;
  for (double a : m.config.light_angles) all.push_back({a, "light"});
  for (double a : m.config.heavy_angles) all.push_back({a, "heavy"});
  std::sort(all.begin(), all.end(), [](const P& x, const P& y) { return x.a < y.a; });
  for (const auto& p : all) {
    angles.push_back(p.a);
    kinds.push_back(p.k);
  }
  return json{{"angles", angles},
              {"kinds", kinds},
              {"value", m.value},
              {"grid_value", m.grid_value},
              {"grid_verified", m.grid_verified}};
}

inline json to_json(const DefectBall& b) {
  json j{{"kind", to_string(b.kind)}, {"radius", b.radius}, {"seed", b.seed}, {"degree", b.degree}, {"tau", b.tau}};
  if (b.kind == BallKind::boundary) j["angle"] = b.angle;
  else j["point"] = {b.point.real(), b.point.imag()};
  return j;
}

inline DefectBall ball_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  const double seed = j.at("seed").get<double>();
  const int degree = j.value("degree", 0);
  if (kind == "boundary") return DefectBall::boundary(j.at("angle").get<double>(), seed, degree, j.value("tau", 0));
  if (kind == "interior") {
    const auto& p = j.at("point");
    DefectBall b = DefectBall::interior({p.at(0).get<double>(), p.at(1).get<double>()}, seed, degree);
    return b;
  }
  throw ConfigError("ball kind must be 'boundary' or 'interior', got '" + kind + "'");
}

inline json to_json(const GrowthReport& rep) {
  json hist = json::array();
  for (const auto& h : rep.history)
    hist.push_back(json{{"time", h.time}, {"event", to_string(h.event)}, {"ball", to_json(h.ball)}});
  json fin = json::array();
  for (const auto& b : rep.final_balls) fin.push_back(to_json(b));
  return json{{"history", hist},       {"final_balls", fin}, {"final_time", rep.final_time},
              {"D_b", rep.D_b},        {"D_int", rep.D_int}, {"coefficient", rep.coefficient}};
}

inline json to_json(const DegreeConfig& c) {
  json pairs = json::array();
  for (auto [m, p] : c.boojum_pairs()) pairs.push_back({m, p});
  return json{{"boundary_vortices", c.boundary_vortices()}, {"boojum_pairs", pairs}};
}

inline json to_json(const MinConfigResult& r) {
  json arr = json::array();
  for (const auto& c : r.minimizers) arr.push_back(to_json(c));
  return json{{"min_cost", r.min_cost}, {"minimizers", arr}};
}

// ---------------------------------------------------------------------------
// Director field and images
// ---------------------------------------------------------------------------

struct DirectorSample {
  double angle = 0.0;  // in [0, pi)
  double order = 0.0;  // |u|
  bool isotropic = false;
};

/// The director halves the phase of u; |u| < 0.1 counts as isotropic.
inline DirectorSample director_of(cplx u) {
  DirectorSample d;
  d.order = std::abs(u);
  d.isotropic = d.order < 0.1;
  double a = 0.5 * std::arg(u);
  if (a < 0.0) a += pi;
  if (a >= pi) a -= pi;
  d.angle = a;
  return d;
}

inline std::string export_director(const ComplexField& f, const PolarGrid& grid) {
  require_shape(f, grid, "export_director");
  std::string out = "r,theta,x,y,angle,order,isotropic\n";
  for (int i = 0; i < grid.n_r(); ++i)
    for (int j = 0; j < grid.n_theta(); ++j) {
      const DirectorSample d = director_of(f.at(i, j));
      const cplx x = grid.point(i, j);
      out += format_double(grid.r(i)) + ',' + format_double(grid.theta(j)) + ',' + format_double(x.real()) + ',' +
             format_double(x.imag()) + ',' + format_double(d.angle) + ',' + format_double(d.order) + ',' +
             (d.isotropic ? "1" : "0") + '\n';
    }
  return out;
}

enum class RenderMode { modulus, phase, director };

inline RenderMode render_mode_from_string(const std::string& s) {
  if (s == "modulus") return RenderMode::modulus;
  if (s == "phase") return RenderMode::phase;
  if (s == "director") return RenderMode::director;
  throw ConfigError("render mode must be modulus, phase or director");
}

struct Image {
  int width = 0;
  int height = 0;
  std::vector<unsigned char> rgb;

  void set(int x, int y, unsigned char r, unsigned char g, unsigned char b) {
    if (x < 0 || y < 0 || x >= width || y >= height) return;
    const std::size_t k = 3 * (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x));
    rgb[k] = r;
    rgb[k + 1] = g;
    rgb[k + 2] = b;
  }
  std::string ppm() const {
    std::string out = "P6\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
    out.append(reinterpret_cast<const char*>(rgb.data()), rgb.size());
    return out;
  }
};

namespace detail {

inline unsigned char to_byte(double v) {
  return static_cast<unsigned char>(std::lround(255.0 * std::clamp(v, 0.0, 1.0)));
}

/// Hue wheel: phase 0 red, 2pi/3 green, 4pi/3 blue.
inline void hue(double phase, unsigned char out[3]) {
  const double h = wrap_two_pi(phase) / two_pi * 6.0;
  const int sector = static_cast<int>(std::floor(h)) % 6;
  const double f = h - std::floor(h);
  double r = 0;
  double g = 0;
  double b = 0;
  switch (sector) {
    case 0: r = 1; g = f; break;
    case 1: r = 1 - f; g = 1; break;
    case 2: g = 1; b = f; break;
    case 3: g = 1 - f; b = 1; break;
    case 4: r = f; b = 1; break;
    default: r = 1; b = 1 - f; break;
  }
  out[0] = to_byte(r);
  out[1] = to_byte(g);
  out[2] = to_byte(b);
}

}  // namespace detail

/// Renders the disk on a size x size canvas with a white background.
/// Director mode draws one line glyph per `glyph_spacing` pixels.
inline Image render_field(const ComplexField& f, const PolarGrid& grid, RenderMode mode, int size = 512,
                          int glyph_spacing = 16) {
  require_shape(f, grid, "render_field");
  if (size < 8) throw ConfigError("render_field: image size too small");
  Image img{size, size, std::vector<unsigned char>(static_cast<std::size_t>(3 * size * size), 255)};
  const double half = 0.5 * size;
  auto to_disk = [&](double px, double py) { return cplx((px + 0.5 - half) / half, (half - py - 0.5) / half); };

  if (mode != RenderMode::director) {
    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x) {
        const cplx z = to_disk(x, y);
        if (std::abs(z) > 1.0) continue;
        const cplx u = sample(f, grid, z);
        if (mode == RenderMode::modulus) {
          const unsigned char v = detail::to_byte(std::abs(u));
          img.set(x, y, v, v, v);
        } else {
          unsigned char c[3];
          detail::hue(std::arg(u), c);
          img.set(x, y, c[0], c[1], c[2]);
        }
      }
    return img;
  }

  // Director: boundary circle plus glyphs of length ~ spacing scaled by order.
  for (int k = 0; k < 8 * size; ++k) {
    const double t = two_pi * k / (8 * size);
    img.set(static_cast<int>(std::floor(half + (half - 1) * std::cos(t))),
            static_cast<int>(std::floor(half - (half - 1) * std::sin(t))), 0, 0, 0);
  }
  const int sp = std::max(glyph_spacing, 4);
  for (int gy = sp / 2; gy < size; gy += sp)
    for (int gx = sp / 2; gx < size; gx += sp) {
      const cplx z = to_disk(gx, gy);
      if (std::abs(z) >= 1.0) continue;
      const DirectorSample d = director_of(sample(f, grid, z));
      if (d.isotropic) {
        img.set(gx, gy, 200, 0, 0);
        continue;
      }
      const double len = 0.45 * sp * std::min(d.order, 1.0);
      const int steps = static_cast<int>(std::ceil(2.0 * len)) + 1;
      for (int k = -steps; k <= steps; ++k) {
        const double s = len * k / steps;
        img.set(static_cast<int>(std::lround(gx + s * std::cos(d.angle))),
                static_cast<int>(std::lround(gy - s * std::sin(d.angle))), 0, 0, 0);
      }
    }
  return img;
}

}  // namespace boojum
