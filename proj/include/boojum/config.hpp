#pragma once

// Run configuration: INI/TOML-style sections of flat key = value pairs.
//
//   [model]  epsilon (dimensionless, disk radius 1), s, alpha (radians; "pi/3"
//            style expressions accepted), degree, boundary_file (optional CSV)
//   [grid]   n_r, n_theta
//   [run]    seed (vortex | boojum | random | both), tol, max_steps,
//            checkpoint_every, max_seconds, output, rng_seed, amplitude,
//            image_size
//   [sweep]  s = [..], alpha = [..]
//
// Command-line overrides use "section.key=value".

#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "boojum/core.hpp"

namespace boojum {

enum class SeedKind { vortex, boojum, random, both };

inline const char* to_string(SeedKind k) {
  switch (k) {
    case SeedKind::vortex: return "vortex";
    case SeedKind::boojum: return "boojum";
    case SeedKind::random: return "random";
    case SeedKind::both: return "both";
  }
  return "?";
}

inline SeedKind seed_kind_from_string(const std::string& s) {
  if (s == "vortex") return SeedKind::vortex;
  if (s == "boojum") return SeedKind::boojum;
  if (s == "random") return SeedKind::random;
  if (s == "both") return SeedKind::both;
  throw ConfigError("run.seed: expected vortex, boojum, random or both, got '" + s + "'");
}

/// Parses a real number or a product/quotient involving "pi", e.g. "pi/3",
/// "2*pi/5", "0.25pi", "-pi".
inline double parse_real(const std::string& raw, const std::string& key) {
  std::string s;
  for (char c : raw)
    if (c != ' ' && c != '\t' && c != '"' && c != '\'') s += c;
  if (s.empty()) throw ConfigError(key + ": empty value");
  double value = 1.0;
  bool divide = false;
  std::size_t pos = 0;
  if (s[0] == '-' || s[0] == '+') {
    if (s[0] == '-') value = -1.0;
    pos = 1;
  }
  bool any = false;
  while (pos < s.size()) {
    double factor = 0.0;
    if (s.compare(pos, 2, "pi") == 0) {
      factor = pi;
      pos += 2;
    } else {
      std::size_t used = 0;
      try {
        factor = std::stod(s.substr(pos), &used);
      } catch (const std::exception&) {
        throw ConfigError(key + ": cannot parse '" + raw + "' as a number");
      }
      pos += used;
    }
    value = divide ? value / factor : value * factor;
    any = true;
    divide = false;
    if (pos == s.size()) break;
    if (s[pos] == '*') {
      ++pos;
    } else if (s[pos] == '/') {
      divide = true;
      ++pos;
    } else if (s.compare(pos, 2, "pi") != 0) {
      throw ConfigError(key + ": cannot parse '" + raw + "' as a number");
    }
    if (pos == s.size()) throw ConfigError(key + ": dangling operator in '" + raw + "'");
  }
  if (!any || !std::isfinite(value)) throw ConfigError(key + ": cannot parse '" + raw + "' as a number");
  return value;
}

inline long long parse_integer(const std::string& raw, const std::string& key) {
  std::string s;
  for (char c : raw)
    if (c != ' ' && c != '\t' && c != '"') s += c;
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &used);
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected an integer, got '" + raw + "'");
  }
  if (used != s.size()) throw ConfigError(key + ": expected an integer, got '" + raw + "'");
  return v;
}

/// "[a, b, c]" or a bare comma list; "[]" is empty.
inline std::vector<double> parse_real_list(const std::string& raw, const std::string& key) {
  std::string s = raw;
  const auto l = s.find('[');
  const auto r = s.rfind(']');
  if (l != std::string::npos) {
    if (r == std::string::npos || r < l) throw ConfigError(key + ": unbalanced brackets in '" + raw + "'");
    s = s.substr(l + 1, r - l - 1);
  }
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    out.push_back(parse_real(item, key));
  }
  return out;
}

inline std::string unquote(std::string s) {
  const auto b = s.find_first_not_of(" \t");
  const auto e = s.find_last_not_of(" \t");
  if (b == std::string::npos) return "";
  s = s.substr(b, e - b + 1);
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) s = s.substr(1, s.size() - 2);
  return s;
}

struct RunConfig {
  double epsilon = 0.0;
  double s = 0.0;
  double alpha = 0.0;
  int degree = 0;
  std::string boundary_file;

  int n_r = 0;
  int n_theta = 0;

  SeedKind seed = SeedKind::both;
  double tol = 1e-6;
  long long max_steps = 200000;
  long long checkpoint_every = 0;
  double max_seconds = 0.0;
  std::string output = "out";
  std::uint64_t rng_seed = 1;
  double amplitude = 0.5;
  int image_size = 512;

  std::vector<double> sweep_s;
  std::vector<double> sweep_alpha;

  ModelParams params() const { return ModelParams(epsilon, s, alpha, degree); }
  PolarGrid grid() const { return PolarGrid(n_r, n_theta); }
};

class ConfigTree {
 public:
  explicit ConfigTree(boost::property_tree::ptree t) : tree_(std::move(t)) {}

  std::optional<std::string> find(const std::string& key) const {
    if (auto v = tree_.get_optional<std::string>(key)) return unquote(*v);
    return std::nullopt;
  }
  std::string need(const std::string& key) const {
    auto v = find(key);
    if (!v) throw ConfigError("missing required key '" + key + "'");
    return *v;
  }
  void set(const std::string& key, const std::string& value) { tree_.put(key, value); }

 private:
  boost::property_tree::ptree tree_;
};

inline ConfigTree parse_config_tree(const std::string& text) {
  std::istringstream in(text);
  boost::property_tree::ptree t;
  try {
    boost::property_tree::ini_parser::read_ini(in, t);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax: ") + e.what());
  }
  return ConfigTree(std::move(t));
}

/// Applies "section.key=value" overrides in order.
inline void apply_overrides(ConfigTree& tree, const std::vector<std::string>& overrides) {
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + o + "' is not of the form section.key=value");
    const std::string key = unquote(o.substr(0, eq));
    if (key.find('.') == std::string::npos) throw ConfigError("override key '" + key + "' needs a section prefix");
    tree.set(key, o.substr(eq + 1));
  }
}

/// With `sweep` set, model.s and model.alpha may be left to the [sweep] lists.
inline RunConfig config_from_tree(const ConfigTree& t, bool sweep = false) {
  RunConfig c;
  auto real = [&](const std::string& k) { return parse_real(t.need(k), k); };
  auto integer = [&](const std::string& k) { return parse_integer(t.need(k), k); };

  c.epsilon = real("model.epsilon");
  if (!(c.epsilon > 0.0 && c.epsilon < 1.0)) throw ConfigError("model.epsilon must lie in (0, 1)");
  if (sweep) {
    if (auto v = t.find("sweep.s")) c.sweep_s = parse_real_list(*v, "sweep.s");
    if (auto v = t.find("sweep.alpha")) c.sweep_alpha = parse_real_list(*v, "sweep.alpha");
    c.s = t.find("model.s") ? real("model.s") : (c.sweep_s.empty() ? 1.0 : c.sweep_s.front());
    c.alpha = t.find("model.alpha") ? real("model.alpha") : (c.sweep_alpha.empty() ? pi / 3 : c.sweep_alpha.front());
  } else {
    c.s = real("model.s");
    c.alpha = real("model.alpha");
  }
  c.degree = static_cast<int>(integer("model.degree"));
  if (auto v = t.find("model.boundary_file")) c.boundary_file = *v;
  c.n_r = static_cast<int>(integer("grid.n_r"));
  c.n_theta = static_cast<int>(integer("grid.n_theta"));

  if (auto v = t.find("run.seed")) c.seed = seed_kind_from_string(*v);
  if (auto v = t.find("run.tol")) c.tol = parse_real(*v, "run.tol");
  if (auto v = t.find("run.max_steps")) c.max_steps = parse_integer(*v, "run.max_steps");
  if (auto v = t.find("run.checkpoint_every")) c.checkpoint_every = parse_integer(*v, "run.checkpoint_every");
  if (auto v = t.find("run.max_seconds")) c.max_seconds = parse_real(*v, "run.max_seconds");
  if (auto v = t.find("run.output")) c.output = *v;
  if (auto v = t.find("run.rng_seed")) {
    const long long r = parse_integer(*v, "run.rng_seed");
    if (r < 0) throw ConfigError("run.rng_seed must be nonnegative");
    c.rng_seed = static_cast<std::uint64_t>(r);
  }
  if (auto v = t.find("run.amplitude")) c.amplitude = parse_real(*v, "run.amplitude");
  if (auto v = t.find("run.image_size")) c.image_size = static_cast<int>(parse_integer(*v, "run.image_size"));

  if (!(c.tol > 0.0)) throw ConfigError("run.tol must be positive");
  if (c.max_steps <= 0) throw ConfigError("run.max_steps must be positive");
  if (c.checkpoint_every < 0) throw ConfigError("run.checkpoint_every must be nonnegative");
  if (c.image_size < 8) throw ConfigError("run.image_size must be at least 8");
  // Validates ranges of the model and grid values.
  (void)c.params();
  (void)c.grid();
  return c;
}

inline RunConfig parse_config(const std::string& text, const std::vector<std::string>& overrides = {},
                              bool sweep = false) {
  ConfigTree t = parse_config_tree(text);
  apply_overrides(t, overrides);
  return config_from_tree(t, sweep);
}

}  // namespace boojum
