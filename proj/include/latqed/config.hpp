#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "latqed/error.hpp"

namespace latqed::config {

inline constexpr int schema_version = 1;

enum class Scenario {
  Spectrum,
  Criticality,
  DeltaOracle,
  Dynamics,
  AdiabaticScan,
  SchwingerScan,
  Bands,
  Wannier,
  Hierarchy,
  ManyBody,
  JWCheck
};

inline constexpr std::pair<Scenario, std::string_view> scenario_names[] = {
    {Scenario::Spectrum, "Spectrum"},       {Scenario::Criticality, "Criticality"},
    {Scenario::DeltaOracle, "DeltaOracle"}, {Scenario::Dynamics, "Dynamics"},
    {Scenario::AdiabaticScan, "AdiabaticScan"}, {Scenario::SchwingerScan, "SchwingerScan"},
    {Scenario::Bands, "Bands"},             {Scenario::Wannier, "Wannier"},
    {Scenario::Hierarchy, "Hierarchy"},     {Scenario::ManyBody, "ManyBody"},
    {Scenario::JWCheck, "JWCheck"}};

inline std::string_view to_string(Scenario s) {
  for (const auto& [k, name] : scenario_names)
    if (k == s) return name;
  return "?";
}

inline std::optional<Scenario> scenario_from_string(std::string_view name) {
  for (const auto& [k, n] : scenario_names)
    if (n == name) return k;
  return std::nullopt;
}

using IntList = std::vector<long long>;
using RealList = std::vector<double>;
using Value = std::variant<long long, double, std::string, bool, RealList, IntList>;

enum class Type { Int, Real, String, Bool, RealList, IntList };

inline std::string_view type_name(Type t) {
  switch (t) {
    case Type::Int: return "integer";
    case Type::Real: return "real";
    case Type::String: return "string";
    case Type::Bool: return "bool";
    case Type::RealList: return "real list";
    case Type::IntList: return "integer list";
  }
  return "?";
}

/// One accepted key. No default and `required` false means the key is optional
/// and simply absent when not given.
struct KeySpec {
  std::string key;
  Type type;
  std::optional<Value> fallback;
  bool required = false;
  std::vector<std::string> choices;  // String keys only; empty = free text
};

struct ScenarioConfig {
  Scenario scenario = Scenario::Spectrum;
  int schema = schema_version;
  std::uint64_t seed = 0;
  std::string output_dir = "latqed_out";
  std::map<std::string, Value> params;
  // key = value lines as written (after defaults), in key order, for the manifest
  std::vector<std::pair<std::string, std::string>> echo;

  bool has(const std::string& key) const { return params.count(key) != 0; }

  template <class T>
  const T& get(const std::string& key) const {
    const auto it = params.find(key);
    if (it == params.end()) throw ConfigError("missing parameter '" + key + "'");
    if (const T* v = std::get_if<T>(&it->second)) return *v;
    throw ConfigError("parameter '" + key + "' has the wrong type");
  }
  double real(const std::string& key) const { return get<double>(key); }
  long long integer(const std::string& key) const { return get<long long>(key); }
  const std::string& text(const std::string& key) const { return get<std::string>(key); }
  bool flag(const std::string& key) const { return get<bool>(key); }
  const RealList& reals(const std::string& key) const { return get<RealList>(key); }
  const IntList& integers(const std::string& key) const { return get<IntList>(key); }
  std::optional<double> maybe_real(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return real(key);
  }
};

// ---------------------------------------------------------------------------
// Schemas

namespace detail {

inline void add_chain(std::vector<KeySpec>& s) {
  s.push_back({"chain.num_sites", Type::Int, std::nullopt, true, {}});
  s.push_back({"chain.spacing", Type::Real, std::nullopt, true, {}});
  s.push_back({"chain.mass", Type::Real, 1.0, false, {}});
  s.push_back({"chain.hopping", Type::Real, std::nullopt, false, {}});
}

inline void add_potential(std::vector<KeySpec>& s) {
  s.push_back({"potential.kind", Type::String, std::string("zero"), false,
               {"zero", "woods_saxon", "delta", "linear"}});
  for (const char* k : {"potential.depth", "potential.steepness", "potential.half_width",
                        "potential.strength", "potential.field"})
    s.push_back({k, Type::Real, std::nullopt, false, {}});
  for (const char* k : {"potential.site", "potential.first_site", "potential.last_site"})
    s.push_back({k, Type::Int, std::nullopt, false, {}});
}

inline void add_ramp_shape(std::vector<KeySpec>& s) {
  s.push_back({"ramp.shape", Type::String, std::string("smooth_cos"), false, {"smooth_cos", "linear"}});
  s.push_back({"run.dt_factor", Type::Real, 1.0, false, {}});
}

inline void add_lattice(std::vector<KeySpec>& s) {
  s.push_back({"lattice.W0", Type::Real, std::nullopt, true, {}});
  s.push_back({"lattice.dW", Type::Real, std::nullopt, true, {}});
  s.push_back({"lattice.k", Type::Real, 1.0, false, {}});
}

}  // namespace detail

inline std::vector<KeySpec> schema_for(Scenario s) {
  using namespace detail;
  std::vector<KeySpec> k;
  switch (s) {
    case Scenario::Spectrum:
      add_chain(k);
      add_potential(k);
      k.push_back({"output.profiles", Type::Bool, true, false, {}});
      k.push_back({"output.edge_margin", Type::Real, 1e-6, false, {}});
      break;
    case Scenario::Criticality:
      add_chain(k);
      k.push_back({"woods_saxon.steepness", Type::Real, std::nullopt, true, {}});
      k.push_back({"woods_saxon.half_width", Type::Real, std::nullopt, true, {}});
      k.push_back({"scan.W_grid", Type::RealList, std::nullopt, true, {}});
      k.push_back({"scan.edge_margin", Type::Real, 1e-6, false, {}});
      k.push_back({"scan.bisect", Type::Bool, true, false, {}});
      k.push_back({"scan.W_max", Type::Real, 10.0, false, {}});
      k.push_back({"scan.tol", Type::Real, 1e-4, false, {}});
      k.push_back({"oracle.enabled", Type::Bool, true, false, {}});
      k.push_back({"oracle.grid_points", Type::Int, 4000LL, false, {}});
      break;
    case Scenario::DeltaOracle:
      add_chain(k);
      k.push_back({"delta.phi_values", Type::RealList, std::nullopt, true, {}});
      k.push_back({"delta.site", Type::Int, std::nullopt, false, {}});
      break;
    case Scenario::Dynamics:
      add_chain(k);
      add_potential(k);
      k.push_back({"ramp.t_on", Type::Real, std::nullopt, true, {}});
      k.push_back({"ramp.t_plateau", Type::Real, std::nullopt, true, {}});
      k.push_back({"ramp.t_off", Type::Real, std::nullopt, true, {}});
      add_ramp_shape(k);
      k.push_back({"output.modes", Type::Bool, true, false, {}});
      break;
    case Scenario::AdiabaticScan:
      add_chain(k);
      add_potential(k);
      k.push_back({"scan.durations", Type::RealList, std::nullopt, true, {}});
      k.push_back({"scan.plateau", Type::Real, std::nullopt, true, {}});
      add_ramp_shape(k);
      break;
    case Scenario::SchwingerScan:
      add_chain(k);
      k.push_back({"field.values", Type::RealList, std::nullopt, true, {}});
      k.push_back({"field.first_site", Type::Int, std::nullopt, true, {}});
      k.push_back({"field.last_site", Type::Int, std::nullopt, true, {}});
      k.push_back({"ramp.t_on", Type::Real, std::nullopt, true, {}});
      k.push_back({"ramp.t_plateau", Type::Real, std::nullopt, true, {}});
      add_ramp_shape(k);
      k.push_back({"fit.pair_floor", Type::Real, 1e-10, false, {}});
      break;
    case Scenario::Bands:
      add_lattice(k);
      k.push_back({"bands.source", Type::String, std::string("both"), false, {"both", "wkb", "exact"}});
      k.push_back({"bands.p_points", Type::Int, 64LL, false, {}});
      k.push_back({"bands.n_planewaves", Type::Int, 64LL, false, {}});
      break;
    case Scenario::Wannier:
      add_lattice(k);
      k.push_back({"wannier.cells", Type::Int, 64LL, false, {}});
      k.push_back({"wannier.n_planewaves", Type::Int, 64LL, false, {}});
      k.push_back({"wannier.samples_per_site", Type::Int, 16LL, false, {}});
      break;
    case Scenario::Hierarchy:
      k.push_back({"units.name", Type::String, std::string("uK"), false, {}});
      k.push_back({"units.E_R", Type::Real, std::nullopt, true, {}});
      k.push_back({"units.W0", Type::Real, std::nullopt, true, {}});
      k.push_back({"units.dW", Type::Real, std::nullopt, true, {}});
      k.push_back({"units.temperature", Type::Real, std::nullopt, true, {}});
      k.push_back({"hierarchy.ratio", Type::Real, 3.0, false, {}});
      break;
    case Scenario::ManyBody:
      k.push_back({"manybody.L", Type::Int, std::nullopt, true, {}});
      k.push_back({"manybody.particles", Type::Int, std::nullopt, false, {}});
      k.push_back({"manybody.J", Type::Real, 1.0, false, {}});
      k.push_back({"manybody.mass", Type::Real, 0.0, false, {}});
      k.push_back({"manybody.disorder", Type::Real, 0.0, false, {}});
      k.push_back({"manybody.statistics", Type::String, std::string("fermion"), false,
                   {"fermion", "hardcore_boson"}});
      k.push_back({"interaction.D0_values", Type::RealList, RealList{}, false, {}});
      k.push_back({"interaction.cutoff", Type::Int, 0LL, false, {}});
      break;
    case Scenario::JWCheck:
      k.push_back({"jw.L_values", Type::IntList, IntList{4, 6, 8, 10}, false, {}});
      k.push_back({"jw.draws", Type::Int, 50LL, false, {}});
      k.push_back({"jw.J", Type::Real, 1.0, false, {}});
      k.push_back({"jw.disorder", Type::Real, 1.0, false, {}});
      break;
  }
  return k;
}

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::optional<double> parse_real(std::string_view s) {
  s = trim(s);
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

inline std::optional<long long> parse_int(std::string_view s) {
  s = trim(s);
  long long v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

inline std::vector<std::string_view> split_commas(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto c = s.find(',', start);
    out.push_back(trim(s.substr(start, c == std::string_view::npos ? std::string_view::npos : c - start)));
    if (c == std::string_view::npos) break;
    start = c + 1;
  }
  return out;
}

// "a, b, c", "[a, b, c]" or "linspace(a, b, n)".
inline std::optional<RealList> parse_real_list(std::string_view s, std::string& why) {
  s = trim(s);
  if (s.starts_with("linspace(") && s.ends_with(")")) {
    const auto parts = split_commas(s.substr(9, s.size() - 10));
    if (parts.size() != 3) {
      why = "linspace needs (start, stop, count)";
      return std::nullopt;
    }
    const auto a = parse_real(parts[0]), b = parse_real(parts[1]);
    const auto n = parse_int(parts[2]);
    if (!a || !b || !n || *n < 1) {
      why = "linspace arguments must be two reals and a positive count";
      return std::nullopt;
    }
    RealList out(static_cast<std::size_t>(*n));
    for (long long i = 0; i < *n; ++i)
      out[i] = *n == 1 ? *a : *a + (*b - *a) * static_cast<double>(i) / static_cast<double>(*n - 1);
    return out;
  }
  if (s.starts_with("[") && s.ends_with("]")) s = s.substr(1, s.size() - 2);
  RealList out;
  if (trim(s).empty()) return out;
  for (auto part : split_commas(s)) {
    const auto v = parse_real(part);
    if (!v) {
      why = "'" + std::string(part) + "' is not a real number";
      return std::nullopt;
    }
    out.push_back(*v);
  }
  return out;
}

inline std::optional<Value> convert(std::string_view raw, Type t, std::string& why) {
  switch (t) {
    case Type::Int:
      if (auto v = parse_int(raw)) return Value(*v);
      return std::nullopt;
    case Type::Real:
      if (auto v = parse_real(raw)) return Value(*v);
      return std::nullopt;
    case Type::String: {
      auto s = trim(raw);
      if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
      return Value(std::string(s));
    }
    case Type::Bool: {
      const auto s = trim(raw);
      if (s == "true" || s == "yes" || s == "1") return Value(true);
      if (s == "false" || s == "no" || s == "0") return Value(false);
      return std::nullopt;
    }
    case Type::RealList:
      if (auto v = parse_real_list(raw, why)) return Value(std::move(*v));
      return std::nullopt;
    case Type::IntList: {
      auto s = trim(raw);
      if (s.starts_with("[") && s.ends_with("]")) s = s.substr(1, s.size() - 2);
      IntList out;
      if (trim(s).empty()) return Value(out);
      for (auto part : split_commas(s)) {
        const auto v = parse_int(part);
        if (!v) {
          why = "'" + std::string(part) + "' is not an integer";
          return std::nullopt;
        }
        out.push_back(*v);
      }
      return Value(std::move(out));
    }
  }
  return std::nullopt;
}

inline bool all_finite(const Value& v) {
  if (const auto* d = std::get_if<double>(&v)) return std::isfinite(*d);
  if (const auto* l = std::get_if<RealList>(&v))
    return std::all_of(l->begin(), l->end(), [](double x) { return std::isfinite(x); });
  return true;
}

}  // namespace detail

/// Canonical text of a value (used for the manifest echo).
inline std::string format_value(const Value& v) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        auto num = [](auto y) {
          char buf[64];
          const auto r = [&] {
            if constexpr (std::is_floating_point_v<decltype(y)>)
              return std::to_chars(buf, buf + sizeof buf, y, std::chars_format::general, 17);
            else
              return std::to_chars(buf, buf + sizeof buf, y);
          }();
          return std::string(buf, r.ptr);
        };
        if constexpr (std::is_same_v<T, std::string>) return x;
        else if constexpr (std::is_same_v<T, bool>) return x ? "true" : "false";
        else if constexpr (std::is_same_v<T, RealList> || std::is_same_v<T, IntList>) {
          std::string s = "[";
          for (std::size_t i = 0; i < x.size(); ++i) s += (i ? ", " : "") + num(x[i]);
          return s + "]";
        } else
          return num(x);
      },
      v);
}

/// All problems found in a config text; empty when valid.
struct ParseOutcome {
  std::optional<ScenarioConfig> config;
  std::vector<std::string> errors;
};

namespace detail {

struct RawEntry {
  std::string value;
  int line;
};

// Scenario-level checks that need more than one key.
inline void cross_validate(const ScenarioConfig& c, const std::map<std::string, RawEntry>& raw,
                           std::vector<std::string>& errors) {
  auto where = [&](const std::string& key) {
    const auto it = raw.find(key);
    return it == raw.end() ? std::string() : "line " + std::to_string(it->second.line) + ": ";
  };
  auto ascending = [&](const std::string& key) {
    if (!c.has(key)) return;
    const auto& g = c.reals(key);
    for (std::size_t i = 1; i < g.size(); ++i)
      if (!(g[i] > g[i - 1])) {
        errors.push_back(where(key) + key + ": grid must ascend");
        return;
      }
  };
  auto positive = [&](const std::string& key) {
    if (!c.has(key)) return;
    const auto& v = c.params.at(key);
    const bool ok = std::holds_alternative<double>(v) ? std::get<double>(v) > 0.0
                                                      : std::get<long long>(v) > 0;
    if (!ok) errors.push_back(where(key) + key + ": must be > 0");
  };
  auto non_empty = [&](const std::string& key) {
    if (!c.has(key)) return;
    const auto& v = c.params.at(key);
    const bool empty = std::holds_alternative<RealList>(v) ? std::get<RealList>(v).empty()
                                                           : std::get<IntList>(v).empty();
    if (empty) errors.push_back(where(key) + key + ": list must not be empty");
  };

  for (const char* k : {"chain.num_sites", "chain.spacing", "chain.hopping", "lattice.W0", "lattice.k",
                        "units.E_R", "units.W0", "units.dW", "units.temperature", "hierarchy.ratio",
                        "manybody.L", "jw.draws", "bands.p_points", "wannier.cells",
                        "run.dt_factor", "woods_saxon.steepness",
                        "woods_saxon.half_width", "oracle.grid_points"})
    positive(k);
  if (c.has("chain.mass") && c.real("chain.mass") < 0.0)
    errors.push_back(where("chain.mass") + "chain.mass: must be >= 0");

  for (const char* k : {"scan.W_grid", "scan.durations", "field.values", "delta.phi_values",
                        "jw.L_values"})
    non_empty(k);
  ascending("scan.W_grid");
  ascending("scan.durations");
  ascending("field.values");
  ascending("interaction.D0_values");

  if (c.has("potential.kind")) {
    const auto& kind = c.text("potential.kind");
    std::vector<std::string> needed, allowed;
    if (kind == "woods_saxon") needed = {"potential.depth", "potential.steepness", "potential.half_width"};
    if (kind == "delta") needed = {"potential.strength", "potential.site"};
    if (kind == "linear") needed = {"potential.field", "potential.first_site", "potential.last_site"};
    for (const auto& n : needed)
      if (!c.has(n)) errors.push_back("potential.kind = " + kind + " requires '" + n + "'");
    for (const auto& [key, v] : c.params)
      if (key.starts_with("potential.") && key != "potential.kind" &&
          std::find(needed.begin(), needed.end(), key) == needed.end())
        errors.push_back(where(key) + key + ": not used by potential.kind = " + kind);
  }
  if (c.scenario == Scenario::ManyBody && c.has("manybody.particles") && c.has("manybody.L")) {
    const auto np = c.integer("manybody.particles");
    if (np < 0 || np > c.integer("manybody.L"))
      errors.push_back(where("manybody.particles") + "manybody.particles: outside [0, L]");
  }
}

}  // namespace detail

inline ParseOutcome parse_config_report(std::string_view text) {
  ParseOutcome out;
  auto& errors = out.errors;
  std::map<std::string, detail::RawEntry> raw;

  std::string section;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const std::string at = "line " + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        errors.push_back(at + "malformed section header");
        continue;
      }
      section = std::string(detail::trim(line.substr(1, line.size() - 2)));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      errors.push_back(at + "expected 'key = value'");
      continue;
    }
    const auto key_part = detail::trim(line.substr(0, eq));
    if (key_part.empty() || key_part.find_first_of(" \t") != std::string_view::npos) {
      errors.push_back(at + "malformed key");
      continue;
    }
    const std::string key = section.empty() ? std::string(key_part) : section + "." + std::string(key_part);
    if (raw.count(key)) {
      errors.push_back(at + "duplicate key '" + key + "' (first on line " +
                       std::to_string(raw[key].line) + ")");
      continue;
    }
    raw[key] = {std::string(detail::trim(line.substr(eq + 1))), line_no};
  }

  ScenarioConfig cfg;
  auto at = [&](const std::string& key) { return "line " + std::to_string(raw.at(key).line) + ": "; };

  // Header keys.
  std::optional<Scenario> scenario;
  if (!raw.count("schema_version")) {
    errors.push_back("missing required key 'schema_version'");
  } else if (const auto v = detail::parse_int(raw["schema_version"].value); !v) {
    errors.push_back(at("schema_version") + "schema_version: expected an integer");
  } else if (*v != schema_version) {
    errors.push_back(at("schema_version") + "unsupported schema_version " + std::to_string(*v) +
                     " (this build reads " + std::to_string(schema_version) + ")");
  }
  if (!raw.count("scenario")) {
    errors.push_back("missing required key 'scenario'");
  } else {
    scenario = scenario_from_string(detail::trim(raw["scenario"].value));
    if (!scenario) errors.push_back(at("scenario") + "unknown scenario '" + raw["scenario"].value + "'");
  }
  if (raw.count("seed")) {
    const auto v = detail::parse_int(raw["seed"].value);
    if (!v || *v < 0) errors.push_back(at("seed") + "seed: expected a non-negative integer");
    else cfg.seed = static_cast<std::uint64_t>(*v);
  }
  if (raw.count("output_dir")) {
    const auto v = std::string(detail::trim(raw["output_dir"].value));
    if (v.empty()) errors.push_back(at("output_dir") + "output_dir: empty path");
    else cfg.output_dir = v;
  }

  if (scenario) {
    cfg.scenario = *scenario;
    const auto schema = schema_for(*scenario);
    for (const auto& [key, entry] : raw) {
      if (key == "schema_version" || key == "scenario" || key == "seed" || key == "output_dir") continue;
      const auto spec = std::find_if(schema.begin(), schema.end(), [&](const KeySpec& s) { return s.key == key; });
      if (spec == schema.end()) {
        errors.push_back(at(key) + "unknown key '" + key + "' for scenario " + std::string(to_string(*scenario)));
        continue;
      }
      std::string why;
      auto v = detail::convert(entry.value, spec->type, why);
      if (!v) {
        errors.push_back(at(key) + key + ": type mismatch, expected " + std::string(type_name(spec->type)) +
                         (why.empty() ? ", got '" + entry.value + "'" : " (" + why + ")"));
        continue;
      }
      if (!detail::all_finite(*v)) {
        errors.push_back(at(key) + key + ": value must be finite");
        continue;
      }
      if (!spec->choices.empty() &&
          std::find(spec->choices.begin(), spec->choices.end(), std::get<std::string>(*v)) == spec->choices.end()) {
        std::string opts;
        for (const auto& c : spec->choices) opts += (opts.empty() ? "" : ", ") + c;
        errors.push_back(at(key) + key + ": '" + std::get<std::string>(*v) + "' is not one of " + opts);
        continue;
      }
      cfg.params[key] = std::move(*v);
    }
    for (const auto& spec : schema) {
      if (cfg.params.count(spec.key) || raw.count(spec.key)) continue;
      if (spec.required) errors.push_back("missing required key '" + spec.key + "'");
      else if (spec.fallback) cfg.params[spec.key] = *spec.fallback;
    }
    detail::cross_validate(cfg, raw, errors);
  }

  if (!errors.empty()) {
    // report in file order; problems without a line (missing keys) first
    auto line_of = [](const std::string& e) {
      if (!e.starts_with("line ")) return 0L;
      return std::strtol(e.c_str() + 5, nullptr, 10);
    };
    std::stable_sort(errors.begin(), errors.end(),
                     [&](const std::string& a, const std::string& b) { return line_of(a) < line_of(b); });
    return out;
  }
  cfg.echo.emplace_back("schema_version", std::to_string(schema_version));
  cfg.echo.emplace_back("scenario", std::string(to_string(cfg.scenario)));
  cfg.echo.emplace_back("seed", std::to_string(cfg.seed));
  cfg.echo.emplace_back("output_dir", cfg.output_dir);
  for (const auto& [key, v] : cfg.params) cfg.echo.emplace_back(key, format_value(v));
  out.config = std::move(cfg);
  return out;
}

/// Throws ConfigError listing every problem, one per line.
inline ScenarioConfig parse_config(std::string_view text) {
  auto r = parse_config_report(text);
  if (!r.errors.empty()) {
    std::string msg = "invalid config (" + std::to_string(r.errors.size()) + " problem" +
                      (r.errors.size() == 1 ? "" : "s") + "):";
    for (const auto& e : r.errors) msg += "\n  " + e;
    throw ConfigError(msg);
  }
  return std::move(*r.config);
}

}  // namespace latqed::config
