#include "boreuq/config.hpp"

#include "boreuq/error.hpp"
#include "boreuq/io.hpp"

#include <fmt/format.h>

#include <cmath>
#include <initializer_list>
#include <numbers>
#include <set>

namespace boreuq::config {

namespace {

using json = io::json;

std::string line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return fmt::format("line {}, column {}", line, col);
}

/// Object view that records which keys were read and where it lives.
class Obj {
public:
  Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "/" : path_, "expected an object");
  }

  const std::string& path() const { return path_; }
  std::string at(const std::string& key) const { return path_ + "/" + key; }
  bool has(const std::string& key) const { return j_.contains(key); }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  double number(const std::string& key, double def) {
    if (!has(key)) return def;
    const auto& v = raw(key);
    if (!v.is_number()) throw ConfigError(at(key), "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(at(key), "must be finite");
    return d;
  }

  double positive(const std::string& key, double def) {
    const double d = number(key, def);
    if (!(d > 0.0)) throw ConfigError(at(key), "must be > 0");
    return d;
  }

  std::uint64_t uint(const std::string& key, std::uint64_t def) {
    if (!has(key)) return def;
    const auto& v = raw(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
      throw ConfigError(at(key), "expected a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }

  bool boolean(const std::string& key, bool def) {
    if (!has(key)) return def;
    const auto& v = raw(key);
    if (!v.is_boolean()) throw ConfigError(at(key), "expected true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key, const std::string& def) {
    if (!has(key)) return def;
    const auto& v = raw(key);
    if (!v.is_string()) throw ConfigError(at(key), "expected a string");
    return v.get<std::string>();
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(at(it.key()), "unknown key");
    }
  }

private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

std::vector<double> number_array(const json& v, const std::string& where, std::size_t expect = 0) {
  if (!v.is_array()) throw ConfigError(where, "expected an array of numbers");
  if (expect && v.size() != expect) throw ConfigError(where, fmt::format("expected {} entries, got {}", expect, v.size()));
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) throw ConfigError(fmt::format("{}/{}", where, i), "expected a number");
    out.push_back(v[i].get<double>());
  }
  return out;
}

trcm::BHEParams parse_bhe(Obj o) {
  const auto preset = o.string("preset", "case_study");
  if (preset != "case_study") throw ConfigError(o.at("preset"), "unknown BHE preset '" + preset + "'");
  trcm::BHEParams p = trcm::BHEParams::case_study();
  const auto type = o.string("type", "double_u");
  if (type != "double_u") throw ConfigError(o.at("type"), "only double_u BHEs are implemented");
  p.length = o.positive("length", p.length);
  p.borehole_diameter = o.positive("borehole_diameter", p.borehole_diameter);
  p.pipe_outer_diameter = o.positive("pipe_outer_diameter", p.pipe_outer_diameter);
  p.pipe_wall_thickness = o.positive("pipe_wall_thickness", p.pipe_wall_thickness);
  p.shank_spacing = o.positive("shank_spacing", p.shank_spacing);
  p.pipe_conductivity = o.positive("pipe_conductivity", p.pipe_conductivity);
  p.fluid_heat_capacity = o.positive("fluid_heat_capacity", p.fluid_heat_capacity);
  p.fluid_conductivity = o.positive("fluid_conductivity", p.fluid_conductivity);
  p.fluid_viscosity = o.positive("fluid_viscosity", p.fluid_viscosity);
  p.fluid_density = o.positive("fluid_density", p.fluid_density);
  p.grout_conductivity = o.positive("grout_conductivity", p.grout_conductivity);
  p.flow_rate = o.positive("flow_rate", p.flow_rate);
  o.finish();
  try {
    p.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(o.path(), e.what());
  }
  return p;
}

soil::SoilParams parse_soil(Obj o) {
  const auto preset = o.string("preset", "case_study");
  if (preset != "case_study") throw ConfigError(o.at("preset"), "unknown soil preset '" + preset + "'");
  soil::SoilParams s = soil::SoilParams::case_study();
  s.conductivity = o.positive("conductivity", s.conductivity);
  s.porosity = o.number("porosity", s.porosity);
  s.fluid_density = o.positive("fluid_density", s.fluid_density);
  s.fluid_heat_capacity = o.positive("fluid_heat_capacity", s.fluid_heat_capacity);
  s.solid_capacity = o.positive("solid_capacity", s.solid_capacity);
  s.surface_temperature = o.number("surface_temperature", s.surface_temperature);
  s.gradient = o.number("gradient", s.gradient);
  s.image_source = o.boolean("image_source", s.image_source);
  o.finish();
  try {
    s.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(o.path(), e.what());
  }
  return s;
}

scenario::OperationConfig parse_operation(Obj o) {
  scenario::OperationConfig op;
  op.years = static_cast<int>(o.uint("years", static_cast<std::uint64_t>(op.years)));
  if (op.years < 1) throw ConfigError(o.at("years"), "must be >= 1");
  if (o.has("active")) {
    const auto& a = o.raw("active");
    if (!a.is_array() || a.size() != 12) throw ConfigError(o.at("active"), "expected 12 booleans");
    for (std::size_t i = 0; i < 12; ++i) {
      if (!a[i].is_boolean()) throw ConfigError(fmt::format("{}/{}", o.at("active"), i), "expected true or false");
      op.active[i] = a[i].get<bool>();
    }
  }
  if (o.has("load_w")) {
    const auto v = number_array(o.raw("load_w"), o.at("load_w"), 12);
    for (std::size_t i = 0; i < 12; ++i) {
      if (v[i] < 0.0) throw ConfigError(fmt::format("{}/{}", o.at("load_w"), i), "loads are extraction, must be >= 0");
      op.load_w[i] = v[i];
    }
  }
  if (o.has("load_scale")) {
    const double s = o.positive("load_scale", 1.0);
    for (double& w : op.load_w) w *= s;
  }
  op.n_z = o.uint("n_z", op.n_z);
  if (op.n_z < 16) throw ConfigError(o.at("n_z"), "must be >= 16");
  if (o.has("coupling")) {
    Obj c(o.raw("coupling"), o.at("coupling"));
    const auto mode = c.string("mode", "exact");
    if (mode == "exact") {
      op.coupling.mode = scenario::CouplingMode::exact;
    } else if (mode == "fixed_point") {
      op.coupling.mode = scenario::CouplingMode::fixed_point;
    } else {
      throw ConfigError(c.at("mode"), "expected \"exact\" or \"fixed_point\"");
    }
    op.coupling.passes = static_cast<int>(c.uint("passes", static_cast<std::uint64_t>(op.coupling.passes)));
    if (op.coupling.passes < 1) throw ConfigError(c.at("passes"), "must be >= 1");
    op.coupling.tolerance = c.number("tolerance", op.coupling.tolerance);
    if (op.coupling.tolerance < 0.0) throw ConfigError(c.at("tolerance"), "must be >= 0");
    op.coupling.max_iterations =
        static_cast<int>(c.uint("max_iterations", static_cast<std::uint64_t>(op.coupling.max_iterations)));
    if (op.coupling.max_iterations < 1) throw ConfigError(c.at("max_iterations"), "must be >= 1");
    c.finish();
  }
  o.finish();
  return op;
}

scenario::LayoutSpec parse_layout(const json& v, const std::string& where) {
  scenario::LayoutSpec l;
  if (v.is_string()) {
    l.name = v.get<std::string>();
  } else {
    Obj o(v, where);
    l.name = o.string("name", "");
    if (l.name.empty()) throw ConfigError(o.at("name"), "layout needs a name");
    l.grid = static_cast<int>(o.uint("grid", 3));
    if (l.grid < 1) throw ConfigError(o.at("grid"), "must be >= 1");
    if (o.has("spacing")) l.spacing = o.positive("spacing", 0.0);
    o.finish();
  }
  try {
    (void)l.resolved_spacing();
  } catch (const InvalidArgument& e) {
    throw ConfigError(where, e.what());
  }
  return l;
}

}  // namespace

dist::RandomVariableSpec parse_rv(const std::string& s) {
  const auto c1 = s.find(':');
  const auto c2 = c1 == std::string::npos ? std::string::npos : s.find(':', c1 + 1);
  if (c2 == std::string::npos) throw InvalidArgument("distribution spec must look like kind:a:b, got '" + s + "'");
  const auto kind = dist::kind_from_string(s.substr(0, c1));
  std::size_t u1 = 0, u2 = 0;
  double a = 0.0, b = 0.0;
  try {
    a = std::stod(s.substr(c1 + 1, c2 - c1 - 1), &u1);
    b = std::stod(s.substr(c2 + 1), &u2);
  } catch (const std::exception&) {
    throw InvalidArgument("bad bounds in distribution spec '" + s + "'");
  }
  if (u1 != c2 - c1 - 1 || u2 != s.size() - c2 - 1) throw InvalidArgument("bad bounds in distribution spec '" + s + "'");
  dist::RandomVariableSpec rv{kind, a, b};
  rv.validate();
  return rv;
}

scenario::StudyConfig parse_study(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    std::string msg = e.what();
    if (const auto p = msg.find("- "); p != std::string::npos) msg = msg.substr(p + 2);
    throw ConfigError(line_col(text, e.byte == 0 ? 0 : e.byte - 1), msg);
  }
  Obj o(root, "");
  scenario::StudyConfig cfg;
  cfg.schema_version = static_cast<int>(o.uint("schema_version", 0));
  if (cfg.schema_version != 1) throw ConfigError(o.at("schema_version"), "missing or unsupported (expected 1)");
  cfg.name = o.string("name", cfg.name);

  if (!o.has("layouts")) throw ConfigError(o.at("layouts"), "required");
  {
    const auto& ls = o.raw("layouts");
    if (!ls.is_array() || ls.empty()) throw ConfigError(o.at("layouts"), "expected a non-empty array");
    for (std::size_t i = 0; i < ls.size(); ++i) cfg.layouts.push_back(parse_layout(ls[i], fmt::format("/layouts/{}", i)));
  }
  if (!o.has("scenarios")) throw ConfigError(o.at("scenarios"), "required");
  cfg.scenarios = number_array(o.raw("scenarios"), o.at("scenarios"));
  if (cfg.scenarios.empty()) throw ConfigError(o.at("scenarios"), "expected at least one beta_max");
  for (std::size_t i = 0; i < cfg.scenarios.size(); ++i) {
    const auto w = fmt::format("/scenarios/{}", i);
    if (!(cfg.scenarios[i] >= 0.0 && cfg.scenarios[i] < 90.0)) throw ConfigError(w, "beta_max must lie in [0, 90)");
    if (i > 0 && !(cfg.scenarios[i] > cfg.scenarios[i - 1])) throw ConfigError(w, "scenarios must be increasing");
  }
  if (o.has("azimuth_range")) {
    const auto r = number_array(o.raw("azimuth_range"), o.at("azimuth_range"), 2);
    if (!(r[0] < r[1])) throw ConfigError(o.at("azimuth_range"), "expected [min, max] with min < max");
    cfg.azimuth_min = r[0];
    cfg.azimuth_max = r[1];
  }
  if (o.has("deviating")) {
    const auto& d = o.raw("deviating");
    if (!d.is_array() || d.empty()) throw ConfigError(o.at("deviating"), "expected a non-empty array of BHE indices");
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (!d[i].is_number_unsigned()) throw ConfigError(fmt::format("/deviating/{}", i), "expected a BHE index");
      idx.push_back(d[i].get<std::size_t>());
      if (i > 0 && !(idx[i] > idx[i - 1])) throw ConfigError(fmt::format("/deviating/{}", i), "indices must increase");
    }
    cfg.deviating = idx;
  }
  if (o.has("distributions")) {
    const auto& d = o.raw("distributions");
    if (!d.is_array() || d.empty()) throw ConfigError(o.at("distributions"), "expected a non-empty array");
    cfg.distributions.clear();
    for (std::size_t i = 0; i < d.size(); ++i) {
      const auto w = fmt::format("/distributions/{}", i);
      if (!d[i].is_string()) throw ConfigError(w, "expected \"uniform\" or \"triangular\"");
      try {
        cfg.distributions.push_back(dist::kind_from_string(d[i].get<std::string>()));
      } catch (const InvalidArgument& e) {
        throw ConfigError(w, e.what());
      }
    }
  }
  cfg.seed = o.uint("seed", cfg.seed);
  cfg.mc_samples = o.uint("mc_samples", cfg.mc_samples);
  if (cfg.mc_samples < 100) throw ConfigError(o.at("mc_samples"), "must be >= 100");
  if (o.has("confidences")) {
    cfg.confidences = number_array(o.raw("confidences"), o.at("confidences"));
    for (std::size_t i = 0; i < cfg.confidences.size(); ++i) {
      if (!(cfg.confidences[i] > 0.0 && cfg.confidences[i] < 1.0)) {
        throw ConfigError(fmt::format("/confidences/{}", i), "must lie in (0, 1)");
      }
    }
  }
  cfg.t_ref = o.number("t_ref", cfg.t_ref);
  cfg.density_points = o.uint("density_points", cfg.density_points);
  if (cfg.density_points < 2) throw ConfigError(o.at("density_points"), "must be >= 2");
  cfg.marginal_resolution = o.uint("marginal_resolution", cfg.marginal_resolution);
  if (cfg.marginal_resolution < 2) throw ConfigError(o.at("marginal_resolution"), "must be >= 2");
  cfg.write_marginals = o.boolean("write_marginals", cfg.write_marginals);

  cfg.model.d_min = o.positive("d_min", cfg.model.d_min);
  if (o.has("reference_direction_deg")) {
    const double a = o.number("reference_direction_deg", 40.0) * std::numbers::pi / 180.0;
    cfg.model.ref_dir = {std::cos(a), std::sin(a)};
  }
  if (o.has("operation")) cfg.model.operation = parse_operation(Obj(o.raw("operation"), "/operation"));
  if (o.has("bhe")) cfg.model.bhe = parse_bhe(Obj(o.raw("bhe"), "/bhe"));
  if (o.has("soil")) cfg.model.soil = parse_soil(Obj(o.raw("soil"), "/soil"));
  if (o.has("refinement")) {
    Obj r(o.raw("refinement"), "/refinement");
    cfg.refinement.tolerance = r.positive("tolerance", cfg.refinement.tolerance);
    cfg.refinement.max_points = r.uint("max_points", cfg.refinement.max_points);
    if (cfg.refinement.max_points == 0) throw ConfigError(r.at("max_points"), "must be > 0");
    cfg.refinement.max_level_per_dim =
        static_cast<int>(r.uint("max_level_per_dim", static_cast<std::uint64_t>(cfg.refinement.max_level_per_dim)));
    if (cfg.refinement.max_level_per_dim < 1 || cfg.refinement.max_level_per_dim > 14) {
      throw ConfigError(r.at("max_level_per_dim"), "must lie in [1, 14]");
    }
    r.finish();
  }
  o.finish();
  try {
    cfg.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError("/", e.what());
  }
  return cfg;
}

scenario::StudyConfig load_study(const std::filesystem::path& path) {
  std::string text;
  try {
    text = io::read_file(path);
  } catch (const InvalidArgument& e) {
    throw ConfigError(path.string(), e.what());
  }
  try {
    return parse_study(text);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.where(), std::string(e.what()).substr(e.where().size() + 2));
  }
}

}  // namespace boreuq::config
