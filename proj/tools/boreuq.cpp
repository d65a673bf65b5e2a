// boreuq: run borefield deviation studies and query saved interpolants.

#include "boreuq/config.hpp"
#include "boreuq/error.hpp"
#include "boreuq/io.hpp"
#include "boreuq/parallel.hpp"
#include "boreuq/scenario.hpp"
#include "boreuq/statistics.hpp"

#include "CLI11.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace boreuq;

constexpr int kOk = 0;
constexpr int kInputError = 1;
constexpr int kPartial = 2;

std::filesystem::path default_out_dir(const char* fallback) {
  if (const char* env = std::getenv("BOREUQ_OUT"); env && *env) return env;
  return fallback;
}

std::vector<double> parse_csv_numbers(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      throw InvalidArgument("'" + tok + "' is not a number");
    }
    while (used < tok.size() && std::isspace(static_cast<unsigned char>(tok[used]))) ++used;
    if (used != tok.size()) throw InvalidArgument("'" + tok + "' is not a number");
    out.push_back(v);
  }
  return out;
}

// --dist takes one spec per dimension, or one spec for all; a bare kind
// spans each axis of the interpolant domain.
dist::ProductDistribution build_distribution(const sg::SparseInterpolant& itp, const std::vector<std::string>& specs) {
  const std::size_t D = itp.dimension();
  auto on_axis = [&](dist::Kind k, std::size_t d) {
    const auto& ax = itp.domain().axis(d);
    return k == dist::Kind::uniform ? dist::RandomVariableSpec::uniform(ax.lo, ax.hi)
                                    : dist::RandomVariableSpec::triangular(ax.lo, ax.hi);
  };
  std::vector<dist::RandomVariableSpec> dims;
  if (specs.empty()) {
    for (std::size_t d = 0; d < D; ++d) dims.push_back(on_axis(dist::Kind::uniform, d));
  } else if (specs.size() == 1 && specs[0].find(':') == std::string::npos) {
    const auto k = dist::kind_from_string(specs[0]);
    for (std::size_t d = 0; d < D; ++d) dims.push_back(on_axis(k, d));
  } else if (specs.size() == 1) {
    dims.assign(D, config::parse_rv(specs[0]));
  } else if (specs.size() == D) {
    for (const auto& s : specs) dims.push_back(config::parse_rv(s));
  } else {
    throw InvalidArgument(fmt::format("--dist needs 1 or {} specs, got {}", D, specs.size()));
  }
  return dist::ProductDistribution(std::move(dims));
}

int cmd_run(const std::filesystem::path& cfg_path, const std::filesystem::path& out, std::optional<std::uint64_t> seed,
            unsigned threads, std::optional<std::string> cell, bool verbose) {
  auto cfg = config::load_study(cfg_path);
  if (seed) cfg.seed = *seed;
  scenario::RunOptions opt;
  opt.out_dir = out;
  opt.threads = threads;
  opt.cell_filter = std::move(cell);
  opt.quiet = !verbose;
  const auto res = scenario::run_study(cfg, opt);
  std::ostringstream os;
  scenario::write_results_csv(os, cfg, res);
  std::cout << os.str();
  if (!res.failures.empty()) {
    std::cerr << fmt::format("{} cell(s) failed:\n", res.failures.size());
    for (const auto& f : res.failures) std::cerr << "  " << f.cell.str() << ": " << f.message << "\n";
    return kPartial;
  }
  return kOk;
}

int cmd_stats(const std::filesystem::path& path, const std::vector<std::string>& specs, std::vector<double> confidences,
              std::size_t n_mc, std::uint64_t seed, double t_ref, const std::filesystem::path& density,
              std::size_t density_points, unsigned threads) {
  const auto itp = io::load_interpolant(path);
  const auto pd = build_distribution(itp, specs);
  if (confidences.empty()) confidences.push_back(0.95);
  const double mean = stats::mean(itp, pd);
  const auto samples = stats::resample(itp, pd, n_mc, seed, threads);
  const double sd = stats::std_about(samples, mean);
  const stats::Kde kde(samples);
  io::json out;
  out["mean"] = mean;
  out["std"] = sd;
  io::json bounds = io::json::array();
  for (double c : confidences) {
    if (!(c > 0.0 && c < 1.0)) throw InvalidArgument("confidence must lie in (0, 1)");
    const auto lb = stats::quantile_lower_bound_checked(kde, c);
    bounds.push_back({{"confidence", c},
                      {"t_min", lb.value},
                      {"empirical_quantile", lb.empirical},
                      {"kde_matches_empirical", lb.consistent}});
  }
  out["lower_bounds"] = bounds;
  out["cop_of_mean"] = stats::cop(mean, t_ref);
  out["t_ref"] = t_ref;
  out["mc_samples"] = n_mc;
  out["seed"] = seed;
  out["kde_bandwidth"] = kde.bandwidth();
  std::ostringstream dens;
  stats::write_density_csv(dens, kde, density_points);
  io::write_file(density, dens.str());
  out["density_csv"] = density.string();
  std::cout << out.dump(1) << "\n";
  return kOk;
}

int cmd_marginal(const std::filesystem::path& path, const std::string& dims, std::size_t grid,
                 const std::vector<std::string>& specs, const std::optional<std::filesystem::path>& out) {
  const auto itp = io::load_interpolant(path);
  const auto pd = build_distribution(itp, specs);
  const auto d = parse_csv_numbers(dims);
  if (d.size() != 2) throw InvalidArgument("--dims expects two indices, e.g. 0,3");
  auto idx = [&](double v) {
    if (v < 0.0 || v != std::floor(v) || v >= static_cast<double>(itp.dimension())) {
      throw InvalidArgument(fmt::format("dimension index {} out of range", v));
    }
    return static_cast<std::size_t>(v);
  };
  const auto s = stats::marginal_surface(itp, pd, {idx(d[0]), idx(d[1])}, grid);
  std::ostringstream os;
  stats::write_surface_csv(os, s);
  std::string text = os.str();
  if (itp.parameter_names.size() == itp.dimension()) {
    text = fmt::format("{},{},value", itp.parameter_names[s.dim0], itp.parameter_names[s.dim1]) +
           text.substr(text.find('\n'));
  }
  if (out) {
    io::write_file(*out, text);
  } else {
    std::cout << text;
  }
  return kOk;
}

int cmd_eval(const std::filesystem::path& path, const std::vector<std::string>& points) {
  const auto itp = io::load_interpolant(path);
  if (points.empty()) throw InvalidArgument("--point is required");
  for (const auto& p : points) {
    const auto x = parse_csv_numbers(p);
    if (x.size() != itp.dimension()) {
      throw InvalidArgument(fmt::format("point has {} coordinates, interpolant has {}", x.size(), itp.dimension()));
    }
    std::cout << io::fmt_double(itp.evaluate(x)) << "\n";
  }
  return kOk;
}

// Realized and corrected bore paths of one collocation point, for plotting.
int cmd_geometry(const std::filesystem::path& cfg_path, const std::string& layout_name,
                 const std::optional<std::string>& point, const std::optional<std::filesystem::path>& out) {
  const auto cfg = config::load_study(cfg_path);
  const auto it = std::find_if(cfg.layouts.begin(), cfg.layouts.end(),
                               [&](const scenario::LayoutSpec& l) { return l.name == layout_name; });
  if (it == cfg.layouts.end()) throw InvalidArgument("layout '" + layout_name + "' is not in the config");
  const auto layout = scenario::make_layout(*it, cfg.model.bhe.length, cfg.model.ref_dir);
  const auto map = cfg.deviating ? scenario::ParamMap{layout.size(), *cfg.deviating}
                                 : scenario::ParamMap::all(layout.size());
  const auto y = point ? parse_csv_numbers(*point) : std::vector<double>(map.dimension(), 0.0);
  const auto params = map.to_params(y);
  const auto g = geo::correct_geometry(geo::realize_geometry(layout, params), cfg.model.d_min, layout, params);
  std::ostringstream os;
  geo::write_geometry_csv(os, g);
  if (out) {
    io::write_file(*out, os.str());
  } else {
    std::cout << os.str();
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"borefield bore-path deviation studies on adaptive sparse grids"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run a study config");
  std::string run_cfg;
  std::string run_out;
  std::optional<std::uint64_t> run_seed;
  unsigned run_threads = default_threads();
  std::optional<std::string> run_cell;
  bool run_verbose = false;
  run->add_option("config", run_cfg, "study config (JSON)")->required();
  run->add_option("--out", run_out, "output directory (default $BOREUQ_OUT or ./boreuq_out)");
  run->add_option("--seed", run_seed, "override the config seed");
  run->add_option("--threads", run_threads, "worker threads")->check(CLI::PositiveNumber);
  run->add_option("--cell", run_cell, "run only layout:beta_max, e.g. 20m:3");
  run->add_flag("-v,--verbose", run_verbose, "progress on stderr");

  auto* st = app.add_subcommand("stats", "statistics of a saved interpolant");
  std::string st_path;
  std::vector<std::string> st_dist;
  std::vector<double> st_conf;
  std::size_t st_mc = 100000;
  std::uint64_t st_seed = 1;
  double st_tref = 35.0;
  std::string st_density;
  std::size_t st_dpts = 256;
  unsigned st_threads = default_threads();
  st->add_option("interpolant", st_path, "interpolant.json")->required();
  st->add_option("--dist", st_dist, "uniform|triangular, or kind:a:b once or per dimension");
  st->add_option("--confidence", st_conf, "lower-bound confidence (repeatable, default 0.95)");
  st->add_option("--mc-samples", st_mc, "resample size")->check(CLI::Range(std::size_t{100}, std::size_t{1} << 40));
  st->add_option("--seed", st_seed, "resample seed");
  st->add_option("--t-ref", st_tref, "heat pump supply temperature for the COP, C");
  st->add_option("--density", st_density, "density CSV path (default $BOREUQ_OUT/density.csv or ./density.csv)");
  st->add_option("--density-points", st_dpts, "density grid size")->check(CLI::Range(2, 1 << 20));
  st->add_option("--threads", st_threads, "worker threads")->check(CLI::PositiveNumber);

  auto* mg = app.add_subcommand("marginal", "two-dimensional marginal surface of a saved interpolant");
  std::string mg_path;
  std::string mg_dims;
  std::size_t mg_grid = 41;
  std::vector<std::string> mg_dist;
  std::optional<std::string> mg_out;
  mg->add_option("interpolant", mg_path, "interpolant.json")->required();
  mg->add_option("--dims", mg_dims, "kept dimensions i,j")->required();
  mg->add_option("--grid", mg_grid, "ticks per kept axis")->check(CLI::Range(2, 100000));
  mg->add_option("--dist", mg_dist, "as for stats");
  mg->add_option("-o,--out", mg_out, "CSV path (default stdout)");

  auto* ev = app.add_subcommand("eval", "evaluate a saved interpolant");
  std::string ev_path;
  std::vector<std::string> ev_points;
  ev->add_option("interpolant", ev_path, "interpolant.json")->required();
  ev->add_option("--point", ev_points, "comma-separated physical coordinates (repeatable)")->required();

  auto* gm = app.add_subcommand("geometry", "bore paths of one parameter point as CSV");
  std::string gm_cfg;
  std::string gm_layout;
  std::optional<std::string> gm_point;
  std::optional<std::string> gm_out;
  gm->add_option("config", gm_cfg, "study config (JSON)")->required();
  gm->add_option("--layout", gm_layout, "layout name from the config")->required();
  gm->add_option("--point", gm_point, "azimuths then inclinations of the deviating BHEs (default all vertical)");
  gm->add_option("-o,--out", gm_out, "CSV path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kInputError;
  }

  try {
    if (*run) {
      const auto out = run_out.empty() ? default_out_dir("boreuq_out") : std::filesystem::path(run_out);
      return cmd_run(run_cfg, out, run_seed, run_threads, run_cell, run_verbose);
    }
    if (*st) {
      const auto dens = st_density.empty() ? default_out_dir(".") / "density.csv" : std::filesystem::path(st_density);
      return cmd_stats(st_path, st_dist, st_conf, st_mc, st_seed, st_tref, dens, st_dpts, st_threads);
    }
    if (*mg) {
      std::optional<std::filesystem::path> out;
      if (mg_out) out = *mg_out;
      return cmd_marginal(mg_path, mg_dims, mg_grid, mg_dist, out);
    }
    if (*ev) return cmd_eval(ev_path, ev_points);
    if (*gm) {
      std::optional<std::filesystem::path> out;
      if (gm_out) out = *gm_out;
      return cmd_geometry(gm_cfg, gm_layout, gm_point, out);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}
