#include "boreuq/scenario.hpp"

#include "boreuq/error.hpp"
#include "boreuq/io.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <sstream>

namespace boreuq::scenario {

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

double mean_of_profile(const std::vector<double>& t) {
  // trapezoid mean over uniform stations
  double s = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) s += (k == 0 || k + 1 == t.size()) ? 0.5 * t[k] : t[k];
  return s / static_cast<double>(t.size() - 1);
}

double fraction_above(const std::vector<double>& sorted, double t) {
  const auto n_above = sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), t);
  return static_cast<double>(n_above) / static_cast<double>(sorted.size());
}

std::string cell_dir_name(const CellKey& c) { return fmt::format("{}_beta{}", c.layout, c.beta_max); }

bool matches(const CellKey& c, const std::string& filter) {
  const auto colon = filter.rfind(':');
  if (colon == std::string::npos) return c.layout == filter;
  if (filter.substr(0, colon) != c.layout) return false;
  try {
    std::size_t used = 0;
    const std::string b = filter.substr(colon + 1);
    const double v = std::stod(b, &used);
    return used == b.size() && v == c.beta_max;
  } catch (const std::exception&) {
    return false;
  }
}

struct CellOutput {
  std::vector<ResultRow> rows;
};

dist::ProductDistribution cell_distribution(const StudyConfig& cfg, const ParamMap& map, double beta_max,
                                            dist::Kind az_kind) {
  std::vector<dist::RandomVariableSpec> dims;
  for (std::size_t i = 0; i < map.deviating.size(); ++i) dims.push_back({az_kind, cfg.azimuth_min, cfg.azimuth_max});
  for (std::size_t i = 0; i < map.deviating.size(); ++i) dims.push_back({dist::Kind::uniform, 0.0, beta_max});
  return dist::ProductDistribution(std::move(dims));
}

void write_marginal(const std::filesystem::path& path, const stats::Surface& s, double reference,
                    const std::vector<std::string>& names) {
  std::string out = fmt::format("{},{},t_avg,pct_dev\n", names[s.dim0], names[s.dim1]);
  for (std::size_t i = 0; i < s.axis0.size(); ++i) {
    for (std::size_t j = 0; j < s.axis1.size(); ++j) {
      const double v = s.at(i, j);
      out += fmt::format("{},{},{},{}\n", s.axis0[i], s.axis1[j], v, 100.0 * (v - reference) / std::abs(reference));
    }
  }
  io::write_file(path, out);
}

CellOutput run_cell(const StudyConfig& cfg, const LayoutSpec& lspec, double beta_max, double reference,
                    const RunOptions& opt) {
  const CellKey key{lspec.name, beta_max};
  const auto layout = make_layout(lspec, cfg.model.bhe.length, cfg.model.ref_dir);
  const ParamMap map = cfg.deviating ? ParamMap{layout.size(), *cfg.deviating} : ParamMap::all(layout.size());
  const std::uint64_t seed = dist::derive_seed(cfg.seed, fnv1a(key.str()));
  const std::filesystem::path dir = opt.out_dir.empty() ? std::filesystem::path{}
                                                        : opt.out_dir / "cells" / cell_dir_name(key);
  CellOutput out;

  if (beta_max == 0.0) {
    // point mass at the vertical reference
    for (auto kind : cfg.distributions) {
      ResultRow r;
      r.cell = key;
      r.distribution = kind;
      r.mean = reference;
      r.std = 0.0;
      r.t_min.assign(cfg.confidences.size(), reference);
      r.reference = reference;
      r.cop = stats::cop(reference, cfg.t_ref);
      r.points = 1;
      r.termination = "point_mass";
      out.rows.push_back(std::move(r));
    }
    return out;
  }

  std::vector<sg::Interval> axes;
  for (std::size_t i = 0; i < map.deviating.size(); ++i) axes.push_back({cfg.azimuth_min, cfg.azimuth_max});
  for (std::size_t i = 0; i < map.deviating.size(); ++i) axes.push_back({0.0, beta_max});
  const sg::BoxDomain domain(axes);

  const adaptive::Evaluator model = [&](std::span<const double> y) { return evaluate(y, layout, map, cfg.model); };
  auto rc = cfg.refinement;
  rc.threads = opt.threads;
  auto result = adaptive::run_adaptive(model, rc, domain);
  result.interpolant.parameter_names = map.names();

  std::size_t corrected = 0;
  for (std::size_t p = 0; p < result.interpolant.size(); ++p) {
    const auto y = result.interpolant.point_physical(p);
    const auto params = map.to_params(y);
    const auto g = geo::correct_geometry(geo::realize_geometry(layout, params), cfg.model.d_min, layout, params);
    if (!g.report.empty()) ++corrected;
  }

  if (!dir.empty()) {
    io::json meta;
    meta["layout"] = key.layout;
    meta["beta_max"] = beta_max;
    meta["parameter_order"] = "azimuths of deviating BHEs, then their inclinations (degrees)";
    meta["deviating_bhes"] = map.deviating;
    meta["azimuth_convention"] = "reference direction rotated clockwise (seen from above) by the azimuth";
    meta["quantity"] = "T_avg [C]";
    meta["reference_t_avg"] = reference;
    meta["termination"] = adaptive::to_string(result.termination);
    meta["global_error"] = result.global_error;
    io::save_interpolant(dir / "interpolant.json", result.interpolant, meta);
    std::ostringstream tr;
    adaptive::write_trace_csv(tr, result.trace);
    io::write_file(dir / "trace.csv", tr.str());
  }

  const auto names = map.names();
  for (auto kind : cfg.distributions) {
    const auto pd = cell_distribution(cfg, map, beta_max, kind);
    ResultRow r;
    r.cell = key;
    r.distribution = kind;
    r.mean = stats::mean(result.interpolant, pd);
    const auto samples = stats::resample(result.interpolant, pd, cfg.mc_samples,
                                         dist::derive_seed(seed, static_cast<std::uint64_t>(kind)), opt.threads);
    r.std = stats::std_about(samples, r.mean);
    const stats::Kde kde(samples);
    io::json bounds = io::json::array();
    for (double c : cfg.confidences) {
      const auto lb = stats::quantile_lower_bound_checked(kde, c);
      r.t_min.push_back(lb.value);
      bounds.push_back({{"confidence", c},
                        {"t_min", lb.value},
                        {"empirical_quantile", lb.empirical},
                        {"kde_matches_empirical", lb.consistent},
                        {"fraction_above", fraction_above(kde.samples(), lb.value)}});
    }
    r.reference = reference;
    r.cop = stats::cop(r.mean, cfg.t_ref);
    r.points = result.evaluations;
    r.termination = adaptive::to_string(result.termination);
    r.global_error = result.global_error;
    r.corrected_points = corrected;

    if (!dir.empty()) {
      const std::string tag = dist::to_string(kind);
      io::json st;
      st["layout"] = key.layout;
      st["beta_max"] = beta_max;
      st["direction_distribution"] = tag;
      st["mean"] = r.mean;
      st["std"] = r.std;
      st["lower_bounds"] = bounds;
      st["cop_of_mean"] = r.cop;
      st["t_ref"] = cfg.t_ref;
      st["reference_t_avg"] = reference;
      st["mc_samples"] = cfg.mc_samples;
      st["kde_bandwidth"] = kde.bandwidth();
      st["points"] = r.points;
      if (kind != dist::Kind::uniform) st["note"] = "re-weighted from the uniform build; indicator not guaranteed";
      io::write_file(dir / fmt::format("stats_{}.json", tag), st.dump(1) + "\n");
      std::ostringstream dens;
      stats::write_density_csv(dens, kde, cfg.density_points);
      io::write_file(dir / fmt::format("density_{}.csv", tag), dens.str());
      if (cfg.write_marginals) {
        const std::size_t nd = map.deviating.size();
        for (std::size_t i = 0; i < nd; ++i) {
          const auto s = stats::marginal_surface(result.interpolant, pd, {i, nd + i}, cfg.marginal_resolution);
          write_marginal(dir / fmt::format("marginal_bhe{}_{}.csv", map.deviating[i], tag), s, reference, names);
        }
      }
    }
    out.rows.push_back(std::move(r));
  }
  return out;
}

}  // namespace

double LayoutSpec::resolved_spacing() const {
  if (spacing > 0.0) return spacing;
  if (name == "12m") return 6.0;
  if (name == "20m") return 10.0;
  if (name == "28m") return 14.0;
  throw InvalidArgument("layout '" + name + "' is not a preset; give an explicit spacing");
}

geo::ArrayLayout make_layout(const LayoutSpec& spec, double bhe_length, geo::Vec2 ref_dir) {
  return geo::ArrayLayout::square_grid(spec.grid, spec.resolved_spacing(), bhe_length, ref_dir, spec.name);
}

void ModelConfig::validate() const {
  bhe.validate();
  soil.validate();
  if (operation.years < 1) throw InvalidArgument("horizon must be at least one year");
  if (operation.n_z < 16) throw InvalidArgument("depth grid needs at least 16 stations");
  if (operation.coupling.passes < 1) throw InvalidArgument("coupling passes must be >= 1");
  if (operation.coupling.tolerance < 0.0) throw InvalidArgument("coupling tolerance must be >= 0");
  for (double w : operation.load_w) {
    if (!std::isfinite(w)) throw InvalidArgument("monthly loads must be finite");
  }
  if (!(d_min > 0.0)) throw InvalidArgument("d_min must be > 0");
  if (std::abs(std::hypot(ref_dir.x, ref_dir.y) - 1.0) > 1e-9) throw InvalidArgument("reference direction must be unit");
}

namespace {

// Dense solve with partial pivoting; a is row-major n x n, overwritten.
std::vector<double> solve_dense(std::vector<double> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(a[r * n + c]) > std::abs(a[piv * n + c])) piv = r;
    }
    if (!(std::abs(a[piv * n + c]) > 0.0)) throw SingularEvaluation("singular coupling system");
    if (piv != c) {
      for (std::size_t k = 0; k < n; ++k) std::swap(a[c * n + k], a[piv * n + k]);
      std::swap(b[c], b[piv]);
    }
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r * n + c] / a[c * n + c];
      if (f == 0.0) continue;
      for (std::size_t k = c; k < n; ++k) a[r * n + k] -= f * a[c * n + k];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t r = n; r-- > 0;) {
    double s = b[r];
    for (std::size_t k = r + 1; k < n; ++k) s -= a[r * n + k] * x[k];
    x[r] = s / a[r * n + r];
  }
  return x;
}

// Month m with every BHE's load unknown. With q_m = q_{m-1} + d the wall of
// BHE i is W_i - sum_j d_j K_ij(lag 0), so the outlet is affine in (d, T_in0)
// and P_i = C_f (T_out0_i - T_in0) = L q_i closes the system together with
// sum_i P_i = load.
trcm::InletSolution solve_month(soil::ResponseCache& cache, const trcm::BheModel& bhe,
                                std::vector<std::vector<double>>& q, std::size_t m, double load,
                                const std::vector<double>& gain, double slope) {
  const std::size_t n = cache.bhe_count();
  const double L = bhe.length();
  const double cf = bhe.capacity_rate();
  std::vector<double> prev(n, 0.0);
  if (m > 0) prev = q[m - 1];
  q[m] = prev;
  std::vector<double> c(n);
  for (std::size_t i = 0; i < n; ++i) c[i] = bhe.outlet_affine(cache.wall(i, q, m)).intercept;
  // unknowns x = (q_0 .. q_{n-1}, T_in0)
  const std::size_t N = n + 1;
  std::vector<double> a(N * N, 0.0), rhs(N, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double r = c[i];
    for (std::size_t j = 0; j < n; ++j) {
      a[i * N + j] = cf * gain[i * n + j];
      r += gain[i * n + j] * prev[j];
    }
    a[i * N + i] += L;
    a[i * N + n] = -cf * (slope - 1.0);
    rhs[i] = cf * r;
  }
  for (std::size_t j = 0; j < n; ++j) a[n * N + j] = L;
  rhs[n] = load;
  const auto x = solve_dense(std::move(a), std::move(rhs));
  for (std::size_t i = 0; i < n; ++i) q[m][i] = x[i];
  trcm::InletSolution sol;
  sol.t_in0 = x[n];
  sol.t_out0.resize(n);
  sol.p_ext.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    sol.p_ext[i] = L * x[i];
    sol.t_out0[i] = sol.t_in0 + sol.p_ext[i] / cf;
  }
  return sol;
}

}  // namespace

OperationResult simulate_operation_detailed(const std::vector<geo::BoreholeSegment>& segs, const ModelConfig& cfg) {
  const auto& op = cfg.operation;
  const std::size_t n = segs.size();
  if (n == 0) throw InvalidArgument("no BHEs to simulate");
  const std::size_t months = 12 * static_cast<std::size_t>(op.years);
  const double L = cfg.bhe.length;
  soil::ResponseCache cache(segs, cfg.soil, op.n_z, cfg.bhe.borehole_radius(), kMonthSeconds, months);
  const trcm::BheModel bhe(cfg.bhe, op.n_z);

  std::vector<std::vector<double>> q(months, std::vector<double>(n, 0.0));
  std::vector<double> share(n, 1.0 / static_cast<double>(n));
  OperationResult res;
  double acc = 0.0;
  std::vector<trcm::WallProfile> walls(n);
  const bool exact = op.coupling.mode == CouplingMode::exact;
  // intercept functional of the outlet closure applied to the lag-0
  // responses; fixed for the geometry, so computed once
  std::vector<double> gain;
  double slope = 0.0;
  if (exact) {
    gain.assign(n * n, 0.0);
    trcm::WallProfile col;
    col.length = L;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        col.temps = cache.kernel_column(i, j, 0);
        const auto a = bhe.outlet_affine(col);
        gain[i * n + j] = a.intercept;
        slope = a.slope;
      }
    }
  }
  for (std::size_t m = 0; m < months; ++m) {
    const std::size_t cal = m % 12;
    const double load = op.active[cal] ? op.load_w[cal] : 0.0;
    if (load == 0.0) continue;  // q stays zero for this month
    trcm::InletSolution sol;
    if (exact) {
      sol = solve_month(cache, bhe, q, m, load, gain, slope);
    } else {
      for (std::size_t i = 0; i < n; ++i) q[m][i] = load * share[i] / L;
      const bool iterate = op.coupling.tolerance > 0.0;
      const int max_pass = iterate ? op.coupling.max_iterations : op.coupling.passes;
      double prev_tin = NAN;
      for (int pass = 0; pass < max_pass; ++pass) {
        for (std::size_t i = 0; i < n; ++i) walls[i] = cache.wall(i, q, m);
        sol = trcm::required_inlet(load, walls, bhe);
        for (std::size_t i = 0; i < n; ++i) q[m][i] = sol.p_ext[i] / L;
        if (iterate && std::abs(sol.t_in0 - prev_tin) < op.coupling.tolerance) break;
        prev_tin = sol.t_in0;
      }
      const double total = std::accumulate(sol.p_ext.begin(), sol.p_ext.end(), 0.0);
      if (total != 0.0) {
        for (std::size_t i = 0; i < n; ++i) share[i] = sol.p_ext[i] / total;
      }
    }
    double month_avg = 0.0;
    for (std::size_t i = 0; i < n; ++i) month_avg += 0.5 * (sol.t_in0 + sol.t_out0[i]);
    acc += month_avg / static_cast<double>(n);
    res.months.push_back({m, load, sol.t_in0, sol.t_out0, sol.p_ext});
  }
  if (res.months.empty()) {
    // no operation at all: report the undisturbed mean wall temperature
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += mean_of_profile(cache.undisturbed(i));
    res.t_avg = s / static_cast<double>(n);
  } else {
    res.t_avg = acc / static_cast<double>(res.months.size());
  }
  return res;
}

double simulate_operation(const std::vector<geo::BoreholeSegment>& segs, const ModelConfig& cfg) {
  return simulate_operation_detailed(segs, cfg).t_avg;
}

ParamMap ParamMap::all(std::size_t n) {
  ParamMap m;
  m.n_bhe = n;
  m.deviating.resize(n);
  std::iota(m.deviating.begin(), m.deviating.end(), std::size_t{0});
  return m;
}

geo::DeviationParams ParamMap::to_params(std::span<const double> y) const {
  if (y.size() != dimension()) {
    throw InvalidArgument(fmt::format("parameter vector has {} entries, expected {}", y.size(), dimension()));
  }
  auto p = geo::DeviationParams::vertical(n_bhe);
  const std::size_t nd = deviating.size();
  for (std::size_t k = 0; k < nd; ++k) {
    p.azimuth_deg[deviating[k]] = y[k];
    p.inclination_deg[deviating[k]] = y[nd + k];
  }
  return p;
}

std::vector<std::string> ParamMap::names() const {
  std::vector<std::string> out;
  for (auto i : deviating) out.push_back(fmt::format("azimuth_{}", i));
  for (auto i : deviating) out.push_back(fmt::format("inclination_{}", i));
  return out;
}

double evaluate(std::span<const double> y, const geo::ArrayLayout& layout, const ParamMap& map,
                const ModelConfig& cfg) {
  const auto params = map.to_params(y);
  const auto segs = geo::realize_geometry(layout, params);
  const auto fixed = geo::correct_geometry(segs, cfg.d_min, layout, params);
  return simulate_operation(fixed.segments, cfg);
}

void StudyConfig::validate() const {
  if (schema_version != 1) throw InvalidArgument("unsupported schema_version");
  if (layouts.empty()) throw InvalidArgument("at least one layout is required");
  if (scenarios.empty()) throw InvalidArgument("at least one scenario is required");
  for (std::size_t s = 0; s < scenarios.size(); ++s) {
    if (!(scenarios[s] >= 0.0 && scenarios[s] < 90.0)) throw InvalidArgument("beta_max must lie in [0, 90)");
    if (s > 0 && !(scenarios[s] > scenarios[s - 1])) throw InvalidArgument("scenarios must increase");
  }
  if (!(azimuth_min < azimuth_max)) throw InvalidArgument("azimuth range must satisfy min < max");
  for (const auto& l : layouts) {
    (void)l.resolved_spacing();
    if (l.grid < 1) throw InvalidArgument("layout grid must be >= 1");
  }
  if (deviating) {
    if (deviating->empty()) throw InvalidArgument("deviating mask must name at least one BHE");
    for (std::size_t k = 0; k < deviating->size(); ++k) {
      if (k > 0 && !((*deviating)[k] > (*deviating)[k - 1])) {
        throw InvalidArgument("deviating BHE indices must be strictly increasing");
      }
      for (const auto& l : layouts) {
        if ((*deviating)[k] >= static_cast<std::size_t>(l.grid * l.grid)) {
          throw InvalidArgument("deviating BHE index exceeds layout size");
        }
      }
    }
  }
  if (distributions.empty()) throw InvalidArgument("at least one direction distribution is required");
  model.validate();
  refinement.validate();
  if (mc_samples < 100) throw InvalidArgument("mc_samples must be >= 100");
  for (double c : confidences) {
    if (!(c > 0.0 && c < 1.0)) throw InvalidArgument("confidence levels must lie in (0, 1)");
  }
  if (!(t_ref > -273.15)) throw InvalidArgument("t_ref below absolute zero");
  if (density_points < 2 || marginal_resolution < 2) throw InvalidArgument("grid resolutions must be >= 2");
}

std::string CellKey::str() const { return fmt::format("{}:{}", layout, beta_max); }

StudyResult run_study(const StudyConfig& cfg, const RunOptions& opt) {
  cfg.validate();
  StudyResult res;
  bool any = false;
  for (const auto& lspec : cfg.layouts) {
    std::optional<double> reference;
    std::string ref_error;
    for (double beta : cfg.scenarios) {
      const CellKey key{lspec.name, beta};
      if (opt.cell_filter && !matches(key, *opt.cell_filter)) continue;
      any = true;
      try {
        if (!reference) {
          const auto layout = make_layout(lspec, cfg.model.bhe.length, cfg.model.ref_dir);
          reference = simulate_operation(geo::realize_geometry(layout, geo::DeviationParams::vertical(layout.size())),
                                         cfg.model);
        }
        if (!opt.quiet) std::cerr << "cell " << key.str() << " ...\n";
        auto cell = run_cell(cfg, lspec, beta, *reference, opt);
        for (auto& r : cell.rows) res.rows.push_back(std::move(r));
      } catch (const EvaluationError& e) {
        std::string pt;
        for (std::size_t d = 0; d < e.point().size(); ++d) pt += (d ? ";" : "") + io::fmt_double(e.point()[d]);
        res.failures.push_back({key, std::string(e.what()) + " at y=" + pt});
      } catch (const std::exception& e) {
        res.failures.push_back({key, e.what()});
      }
    }
  }
  if (opt.cell_filter && !any) throw InvalidArgument("cell filter '" + *opt.cell_filter + "' matches no cell");
  if (!opt.out_dir.empty()) {
    std::ostringstream os;
    write_results_csv(os, cfg, res);
    io::write_file(opt.out_dir / "results.csv", os.str());
    std::string f = "cell,message\n";
    for (const auto& x : res.failures) {
      std::string msg = x.message;
      std::replace(msg.begin(), msg.end(), ',', ';');
      std::replace(msg.begin(), msg.end(), '\n', ' ');
      f += x.cell.str() + "," + msg + "\n";
    }
    io::write_file(opt.out_dir / "failures.csv", f);
  }
  return res;
}

void write_results_csv(std::ostream& os, const StudyConfig& cfg, const StudyResult& res) {
  os << "layout,beta_max,distribution,mean,std";
  for (double c : cfg.confidences) os << fmt::format(",t_min_{0},t_min_{0}_rel_pct", c);
  os << ",reference,cop,points,termination,global_error,corrected_points\n";
  for (const auto& r : res.rows) {
    os << fmt::format("{},{},{},{},{}", r.cell.layout, r.cell.beta_max, dist::to_string(r.distribution), r.mean, r.std);
    for (double t : r.t_min) os << fmt::format(",{},{}", t, 100.0 * (t - r.reference) / std::abs(r.reference));
    os << fmt::format(",{},{},{},{},{},{}\n", r.reference, r.cop, r.points, r.termination, r.global_error,
                      r.corrected_points);
  }
}

}  // namespace boreuq::scenario
