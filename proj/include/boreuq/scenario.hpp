#pragma once

// Case-study driver: BHE array layouts, the monthly operation loop coupling
// the ground model to the borehole model, the T_avg quantity of interest
// and the layout x scenario sweep.

#include "boreuq/adaptive.hpp"
#include "boreuq/distributions.hpp"
#include "boreuq/geometry.hpp"
#include "boreuq/soil.hpp"
#include "boreuq/statistics.hpp"
#include "boreuq/trcm.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace boreuq::scenario {

/// Seconds in one twelfth of a 365-day year.
inline constexpr double kMonthSeconds = 365.0 * 86400.0 / 12.0;

struct LayoutSpec {
  std::string name = "20m";
  int grid = 3;          // grid x grid BHEs
  double spacing = 0.0;  // m; 0 takes it from a named preset

  /// Named presets give the extent of the 3 x 3 array: "12m", "20m", "28m".
  double resolved_spacing() const;
};

geo::ArrayLayout make_layout(const LayoutSpec& spec, double bhe_length, geo::Vec2 ref_dir);

/// How each month's loads are made consistent with the wall response they
/// cause. `exact` solves the joint linear system for the per-BHE loads and
/// the common inlet temperature. `fixed_point` seeds the split from the
/// previous month and alternates wall evaluation and inlet solve; it is kept
/// for comparison and does not converge when the self-response is strong.
enum class CouplingMode { exact, fixed_point };

struct CouplingConfig {
  CouplingMode mode = CouplingMode::exact;
  int passes = 2;          // fixed_point: wall/solve passes per month
  double tolerance = 0.0;  // fixed_point, > 0: iterate until T_in0 moves less than this (K)
  int max_iterations = 50;
};

struct OperationConfig {
  int years = 1;
  std::array<bool, 12> active{true, true, true, true, true, false, false, false, true, true, true, true};
  /// Total array heat extraction per calendar month, W (not measured data).
  std::array<double, 12> load_w{25000, 23000, 19000, 13000, 7000, 0, 0, 0, 6000, 12000, 18000, 23000};
  std::size_t n_z = 16;
  CouplingConfig coupling;
};

struct ModelConfig {
  trcm::BHEParams bhe = trcm::BHEParams::case_study();
  soil::SoilParams soil = soil::SoilParams::case_study();
  OperationConfig operation;
  double d_min = 0.5;
  geo::Vec2 ref_dir{0.766044443118978, 0.6427876096865394};  // (cos 40 deg, sin 40 deg)

  void validate() const;
};

struct MonthRecord {
  std::size_t month = 0;
  double load_w = 0.0;
  double t_in0 = 0.0;
  std::vector<double> t_out0;
  std::vector<double> p_ext;
};

struct OperationResult {
  double t_avg = 0.0;
  std::vector<MonthRecord> months;  // operating months only
};

/// Monthly loop over `segs`; see OperationConfig. Returns T_avg in C.
OperationResult simulate_operation_detailed(const std::vector<geo::BoreholeSegment>& segs, const ModelConfig& cfg);
double simulate_operation(const std::vector<geo::BoreholeSegment>& segs, const ModelConfig& cfg);

/// Maps y = (azimuths of the deviating BHEs, then their inclinations) to
/// per-BHE deviation parameters. BHEs outside the mask stay vertical.
struct ParamMap {
  std::size_t n_bhe = 0;
  std::vector<std::size_t> deviating;  // ascending BHE indices

  static ParamMap all(std::size_t n);
  std::size_t dimension() const noexcept { return 2 * deviating.size(); }
  geo::DeviationParams to_params(std::span<const double> y) const;
  std::vector<std::string> names() const;
};

/// realize -> correct -> simulate.
double evaluate(std::span<const double> y, const geo::ArrayLayout& layout, const ParamMap& map,
                const ModelConfig& cfg);

struct StudyConfig {
  int schema_version = 1;
  std::string name = "study";
  std::vector<LayoutSpec> layouts;
  std::vector<double> scenarios;  // beta_max per scenario, degrees, increasing
  double azimuth_min = -90.0;
  double azimuth_max = 90.0;
  std::optional<std::vector<std::size_t>> deviating;  // default: every BHE
  std::vector<dist::Kind> distributions{dist::Kind::uniform, dist::Kind::triangular};
  ModelConfig model;
  adaptive::RefinementConfig refinement;
  std::uint64_t seed = 20240601;
  std::size_t mc_samples = 100000;
  std::vector<double> confidences{0.95};
  double t_ref = 35.0;
  std::size_t density_points = 256;
  std::size_t marginal_resolution = 21;
  bool write_marginals = true;

  void validate() const;
};

struct CellKey {
  std::string layout;
  double beta_max = 0.0;
  std::string str() const;  // "20m:6"
};

struct ResultRow {
  CellKey cell;
  dist::Kind distribution = dist::Kind::uniform;
  double mean = 0.0;
  double std = 0.0;
  std::vector<double> t_min;  // per confidence
  double reference = 0.0;     // deterministic (all vertical) T_avg
  double cop = 0.0;
  std::size_t points = 0;
  std::string termination;
  double global_error = 0.0;
  std::size_t corrected_points = 0;  // collocation points whose geometry was repaired
};

struct CellFailure {
  CellKey cell;
  std::string message;
};

struct StudyResult {
  std::vector<ResultRow> rows;
  std::vector<CellFailure> failures;
};

struct RunOptions {
  std::filesystem::path out_dir;  // empty: nothing written
  unsigned threads = 1;
  std::optional<std::string> cell_filter;  // "layout:beta"
  bool quiet = true;
};

StudyResult run_study(const StudyConfig& cfg, const RunOptions& opt);

void write_results_csv(std::ostream& os, const StudyConfig& cfg, const StudyResult& res);

}  // namespace boreuq::scenario
