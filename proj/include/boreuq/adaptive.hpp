#pragma once

// Dimension-adaptive (generalized) Smolyak refinement driven by
// hierarchical-surplus error indicators.

#include "boreuq/sparse_grid.hpp"

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace boreuq::adaptive {

/// Model u(y) at a physical point. Must be pure; may be called concurrently.
using Evaluator = std::function<double(std::span<const double>)>;

struct RefinementConfig {
  double tolerance = 1e-6;
  std::size_t max_points = 10000;
  int max_level_per_dim = 8;
  unsigned threads = 1;

  void validate() const;
};

enum class Termination { converged, max_points, exhausted };
std::string to_string(Termination t);

struct StepRecord {
  std::size_t step = 0;
  sg::MultiIndex refined;
  std::vector<sg::MultiIndex> children;
  std::vector<double> child_indicators;
  std::size_t cumulative_points = 0;
  double global_error = 0.0;
};

struct AdaptiveState {
  std::map<sg::MultiIndex, double> active;  // index -> max |surplus| of its points
  std::set<sg::MultiIndex> old;
  sg::SparseInterpolant interpolant;
  std::size_t evaluations_used = 0;
  std::size_t steps = 0;
  std::vector<StepRecord> trace;
};

/// State holding only (1,...,1), evaluated at the domain center.
AdaptiveState init_state(const sg::BoxDomain& domain, const Evaluator& evaluator);

/// Forward neighbours of `idx` whose backward neighbours all lie in
/// active ∪ old ∪ {idx}, dropping any above `max_level_per_dim`.
std::vector<sg::MultiIndex> admissible_children(const AdaptiveState& state, const sg::MultiIndex& idx,
                                                int max_level_per_dim);

/// Active index with the largest indicator; ties go to the smallest index.
const sg::MultiIndex& select_refinement(const AdaptiveState& state);

/// One refinement: retire the selected index and add its admissible children.
/// Strong guarantee: if any evaluation throws, `state` is left untouched.
void refine_step(AdaptiveState& state, const Evaluator& evaluator, const RefinementConfig& config);

/// Sum of indicators over active indices.
double global_error(const AdaptiveState& state);

struct AdaptiveResult {
  sg::SparseInterpolant interpolant;
  Termination termination = Termination::converged;
  double global_error = 0.0;
  std::size_t evaluations = 0;
  std::vector<StepRecord> trace;
  std::map<sg::MultiIndex, double> active;
};

/// Refine until global_error <= tolerance or a budget cap stops it. The root
/// index is always refined once, since its indicator is just |u(center)|.
AdaptiveResult run_adaptive(const Evaluator& evaluator, const RefinementConfig& config,
                            const sg::BoxDomain& domain);

/// Refinement trace as CSV, one line per step.
void write_trace_csv(std::ostream& os, const std::vector<StepRecord>& trace);

}  // namespace boreuq::adaptive
