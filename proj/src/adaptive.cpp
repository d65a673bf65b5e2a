#include "boreuq/adaptive.hpp"

#include "boreuq/error.hpp"
#include "boreuq/parallel.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <ostream>

namespace boreuq::adaptive {

namespace {

std::vector<double> evaluate_batch(const sg::BoxDomain& domain, const std::vector<std::vector<double>>& ref_points,
                                   const Evaluator& evaluator, unsigned threads) {
  std::vector<double> values(ref_points.size());
  parallel_for(ref_points.size(), threads, [&](std::size_t j) {
    const auto x = domain.to_physical(ref_points[j]);
    try {
      const double v = evaluator(x);
      if (!std::isfinite(v)) throw std::runtime_error("model returned a non-finite value");
      values[j] = v;
    } catch (const EvaluationError&) {
      throw;
    } catch (const std::exception& e) {
      throw EvaluationError(std::string("model evaluation failed: ") + e.what(), x);
    }
  });
  return values;
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

std::string index_token(const sg::MultiIndex& idx) {
  std::string s;
  for (std::size_t d = 0; d < idx.size(); ++d) {
    if (d) s += ':';
    s += std::to_string(idx[d]);
  }
  return s;
}

}  // namespace

void RefinementConfig::validate() const {
  if (!(tolerance > 0.0)) throw InvalidArgument("refinement tolerance must be > 0");
  if (max_points == 0) throw InvalidArgument("max_points must be > 0");
  if (max_level_per_dim < 1) throw InvalidArgument("max_level_per_dim must be >= 1");
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::converged:
      return "converged";
    case Termination::max_points:
      return "max_points";
    case Termination::exhausted:
      return "exhausted";
  }
  return "unknown";
}

AdaptiveState init_state(const sg::BoxDomain& domain, const Evaluator& evaluator) {
  if (domain.dimension() < 1) throw InvalidArgument("dimension must be >= 1");
  AdaptiveState st;
  st.interpolant = sg::SparseInterpolant(domain);
  const auto root = sg::MultiIndex::ones(domain.dimension());
  const auto values = evaluate_batch(domain, sg::tensor_new_points(root), evaluator, 1);
  const auto surplus = st.interpolant.add_index(root, values);
  st.active.emplace(root, max_abs(surplus));
  st.evaluations_used = values.size();
  return st;
}

std::vector<sg::MultiIndex> admissible_children(const AdaptiveState& state, const sg::MultiIndex& idx,
                                                int max_level_per_dim) {
  auto in_family = [&](const sg::MultiIndex& m) {
    return m == idx || state.active.count(m) != 0 || state.old.count(m) != 0;
  };
  std::vector<sg::MultiIndex> out;
  for (std::size_t d = 0; d < idx.size(); ++d) {
    const auto child = idx.plus_unit(d);
    if (child[d] > max_level_per_dim) continue;
    if (in_family(child)) continue;
    bool ok = true;
    for (std::size_t e = 0; e < child.size() && ok; ++e) {
      if (child[e] > 1 && !in_family(child.minus_unit(e))) ok = false;
    }
    if (ok) out.push_back(child);
  }
  return out;
}

const sg::MultiIndex& select_refinement(const AdaptiveState& state) {
  if (state.active.empty()) throw InvalidArgument("no active index to refine");
  auto best = state.active.begin();
  for (auto it = state.active.begin(); it != state.active.end(); ++it) {
    if (it->second > best->second) best = it;
  }
  return best->first;
}

void refine_step(AdaptiveState& state, const Evaluator& evaluator, const RefinementConfig& config) {
  const sg::MultiIndex selected = select_refinement(state);
  const auto children = admissible_children(state, selected, config.max_level_per_dim);

  // Evaluate everything first so a failure leaves the state as it was.
  std::vector<std::vector<double>> all_points;
  std::vector<std::size_t> offsets;
  for (const auto& c : children) {
    offsets.push_back(all_points.size());
    auto pts = sg::tensor_new_points(c);
    all_points.insert(all_points.end(), std::make_move_iterator(pts.begin()), std::make_move_iterator(pts.end()));
  }
  offsets.push_back(all_points.size());
  const auto values = evaluate_batch(state.interpolant.domain(), all_points, evaluator, config.threads);

  StepRecord rec;
  rec.step = state.steps + 1;
  rec.refined = selected;
  state.active.erase(selected);
  state.old.insert(selected);
  for (std::size_t k = 0; k < children.size(); ++k) {
    std::span<const double> vals(values.data() + offsets[k], offsets[k + 1] - offsets[k]);
    const auto surplus = state.interpolant.add_index(children[k], vals);
    const double ind = max_abs(surplus);
    state.active.emplace(children[k], ind);
    rec.children.push_back(children[k]);
    rec.child_indicators.push_back(ind);
  }
  state.evaluations_used += values.size();
  state.steps += 1;
  rec.cumulative_points = state.evaluations_used;
  rec.global_error = global_error(state);
  state.trace.push_back(std::move(rec));
}

double global_error(const AdaptiveState& state) {
  double s = 0.0;
  for (const auto& [idx, ind] : state.active) s += ind;
  return s;
}

AdaptiveResult run_adaptive(const Evaluator& evaluator, const RefinementConfig& config,
                            const sg::BoxDomain& domain) {
  config.validate();
  AdaptiveState st = init_state(domain, evaluator);
  Termination why = Termination::converged;
  while (true) {
    if (st.active.empty()) {
      why = Termination::exhausted;
      break;
    }
    if (st.steps > 0 && global_error(st) <= config.tolerance) {
      why = Termination::converged;
      break;
    }
    const auto& next = select_refinement(st);
    std::size_t pending = 0;
    for (const auto& c : admissible_children(st, next, config.max_level_per_dim)) {
      pending += sg::tensor_new_count(c);
    }
    if (st.evaluations_used + pending > config.max_points) {
      why = Termination::max_points;
      break;
    }
    refine_step(st, evaluator, config);
  }
  AdaptiveResult r;
  r.global_error = global_error(st);
  r.termination = why;
  r.evaluations = st.evaluations_used;
  r.trace = std::move(st.trace);
  r.active = std::move(st.active);
  r.interpolant = std::move(st.interpolant);
  return r;
}

void write_trace_csv(std::ostream& os, const std::vector<StepRecord>& trace) {
  os << "step,refined_index,children,child_indicators,cumulative_points,global_error\n";
  for (const auto& r : trace) {
    std::string kids, inds;
    for (std::size_t k = 0; k < r.children.size(); ++k) {
      if (k) {
        kids += ';';
        inds += ';';
      }
      kids += index_token(r.children[k]);
      inds += fmt::format("{}", r.child_indicators[k]);
    }
    os << r.step << ',' << index_token(r.refined) << ',' << kids << ',' << inds << ','
       << r.cumulative_points << ',' << fmt::format("{}", r.global_error) << '\n';
  }
}

}  // namespace boreuq::adaptive
