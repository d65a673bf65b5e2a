#include "boreuq/adaptive.hpp"
#include "boreuq/error.hpp"

#include "doctest.h"

#include <cmath>
#include <sstream>

using namespace boreuq;
using namespace boreuq::adaptive;

namespace {

int max_level_in_dim(const sg::SparseInterpolant& itp, std::size_t d) {
  int m = 0;
  for (const auto& idx : itp.index_set()) m = std::max(m, idx[d]);
  return m;
}

}  // namespace

TEST_CASE("constant model: root refined once, then converged") {
  RefinementConfig rc;
  rc.tolerance = 1e-12;
  const auto r = run_adaptive([](std::span<const double>) { return 7.0; }, rc, sg::BoxDomain::reference(3));
  CHECK(r.termination == Termination::converged);
  CHECK(r.evaluations == 1 + 2 * 3);
  CHECK(r.trace.size() == 1);
  const std::vector<double> x{0.3, -0.2, 0.9};
  CHECK(r.interpolant.evaluate(x) == doctest::Approx(7.0));
}

TEST_CASE("anisotropic target refines the active dimension") {
  RefinementConfig rc;
  rc.tolerance = 1e-8;
  rc.max_points = 400;
  const auto r = run_adaptive([](std::span<const double> x) { return std::pow(x[0], 4) + 0.01 * x[1]; }, rc,
                              sg::BoxDomain::reference(2));
  CHECK(max_level_in_dim(r.interpolant, 0) > max_level_in_dim(r.interpolant, 1));
  const std::vector<double> x{0.37, -0.81};
  CHECK(r.interpolant.evaluate(x) == doctest::Approx(std::pow(0.37, 4) - 0.0081).epsilon(1e-8));
}

TEST_CASE("budget cap and monotone trace") {
  RefinementConfig rc;
  rc.tolerance = 1e-300;
  rc.max_points = 150;
  const auto r = run_adaptive([](std::span<const double> x) { return std::exp(x[0] * x[1] + x[2]); }, rc,
                              sg::BoxDomain::reference(3));
  CHECK(r.termination == Termination::max_points);
  CHECK(r.evaluations <= 150);
  CHECK(r.evaluations == r.interpolant.size());
  for (std::size_t s = 1; s < r.trace.size(); ++s) {
    CHECK(r.trace[s].cumulative_points >= r.trace[s - 1].cumulative_points);
    if (!r.trace[s].children.empty()) CHECK(r.trace[s].cumulative_points > r.trace[s - 1].cumulative_points);
  }
}

TEST_CASE("level cap leads to exhaustion") {
  RefinementConfig rc;
  rc.tolerance = 1e-300;
  rc.max_level_per_dim = 3;
  const auto r = run_adaptive([](std::span<const double> x) { return std::sin(3 * x[0]) + std::cos(2 * x[1]); }, rc,
                              sg::BoxDomain::reference(2));
  CHECK(r.termination == Termination::exhausted);
  for (const auto& idx : r.interpolant.index_set()) CHECK(idx.max() <= 3);
}

TEST_CASE("selection picks the largest indicator, ties to the smallest index") {
  AdaptiveState st;
  st.active[sg::MultiIndex{2, 1}] = 0.5;
  st.active[sg::MultiIndex{1, 2}] = 0.5;
  st.active[sg::MultiIndex{1, 3}] = 0.1;
  CHECK(select_refinement(st) == sg::MultiIndex{1, 2});
  st.active[sg::MultiIndex{1, 3}] = 0.9;
  CHECK(select_refinement(st) == sg::MultiIndex{1, 3});
}

TEST_CASE("admissible children need every backward neighbour") {
  auto st = init_state(sg::BoxDomain::reference(2), [](std::span<const double>) { return 1.0; });
  auto kids = admissible_children(st, sg::MultiIndex{1, 1}, 8);
  CHECK(kids.size() == 2);
  st.old.insert(sg::MultiIndex{1, 1});
  st.active.erase(sg::MultiIndex{1, 1});
  st.active[sg::MultiIndex{2, 1}] = 1.0;
  kids = admissible_children(st, sg::MultiIndex{2, 1}, 8);
  // (2,2) needs (1,2), which is absent
  REQUIRE(kids.size() == 1);
  CHECK(kids[0] == sg::MultiIndex{3, 1});
  CHECK(admissible_children(st, sg::MultiIndex{2, 1}, 2).empty());
}

TEST_CASE("refine_step leaves the state untouched when the model throws") {
  const sg::BoxDomain dom = sg::BoxDomain::reference(2);
  int calls = 0;
  Evaluator ok = [&](std::span<const double> x) { ++calls; return x[0] + 2 * x[1]; };
  auto st = init_state(dom, ok);
  RefinementConfig rc;
  refine_step(st, ok, rc);
  const auto size_before = st.interpolant.size();
  const auto active_before = st.active;
  const auto old_before = st.old;
  const auto used_before = st.evaluations_used;
  Evaluator bad = [](std::span<const double> x) -> double {
    if (x[0] > 0.5) throw std::runtime_error("model blew up");
    return 0.0;
  };
  CHECK_THROWS(refine_step(st, bad, rc));
  CHECK(st.interpolant.size() == size_before);
  CHECK(st.active == active_before);
  CHECK(st.old == old_before);
  CHECK(st.evaluations_used == used_before);
}

TEST_CASE("thread count does not change the result") {
  Evaluator f = [](std::span<const double> x) { return 1.0 / (1.0 + x[0] * x[0] + 0.5 * x[1]); };
  RefinementConfig a;
  a.tolerance = 1e-6;
  a.max_points = 300;
  auto b = a;
  b.threads = 3;
  const auto ra = run_adaptive(f, a, sg::BoxDomain::reference(2));
  const auto rb = run_adaptive(f, b, sg::BoxDomain::reference(2));
  REQUIRE(ra.interpolant.size() == rb.interpolant.size());
  for (std::size_t p = 0; p < ra.interpolant.size(); ++p) {
    CHECK(ra.interpolant.surpluses()[p] == rb.interpolant.surpluses()[p]);
  }
}

TEST_CASE("config validation and trace output") {
  RefinementConfig rc;
  rc.max_points = 0;
  CHECK_THROWS_AS(rc.validate(), InvalidArgument);
  rc = RefinementConfig{};
  rc.tolerance = -1.0;
  CHECK_THROWS_AS(rc.validate(), InvalidArgument);

  rc = RefinementConfig{};
  rc.max_points = 20;
  const auto r = run_adaptive([](std::span<const double> x) { return x[0] * x[0]; }, rc, sg::BoxDomain::reference(1));
  std::ostringstream os;
  write_trace_csv(os, r.trace);
  CHECK(os.str().rfind("step,refined_index,children,child_indicators,cumulative_points,global_error\n", 0) == 0);
}
