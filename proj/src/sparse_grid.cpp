#include "boreuq/sparse_grid.hpp"

#include "boreuq/error.hpp"
#include "boreuq/kernels.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

namespace boreuq::sg {

namespace {

constexpr int kMaxLevel = 14;

void check_level(int level) {
  if (level < 1) throw InvalidArgument("level must be >= 1, got " + std::to_string(level));
  if (level > kMaxLevel) {
    throw InvalidArgument("level " + std::to_string(level) + " exceeds supported maximum " +
                          std::to_string(kMaxLevel));
  }
}

// −cos(πj/n) written as sin(π(2j−n)/(2n)) with the fraction reduced, so a
// node shared by several levels is computed from identical operands.
double node_value(int level, int j) {
  if (level == 1) return 0.0;
  const long n = node_count(level) - 1;
  long k = 2L * j - n;
  long den = 2L * n;
  if (k == 0) return 0.0;
  while (k % 2 == 0 && den % 2 == 0) {
    k /= 2;
    den /= 2;
  }
  const double s = std::sin(std::numbers::pi * static_cast<double>(std::labs(k)) /
                            static_cast<double>(den));
  return k < 0 ? -s : s;
}

struct LevelTable {
  std::vector<double> nodes;    // full node set
  std::vector<double> weights;  // barycentric weights
  std::vector<int> new_pos;     // positions of new nodes within `nodes`
};

const std::vector<LevelTable>& level_tables() {
  static const std::vector<LevelTable> tables = [] {
    std::vector<LevelTable> t(kMaxLevel + 1);
    for (int l = 1; l <= kMaxLevel; ++l) {
      auto& lt = t[l];
      const int m = node_count(l);
      lt.nodes.resize(m);
      lt.weights.resize(m);
      for (int j = 0; j < m; ++j) {
        lt.nodes[j] = node_value(l, j);
        double w = (j % 2 == 0) ? 1.0 : -1.0;
        if (j == 0 || j == m - 1) w *= 0.5;
        lt.weights[j] = w;
      }
      if (l == 1) {
        lt.new_pos = {0};
      } else if (l == 2) {
        lt.new_pos = {0, 2};
      } else {
        for (int j = 1; j < m; j += 2) lt.new_pos.push_back(j);
      }
    }
    return t;
  }();
  return tables;
}

int first_code(int level) { return level == 1 ? 0 : node_count(level - 1); }

// Barycentric evaluation of the level's Lagrange basis at the new nodes.
void level_basis(const LevelTable& lt, double x, double* out) {
  const std::size_t m = lt.nodes.size();
  if (m == 1) {
    out[0] = 1.0;
    return;
  }
  for (std::size_t j = 0; j < m; ++j) {
    if (x == lt.nodes[j]) {
      for (std::size_t t = 0; t < lt.new_pos.size(); ++t) {
        out[t] = (static_cast<std::size_t>(lt.new_pos[t]) == j) ? 1.0 : 0.0;
      }
      return;
    }
  }
  double denom = 0.0;
  for (std::size_t j = 0; j < m; ++j) denom += lt.weights[j] / (x - lt.nodes[j]);
  for (std::size_t t = 0; t < lt.new_pos.size(); ++t) {
    const auto j = static_cast<std::size_t>(lt.new_pos[t]);
    out[t] = (lt.weights[j] / (x - lt.nodes[j])) / denom;
  }
}

}  // namespace

int node_count(int level) {
  if (level < 1) throw InvalidArgument("level must be >= 1, got " + std::to_string(level));
  return level == 1 ? 1 : (1 << (level - 1)) + 1;
}

std::vector<double> cc_nodes(int level) {
  check_level(level);
  return level_tables()[level].nodes;
}

std::vector<double> new_nodes(int level) {
  check_level(level);
  const auto& lt = level_tables()[level];
  std::vector<double> out;
  out.reserve(lt.new_pos.size());
  for (int j : lt.new_pos) out.push_back(lt.nodes[j]);
  return out;
}

int code_level(int code) {
  if (code < 0) throw InvalidArgument("negative node code");
  if (code == 0) return 1;
  int l = 2;
  while (code >= node_count(l)) ++l;
  return l;
}

double code_coordinate(int code) {
  const int l = code_level(code);
  check_level(l);
  const auto& lt = level_tables()[l];
  return lt.nodes[lt.new_pos[code - first_code(l)]];
}

int code_of(int level, double node) {
  check_level(level);
  const auto& lt = level_tables()[level];
  for (std::size_t t = 0; t < lt.new_pos.size(); ++t) {
    if (std::abs(lt.nodes[lt.new_pos[t]] - node) <= 1e-13) return first_code(level) + static_cast<int>(t);
  }
  std::ostringstream os;
  os << "node " << node << " is not a new node of level " << level;
  throw InvalidArgument(os.str());
}

double hier_basis_eval(int level, double node, double x) {
  const int code = code_of(level, node);
  const auto& lt = level_tables()[level];
  std::vector<double> vals(lt.new_pos.size());
  level_basis(lt, x, vals.data());
  return vals[code - first_code(level)];
}

void basis_values(int max_level, double x, std::span<double> out) {
  check_level(max_level);
  if (out.size() < static_cast<std::size_t>(node_count(max_level))) {
    throw InvalidArgument("basis_values: output span too small");
  }
  const auto& tables = level_tables();
  for (int l = 1; l <= max_level; ++l) level_basis(tables[l], x, out.data() + first_code(l));
}

// ---------------------------------------------------------------------------

int MultiIndex::sum() const noexcept {
  int s = 0;
  for (int v : levels) s += v;
  return s;
}

int MultiIndex::max() const noexcept {
  return levels.empty() ? 0 : *std::max_element(levels.begin(), levels.end());
}

MultiIndex MultiIndex::plus_unit(std::size_t d) const {
  MultiIndex r = *this;
  ++r.levels.at(d);
  return r;
}

MultiIndex MultiIndex::minus_unit(std::size_t d) const {
  MultiIndex r = *this;
  --r.levels.at(d);
  return r;
}

std::string MultiIndex::str() const {
  std::string s = "(";
  for (std::size_t d = 0; d < levels.size(); ++d) {
    if (d) s += ',';
    s += std::to_string(levels[d]);
  }
  return s + ")";
}

std::vector<std::vector<std::int32_t>> tensor_new_codes(const MultiIndex& idx) {
  const std::size_t dim = idx.size();
  std::vector<std::vector<std::int32_t>> axis(dim);
  for (std::size_t d = 0; d < dim; ++d) {
    check_level(idx[d]);
    const int first = first_code(idx[d]);
    const int count = static_cast<int>(level_tables()[idx[d]].new_pos.size());
    for (int t = 0; t < count; ++t) axis[d].push_back(first + t);
  }
  std::vector<std::vector<std::int32_t>> out;
  out.reserve(tensor_new_count(idx));
  std::vector<std::size_t> counter(dim, 0);
  while (true) {
    std::vector<std::int32_t> pt(dim);
    for (std::size_t d = 0; d < dim; ++d) pt[d] = axis[d][counter[d]];
    out.push_back(std::move(pt));
    std::size_t d = dim;
    while (d > 0) {
      --d;
      if (++counter[d] < axis[d].size()) break;
      counter[d] = 0;
      if (d == 0) return out;
    }
    if (dim == 0) return out;
  }
}

std::vector<std::vector<double>> tensor_new_points(const MultiIndex& idx) {
  auto codes = tensor_new_codes(idx);
  std::vector<std::vector<double>> pts;
  pts.reserve(codes.size());
  for (const auto& c : codes) {
    std::vector<double> p(c.size());
    for (std::size_t d = 0; d < c.size(); ++d) p[d] = code_coordinate(c[d]);
    pts.push_back(std::move(p));
  }
  return pts;
}

std::size_t tensor_new_count(const MultiIndex& idx) {
  std::size_t n = 1;
  for (int l : idx.levels) n *= (l == 1) ? 1u : (l == 2 ? 2u : (1u << (l - 2)));
  return n;
}

// ---------------------------------------------------------------------------

BoxDomain::BoxDomain(std::vector<Interval> axes) : axes_(std::move(axes)) {
  for (std::size_t d = 0; d < axes_.size(); ++d) {
    if (!(axes_[d].hi >= axes_[d].lo) || !std::isfinite(axes_[d].lo) || !std::isfinite(axes_[d].hi)) {
      throw InvalidArgument("domain axis " + std::to_string(d) + " has hi < lo or non-finite bounds");
    }
  }
}

BoxDomain BoxDomain::reference(std::size_t dim) {
  return BoxDomain(std::vector<Interval>(dim, Interval{-1.0, 1.0}));
}

double BoxDomain::to_reference(std::size_t d, double x) const {
  const Interval& iv = axes_.at(d);
  const double w = iv.width();
  const double slack = 1e-12 * std::max(1.0, std::max(std::abs(iv.lo), std::abs(iv.hi)));
  if (!(x >= iv.lo - slack && x <= iv.hi + slack)) {
    std::ostringstream os;
    os << "coordinate " << d << " = " << x << " outside the interpolation domain [" << iv.lo << ", " << iv.hi << "]";
    throw OutOfDomain(os.str());
  }
  if (w == 0.0) return 0.0;
  return std::clamp(2.0 * (x - iv.lo) / w - 1.0, -1.0, 1.0);
}

double BoxDomain::to_physical(std::size_t d, double r) const {
  const Interval& iv = axes_.at(d);
  if (r == 1.0) return iv.hi;
  return iv.lo + (r + 1.0) * 0.5 * iv.width();
}

std::vector<double> BoxDomain::to_reference(std::span<const double> x) const {
  if (x.size() != axes_.size()) throw InvalidArgument("point dimension does not match domain");
  std::vector<double> r(x.size());
  for (std::size_t d = 0; d < x.size(); ++d) r[d] = to_reference(d, x[d]);
  return r;
}

std::vector<double> BoxDomain::to_physical(std::span<const double> r) const {
  if (r.size() != axes_.size()) throw InvalidArgument("point dimension does not match domain");
  std::vector<double> x(r.size());
  for (std::size_t d = 0; d < r.size(); ++d) x[d] = to_physical(d, r[d]);
  return x;
}

bool BoxDomain::contains(std::span<const double> x) const {
  if (x.size() != axes_.size()) return false;
  for (std::size_t d = 0; d < x.size(); ++d) {
    if (x[d] < axes_[d].lo || x[d] > axes_[d].hi) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------

SparseInterpolant::SparseInterpolant(BoxDomain domain)
    : domain_(std::move(domain)), codes_(domain_.dimension()) {
  if (domain_.dimension() == 0) throw InvalidArgument("interpolant dimension must be >= 1");
}

HierarchicalPoint SparseInterpolant::point(std::size_t p) const {
  HierarchicalPoint hp;
  hp.index = indices_.at(point_index_.at(p));
  hp.coords_ref.resize(dimension());
  for (std::size_t d = 0; d < dimension(); ++d) hp.coords_ref[d] = code_coordinate(codes_[d][p]);
  hp.surplus = surplus_[p];
  return hp;
}

std::vector<double> SparseInterpolant::point_physical(std::size_t p) const {
  std::vector<double> x(dimension());
  for (std::size_t d = 0; d < dimension(); ++d) {
    x[d] = domain_.to_physical(d, code_coordinate(codes_[d][p]));
  }
  return x;
}

std::pair<std::size_t, std::size_t> SparseInterpolant::point_range(std::size_t k) const {
  const std::size_t first = index_first_point_.at(k);
  const std::size_t last = (k + 1 < index_first_point_.size()) ? index_first_point_[k + 1] : size();
  return {first, last};
}

bool SparseInterpolant::admissible(const MultiIndex& idx) const {
  if (idx.size() != dimension()) return false;
  for (int l : idx.levels) {
    if (l < 1 || l > kMaxLevel) return false;
  }
  if (contains_index(idx)) return false;
  for (std::size_t d = 0; d < idx.size(); ++d) {
    if (idx[d] > 1 && !contains_index(idx.minus_unit(d))) return false;
  }
  return true;
}

void SparseInterpolant::register_index(const MultiIndex& idx) {
  if (!admissible(idx)) {
    throw InvalidArgument("multi-index " + idx.str() + " is not admissible for this interpolant");
  }
  index_lookup_.emplace(idx, indices_.size());
  indices_.push_back(idx);
  index_first_point_.push_back(size());
  max_level_ = std::max(max_level_, idx.max());
}

std::vector<double> SparseInterpolant::add_index(const MultiIndex& idx, std::span<const double> values) {
  if (!admissible(idx)) {
    throw InvalidArgument("multi-index " + idx.str() + " is not admissible for this interpolant");
  }
  const auto codes = tensor_new_codes(idx);
  if (values.size() != codes.size()) {
    throw IncompleteBatch("index " + idx.str() + " needs " + std::to_string(codes.size()) +
                          " values, got " + std::to_string(values.size()));
  }
  // Siblings within one index vanish at each other's nodes, so every surplus
  // is taken against the interpolant as it was before this index.
  std::vector<double> surplus(codes.size());
  std::vector<double> xr(dimension());
  for (std::size_t j = 0; j < codes.size(); ++j) {
    for (std::size_t d = 0; d < dimension(); ++d) xr[d] = code_coordinate(codes[j][d]);
    surplus[j] = values[j] - (size() == 0 ? 0.0 : evaluate_reference(xr));
  }
  register_index(idx);
  for (std::size_t j = 0; j < codes.size(); ++j) {
    point_keys_.insert(codes[j]);
    for (std::size_t d = 0; d < dimension(); ++d) codes_[d].push_back(codes[j][d]);
    surplus_.push_back(surplus[j]);
    point_index_.push_back(static_cast<std::uint32_t>(indices_.size() - 1));
  }
  return surplus;
}

void SparseInterpolant::append_point(const MultiIndex& idx, std::span<const std::int32_t> codes,
                                     double surplus) {
  if (codes.size() != dimension()) throw InvalidArgument("point code count does not match dimension");
  if (indices_.empty() || indices_.back() != idx) register_index(idx);
  for (std::size_t d = 0; d < dimension(); ++d) {
    if (code_level(codes[d]) != idx[d]) {
      throw InvalidArgument("point node in dimension " + std::to_string(d) + " is not new at level " +
                            std::to_string(idx[d]));
    }
  }
  std::vector<std::int32_t> key(codes.begin(), codes.end());
  if (!point_keys_.insert(key).second) throw InvalidArgument("duplicate collocation point");
  for (std::size_t d = 0; d < dimension(); ++d) codes_[d].push_back(codes[d]);
  surplus_.push_back(surplus);
  point_index_.push_back(static_cast<std::uint32_t>(indices_.size() - 1));
}

std::size_t SparseInterpolant::table_stride() const noexcept {
  return static_cast<std::size_t>(node_count(max_level_));
}

double SparseInterpolant::contract(std::span<const double> table, std::size_t stride) const {
  if (stride < table_stride() || table.size() < stride * dimension()) {
    throw InvalidArgument("contract: basis table too small for interpolant levels");
  }
  std::vector<const std::int32_t*> code_ptrs(dimension());
  for (std::size_t d = 0; d < dimension(); ++d) code_ptrs[d] = codes_[d].data();
  kernels::ProductSumView view;
  view.coeff = surplus_.data();
  view.codes = code_ptrs.data();
  view.count = size();
  view.dim = dimension();
  view.table = table.data();
  view.stride = stride;
  return kernels::active().product_sum(view);
}

double SparseInterpolant::evaluate_reference(std::span<const double> x_ref) const {
  if (x_ref.size() != dimension()) throw InvalidArgument("point dimension does not match interpolant");
  const std::size_t stride = table_stride();
  std::vector<double> table(stride * dimension());
  for (std::size_t d = 0; d < dimension(); ++d) {
    basis_values(max_level_, x_ref[d], std::span<double>(table.data() + d * stride, stride));
  }
  return contract(table, stride);
}

double SparseInterpolant::evaluate(std::span<const double> x_physical) const {
  const auto xr = domain_.to_reference(x_physical);
  return evaluate_reference(xr);
}

// ---------------------------------------------------------------------------

SparseInterpolant compute_surpluses(const SparseInterpolant& itp, const MultiIndex& new_index,
                                    const PointValueMap& evaluations) {
  if (!itp.admissible(new_index)) {
    throw InvalidArgument("multi-index " + new_index.str() + " is not admissible");
  }
  const auto pts = tensor_new_points(new_index);
  std::vector<double> values;
  values.reserve(pts.size());
  for (const auto& p : pts) {
    auto it = evaluations.find(p);
    if (it == evaluations.end()) {
      throw IncompleteBatch("missing model value for a collocation point of index " + new_index.str());
    }
    values.push_back(it->second);
  }
  SparseInterpolant out = itp;
  out.add_index(new_index, values);
  return out;
}

namespace {

void enumerate_indices(std::size_t dim, int budget, std::vector<int>& cur, std::vector<MultiIndex>& out) {
  if (cur.size() == dim) {
    out.emplace_back(cur);
    return;
  }
  const int remaining_dims = static_cast<int>(dim - cur.size() - 1);
  for (int l = 1; l <= budget - remaining_dims; ++l) {
    cur.push_back(l);
    enumerate_indices(dim, budget - l, cur, out);
    cur.pop_back();
  }
}

}  // namespace

std::vector<MultiIndex> smolyak_indices(int k, std::size_t dim) {
  if (k < 0) throw InvalidArgument("Smolyak level k must be >= 0");
  if (dim < 1) throw InvalidArgument("dimension must be >= 1");
  std::vector<MultiIndex> out;
  std::vector<int> cur;
  enumerate_indices(dim, k + static_cast<int>(dim), cur, out);
  std::stable_sort(out.begin(), out.end(), [](const MultiIndex& a, const MultiIndex& b) {
    if (a.sum() != b.sum()) return a.sum() < b.sum();
    return a < b;
  });
  return out;
}

std::vector<std::vector<double>> smolyak_grid(int k, std::size_t dim) {
  std::vector<std::vector<double>> pts;
  for (const auto& idx : smolyak_indices(k, dim)) {
    auto t = tensor_new_points(idx);
    pts.insert(pts.end(), std::make_move_iterator(t.begin()), std::make_move_iterator(t.end()));
  }
  return pts;
}

SparseInterpolant build_smolyak(int k, const BoxDomain& domain,
                                const std::function<double(std::span<const double>)>& fn) {
  SparseInterpolant itp(domain);
  for (const auto& idx : smolyak_indices(k, domain.dimension())) {
    const auto pts = tensor_new_points(idx);
    std::vector<double> values;
    values.reserve(pts.size());
    for (const auto& p : pts) values.push_back(fn(domain.to_physical(p)));
    itp.add_index(idx, values);
  }
  return itp;
}

}  // namespace boreuq::sg
