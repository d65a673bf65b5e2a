#pragma once

// Nested Clenshaw-Curtis sparse grids with hierarchical Lagrange bases.
//
// All grid logic lives on the reference cube [-1,1]^D. A node is identified
// by an integer code: codes in [m(l-1), m(l)) are the nodes first appearing
// at level l, ordered by coordinate, with m(0) = 0. Codes are what the
// interpolant stores; coordinates are derived from them, so two points are
// equal exactly when their codes are.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace boreuq::sg {

/// Number of level-l nodes: 1 for l = 1, 2^(l-1) + 1 otherwise.
int node_count(int level);

/// Full nested node set of a level, ascending. Level 1 is the midpoint {0}.
std::vector<double> cc_nodes(int level);

/// Nodes of `level` absent from `level - 1`, ascending.
std::vector<double> new_nodes(int level);

int code_level(int code);
double code_coordinate(int code);
/// Code of a new node of `level`; throws InvalidArgument when `node` is not one.
int code_of(int level, double node);

/// Hierarchical basis of a new node: Lagrange polynomial over all nodes of
/// `level`, one at `node` and zero at every other node of that level.
double hier_basis_eval(int level, double node, double x);

/// out[c] = basis value at reference x for every code c < node_count(max_level).
void basis_values(int max_level, double x, std::span<double> out);

struct MultiIndex {
  std::vector<int> levels;

  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> l) : levels(std::move(l)) {}
  MultiIndex(std::initializer_list<int> l) : levels(l) {}
  static MultiIndex ones(std::size_t dim) { return MultiIndex(std::vector<int>(dim, 1)); }

  std::size_t size() const noexcept { return levels.size(); }
  int operator[](std::size_t d) const { return levels[d]; }
  int& operator[](std::size_t d) { return levels[d]; }
  int sum() const noexcept;
  int max() const noexcept;
  MultiIndex plus_unit(std::size_t d) const;
  MultiIndex minus_unit(std::size_t d) const;
  std::string str() const;

  friend auto operator<=>(const MultiIndex&, const MultiIndex&) = default;
  friend bool operator==(const MultiIndex&, const MultiIndex&) = default;
};

/// Tensor product of the new-node sets of each level of `idx`, as codes.
/// Within a point the codes are ordered by dimension; points are in
/// row-major order with the last dimension varying fastest.
std::vector<std::vector<std::int32_t>> tensor_new_codes(const MultiIndex& idx);
std::vector<std::vector<double>> tensor_new_points(const MultiIndex& idx);
std::size_t tensor_new_count(const MultiIndex& idx);

struct Interval {
  double lo = -1.0;
  double hi = 1.0;
  double width() const noexcept { return hi - lo; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Axis-aligned physical box with affine maps to and from [-1,1]^D.
/// A zero-width interval is allowed and maps to reference coordinate 0.
class BoxDomain {
public:
  BoxDomain() = default;
  explicit BoxDomain(std::vector<Interval> axes);
  static BoxDomain reference(std::size_t dim);

  std::size_t dimension() const noexcept { return axes_.size(); }
  const std::vector<Interval>& axes() const noexcept { return axes_; }
  const Interval& axis(std::size_t d) const { return axes_[d]; }

  double to_reference(std::size_t d, double x) const;
  double to_physical(std::size_t d, double r) const;
  std::vector<double> to_reference(std::span<const double> x) const;
  std::vector<double> to_physical(std::span<const double> r) const;
  bool contains(std::span<const double> x) const;

  friend bool operator==(const BoxDomain&, const BoxDomain&) = default;

private:
  std::vector<Interval> axes_;
};

struct HierarchicalPoint {
  MultiIndex index;
  std::vector<double> coords_ref;
  double surplus = 0.0;
};

/// Sparse-grid interpolant in hierarchical form: sum over collocation
/// points of surplus times the product of 1-D hierarchical bases.
///
/// Immutable between `add_index` calls; const members are thread-safe.
class SparseInterpolant {
public:
  SparseInterpolant() = default;
  explicit SparseInterpolant(BoxDomain domain);

  std::size_t dimension() const noexcept { return domain_.dimension(); }
  const BoxDomain& domain() const noexcept { return domain_; }
  const std::vector<MultiIndex>& index_set() const noexcept { return indices_; }
  bool contains_index(const MultiIndex& idx) const { return index_lookup_.count(idx) != 0; }
  std::size_t size() const noexcept { return surplus_.size(); }
  int max_level() const noexcept { return max_level_; }
  std::span<const double> surpluses() const noexcept { return surplus_; }

  HierarchicalPoint point(std::size_t p) const;
  std::vector<double> point_physical(std::size_t p) const;
  std::int32_t point_code(std::size_t p, std::size_t d) const { return codes_[d][p]; }
  /// Range [first, last) of points introduced by index-set entry k.
  std::pair<std::size_t, std::size_t> point_range(std::size_t k) const;

  /// Whether `idx` may be appended without breaking downward-closedness.
  bool admissible(const MultiIndex& idx) const;

  /// Append `idx`; `values[j]` is the model value at tensor_new_points(idx)[j].
  /// Returns the new surpluses in the same order.
  std::vector<double> add_index(const MultiIndex& idx, std::span<const double> values);

  /// Append a point with a known surplus (deserialization). Points of one
  /// index must arrive contiguously, indices in admissible order.
  void append_point(const MultiIndex& idx, std::span<const std::int32_t> codes, double surplus);

  double evaluate(std::span<const double> x_physical) const;
  double evaluate_reference(std::span<const double> x_ref) const;

  /// sum_p surplus_p * prod_d table[d * stride + code_{p,d}] for a caller
  /// supplied per-dimension table of basis functionals.
  double contract(std::span<const double> table, std::size_t stride) const;
  std::size_t table_stride() const noexcept;

  std::vector<std::string> parameter_names;

private:
  void register_index(const MultiIndex& idx);

  BoxDomain domain_;
  std::vector<MultiIndex> indices_;
  std::map<MultiIndex, std::size_t> index_lookup_;
  std::vector<std::size_t> index_first_point_;
  std::vector<std::vector<std::int32_t>> codes_;  // [dim][point]
  std::vector<double> surplus_;
  std::vector<std::uint32_t> point_index_;  // owning index-set entry
  std::set<std::vector<std::int32_t>> point_keys_;
  int max_level_ = 1;
};

/// Point values keyed by exact reference coordinates.
using PointValueMap = std::map<std::vector<double>, double>;

/// Copy of `itp` with `new_index` appended, surpluses taken from `evaluations`.
/// Throws IncompleteBatch when a required point is missing.
SparseInterpolant compute_surpluses(const SparseInterpolant& itp, const MultiIndex& new_index,
                                    const PointValueMap& evaluations);

/// Multi-indices with |i| <= k + D, ordered by |i| then lexicographically.
std::vector<MultiIndex> smolyak_indices(int k, std::size_t dim);

/// Collocation points (reference coordinates) of the level-k Smolyak grid.
std::vector<std::vector<double>> smolyak_grid(int k, std::size_t dim);

/// Non-adaptive level-k interpolant of `fn` (physical coordinates).
SparseInterpolant build_smolyak(int k, const BoxDomain& domain,
                                const std::function<double(std::span<const double>)>& fn);

}  // namespace boreuq::sg
