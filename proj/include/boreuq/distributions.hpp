#pragma once

// Bounded input distributions and exact expectations of hierarchical bases.

#include "boreuq/sparse_grid.hpp"

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace boreuq::dist {

enum class Kind { uniform, triangular };

std::string to_string(Kind k);
Kind kind_from_string(const std::string& s);

/// Uniform or symmetric triangular density on [a, b].
struct RandomVariableSpec {
  Kind kind = Kind::uniform;
  double a = 0.0;
  double b = 1.0;

  static RandomVariableSpec uniform(double a, double b);
  static RandomVariableSpec triangular(double a, double b);

  void validate() const;
  double pdf(double x) const;
  double cdf(double x) const;
  double inverse_cdf(double u) const;
  double mean() const;
  double variance() const;
  sg::Interval support() const { return {a, b}; }
  /// Breakpoints of the piecewise-polynomial density, including a and b.
  std::vector<double> breakpoints() const;

  friend bool operator==(const RandomVariableSpec&, const RandomVariableSpec&) = default;
};

double pdf_eval(const RandomVariableSpec& rv, double x);

/// Independent product of per-dimension distributions.
class ProductDistribution {
public:
  ProductDistribution() = default;
  explicit ProductDistribution(std::vector<RandomVariableSpec> dims);

  std::size_t dimension() const noexcept { return dims_.size(); }
  const RandomVariableSpec& operator[](std::size_t d) const { return dims_[d]; }
  const std::vector<RandomVariableSpec>& dims() const noexcept { return dims_; }
  sg::BoxDomain support_box() const;

private:
  std::vector<RandomVariableSpec> dims_;
};

/// Portable [0,1) double from a 64-bit engine (53 random bits).
inline double uniform01(std::mt19937_64& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

/// Independent stream seed for batch `stream` of a run seeded with `master`.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

/// Draw one point per row by inverse CDF, dimension by dimension.
void sample_into(const ProductDistribution& dist, std::mt19937_64& gen, std::span<double> point);

/// n points (row-major, n x D); identical for identical seeds.
std::vector<std::vector<double>> sample(const ProductDistribution& dist, std::size_t n, std::uint64_t seed);

/// Gauss-Legendre nodes and weights on [-1, 1].
std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n);

/// E[L(x)] for the hierarchical basis of (level, node) under `rv`, where the
/// basis lives on reference coordinates of `axis` (defaults to rv's support).
double basis_expectation(int level, double node, const RandomVariableSpec& rv);
double basis_expectation(int level, double node, const RandomVariableSpec& rv, const sg::Interval& axis);

/// Expectations for every node code below node_count(max_level).
std::vector<double> expectation_table(int max_level, const RandomVariableSpec& rv, const sg::Interval& axis);

}  // namespace boreuq::dist
