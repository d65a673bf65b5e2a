#pragma once

// Moments, marginals, resampling, kernel density estimates and lower
// confidence bounds computed on a sparse-grid interpolant.

#include "boreuq/distributions.hpp"
#include "boreuq/sparse_grid.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace boreuq::stats {

/// Exact expectation of the interpolant: sum of surplus times the product
/// of per-dimension basis expectations.
double mean(const sg::SparseInterpolant& itp, const dist::ProductDistribution& dist);

/// E[u^order] by Monte Carlo on the interpolant.
double moment(const sg::SparseInterpolant& itp, const dist::ProductDistribution& dist, int order,
              std::size_t n_mc, std::uint64_t seed, unsigned threads = 1);

/// Monte Carlo second moment about the exact mean. Centring first keeps
/// the estimate positive when the spread is tiny next to the mean.
double std_dev(const sg::SparseInterpolant& itp, const dist::ProductDistribution& dist, std::size_t n_mc,
               std::uint64_t seed, unsigned threads = 1);

/// sqrt(mean((x - mu)^2)).
double std_about(std::span<const double> samples, double mu);

/// Expectation over every dimension not in `keep`, evaluated on the tensor
/// grid spanned by `axes` (physical coordinates, one axis per kept dim).
/// Values are row-major with the last kept dimension varying fastest.
std::vector<double> marginal(const sg::SparseInterpolant& itp, const dist::ProductDistribution& dist,
                             std::span<const std::size_t> keep, const std::vector<std::vector<double>>& axes);

struct Surface {
  std::size_t dim0 = 0, dim1 = 0;
  std::vector<double> axis0, axis1;
  std::vector<double> values;  // axis0.size() x axis1.size()

  double at(std::size_t i, std::size_t j) const { return values[i * axis1.size() + j]; }
  /// Same surface as percent deviation from `reference`.
  Surface percent_of(double reference) const;
};

/// Two-dimensional marginal on `resolution` equispaced ticks per kept axis,
/// spanning the distribution's support.
Surface marginal_surface(const sg::SparseInterpolant& itp, const dist::ProductDistribution& dist,
                         std::pair<std::size_t, std::size_t> keep, std::size_t resolution);
Surface marginal_surface(const sg::SparseInterpolant& itp, const dist::ProductDistribution& dist,
                         std::pair<std::size_t, std::size_t> keep, std::vector<double> axis0,
                         std::vector<double> axis1);

void write_surface_csv(std::ostream& os, const Surface& s);

/// Interpolant values at n draws from `alt`. Draws come in fixed-size
/// batches, each with its own seed derived from `seed`, so the result does
/// not depend on the thread count.
std::vector<double> resample(const sg::SparseInterpolant& itp, const dist::ProductDistribution& alt,
                             std::size_t n, std::uint64_t seed, unsigned threads = 1);

/// Gaussian kernel density estimate.
class Kde {
public:
  /// Bandwidth defaults to 1.06 * sigma * n^(-1/5).
  explicit Kde(std::vector<double> samples, std::optional<double> bandwidth = std::nullopt);

  double bandwidth() const noexcept { return h_; }
  std::size_t size() const noexcept { return samples_.size(); }
  const std::vector<double>& samples() const noexcept { return samples_; }  // sorted
  double sample_mean() const noexcept { return mean_; }
  double sample_std() const noexcept { return std_; }

  double pdf(double x) const;
  std::vector<double> pdf(std::span<const double> xs) const;
  double cdf(double x) const;

  /// `n` equispaced points covering every sample by at least 6 bandwidths.
  std::vector<double> covering_grid(std::size_t n = 512) const;

private:
  std::vector<double> samples_;
  double h_ = 0.0;
  double mean_ = 0.0;
  double std_ = 0.0;
};

void write_density_csv(std::ostream& os, const Kde& kde, std::size_t n = 512);

/// Linear-interpolated empirical p-quantile.
double empirical_quantile(std::vector<double> samples, double p);

/// T with P(u > T) = confidence under the KDE, by bisection on its CDF.
double quantile_lower_bound(const Kde& kde, double confidence);

struct LowerBound {
  double value = 0.0;      // from the KDE
  double empirical = 0.0;  // (1 - confidence) sample quantile
  bool consistent = true;  // |value - empirical| <= 1% of sample std
};

LowerBound quantile_lower_bound(std::span<const double> samples, double confidence);
LowerBound quantile_lower_bound_checked(const Kde& kde, double confidence);

/// Heat pump coefficient of performance for brine temperature `t_avg` and
/// supply temperature `t_ref`, both in Celsius.
double cop(double t_avg, double t_ref);

}  // namespace boreuq::stats
