#include "boreuq/statistics.hpp"

#include "boreuq/error.hpp"
#include "boreuq/kernels.hpp"
#include "boreuq/parallel.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <ostream>

namespace boreuq::stats {

namespace {

constexpr std::size_t kBatch = 4096;

void check_dimension(const sg::SparseInterpolant& itp, const dist::ProductDistribution& dist) {
  if (itp.dimension() != dist.dimension()) {
    throw InvalidArgument(fmt::format("distribution has {} dimensions, interpolant has {}", dist.dimension(),
                                      itp.dimension()));
  }
}

bool close(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)}); }

void check_within(const sg::SparseInterpolant& itp, const dist::ProductDistribution& dist) {
  check_dimension(itp, dist);
  for (std::size_t d = 0; d < dist.dimension(); ++d) {
    const auto& ax = itp.domain().axis(d);
    const auto& rv = dist[d];
    if ((rv.a < ax.lo && !close(rv.a, ax.lo)) || (rv.b > ax.hi && !close(rv.b, ax.hi))) {
      throw InvalidArgument(fmt::format("dimension {}: support [{}, {}] exceeds interpolation domain [{}, {}]", d,
                                        rv.a, rv.b, ax.lo, ax.hi));
    }
  }
}

std::vector<double> expectation_tables(const sg::SparseInterpolant& itp, const dist::ProductDistribution& dist,
                                       std::size_t stride) {
  std::vector<double> table(stride * itp.dimension(), 0.0);
  for (std::size_t d = 0; d < itp.dimension(); ++d) {
    const auto e = dist::expectation_table(itp.max_level(), dist[d], itp.domain().axis(d));
    std::copy(e.begin(), e.end(), table.begin() + static_cast<std::ptrdiff_t>(d * stride));
  }
  return table;
}

double ipow(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

double sorted_quantile(const std::vector<double>& s, double p) {
  const double pos = p * static_cast<double>(s.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  if (i + 1 >= s.size()) return s.back();
  const double f = pos - static_cast<double>(i);
  return s[i] + f * (s[i + 1] - s[i]);
}

}  // namespace

double mean(const sg::SparseInterpolant& itp, const dist::ProductDistribution& dist) {
  check_dimension(itp, dist);
  for (std::size_t d = 0; d < dist.dimension(); ++d) {
    const auto& ax = itp.domain().axis(d);
    if (!close(dist[d].a, ax.lo) || !close(dist[d].b, ax.hi)) {
      throw InvalidArgument(fmt::format("dimension {}: support [{}, {}] does not match interpolation domain [{}, {}]",
                                        d, dist[d].a, dist[d].b, ax.lo, ax.hi));
    }
  }
  if (itp.size() == 0) return 0.0;
  const std::size_t stride = itp.table_stride();
  return itp.contract(expectation_tables(itp, dist, stride), stride);
}

std::vector<double> resample(const sg::SparseInterpolant& itp, const dist::ProductDistribution& alt,
                             std::size_t n, std::uint64_t seed, unsigned threads) {
  if (n < 1) throw InvalidArgument("resample count must be >= 1");
  check_within(itp, alt);
  std::vector<double> out(n);
  const std::size_t batches = (n + kBatch - 1) / kBatch;
  const auto& dom = itp.domain();
  parallel_for(batches, threads, [&](std::size_t b) {
    std::mt19937_64 gen(dist::derive_seed(seed, b));
    std::vector<double> x(alt.dimension());
    const std::size_t end = std::min(n, (b + 1) * kBatch);
    for (std::size_t i = b * kBatch; i < end; ++i) {
      dist::sample_into(alt, gen, x);
      // draws lie in the support by construction; clamp guards rounding
      for (std::size_t d = 0; d < x.size(); ++d) x[d] = std::clamp(x[d], dom.axis(d).lo, dom.axis(d).hi);
      out[i] = itp.evaluate(x);
    }
  });
  return out;
}

double moment(const sg::SparseInterpolant& itp, const dist::ProductDistribution& dist, int order,
              std::size_t n_mc, std::uint64_t seed, unsigned threads) {
  if (order < 2) throw InvalidArgument("moment order must be >= 2");
  const auto v = resample(itp, dist, n_mc, seed, threads);
  double s = 0.0;
  for (double x : v) s += ipow(x, order);
  return s / static_cast<double>(v.size());
}

double std_dev(const sg::SparseInterpolant& itp, const dist::ProductDistribution& dist, std::size_t n_mc,
               std::uint64_t seed, unsigned threads) {
  return std_about(resample(itp, dist, n_mc, seed, threads), mean(itp, dist));
}

double std_about(std::span<const double> samples, double mu) {
  if (samples.empty()) throw InsufficientData("std_about: no samples");
  double s = 0.0;
  for (double v : samples) s += (v - mu) * (v - mu);
  return std::sqrt(s / static_cast<double>(samples.size()));
}

std::vector<double> marginal(const sg::SparseInterpolant& itp, const dist::ProductDistribution& dist,
                             std::span<const std::size_t> keep, const std::vector<std::vector<double>>& axes) {
  check_within(itp, dist);
  if (keep.size() != axes.size()) throw InvalidArgument("marginal: one axis per kept dimension required");
  for (std::size_t i = 0; i < keep.size(); ++i) {
    if (keep[i] >= itp.dimension()) throw InvalidArgument("marginal: kept dimension out of range");
    for (std::size_t j = 0; j < i; ++j) {
      if (keep[i] == keep[j]) throw InvalidArgument("marginal: kept dimensions must be distinct");
    }
    if (axes[i].empty()) throw InvalidArgument("marginal: empty axis");
  }
  std::size_t total = 1;
  for (const auto& a : axes) total *= a.size();
  if (itp.size() == 0) return std::vector<double>(total, 0.0);

  const std::size_t stride = itp.table_stride();
  auto table = expectation_tables(itp, dist, stride);
  // basis values of every tick of every kept axis, precomputed
  std::vector<std::vector<double>> tick_vals(keep.size());
  for (std::size_t k = 0; k < keep.size(); ++k) {
    tick_vals[k].resize(axes[k].size() * stride);
    for (std::size_t t = 0; t < axes[k].size(); ++t) {
      const double r = itp.domain().to_reference(keep[k], axes[k][t]);
      sg::basis_values(itp.max_level(), r, std::span<double>(tick_vals[k].data() + t * stride, stride));
    }
  }
  std::vector<double> out(total);
  std::vector<std::size_t> pos(keep.size(), 0);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rem = flat;
    for (std::size_t k = keep.size(); k-- > 0;) {
      pos[k] = rem % axes[k].size();
      rem /= axes[k].size();
    }
    for (std::size_t k = 0; k < keep.size(); ++k) {
      std::copy_n(tick_vals[k].begin() + static_cast<std::ptrdiff_t>(pos[k] * stride), stride,
                  table.begin() + static_cast<std::ptrdiff_t>(keep[k] * stride));
    }
    out[flat] = itp.contract(table, stride);
  }
  return out;
}

Surface Surface::percent_of(double reference) const {
  if (reference == 0.0) throw InvalidArgument("percent deviation needs a nonzero reference");
  Surface s = *this;
  for (double& v : s.values) v = 100.0 * (v - reference) / std::abs(reference);
  return s;
}

Surface marginal_surface(const sg::SparseInterpolant& itp, const dist::ProductDistribution& dist,
                         std::pair<std::size_t, std::size_t> keep, std::vector<double> axis0,
                         std::vector<double> axis1) {
  Surface s;
  s.dim0 = keep.first;
  s.dim1 = keep.second;
  const std::size_t k[2] = {keep.first, keep.second};
  s.values = marginal(itp, dist, k, {axis0, axis1});
  s.axis0 = std::move(axis0);
  s.axis1 = std::move(axis1);
  return s;
}

Surface marginal_surface(const sg::SparseInterpolant& itp, const dist::ProductDistribution& dist,
                         std::pair<std::size_t, std::size_t> keep, std::size_t resolution) {
  if (resolution < 2) throw InvalidArgument("marginal surface resolution must be >= 2");
  check_dimension(itp, dist);
  if (keep.first >= dist.dimension() || keep.second >= dist.dimension()) {
    throw InvalidArgument("marginal: kept dimension out of range");
  }
  auto ticks = [&](std::size_t d) {
    std::vector<double> t(resolution);
    const double a = dist[d].a, b = dist[d].b;
    for (std::size_t i = 0; i < resolution; ++i) {
      t[i] = i + 1 == resolution ? b : a + (b - a) * static_cast<double>(i) / static_cast<double>(resolution - 1);
    }
    return t;
  };
  return marginal_surface(itp, dist, keep, ticks(keep.first), ticks(keep.second));
}

void write_surface_csv(std::ostream& os, const Surface& s) {
  os << fmt::format("x{},x{},value\n", s.dim0, s.dim1);
  for (std::size_t i = 0; i < s.axis0.size(); ++i) {
    for (std::size_t j = 0; j < s.axis1.size(); ++j) {
      os << fmt::format("{},{},{}\n", s.axis0[i], s.axis1[j], s.at(i, j));
    }
  }
}

// ---------------------------------------------------------------------------

Kde::Kde(std::vector<double> samples, std::optional<double> bandwidth) : samples_(std::move(samples)) {
  if (samples_.size() < 100) {
    throw InsufficientData(fmt::format("density estimate needs at least 100 samples, got {}", samples_.size()));
  }
  for (double v : samples_) {
    if (!std::isfinite(v)) throw InvalidArgument("density estimate: non-finite sample");
  }
  std::sort(samples_.begin(), samples_.end());
  const double n = static_cast<double>(samples_.size());
  mean_ = std::accumulate(samples_.begin(), samples_.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : samples_) ss += (v - mean_) * (v - mean_);
  std_ = std::sqrt(ss / (n - 1.0));
  if (bandwidth) {
    if (!(*bandwidth > 0.0)) throw InvalidArgument("bandwidth must be > 0");
    h_ = *bandwidth;
  } else if (std_ > 0.0) {
    h_ = 1.06 * std_ * std::pow(n, -0.2);
  } else {
    // all samples equal: a narrow bump at the common value
    h_ = 1e-6 * std::max(1.0, std::abs(mean_));
  }
}

double Kde::pdf(double x) const {
  const double q[1] = {x};
  return pdf(q)[0];
}

std::vector<double> Kde::pdf(std::span<const double> xs) const {
  std::vector<double> out(xs.size());
  kernels::active().gauss_sum(samples_, xs, h_, out);
  const double scale = 1.0 / (static_cast<double>(samples_.size()) * h_ * std::sqrt(2.0 * std::numbers::pi));
  for (double& v : out) v *= scale;
  return out;
}

double Kde::cdf(double x) const {
  // samples further than 9 bandwidths away contribute exactly 0 or 1
  const double w = 9.0 * h_;
  const auto lo = std::lower_bound(samples_.begin(), samples_.end(), x - w);
  const auto hi = std::upper_bound(lo, samples_.end(), x + w);
  double s = static_cast<double>(lo - samples_.begin());
  const double inv = 1.0 / (h_ * std::numbers::sqrt2);
  for (auto it = lo; it != hi; ++it) s += 0.5 * std::erfc((*it - x) * inv);
  return s / static_cast<double>(samples_.size());
}

std::vector<double> Kde::covering_grid(std::size_t n) const {
  if (n < 2) throw InvalidArgument("grid needs at least 2 points");
  const double a = samples_.front() - 6.0 * h_, b = samples_.back() + 6.0 * h_;
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  return g;
}

void write_density_csv(std::ostream& os, const Kde& kde, std::size_t n) {
  const auto g = kde.covering_grid(n);
  const auto p = kde.pdf(g);
  os << "value,density\n";
  for (std::size_t i = 0; i < g.size(); ++i) os << fmt::format("{},{}\n", g[i], p[i]);
}

double empirical_quantile(std::vector<double> samples, double p) {
  if (samples.empty()) throw InsufficientData("quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("quantile level must lie in [0, 1]");
  std::sort(samples.begin(), samples.end());
  return sorted_quantile(samples, p);
}

double quantile_lower_bound(const Kde& kde, double confidence) {
  if (!(confidence > 0.0 && confidence < 1.0)) throw InvalidArgument("confidence must lie in (0, 1)");
  const auto& s = kde.samples();
  if (s.front() == s.back()) return s.front();
  const double target = 1.0 - confidence;
  double lo = s.front() - 10.0 * kde.bandwidth();
  double hi = s.back() + 10.0 * kde.bandwidth();
  for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, std::abs(lo) + std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (kde.cdf(mid) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

LowerBound quantile_lower_bound_checked(const Kde& kde, double confidence) {
  LowerBound r;
  r.value = quantile_lower_bound(kde, confidence);
  r.empirical = sorted_quantile(kde.samples(), 1.0 - confidence);
  const double tol = kde.sample_std() > 0.0 ? 0.01 * kde.sample_std() : 1e-9 * std::max(1.0, std::abs(r.empirical));
  r.consistent = std::abs(r.value - r.empirical) <= tol;
  return r;
}

LowerBound quantile_lower_bound(std::span<const double> samples, double confidence) {
  return quantile_lower_bound_checked(Kde(std::vector<double>(samples.begin(), samples.end())), confidence);
}

double cop(double t_avg, double t_ref) {
  if (!(t_ref > t_avg)) throw InvalidArgument("COP needs T_ref > T_avg");
  return (t_ref + 273.15) / (t_ref - t_avg);
}

}  // namespace boreuq::stats
