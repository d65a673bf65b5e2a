#include "boreuq/distributions.hpp"

#include "boreuq/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace boreuq::dist {

std::string to_string(Kind k) { return k == Kind::uniform ? "uniform" : "triangular"; }

Kind kind_from_string(const std::string& s) {
  if (s == "uniform") return Kind::uniform;
  if (s == "triangular") return Kind::triangular;
  throw InvalidArgument("unknown distribution kind '" + s + "' (expected uniform or triangular)");
}

RandomVariableSpec RandomVariableSpec::uniform(double a, double b) {
  RandomVariableSpec r{Kind::uniform, a, b};
  r.validate();
  return r;
}

RandomVariableSpec RandomVariableSpec::triangular(double a, double b) {
  RandomVariableSpec r{Kind::triangular, a, b};
  r.validate();
  return r;
}

void RandomVariableSpec::validate() const {
  if (!(a < b) || !std::isfinite(a) || !std::isfinite(b)) {
    throw InvalidArgument("distribution support needs finite a < b");
  }
}

double RandomVariableSpec::pdf(double x) const {
  if (x < a || x > b) return 0.0;
  const double w = b - a;
  if (kind == Kind::uniform) return 1.0 / w;
  const double half = 0.5 * w;
  const double mid = a + half;
  return (half - std::abs(x - mid)) / (half * half);
}

double RandomVariableSpec::cdf(double x) const {
  if (x <= a) return 0.0;
  if (x >= b) return 1.0;
  const double w = b - a;
  if (kind == Kind::uniform) return (x - a) / w;
  const double half = 0.5 * w;
  const double mid = a + half;
  if (x <= mid) {
    const double t = (x - a) / half;
    return 0.5 * t * t;
  }
  const double t = (b - x) / half;
  return 1.0 - 0.5 * t * t;
}

double RandomVariableSpec::inverse_cdf(double u) const {
  u = std::clamp(u, 0.0, 1.0);
  const double w = b - a;
  if (kind == Kind::uniform) return a + u * w;
  const double half = 0.5 * w;
  if (u < 0.5) return a + half * std::sqrt(2.0 * u);
  return b - half * std::sqrt(2.0 * (1.0 - u));
}

double RandomVariableSpec::mean() const { return 0.5 * (a + b); }

double RandomVariableSpec::variance() const {
  const double w = b - a;
  return kind == Kind::uniform ? w * w / 12.0 : w * w / 24.0;
}

std::vector<double> RandomVariableSpec::breakpoints() const {
  if (kind == Kind::uniform) return {a, b};
  return {a, 0.5 * (a + b), b};
}

double pdf_eval(const RandomVariableSpec& rv, double x) { return rv.pdf(x); }

ProductDistribution::ProductDistribution(std::vector<RandomVariableSpec> dims) : dims_(std::move(dims)) {
  for (const auto& d : dims_) d.validate();
}

sg::BoxDomain ProductDistribution::support_box() const {
  std::vector<sg::Interval> axes;
  axes.reserve(dims_.size());
  for (const auto& d : dims_) axes.push_back(d.support());
  return sg::BoxDomain(std::move(axes));
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  // splitmix64 finalizer over a stream-offset state
  std::uint64_t z = master + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

void sample_into(const ProductDistribution& dist, std::mt19937_64& gen, std::span<double> point) {
  for (std::size_t d = 0; d < dist.dimension(); ++d) point[d] = dist[d].inverse_cdf(uniform01(gen));
}

std::vector<std::vector<double>> sample(const ProductDistribution& dist, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw InvalidArgument("sample count must be >= 1");
  std::mt19937_64 gen(seed);
  std::vector<std::vector<double>> out(n, std::vector<double>(dist.dimension()));
  for (auto& p : out) sample_into(dist, gen, p);
  return out;
}

std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
  if (n < 1) throw InvalidArgument("Gauss-Legendre order must be >= 1");
  std::vector<double> x(n), w(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 1; k <= n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    // recompute derivative at the converged root
    double p0 = 1.0, p1 = 0.0;
    for (int k = 1; k <= n; ++k) {
      const double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
    }
    dp = n * (z * p0 - p1) / (z * z - 1.0);
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  if (n % 2 == 1) x[n / 2] = 0.0;
  return {x, w};
}

std::vector<double> expectation_table(int max_level, const RandomVariableSpec& rv, const sg::Interval& axis) {
  rv.validate();
  const double slack = 1e-12 * std::max({1.0, std::abs(axis.lo), std::abs(axis.hi)});
  if (rv.a < axis.lo - slack || rv.b > axis.hi + slack) {
    throw InvalidArgument("distribution support exceeds interpolation domain");
  }
  const int m = sg::node_count(max_level);
  const int order = (m + 1) / 2 + 1;
  const auto [gx, gw] = gauss_legendre(order);
  const sg::BoxDomain box({axis});
  std::vector<double> table(static_cast<std::size_t>(m), 0.0);
  std::vector<double> vals(static_cast<std::size_t>(m));
  const auto bp = rv.breakpoints();
  for (std::size_t piece = 0; piece + 1 < bp.size(); ++piece) {
    const double lo = bp[piece], hi = bp[piece + 1];
    const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
    for (int q = 0; q < order; ++q) {
      const double x = mid + half * gx[q];
      // pdf is linear on the piece; evaluate at the interior point
      const double wq = gw[q] * half * rv.pdf(x);
      sg::basis_values(max_level, box.to_reference(0, std::clamp(x, axis.lo, axis.hi)), vals);
      for (int c = 0; c < m; ++c) table[c] += wq * vals[c];
    }
  }
  return table;
}

double basis_expectation(int level, double node, const RandomVariableSpec& rv, const sg::Interval& axis) {
  const int code = sg::code_of(level, node);
  return expectation_table(level, rv, axis)[code];
}

double basis_expectation(int level, double node, const RandomVariableSpec& rv) {
  return basis_expectation(level, node, rv, rv.support());
}

}  // namespace boreuq::dist
