#include "boreuq/soil.hpp"

#include "boreuq/error.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace boreuq::soil {

namespace {

double line_integral(const geo::Vec3& p, const geo::BoreholeSegment& seg, double c) {
  const geo::Vec3 axis = seg.bottom - seg.top;
  const double L = axis.norm();
  const geo::Vec3 u = axis * (1.0 / L);
  const geo::Vec3 rel = p - seg.top;
  const double s0 = rel.dot(u);
  const geo::Vec3 cr{rel.y * u.z - rel.z * u.y, rel.z * u.x - rel.x * u.z, rel.x * u.y - rel.y * u.x};
  const double d = cr.norm();
  // s - s0 = d sinh(v) turns ds / r into dv and leaves a smooth integrand
  auto f = [&](double v) { return std::erfc(d * std::cosh(v) / c); };
  const double v0 = std::asinh(-s0 / d);
  const double v1 = std::asinh((L - s0) / d);
  using GK = boost::math::quadrature::gauss_kronrod<double, 21>;
  // GK's error floor does not shrink with the panel width, so panels much
  // narrower than 2 eps / tol never converge; keep bisection above that
  // width and treat slivers with one panel
  constexpr double tol = 1e-10;
  auto piece = [&](double a, double b) {
    if (b - a < 1e-3) return GK::integrate(f, a, b, 0, tol);
    return GK::integrate(f, a, b, 15, tol);
  };
  double s = 0.0;
  if (v0 < 0.0 && v1 > 0.0) {
    s = piece(v0, 0.0) + piece(0.0, v1);
  } else {
    s = piece(v0, v1);
  }
  return s;
}

geo::BoreholeSegment mirrored(const geo::BoreholeSegment& s) {
  return {{s.top.x, s.top.y, -s.top.z}, {s.bottom.x, s.bottom.y, -s.bottom.z}};
}

}  // namespace

void SoilParams::validate() const {
  if (!(conductivity > 0.0) || !(fluid_density > 0.0) || !(fluid_heat_capacity > 0.0) || !(solid_capacity > 0.0)) {
    throw InvalidArgument("soil conductivity and heat capacities must be > 0");
  }
  if (!(porosity >= 0.0 && porosity < 1.0)) throw InvalidArgument("porosity must lie in [0, 1)");
  if (!std::isfinite(surface_temperature) || !std::isfinite(gradient)) {
    throw InvalidArgument("surface temperature and gradient must be finite");
  }
}

double SoilParams::capacity() const {
  return porosity * fluid_density * fluid_heat_capacity + (1.0 - porosity) * solid_capacity;
}

double SoilParams::diffusivity() const { return conductivity / capacity(); }

double fls_kernel(const geo::Vec3& target, const geo::BoreholeSegment& seg, double t_elapsed,
                  const SoilParams& soil) {
  if (!(t_elapsed > 0.0)) throw InvalidArgument("line source response needs t > 0");
  const double L = seg.length();
  if (!(L > 0.0)) throw InvalidArgument("degenerate source segment");
  const geo::BoreholeSegment point_seg{target, target};
  const double d = geo::segment_min_distance(point_seg, seg);
  if (d <= 1e-9 * std::max(1.0, L)) {
    throw SingularEvaluation(fmt::format("target ({}, {}, {}) lies on the source axis", target.x, target.y, target.z));
  }
  const double c = 2.0 * std::sqrt(soil.diffusivity() * t_elapsed);
  double v = line_integral(target, seg, c);
  if (soil.image_source) v -= line_integral(target, mirrored(seg), c);
  return v / (4.0 * std::numbers::pi * soil.conductivity);
}

std::vector<geo::Vec3> wall_stations(const geo::BoreholeSegment& seg, double radius, std::size_t n_z) {
  if (n_z < 2) throw InvalidArgument("need at least 2 wall stations");
  const geo::Vec3 axis = seg.bottom - seg.top;
  const double L = axis.norm();
  const geo::Vec3 u = axis * (1.0 / L);
  const double hx = u.x, hy = u.y;
  const double hn = std::hypot(hx, hy);
  geo::Vec3 off{radius, 0.0, 0.0};
  if (hn > 1e-12) off = {-hy / hn * radius, hx / hn * radius, 0.0};
  std::vector<geo::Vec3> pts(n_z);
  for (std::size_t k = 0; k < n_z; ++k) {
    const double s = L * static_cast<double>(k) / static_cast<double>(n_z - 1);
    pts[k] = seg.top + u * s + off;
  }
  return pts;
}

void LoadHistory::validate() const {
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const auto& st = steps[i];
    for (std::size_t k = 0; k < st.size(); ++k) {
      if (!(st[k].end > st[k].start)) throw InvalidArgument(fmt::format("BHE {} step {}: end <= start", i, k));
      if (k > 0 && std::abs(st[k].start - st[k - 1].end) > 1e-9 * std::max(1.0, st[k].start)) {
        throw InvalidArgument(fmt::format("BHE {} step {}: steps must be contiguous", i, k));
      }
    }
  }
}

trcm::WallProfile wall_temperature(std::size_t bhe, const std::vector<geo::BoreholeSegment>& segments,
                                   const LoadHistory& history, double t, const SoilParams& soil, std::size_t n_z,
                                   double radius) {
  if (bhe >= segments.size()) throw InvalidArgument("BHE index out of range");
  if (!history.steps.empty() && history.steps.size() != segments.size()) {
    throw InvalidArgument("load history must have one step sequence per BHE");
  }
  history.validate();
  soil.validate();
  const auto pts = wall_stations(segments[bhe], radius, n_z);
  trcm::WallProfile w;
  w.length = segments[bhe].length();
  w.temps.resize(n_z);
  for (std::size_t k = 0; k < n_z; ++k) w.temps[k] = soil.undisturbed(-pts[k].z);
  for (std::size_t j = 0; j < history.steps.size(); ++j) {
    double prev = 0.0;
    for (const auto& step : history.steps[j]) {
      if (step.start >= t) break;
      const double dq = step.q - prev;
      prev = step.q;
      if (dq == 0.0) continue;
      for (std::size_t k = 0; k < n_z; ++k) w.temps[k] -= dq * fls_kernel(pts[k], segments[j], t - step.start, soil);
    }
  }
  return w;
}

ResponseCache::ResponseCache(std::vector<geo::BoreholeSegment> segments, const SoilParams& soil, std::size_t n_z,
                             double radius, double period_seconds, std::size_t max_periods)
    : segs_(std::move(segments)), soil_(soil), n_z_(n_z), period_(period_seconds), max_periods_(max_periods) {
  soil_.validate();
  if (segs_.empty()) throw InvalidArgument("response cache needs at least one BHE");
  if (!(period_seconds > 0.0) || max_periods == 0) throw InvalidArgument("period and horizon must be positive");
  for (const auto& s : segs_) {
    stations_.push_back(wall_stations(s, radius, n_z));
    std::vector<double> b(n_z);
    for (std::size_t k = 0; k < n_z; ++k) b[k] = soil_.undisturbed(-stations_.back()[k].z);
    base_.push_back(std::move(b));
  }
  const std::size_t n = segs_.size();
  memo_.assign(n * n_z * n * max_periods, 0.0);
  have_.assign(memo_.size(), 0);
}

double ResponseCache::kernel(std::size_t i, std::size_t k, std::size_t j, std::size_t lag) {
  const std::size_t n = segs_.size();
  if (i >= n || j >= n || k >= n_z_ || lag >= max_periods_) throw InvalidArgument("response cache index out of range");
  const std::size_t slot = ((i * n_z_ + k) * n + j) * max_periods_ + lag;
  {
    std::lock_guard lock(mutex_);
    if (have_[slot]) return memo_[slot];
  }
  const double v = fls_kernel(stations_[i][k], segs_[j], (static_cast<double>(lag) + 0.5) * period_, soil_);
  std::lock_guard lock(mutex_);
  memo_[slot] = v;
  have_[slot] = 1;
  return v;
}

std::vector<double> ResponseCache::kernel_column(std::size_t i, std::size_t j, std::size_t lag) {
  std::vector<double> out(n_z_);
  for (std::size_t k = 0; k < n_z_; ++k) out[k] = kernel(i, k, j, lag);
  return out;
}

trcm::WallProfile ResponseCache::wall(std::size_t i, const std::vector<std::vector<double>>& q, std::size_t p) {
  if (p >= max_periods_ || q.size() <= p) throw InvalidArgument("load period out of range");
  const std::size_t n = segs_.size();
  trcm::WallProfile w;
  w.length = segs_[i].length();
  w.temps = base_[i];
  for (std::size_t j = 0; j < n; ++j) {
    double prev = 0.0;
    for (std::size_t s = 0; s <= p; ++s) {
      const double dq = q[s][j] - prev;
      prev = q[s][j];
      if (dq == 0.0) continue;
      for (std::size_t k = 0; k < n_z_; ++k) w.temps[k] -= dq * kernel(i, k, j, p - s);
    }
  }
  return w;
}

}  // namespace boreuq::soil
