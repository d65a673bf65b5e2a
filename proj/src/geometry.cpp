#include "boreuq/geometry.hpp"

#include "boreuq/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

namespace boreuq::geo {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

BoreholeSegment make_segment(const ArrayLayout& layout, std::size_t i, double azimuth, double inclination) {
  const Vec2 c = layout.collars[i];
  const Vec2 h = rotate_azimuth(layout.ref_dirs[i], azimuth);
  const double sb = std::sin(inclination * kDeg), cb = std::cos(inclination * kDeg);
  const double L = layout.bhe_length;
  return {{c.x, c.y, 0.0}, {c.x + L * sb * h.x, c.y + L * sb * h.y, -L * cb}};
}

// Trial azimuth changes in the order +1, -1, +2, -2, ..., +180.
std::vector<double> trial_changes() {
  std::vector<double> v;
  for (int step = 1; step < 180; ++step) {
    v.push_back(step);
    v.push_back(-step);
  }
  v.push_back(180.0);
  return v;
}

}  // namespace

double Vec3::norm() const { return std::sqrt(dot(*this)); }

void ArrayLayout::validate() const {
  if (collars.empty()) throw InvalidArgument("layout has no BHEs");
  if (ref_dirs.size() != collars.size()) throw InvalidArgument("layout needs one reference direction per collar");
  if (!(bhe_length > 0.0)) throw InvalidArgument("BHE length must be > 0");
  for (const auto& d : ref_dirs) {
    if (std::abs(std::hypot(d.x, d.y) - 1.0) > 1e-9) throw InvalidArgument("reference direction is not unit length");
  }
  for (std::size_t i = 0; i < collars.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (collars[i].x == collars[j].x && collars[i].y == collars[j].y) {
        throw InvalidArgument(fmt::format("collars {} and {} coincide", j, i));
      }
    }
  }
}

ArrayLayout ArrayLayout::square_grid(int g, double spacing, double length, Vec2 ref_dir, std::string label) {
  if (g < 1) throw InvalidArgument("grid size must be >= 1");
  if (!(spacing > 0.0)) throw InvalidArgument("grid spacing must be > 0");
  ArrayLayout l;
  const double off = 0.5 * spacing * (g - 1);
  for (int r = 0; r < g; ++r) {
    for (int c = 0; c < g; ++c) {
      l.collars.push_back({c * spacing - off, r * spacing - off});
      l.ref_dirs.push_back(ref_dir);
    }
  }
  l.bhe_length = length;
  l.extent = std::move(label);
  l.validate();
  return l;
}

DeviationParams DeviationParams::vertical(std::size_t n) {
  return {std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
}

Vec3 BoreholeSegment::direction() const {
  const Vec3 d = bottom - top;
  return d * (1.0 / d.norm());
}

Vec2 rotate_azimuth(Vec2 d, double alpha_deg) {
  const double a = alpha_deg * kDeg;
  const double c = std::cos(a), s = std::sin(a);
  return {c * d.x + s * d.y, -s * d.x + c * d.y};
}

std::vector<BoreholeSegment> realize_geometry(const ArrayLayout& layout, const DeviationParams& params) {
  if (params.azimuth_deg.size() != layout.size() || params.inclination_deg.size() != layout.size()) {
    throw InvalidArgument("deviation parameters must give one azimuth and inclination per BHE");
  }
  std::vector<BoreholeSegment> segs;
  segs.reserve(layout.size());
  for (std::size_t i = 0; i < layout.size(); ++i) {
    const double b = params.inclination_deg[i];
    if (!std::isfinite(params.azimuth_deg[i]) || !std::isfinite(b) || b < 0.0 || b >= 90.0) {
      throw InvalidArgument(fmt::format("BHE {}: inclination {} outside [0, 90)", i, b));
    }
    segs.push_back(make_segment(layout, i, params.azimuth_deg[i], b));
  }
  return segs;
}

double segment_min_distance(const BoreholeSegment& s1, const BoreholeSegment& s2) {
  // closest points of two segments, clamped parameterisation
  const Vec3 d1 = s1.bottom - s1.top, d2 = s2.bottom - s2.top, r = s1.top - s2.top;
  const double a = d1.dot(d1), e = d2.dot(d2), f = d2.dot(r);
  constexpr double eps = 1e-18;
  double s = 0.0, t = 0.0;
  if (a <= eps && e <= eps) return r.norm();
  if (a <= eps) {
    t = std::clamp(f / e, 0.0, 1.0);
  } else {
    const double c = d1.dot(r);
    if (e <= eps) {
      s = std::clamp(-c / a, 0.0, 1.0);
    } else {
      const double b = d1.dot(d2);
      const double denom = a * e - b * b;
      s = denom > eps * a * e ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
      t = (b * s + f) / e;
      if (t < 0.0) {
        t = 0.0;
        s = std::clamp(-c / a, 0.0, 1.0);
      } else if (t > 1.0) {
        t = 1.0;
        s = std::clamp((b - c) / a, 0.0, 1.0);
      }
    }
  }
  const Vec3 p = s1.top + d1 * s, q = s2.top + d2 * t;
  return (p - q).norm();
}

double min_pairwise_distance(const std::vector<BoreholeSegment>& segs) {
  double m = INFINITY;
  for (std::size_t i = 0; i < segs.size(); ++i) {
    for (std::size_t j = i + 1; j < segs.size(); ++j) m = std::min(m, segment_min_distance(segs[i], segs[j]));
  }
  return m;
}

bool CorrectedGeometry::corrected(std::size_t bhe) const {
  return std::any_of(report.begin(), report.end(), [&](const AzimuthChange& c) { return c.bhe == bhe; });
}

CorrectedGeometry correct_geometry(const std::vector<BoreholeSegment>& segments, double d_min,
                                   const ArrayLayout& layout, const DeviationParams& params) {
  if (!(d_min > 0.0)) throw InvalidArgument("minimum distance must be > 0");
  if (segments.size() != layout.size() || params.size() != layout.size()) {
    throw InvalidArgument("segments, layout and parameters disagree in BHE count");
  }
  CorrectedGeometry out{segments, params, {}};
  const std::size_t n = layout.size();
  std::vector<double> delta(n, 0.0);
  auto vertical = [&](std::size_t j) { return !(out.params.inclination_deg[j] > 0.0); };
  // BHEs fixed while r is placed: lower indices (final) and vertical ones
  auto fixed_for = [&](std::size_t r) { return [&, r](std::size_t j) { return j < r || vertical(j); }; };
  auto clashes = [&](const std::vector<BoreholeSegment>& segs, std::size_t r, const BoreholeSegment& cand,
                     auto&& fixed) {
    std::vector<std::size_t> hit;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != r && fixed(j) && segment_min_distance(cand, segs[j]) < d_min) hit.push_back(j);
    }
    return hit;
  };
  const auto trials = trial_changes();
  // smallest rotation of k that clears everything `fixed` admits, or NaN
  auto rotation_for = [&](const std::vector<BoreholeSegment>& segs, std::size_t k, auto&& fixed) {
    for (double dd : trials) {
      const auto cand = make_segment(layout, k, out.params.azimuth_deg[k] + dd, out.params.inclination_deg[k]);
      if (clashes(segs, k, cand, fixed).empty()) return dd;
    }
    return std::numeric_limits<double>::quiet_NaN();
  };
  auto apply = [&](std::size_t k, double dd) {
    out.params.azimuth_deg[k] += dd;
    out.segments[k] = make_segment(layout, k, out.params.azimuth_deg[k], out.params.inclination_deg[k]);
    delta[k] += dd;
  };

  for (std::size_t r = 0; r < n; ++r) {
    const auto hit = clashes(out.segments, r, out.segments[r], fixed_for(r));
    if (hit.empty()) continue;
    if (vertical(r)) {
      // lower deviated BHEs already keep clear of r, so the partner is vertical too
      throw UnrepairableGeometry(
          fmt::format("vertical BHEs {} and {} are closer than {} m", std::min(r, hit[0]), std::max(r, hit[0]), d_min));
    }
    const double dd = rotation_for(out.segments, r, fixed_for(r));
    if (!std::isnan(dd)) {
      apply(r, dd);
      continue;
    }
    // r cannot get clear on its own (typically a nearly vertical BHE crossed
    // by an earlier neighbour): move the earlier partners out of its way,
    // keeping r's own change as small as possible.
    bool fixed = false;
    for (std::size_t t = 0; t <= trials.size() && !fixed; ++t) {
      const double dr = t == 0 ? 0.0 : trials[t - 1];
      auto segs = out.segments;
      segs[r] = make_segment(layout, r, out.params.azimuth_deg[r] + dr, out.params.inclination_deg[r]);
      const auto partners = clashes(segs, r, segs[r], fixed_for(r));
      if (std::any_of(partners.begin(), partners.end(), vertical)) continue;
      std::vector<std::pair<std::size_t, double>> moves;
      bool ok = true;
      for (std::size_t k : partners) {
        auto fixed_k = [&, k](std::size_t j) { return j != k && (j <= r || vertical(j)); };
        const double dk = rotation_for(segs, k, fixed_k);
        if (std::isnan(dk)) {
          ok = false;
          break;
        }
        segs[k] = make_segment(layout, k, out.params.azimuth_deg[k] + dk, out.params.inclination_deg[k]);
        moves.emplace_back(k, dk);
      }
      // a later partner's move could land on an earlier one
      if (!ok || !clashes(segs, r, segs[r], fixed_for(r)).empty()) continue;
      for (auto [k, dk] : moves) {
        if (!clashes(segs, k, segs[k], [&, k](std::size_t j) { return j != k && (j <= r || vertical(j)); }).empty()) {
          ok = false;
        }
      }
      if (!ok) continue;
      if (dr != 0.0) apply(r, dr);
      for (auto [k, dk] : moves) apply(k, dk);
      fixed = true;
    }
    if (!fixed) {
      throw UnrepairableGeometry(
          fmt::format("no azimuth within 180 deg separates BHE {} from its neighbours by {} m", r, d_min));
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (delta[i] != 0.0) out.report.push_back({i, delta[i]});
  }
  return out;
}

void write_geometry_csv(std::ostream& os, const CorrectedGeometry& g) {
  os << "bhe_id,top_x,top_y,top_z,bottom_x,bottom_y,bottom_z,azimuth,inclination,corrected\n";
  for (std::size_t i = 0; i < g.segments.size(); ++i) {
    const auto& s = g.segments[i];
    os << fmt::format("{},{},{},{},{},{},{},{},{},{}\n", i, s.top.x, s.top.y, s.top.z, s.bottom.x, s.bottom.y,
                      s.bottom.z, g.params.azimuth_deg[i], g.params.inclination_deg[i], g.corrected(i) ? 1 : 0);
  }
}

}  // namespace boreuq::geo
