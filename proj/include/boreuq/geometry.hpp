#pragma once

// Straight, possibly deviated bore paths and overlap repair.
//
// Coordinates: x, y horizontal (m), z up, collars at z = 0. Azimuths rotate
// the reference direction clockwise seen from above, so alpha = 90 deg
// turns (0, 1) into (1, 0).

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace boreuq::geo {

struct Vec2 {
  double x = 0.0, y = 0.0;
};

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;
  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm() const;
};

struct ArrayLayout {
  std::vector<Vec2> collars;
  std::vector<Vec2> ref_dirs;  // unit, one per collar
  double bhe_length = 0.0;
  std::string extent;

  std::size_t size() const noexcept { return collars.size(); }
  void validate() const;

  /// g x g square grid centred on the origin with the given spacing; every
  /// BHE shares `ref_dir`.
  static ArrayLayout square_grid(int g, double spacing, double length, Vec2 ref_dir, std::string label);
};

/// Azimuth and inclination per BHE, degrees.
struct DeviationParams {
  std::vector<double> azimuth_deg;
  std::vector<double> inclination_deg;

  static DeviationParams vertical(std::size_t n);
  std::size_t size() const noexcept { return azimuth_deg.size(); }
};

struct BoreholeSegment {
  Vec3 top;
  Vec3 bottom;
  double length() const { return (bottom - top).norm(); }
  /// Unit vector from top to bottom.
  Vec3 direction() const;
};

/// Horizontal rotation of `d` by `alpha_deg`, clockwise from above.
Vec2 rotate_azimuth(Vec2 d, double alpha_deg);

std::vector<BoreholeSegment> realize_geometry(const ArrayLayout& layout, const DeviationParams& params);

/// Minimum distance between two closed segments.
double segment_min_distance(const BoreholeSegment& a, const BoreholeSegment& b);

double min_pairwise_distance(const std::vector<BoreholeSegment>& segs);

struct AzimuthChange {
  std::size_t bhe = 0;
  double delta_deg = 0.0;
};

struct CorrectedGeometry {
  std::vector<BoreholeSegment> segments;
  DeviationParams params;
  std::vector<AzimuthChange> report;  // one entry per modified BHE, ascending
  bool corrected(std::size_t bhe) const;
};

/// Rotate azimuths of deviated BHEs until every pair is at least d_min
/// apart. BHEs are placed in ascending index order, each against the lower
/// indices and all vertical BHEs, so of a conflicting pair the higher-indexed
/// member moves when it is deviated, otherwise the lower one. Trial changes
/// go +1, -1, +2, -2, ... degrees up to 180, and the first one that clears
/// all of that BHE's conflicts is kept. If the higher-indexed member has no
/// viable azimuth, the lower-indexed partners it collides with are rotated
/// instead, preferring the smallest change of the higher one.
CorrectedGeometry correct_geometry(const std::vector<BoreholeSegment>& segments, double d_min,
                                   const ArrayLayout& layout, const DeviationParams& params);

void write_geometry_csv(std::ostream& os, const CorrectedGeometry& g);

}  // namespace boreuq::geo
