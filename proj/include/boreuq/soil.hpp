#pragma once

// Conduction-only ground model: borehole wall temperatures from superposed
// inclined finite line sources with stepwise loads.

#include "boreuq/geometry.hpp"
#include "boreuq/trcm.hpp"

#include <cstddef>
#include <mutex>
#include <vector>

namespace boreuq::soil {

struct SoilParams {
  double conductivity = 2.21;         // W/(m K)
  double porosity = 0.2;
  double fluid_density = 977.0;       // kg/m^3, pore water
  double fluid_heat_capacity = 4200.0;
  double solid_capacity = 2.26e6;     // J/(m^3 K), rho_s c_s
  double surface_temperature = 10.0;  // C
  double gradient = 0.03;             // K/m, positive downwards
  bool image_source = false;          // mirror sink about the ground surface

  static SoilParams case_study() { return {}; }
  void validate() const;
  /// n rho c + (1 - n) rho_s c_s
  double capacity() const;
  double diffusivity() const;
  /// Undisturbed temperature at depth (m, positive down).
  double undisturbed(double depth) const { return surface_temperature + gradient * depth; }
};

/// Temperature rise at `target` per W/m released uniformly along `seg` since
/// `t_elapsed` seconds:
///   (1 / (4 pi k)) int_0^L erfc(r(s) / (2 sqrt(a t))) / r(s) ds.
/// With the image option the mirror segment's response is subtracted.
double fls_kernel(const geo::Vec3& target, const geo::BoreholeSegment& seg, double t_elapsed, const SoilParams& soil);

/// n_z points at arc length k L / (n_z - 1) along `seg`, pushed `radius`
/// sideways: perpendicular to the horizontal projection of the axis, or along
/// +x for a vertical segment.
std::vector<geo::Vec3> wall_stations(const geo::BoreholeSegment& seg, double radius, std::size_t n_z);

struct LoadStep {
  double start = 0.0;  // s
  double end = 0.0;    // s
  double q = 0.0;      // W/m extracted, positive cools the ground
};

/// One contiguous step sequence per BHE.
struct LoadHistory {
  std::vector<std::vector<LoadStep>> steps;
  void validate() const;
};

/// Wall profile of BHE `bhe` at time t by Duhamel superposition over every
/// BHE's load steps. Steps that start at or after t contribute nothing.
trcm::WallProfile wall_temperature(std::size_t bhe, const std::vector<geo::BoreholeSegment>& segments,
                                   const LoadHistory& history, double t, const SoilParams& soil, std::size_t n_z,
                                   double radius);

/// Kernel memo for a fixed geometry and equal-length load periods, with the
/// wall evaluated in the middle of each period.
class ResponseCache {
public:
  ResponseCache(std::vector<geo::BoreholeSegment> segments, const SoilParams& soil, std::size_t n_z, double radius,
                double period_seconds, std::size_t max_periods);

  std::size_t bhe_count() const noexcept { return segs_.size(); }
  std::size_t stations() const noexcept { return n_z_; }
  double period() const noexcept { return period_; }

  /// Response of station k of BHE i to a unit step on BHE j started
  /// `lag` whole periods before the current one.
  double kernel(std::size_t i, std::size_t k, std::size_t j, std::size_t lag);

  /// kernel(i, k, j, lag) for every station k.
  std::vector<double> kernel_column(std::size_t i, std::size_t j, std::size_t lag);

  /// Wall profile of BHE i in period `p`; q[period][bhe] in W/m. Only
  /// periods 0..p of q are read.
  trcm::WallProfile wall(std::size_t i, const std::vector<std::vector<double>>& q, std::size_t p);

  /// Undisturbed profile of BHE i.
  const std::vector<double>& undisturbed(std::size_t i) const { return base_[i]; }

private:
  std::vector<geo::BoreholeSegment> segs_;
  SoilParams soil_;
  std::size_t n_z_;
  double period_;
  std::size_t max_periods_;
  std::vector<std::vector<geo::Vec3>> stations_;
  std::vector<std::vector<double>> base_;
  std::vector<double> memo_;
  std::vector<unsigned char> have_;
  std::mutex mutex_;
};

}  // namespace boreuq::soil
