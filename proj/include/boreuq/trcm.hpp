#pragma once

// Thermal resistance and capacity model of a double-U borehole heat
// exchanger: inlet/outlet fluid profiles along depth, U-turn closure at the
// bottom and the resulting extraction power.
//
// Profiles follow
//   dT_in/dz  = -b1 (T_in - T_b) - b12 (T_in - T_out)
//   dT_out/dz =  b2 (T_out - T_b) + b12 (T_out - T_in)
// whose fundamental solution is written with the auxiliary functions f1..f5.

#include <cstddef>
#include <span>
#include <vector>

namespace boreuq::trcm {

struct BHEParams {
  double length = 81.0;                 // m
  double borehole_diameter = 0.1522;    // m
  double pipe_outer_diameter = 0.032;   // m
  double pipe_wall_thickness = 0.0029;  // m
  double shank_spacing = 0.072;         // m, centre to centre of opposite shanks
  double pipe_conductivity = 0.42;      // W/(m K)
  double fluid_heat_capacity = 3795.0;  // J/(kg K)
  double fluid_conductivity = 0.48;     // W/(m K)
  double fluid_viscosity = 0.0052;      // kg/(m s)
  double fluid_density = 1052.0;        // kg/m^3
  double grout_conductivity = 2.0;      // W/(m K)
  double flow_rate = 0.5;               // L/s through the whole BHE

  static BHEParams case_study() { return {}; }
  void validate() const;
  double borehole_radius() const { return 0.5 * borehole_diameter; }
  /// rho c V, W/K.
  double capacity_rate() const;
};

/// Borehole resistances of the lumped two-group (inlet pair, outlet pair)
/// circuit, m K / W.
struct Resistances {
  double reynolds = 0.0;
  double nusselt = 0.0;
  double pipe = 0.0;      // conduction through the pipe wall plus film
  double r11 = 0.0;       // self, one pipe
  double r12 = 0.0;       // adjacent pipes
  double r13 = 0.0;       // diagonally opposite pipes
  double r1_delta = 0.0;  // inlet group to wall
  double r2_delta = 0.0;  // outlet group to wall
  double r12_delta = 0.0; // inlet group to outlet group
};

Resistances delta_resistances(const BHEParams& p);

struct MetaParams {
  double beta = 0.0, beta1 = 0.0, beta2 = 0.0, beta12 = 0.0, gamma = 0.0, delta = 0.0;
  double R = 0.0;  // resistance used in the source density

  /// Derives beta, gamma, delta and checks the gamma identity.
  static MetaParams from_betas(double beta1, double beta2, double beta12, double R);
};

MetaParams meta_params(const BHEParams& p);

struct FValues {
  double f1, f2, f3, f4, f5;
};

FValues f_functions(double z, const MetaParams& mp);

/// Borehole wall temperature at n uniform stations z_k = k L / (n - 1).
struct WallProfile {
  double length = 0.0;
  std::vector<double> temps;

  static WallProfile uniform(double length, std::size_t n, double t);
  std::size_t size() const noexcept { return temps.size(); }
  double step() const { return length / static_cast<double>(temps.size() - 1); }
  double z(std::size_t k) const { return step() * static_cast<double>(k); }
  void validate() const;
};

struct Profiles {
  std::vector<double> t_in;
  std::vector<double> t_out;
};

struct Outlet {
  double t_out0 = 0.0;
  double p_ext = 0.0;  // W, positive when heat is extracted from the ground
};

/// How the wall convolution integrals are discretised. `product` integrates
/// the exact kernel against the piecewise-linear wall profile; `trapezoid`
/// is the plain composite rule on the wall grid.
enum class Convolution { product, trapezoid };

/// f-function kernels and quadrature weights for one BHE and one wall grid.
class BheModel {
public:
  BheModel(const MetaParams& mp, double capacity_rate, double length, std::size_t n_z,
           Convolution conv = Convolution::product);
  BheModel(const BHEParams& p, std::size_t n_z, Convolution conv = Convolution::product);

  const MetaParams& meta() const noexcept { return mp_; }
  double capacity_rate() const noexcept { return cf_; }
  double length() const noexcept { return length_; }
  std::size_t stations() const noexcept { return n_; }
  Convolution convolution() const noexcept { return conv_; }

  Profiles profiles(double t_in0, double t_out0, const WallProfile& wall) const;

  /// T_out0 = intercept + slope * T_in0 for this wall.
  struct Affine {
    double intercept = 0.0;
    double slope = 0.0;
  };
  Affine outlet_affine(const WallProfile& wall) const;
  Outlet outlet_and_power(double t_in0, const WallProfile& wall) const;

private:
  // integral of T_b(zeta) f(z_k - zeta) over [0, z_k]
  double convolve(const std::vector<double>& wa, const std::vector<double>& wb, const std::vector<double>& f,
                  const WallProfile& wall, std::size_t k) const;
  void check_wall(const WallProfile& wall) const;

  MetaParams mp_;
  double cf_ = 0.0;
  double length_ = 0.0;
  std::size_t n_ = 0;
  Convolution conv_ = Convolution::product;
  // Product weights by panel offset m = k - j, for the panel's lower and
  // upper station; f4_/f5_ hold the kernels at m * h for the trapezoid rule.
  std::vector<double> w4a_, w4b_, w5a_, w5b_;
  std::vector<double> f4_, f5_;
};

Profiles profiles(double t_in0, double t_out0, const WallProfile& wall, const MetaParams& mp);
Outlet outlet_and_power(double t_in0, const WallProfile& wall, const MetaParams& mp, const BHEParams& p);

/// Heat flux from the fluid into the ground per unit length, W/m.
double source_density(double t_in, double t_out, double t_b, const MetaParams& mp);

/// Integral of the source density over the profile stations (trapezoid
/// with end correction), W.
double integrated_source(const Profiles& pr, const WallProfile& wall, const MetaParams& mp);

struct InletSolution {
  double t_in0 = 0.0;
  std::vector<double> t_out0;
  std::vector<double> p_ext;
};

/// Common inlet temperature for which the BHEs together extract p_target.
InletSolution required_inlet(double p_target, std::span<const WallProfile> walls, const BheModel& model);
InletSolution required_inlet(double p_target, std::span<const WallProfile> walls, const MetaParams& mp,
                             const BHEParams& p);

}  // namespace boreuq::trcm
