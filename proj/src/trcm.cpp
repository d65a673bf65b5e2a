#include "boreuq/trcm.hpp"

#include "boreuq/distributions.hpp"
#include "boreuq/error.hpp"

#include <fmt/format.h>

#include <cmath>
#include <numbers>

namespace boreuq::trcm {

namespace {

constexpr double kPi = std::numbers::pi;

// Gnielinski with the Petukhov friction factor.
double nusselt_turbulent(double re, double pr) {
  const double f = std::pow(0.79 * std::log(re) - 1.64, -2.0);
  return (f / 8.0) * (re - 1000.0) * pr / (1.0 + 12.7 * std::sqrt(f / 8.0) * (std::pow(pr, 2.0 / 3.0) - 1.0));
}

double nusselt(double re, double pr) {
  constexpr double kLaminar = 4.364;  // constant heat flux, fully developed
  if (re <= 2300.0) return kLaminar;
  if (re >= 1e4) return nusselt_turbulent(re, pr);
  const double w = (re - 2300.0) / (1e4 - 2300.0);
  return (1.0 - w) * kLaminar + w * nusselt_turbulent(1e4, pr);
}

}  // namespace

void BHEParams::validate() const {
  const double vals[] = {length,          borehole_diameter,   pipe_outer_diameter, pipe_wall_thickness,
                         shank_spacing,   pipe_conductivity,   fluid_heat_capacity, fluid_conductivity,
                         fluid_viscosity, fluid_density,       grout_conductivity,  flow_rate};
  for (double v : vals) {
    if (!(v > 0.0) || !std::isfinite(v)) throw InvalidArgument("BHE parameters must all be positive and finite");
  }
  if (2.0 * pipe_wall_thickness >= pipe_outer_diameter) throw InvalidArgument("pipe wall thicker than the pipe");
  const double rp = 0.5 * pipe_outer_diameter, b = 0.5 * shank_spacing;
  if (b + rp > borehole_radius()) throw InvalidArgument("pipes do not fit inside the borehole");
  if (std::numbers::sqrt2 * b < 2.0 * rp) throw InvalidArgument("adjacent pipes overlap at this shank spacing");
}

double BHEParams::capacity_rate() const { return fluid_density * fluid_heat_capacity * flow_rate * 1e-3; }

Resistances delta_resistances(const BHEParams& p) {
  p.validate();
  Resistances r;
  const double ro = 0.5 * p.pipe_outer_diameter;
  const double di = p.pipe_outer_diameter - 2.0 * p.pipe_wall_thickness;
  const double rb = p.borehole_radius();
  const double b = 0.5 * p.shank_spacing;  // pipe centres on a circle of this radius

  // two parallel U-loops share the flow
  const double q_pipe = 0.5 * p.flow_rate * 1e-3;
  const double v = q_pipe / (0.25 * kPi * di * di);
  r.reynolds = p.fluid_density * v * di / p.fluid_viscosity;
  const double pr = p.fluid_viscosity * p.fluid_heat_capacity / p.fluid_conductivity;
  r.nusselt = nusselt(r.reynolds, pr);
  const double h = r.nusselt * p.fluid_conductivity / di;
  r.pipe = std::log(ro / (0.5 * di)) / (2.0 * kPi * p.pipe_conductivity) + 1.0 / (kPi * di * h);

  const double g = 1.0 / (2.0 * kPi * p.grout_conductivity);
  r.r11 = g * std::log(rb / ro) + r.pipe;
  r.r12 = g * std::log(rb / (std::numbers::sqrt2 * b));
  r.r13 = g * std::log(rb / (2.0 * b));

  // Inlets sit diagonally opposite: each group is a pipe pair at equal
  // temperature, which reduces the 4x4 system to a symmetric 2x2 one.
  const double ra = 0.5 * (r.r11 + r.r13);
  const double rc = r.r12;
  if (!(ra > rc) || !(rc > 0.0)) throw InvalidArgument("non-physical borehole resistances for this geometry");
  r.r1_delta = ra + rc;
  r.r2_delta = ra + rc;
  r.r12_delta = (ra * ra - rc * rc) / rc;
  return r;
}

MetaParams MetaParams::from_betas(double beta1, double beta2, double beta12, double R) {
  if (!(beta1 > 0.0) || !(beta2 > 0.0) || !(beta12 > 0.0) || !(R > 0.0)) {
    throw InvalidArgument("meta parameters need positive beta1, beta2, beta12 and R");
  }
  MetaParams m;
  m.beta1 = beta1;
  m.beta2 = beta2;
  m.beta12 = beta12;
  m.R = R;
  m.beta = 0.5 * (beta2 - beta1);
  const double s = 0.5 * (beta1 + beta2);
  m.gamma = std::sqrt(s * s + beta12 * (beta1 + beta2));
  m.delta = (beta12 + s) / m.gamma;
  const double lhs = m.gamma * m.gamma, rhs = s * s + beta12 * (beta1 + beta2);
  if (!(m.gamma > 0.0) || std::abs(lhs - rhs) > 1e-12 * rhs) throw InvalidArgument("gamma identity violated");
  return m;
}

MetaParams meta_params(const BHEParams& p) {
  const auto r = delta_resistances(p);
  const double cf = p.capacity_rate();
  return MetaParams::from_betas(1.0 / (cf * r.r1_delta), 1.0 / (cf * r.r2_delta), 1.0 / (cf * r.r12_delta),
                                r.r1_delta);
}

FValues f_functions(double z, const MetaParams& mp) {
  const double e = std::exp(mp.beta * z);
  const double c = std::cosh(mp.gamma * z), s = std::sinh(mp.gamma * z);
  const double k = mp.beta12 / mp.gamma;
  return {e * (c - mp.delta * s),
          e * k * s,
          e * (c + mp.delta * s),
          e * (mp.beta1 * c - (mp.delta * mp.beta1 + mp.beta2 * k) * s),
          e * (mp.beta2 * c + (mp.delta * mp.beta2 + mp.beta1 * k) * s)};
}

WallProfile WallProfile::uniform(double length, std::size_t n, double t) {
  WallProfile w{length, std::vector<double>(n, t)};
  w.validate();
  return w;
}

void WallProfile::validate() const {
  if (!(length > 0.0)) throw InvalidArgument("wall profile length must be > 0");
  if (temps.size() < 2) throw InvalidArgument("wall profile needs at least 2 stations");
}

BheModel::BheModel(const MetaParams& mp, double capacity_rate, double length, std::size_t n_z, Convolution conv)
    : mp_(mp), cf_(capacity_rate), length_(length), n_(n_z), conv_(conv) {
  if (n_z < 2) throw InvalidArgument("depth grid needs at least 2 stations");
  if (!(length > 0.0) || !(capacity_rate > 0.0)) throw InvalidArgument("length and capacity rate must be > 0");
  const double h = length / static_cast<double>(n_z - 1);
  f4_.resize(n_z);
  f5_.resize(n_z);
  for (std::size_t m = 0; m < n_z; ++m) {
    const auto f = f_functions(h * static_cast<double>(m), mp);
    f4_[m] = f.f4;
    f5_[m] = f.f5;
  }
  // per-panel Gauss-Legendre; the kernels are exponentials, smooth on a panel
  const auto [gx, gw] = dist::gauss_legendre(8);
  w4a_.assign(n_z, 0.0);
  w4b_.assign(n_z, 0.0);
  w5a_.assign(n_z, 0.0);
  w5b_.assign(n_z, 0.0);
  for (std::size_t m = 1; m < n_z; ++m) {
    for (std::size_t q = 0; q < gx.size(); ++q) {
      const double t = 0.5 * (gx[q] + 1.0);  // position within the panel
      const double w = 0.5 * h * gw[q];
      const double arg = h * (static_cast<double>(m) - t);
      const auto f = f_functions(arg, mp);
      w4a_[m] += w * (1.0 - t) * f.f4;
      w4b_[m] += w * t * f.f4;
      w5a_[m] += w * (1.0 - t) * f.f5;
      w5b_[m] += w * t * f.f5;
    }
  }
}

BheModel::BheModel(const BHEParams& p, std::size_t n_z, Convolution conv)
    : BheModel(meta_params(p), p.capacity_rate(), p.length, n_z, conv) {}

void BheModel::check_wall(const WallProfile& wall) const {
  wall.validate();
  if (wall.size() != n_ || std::abs(wall.length - length_) > 1e-9 * length_) {
    throw InvalidArgument(fmt::format("wall profile ({} stations over {} m) does not match model ({} over {} m)",
                                      wall.size(), wall.length, n_, length_));
  }
}

double BheModel::convolve(const std::vector<double>& wa, const std::vector<double>& wb,
                          const std::vector<double>& f, const WallProfile& wall, std::size_t k) const {
  if (k == 0) return 0.0;
  const auto& tb = wall.temps;
  double s = 0.0;
  if (conv_ == Convolution::product) {
    for (std::size_t j = 0; j < k; ++j) s += wa[k - j] * tb[j] + wb[k - j] * tb[j + 1];
    return s;
  }
  s = 0.5 * (f[k] * tb[0] + f[0] * tb[k]);
  for (std::size_t j = 1; j < k; ++j) s += f[k - j] * tb[j];
  return s * wall.step();
}

Profiles BheModel::profiles(double t_in0, double t_out0, const WallProfile& wall) const {
  check_wall(wall);
  Profiles pr;
  pr.t_in.resize(n_);
  pr.t_out.resize(n_);
  for (std::size_t k = 0; k < n_; ++k) {
    const auto f = f_functions(wall.z(k), mp_);
    pr.t_in[k] = t_in0 * f.f1 + t_out0 * f.f2 + convolve(w4a_, w4b_, f4_, wall, k);
    pr.t_out[k] = -t_in0 * f.f2 + t_out0 * f.f3 - convolve(w5a_, w5b_, f5_, wall, k);
  }
  return pr;
}

BheModel::Affine BheModel::outlet_affine(const WallProfile& wall) const {
  check_wall(wall);
  const auto f = f_functions(length_, mp_);
  const double denom = f.f3 - f.f2;
  if (!(std::abs(denom) > 1e-300) || !std::isfinite(denom)) {
    throw DegenerateParameters("singular bottom coupling: f3(L) - f2(L) = 0");
  }
  const std::size_t k = n_ - 1;
  const double i4 = convolve(w4a_, w4b_, f4_, wall, k);
  const double i5 = convolve(w5a_, w5b_, f5_, wall, k);
  return {(i4 + i5) / denom, (f.f1 + f.f2) / denom};
}

Outlet BheModel::outlet_and_power(double t_in0, const WallProfile& wall) const {
  const auto a = outlet_affine(wall);
  const double t_out0 = a.intercept + a.slope * t_in0;
  return {t_out0, cf_ * (t_out0 - t_in0)};
}

Profiles profiles(double t_in0, double t_out0, const WallProfile& wall, const MetaParams& mp) {
  wall.validate();
  return BheModel(mp, 1.0, wall.length, wall.size()).profiles(t_in0, t_out0, wall);
}

Outlet outlet_and_power(double t_in0, const WallProfile& wall, const MetaParams& mp, const BHEParams& p) {
  wall.validate();
  return BheModel(mp, p.capacity_rate(), wall.length, wall.size()).outlet_and_power(t_in0, wall);
}

double source_density(double t_in, double t_out, double t_b, const MetaParams& mp) {
  return (t_in - t_b) / mp.R + (t_out - t_b) / mp.R;
}

double integrated_source(const Profiles& pr, const WallProfile& wall, const MetaParams& mp) {
  wall.validate();
  if (pr.t_in.size() != wall.size() || pr.t_out.size() != wall.size()) {
    throw InvalidArgument("profiles and wall differ in station count");
  }
  const std::size_t n = wall.size();
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double w = (k == 0 || k + 1 == n) ? 0.5 : 1.0;
    s += w * source_density(pr.t_in[k], pr.t_out[k], wall.temps[k], mp);
  }
  // The wall part is piecewise linear, which the trapezoid rule integrates
  // exactly. T_in + T_out is C1 across stations and smooth inside panels,
  // so the Euler-Maclaurin end term lifts the rule to fourth order; the
  // slopes come straight from the profile equations.
  auto slope = [&](std::size_t k) {
    const double a = pr.t_in[k], b = pr.t_out[k], tb = wall.temps[k];
    return -mp.beta1 * (a - tb) - mp.beta12 * (a - b) + mp.beta2 * (b - tb) + mp.beta12 * (b - a);
  };
  const double h = wall.step();
  return s * h - h * h / 12.0 * (slope(n - 1) - slope(0)) / mp.R;
}

InletSolution required_inlet(double p_target, std::span<const WallProfile> walls, const BheModel& model) {
  if (walls.empty()) throw InvalidArgument("required_inlet needs at least one BHE");
  // P_i = C_f (a_i + (b_i - 1) T_in0), so the total is affine in T_in0
  std::vector<BheModel::Affine> aff;
  aff.reserve(walls.size());
  double sum_a = 0.0, sum_slope = 0.0;
  for (const auto& w : walls) {
    aff.push_back(model.outlet_affine(w));
    sum_a += aff.back().intercept;
    sum_slope += aff.back().slope - 1.0;
  }
  if (!(std::abs(sum_slope) > 1e-14 * walls.size())) {
    throw DegenerateParameters("total extraction power does not depend on the inlet temperature");
  }
  const double cf = model.capacity_rate();
  InletSolution sol;
  sol.t_in0 = (p_target / cf - sum_a) / sum_slope;
  for (const auto& a : aff) {
    const double t_out0 = a.intercept + a.slope * sol.t_in0;
    sol.t_out0.push_back(t_out0);
    sol.p_ext.push_back(cf * (t_out0 - sol.t_in0));
  }
  return sol;
}

InletSolution required_inlet(double p_target, std::span<const WallProfile> walls, const MetaParams& mp,
                             const BHEParams& p) {
  if (walls.empty()) throw InvalidArgument("required_inlet needs at least one BHE");
  const BheModel model(mp, p.capacity_rate(), walls[0].length, walls[0].size());
  return required_inlet(p_target, walls, model);
}

}  // namespace boreuq::trcm
