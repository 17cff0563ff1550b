#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "qnoise/error.hpp"
#include "qnoise/model.hpp"

namespace qnoise {

/// Double barrier with an oscillating well floor
/// U_w(t) = osc_sign * osc_amplitude * sin(w t + phase).
/// A zero angular frequency is the static structure, U_w == 0 for any phase.
struct PotentialSpec {
  double barrier_height = 0.4;  // eV
  double barrier_width = 1.0;   // nm, each barrier
  double well_width = 5.2;      // nm
  double well_center = 0.0;     // nm
  double osc_amplitude = 0.2;   // eV
  double osc_angular_frequency = 0.0;  // rad / fs
  int osc_sign = 1;
  double osc_phase = 0.0;  // rad

  double well_floor(double t) const {
    if (osc_angular_frequency == 0.0) return 0.0;
    return static_cast<double>(osc_sign) * osc_amplitude *
           std::sin(osc_angular_frequency * t + osc_phase);
  }

  bool is_static() const { return osc_angular_frequency == 0.0; }

  double half_width() const { return 0.5 * well_width + barrier_width; }
  double structure_length() const { return well_width + 2.0 * barrier_width; }
  double left_edge() const { return well_center - half_width(); }
  double right_edge() const { return well_center + half_width(); }

  // Interfaces from left to right: outer-left, well-left, well-right, outer-right.
  std::array<double, 4> interfaces() const {
    return {left_edge(), well_center - 0.5 * well_width, well_center + 0.5 * well_width,
            right_edge()};
  }

  /// Negative frequencies are expressed through a flipped sign so the
  /// oscillator always runs with |w|.
  PotentialSpec with_signed_frequency(double w) const {
    PotentialSpec out = *this;
    out.osc_angular_frequency = std::abs(w);
    if (w < 0.0) out.osc_sign = -osc_sign;
    return out;
  }

  void validate() const {
    // v_b = 0 is allowed as the free-particle reference
    require(std::isfinite(barrier_height) && barrier_height >= 0.0, ErrorKind::config,
            "potential.v_b must be non-negative");
    require(std::isfinite(barrier_width) && barrier_width > 0.0, ErrorKind::config,
            "potential.barrier_width must be positive");
    require(std::isfinite(well_width) && well_width >= 0.0, ErrorKind::config,
            "potential.well_width must be non-negative");
    require(std::isfinite(osc_amplitude) && osc_amplitude >= 0.0, ErrorKind::config,
            "potential.osc_amplitude must be non-negative");
    require(std::isfinite(osc_angular_frequency) && osc_angular_frequency >= 0.0,
            ErrorKind::config, "oscillator frequency must be finite and non-negative");
    require(osc_sign == 1 || osc_sign == -1, ErrorKind::config,
            "potential.osc_sign must be +1 or -1");
    require(std::isfinite(osc_phase), ErrorKind::config, "potential.osc_phase must be finite");
  }
};

/// Node-sampled potential split into a static part and the fraction of each
/// node's cell covered by the well: V_i(t) = fixed_i + well_fraction_i * U_w(t).
struct PotentialProfile {
  std::vector<double> fixed;
  std::vector<double> well_fraction;

  void evaluate(double well_floor, std::vector<double>& out) const {
    out.resize(fixed.size());
    for (std::size_t i = 0; i < fixed.size(); ++i) out[i] = fixed[i] + well_fraction[i] * well_floor;
  }
};

namespace detail {
inline double cell_overlap(double lo, double hi, double a, double b) {
  return std::max(0.0, std::min(hi, b) - std::max(lo, a));
}

inline double snap_fraction(double f) {
  if (f < 1e-9) return 0.0;
  if (f > 1.0 - 1e-9) return 1.0;
  return f;
}
}  // namespace detail

/// Each node carries the average of the piecewise-constant potential over
/// its cell [x - dx/2, x + dx/2]; a node sitting on an interface gets the
/// mean of the two sides, which keeps the sampled structure mirror symmetric.
inline PotentialProfile sample_profile(const PotentialSpec& spec, const Grid1D& grid) {
  spec.validate();
  require(grid.contains(spec.left_edge(), spec.right_edge()), ErrorKind::grid_too_small,
          "grid does not contain the double-barrier structure");
  const auto edges = spec.interfaces();
  const double dx = grid.dx();
  PotentialProfile profile;
  profile.fixed.assign(grid.size(), 0.0);
  profile.well_fraction.assign(grid.size(), 0.0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double lo = grid.x(i) - 0.5 * dx;
    const double hi = grid.x(i) + 0.5 * dx;
    if (hi <= edges[0] || lo >= edges[3]) continue;
    const double barrier = detail::cell_overlap(lo, hi, edges[0], edges[1]) +
                           detail::cell_overlap(lo, hi, edges[2], edges[3]);
    const double well = detail::cell_overlap(lo, hi, edges[1], edges[2]);
    profile.fixed[i] = spec.barrier_height * detail::snap_fraction(barrier / dx);
    profile.well_fraction[i] = detail::snap_fraction(well / dx);
  }
  return profile;
}

inline std::vector<double> build_potential(const PotentialSpec& spec, const Grid1D& grid,
                                           double t) {
  require(std::isfinite(t), ErrorKind::invalid_argument, "time must be finite");
  std::vector<double> v;
  sample_profile(spec, grid).evaluate(spec.well_floor(t), v);
  return v;
}

}  // namespace qnoise
