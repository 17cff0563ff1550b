#pragma once

#include <cmath>
#include <cstddef>
#include <string>

#include "qnoise/error.hpp"

// Internal unit system: energies in eV, lengths in nm, times in fs.

namespace qnoise {

namespace constants {
inline constexpr double hbar = 0.6582119569;             // eV fs
inline constexpr double electron_rest_energy = 510998.95;  // eV
inline constexpr double speed_of_light = 299.792458;      // nm / fs
// m_e expressed in eV fs^2 / nm^2
inline constexpr double electron_mass = electron_rest_energy / (speed_of_light * speed_of_light);
inline constexpr double elementary_charge_si = 1.602176634e-19;  // C
inline constexpr double planck_si = 6.62607015e-34;              // J s
inline constexpr double pi = 3.14159265358979323846;
}  // namespace constants

struct PhysicalModel {
  double mass_ratio = 0.067;
  double hbar = constants::hbar;
  double charge = 1.0;  // in units of e

  double effective_mass() const { return mass_ratio * constants::electron_mass; }

  static PhysicalModel from_effective_mass(double m) {
    PhysicalModel model;
    model.mass_ratio = m / constants::electron_mass;
    return model;
  }

  void validate() const {
    require(std::isfinite(mass_ratio) && mass_ratio > 0.0, ErrorKind::config,
            "model.mass_ratio must be positive");
    require(std::isfinite(hbar) && hbar > 0.0, ErrorKind::config, "hbar must be positive");
  }

  double wave_number(double energy) const {
    return std::sqrt(2.0 * effective_mass() * energy) / hbar;
  }

  double velocity(double energy) const {
    return std::sqrt(2.0 * energy / effective_mass());
  }

  double kinetic_energy(double k) const {
    return hbar * hbar * k * k / (2.0 * effective_mass());
  }
};

/// Uniform grid on [x_min, x_max]. The requested spacing is rounded so that
/// both endpoints are nodes.
class Grid1D {
 public:
  Grid1D(double x_min, double x_max, std::size_t n_points)
      : x_min_(x_min), x_max_(x_max), n_(n_points) {
    require(std::isfinite(x_min) && std::isfinite(x_max) && x_min < 0.0 && x_max > 0.0,
            ErrorKind::config, "grid must satisfy x_min < 0 < x_max");
    require(n_points >= 3, ErrorKind::config, "grid needs at least 3 points");
    dx_ = (x_max_ - x_min_) / static_cast<double>(n_ - 1);
  }

  static Grid1D with_spacing(double x_min, double x_max, double dx) {
    require(std::isfinite(dx) && dx > 0.0, ErrorKind::config, "grid.dx must be positive");
    auto intervals = static_cast<std::size_t>(std::llround((x_max - x_min) / dx));
    return Grid1D(x_min, x_max, intervals + 1);
  }

  double x_min() const { return x_min_; }
  double x_max() const { return x_max_; }
  double dx() const { return dx_; }
  std::size_t size() const { return n_; }
  double x(std::size_t i) const { return x_min_ + static_cast<double>(i) * dx_; }

  bool contains(double lo, double hi) const { return lo >= x_min_ && hi <= x_max_; }

  friend bool operator==(const Grid1D& a, const Grid1D& b) {
    return a.x_min_ == b.x_min_ && a.x_max_ == b.x_max_ && a.n_ == b.n_;
  }

 private:
  double x_min_;
  double x_max_;
  std::size_t n_;
  double dx_;
};

}  // namespace qnoise
