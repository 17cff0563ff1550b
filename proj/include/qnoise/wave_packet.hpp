#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "qnoise/error.hpp"
#include "qnoise/model.hpp"
#include "qnoise/potential.hpp"

namespace qnoise {

using complex = std::complex<double>;

enum class Direction { left_to_right, right_to_left };

constexpr double direction_sign(Direction d) { return d == Direction::left_to_right ? 1.0 : -1.0; }

struct WavePacketSpec {
  double x0 = -175.0;    // nm
  double sigma = 50.0;   // nm, as in exp(-(x - x0)^2 / sigma^2)
  double energy = 0.073; // eV
  Direction direction = Direction::left_to_right;

  double central_wave_number(const PhysicalModel& model) const {
    return direction_sign(direction) * model.wave_number(energy);
  }

  void validate() const {
    require(std::isfinite(x0), ErrorKind::config, "packet.x0 must be finite");
    require(std::isfinite(sigma) && sigma > 0.0, ErrorKind::config, "packet.sigma must be positive");
    require(std::isfinite(energy) && energy > 0.0, ErrorKind::config,
            "packet.energy must be positive");
  }

  /// The injection point must sit at least 3 sigma outside the structure.
  void validate_against(const PotentialSpec& potential) const {
    validate();
    const double gap = x0 < potential.well_center ? potential.left_edge() - x0
                                                  : x0 - potential.right_edge();
    require(gap >= 3.0 * sigma, ErrorKind::config,
            "injection point must be at least 3 sigma outside the barrier region");
  }

  /// Packet injected from the mirror-image position with opposite momentum.
  WavePacketSpec mirrored(double center = 0.0) const {
    WavePacketSpec out = *this;
    out.x0 = 2.0 * center - x0;
    out.direction = direction == Direction::left_to_right ? Direction::right_to_left
                                                          : Direction::left_to_right;
    return out;
  }
};

struct WaveField {
  Grid1D grid;
  std::vector<complex> values;
  double time = 0.0;  // fs
};

inline double norm2(const WaveField& f) {
  double s = 0.0;
  for (const auto& v : f.values) s += std::norm(v);
  return s * f.grid.dx();
}

inline double mean_position(const WaveField& f) {
  double s = 0.0, w = 0.0;
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    const double p = std::norm(f.values[i]);
    s += p * f.grid.x(i);
    w += p;
  }
  return s / w;
}

inline double position_stddev(const WaveField& f) {
  const double mu = mean_position(f);
  double s = 0.0, w = 0.0;
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    const double p = std::norm(f.values[i]);
    const double d = f.grid.x(i) - mu;
    s += p * d * d;
    w += p;
  }
  return std::sqrt(s / w);
}

/// <k> from the central-difference derivative, Im sum psi* dpsi/dx / sum |psi|^2.
inline double mean_wave_number(const WaveField& f) {
  const auto& v = f.values;
  double num = 0.0, den = 0.0;
  for (std::size_t i = 1; i + 1 < v.size(); ++i) {
    const complex d = (v[i + 1] - v[i - 1]) / (2.0 * f.grid.dx());
    num += (std::conj(v[i]) * d).imag();
    den += std::norm(v[i]);
  }
  return num / den;
}

/// phi(x) = [2/(sigma^2 pi)]^{1/4} exp(i k0 (x - x0)) exp(-(x - x0)^2 / sigma^2)
inline WaveField init_gaussian(const WavePacketSpec& spec, const Grid1D& grid,
                               const PhysicalModel& model) {
  spec.validate();
  model.validate();
  // |phi|^2 is a normal density with standard deviation sigma / 2.
  const double s = 0.5 * spec.sigma;
  require(spec.x0 - 4.0 * spec.sigma >= grid.x_min() && spec.x0 + 4.0 * spec.sigma <= grid.x_max(),
          ErrorKind::truncation, "packet does not fit inside the grid with a 4 sigma margin");
  const double tail = 0.5 * std::erfc((spec.x0 - grid.x_min()) / (s * std::sqrt(2.0))) +
                      0.5 * std::erfc((grid.x_max() - spec.x0) / (s * std::sqrt(2.0)));
  require(tail <= 1e-10, ErrorKind::truncation, "packet tail mass outside the grid exceeds 1e-10");

  const double k0 = spec.central_wave_number(model);
  const double amplitude = std::pow(2.0 / (spec.sigma * spec.sigma * constants::pi), 0.25);
  WaveField field{grid, std::vector<complex>(grid.size()), 0.0};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double d = grid.x(i) - spec.x0;
    field.values[i] = amplitude * std::exp(-d * d / (spec.sigma * spec.sigma)) *
                      std::polar(1.0, k0 * d);
  }
  // hard walls
  field.values.front() = 0.0;
  field.values.back() = 0.0;
  return field;
}

}  // namespace qnoise
