#pragma once

#include <qnoise/qnoise.hpp>

namespace qnoise::testing {

// Reduced domain and packet width: every cell settles in a fraction of a second.
inline ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.grid_x_min = -600.0;
  cfg.grid_x_max = 600.0;
  cfg.grid_dx = 0.1;
  cfg.packet.x0 = -80.0;
  cfg.packet.sigma = 20.0;
  cfg.packet.energy = 0.08;
  cfg.propagation.max_time = 1500.0;
  cfg.energies = Axis::linspace(0.07, 0.09, 3);
  cfg.frequencies = Axis::linspace(-4e-4, 4e-4, 3);
  cfg.validate();
  return cfg;
}

inline PotentialSpec free_potential() {
  PotentialSpec spec;
  spec.barrier_height = 0.0;
  spec.osc_amplitude = 0.0;
  return spec;
}

// No structure; the settle threshold is tightened so the slow tail left
// behind the window stays below 1e-8, and the domain widened to match.
inline ExperimentConfig free_config() {
  auto cfg = small_config();
  cfg.potential = free_potential();
  cfg.packet = WavePacketSpec{};
  cfg.grid_x_min = -700.0;
  cfg.grid_x_max = 700.0;
  cfg.propagation.settle_threshold = 1e-10;
  return cfg;
}

// Independent SI constants (CODATA 2018) for plug-in oracles.
namespace si {
inline constexpr double electron_mass = 9.1093837015e-31;  // kg
inline constexpr double elementary_charge = 1.602176634e-19;  // C
inline constexpr double hbar = 1.054571817e-34;  // J s

inline double wave_number_per_nm(double energy_ev, double mass_ratio) {
  return std::sqrt(2.0 * mass_ratio * electron_mass * energy_ev * elementary_charge) / hbar * 1e-9;
}

inline double velocity_nm_per_fs(double energy_ev, double mass_ratio) {
  return std::sqrt(2.0 * energy_ev * elementary_charge / (mass_ratio * electron_mass)) * 1e-6;
}
}  // namespace si

}  // namespace qnoise::testing
