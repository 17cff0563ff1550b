#pragma once

#include <cmath>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qnoise/error.hpp"
#include "qnoise/format.hpp"
#include "qnoise/model.hpp"
#include "qnoise/noise.hpp"
#include "qnoise/potential.hpp"
#include "qnoise/propagator.hpp"
#include "qnoise/wave_packet.hpp"

namespace qnoise {

/// Inclusive, evenly spaced axis or an explicit list of values.
struct Axis {
  std::vector<double> values;

  static Axis linspace(double lo, double hi, std::size_t count) {
    require(count >= 1, ErrorKind::config, "axis needs at least one point");
    Axis a;
    if (count == 1) {
      a.values = {lo};
      return a;
    }
    for (std::size_t i = 0; i < count; ++i)
      a.values.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1));
    // keep an exact zero when the axis straddles it symmetrically
    for (auto& v : a.values)
      if (std::abs(v) < 1e-12 * std::max(std::abs(lo), std::abs(hi))) v = 0.0;
    return a;
  }

  void validate(const char* name) const {
    require(!values.empty(), ErrorKind::config, std::string(name) + " must not be empty");
    for (std::size_t i = 0; i < values.size(); ++i) {
      require(std::isfinite(values[i]), ErrorKind::config, std::string(name) + " must be finite");
      if (i > 0)
        require(values[i] > values[i - 1], ErrorKind::config,
                std::string(name) + " must be strictly increasing");
    }
  }
};

enum class ResonanceSource { static_noise_peak, transfer_matrix };

struct ExperimentConfig {
  PhysicalModel model;
  double grid_x_min = -700.0;
  double grid_x_max = 700.0;
  double grid_dx = 0.05;
  PotentialSpec potential;
  WavePacketSpec packet;  // packet a, injected from the left
  std::optional<WavePacketSpec> packet_b;  // asymmetric mode; mirror image of a otherwise
  PropagationConfig propagation;
  OccupationPair occupation;
  std::size_t oracle_stride = 4;
  Axis energies = Axis::linspace(0.05, 0.12, 29);
  Axis frequencies = Axis::linspace(-8e-4, 8e-4, 33);
  ResonanceSource e_r0_source = ResonanceSource::static_noise_peak;
  std::optional<double> e_r0_override;
  double ridge_tolerance = 3e-3;  // eV, floor of the ridge deviation tolerance

  Grid1D grid() const { return Grid1D::with_spacing(grid_x_min, grid_x_max, grid_dx); }

  WavePacketSpec packet_a_at(double energy) const {
    WavePacketSpec a = packet;
    a.energy = energy;
    a.direction = Direction::left_to_right;
    return a;
  }

  WavePacketSpec packet_b_at(double energy) const {
    WavePacketSpec b = packet_b ? *packet_b : packet.mirrored(potential.well_center);
    b.energy = energy;
    b.direction = Direction::right_to_left;
    return b;
  }

  bool symmetric() const { return !packet_b.has_value(); }

  void validate() const {
    model.validate();
    potential.validate();
    propagation.validate();
    occupation.validate();
    (void)grid();
    require(packet.x0 < potential.well_center, ErrorKind::config,
            "packet.x0 is the left injection point and must lie left of the structure");
    packet_a_at(packet.energy).validate_against(potential);
    packet_b_at(packet.energy).validate_against(potential);
    require(packet_b_at(packet.energy).x0 > potential.well_center, ErrorKind::config,
            "packet_b must be injected from the right");
    require(oracle_stride >= 1, ErrorKind::config, "oracle.stride must be >= 1");
    energies.validate("sweep.energies");
    frequencies.validate("sweep.frequencies");
    for (double e : energies.values) require(e > 0.0, ErrorKind::config, "sweep energies must be positive");
    require(ridge_tolerance >= 0.0, ErrorKind::config, "ridge.tolerance must be non-negative");
  }

  /// Every resolved parameter as key/value text, for output headers.
  std::vector<std::pair<std::string, std::string>> echo() const {
    std::vector<std::pair<std::string, std::string>> kv;
    auto add = [&](const std::string& k, double v) { kv.emplace_back(k, format_number(v)); };
    kv.emplace_back("software_version", version);
    add("model.mass_ratio", model.mass_ratio);
    add("model.effective_mass_eV_fs2_per_nm2", model.effective_mass());
    add("model.hbar_eV_fs", model.hbar);
    add("grid.x_min", grid_x_min);
    add("grid.x_max", grid_x_max);
    add("grid.dx", grid().dx());
    kv.emplace_back("grid.n_points", std::to_string(grid().size()));
    add("potential.v_b", potential.barrier_height);
    add("potential.barrier_width", potential.barrier_width);
    add("potential.well_width", potential.well_width);
    add("potential.well_center", potential.well_center);
    add("potential.osc_amplitude", potential.osc_amplitude);
    add("potential.osc_frequency", potential.osc_angular_frequency);
    kv.emplace_back("potential.osc_sign", std::to_string(potential.osc_sign));
    add("potential.osc_phase", potential.osc_phase);
    add("packet.x0", packet.x0);
    add("packet.sigma", packet.sigma);
    add("packet.energy", packet.energy);
    if (packet_b) {
      add("packet_b.x0", packet_b->x0);
      add("packet_b.sigma", packet_b->sigma);
    }
    add("propagation.dt", propagation.dt);
    add("propagation.max_time", propagation.max_time);
    add("propagation.settle_threshold", propagation.settle_threshold);
    add("propagation.settle_window", propagation.settle_window);
    add("propagation.barrier_margin", propagation.barrier_margin);
    add("occupation.f_a", occupation.f_a);
    add("occupation.f_b", occupation.f_b);
    kv.emplace_back("oracle.stride", std::to_string(oracle_stride));
    kv.emplace_back("sweep.energies.count", std::to_string(energies.values.size()));
    add("sweep.energies.min", energies.values.front());
    add("sweep.energies.max", energies.values.back());
    kv.emplace_back("sweep.frequencies.count", std::to_string(frequencies.values.size()));
    add("sweep.frequencies.min", frequencies.values.front());
    add("sweep.frequencies.max", frequencies.values.back());
    kv.emplace_back("ridge.e_r0_source", e_r0_source == ResonanceSource::static_noise_peak
                                             ? "static_noise_peak"
                                             : "transfer_matrix");
    if (e_r0_override) add("ridge.e_r0", *e_r0_override);
    add("ridge.tolerance", ridge_tolerance);
    return kv;
  }
};

namespace detail {
using json = nlohmann::json;

inline void reject_unknown(const json& obj, const std::string& section, std::set<std::string> known) {
  require(obj.is_object(), ErrorKind::config, section + " must be an object");
  for (const auto& [key, _] : obj.items())
    require(known.count(key) > 0, ErrorKind::config, "unknown key " + section + "." + key);
}

inline double number(const json& obj, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  require(obj.at(key).is_number(), ErrorKind::config, std::string(key) + " must be a number");
  return obj.at(key).get<double>();
}

inline Axis axis(const json& j, const std::string& name) {
  if (j.is_array()) {
    Axis a;
    for (const auto& v : j) {
      require(v.is_number(), ErrorKind::config, name + " entries must be numbers");
      a.values.push_back(v.get<double>());
    }
    return a;
  }
  reject_unknown(j, name, {"min", "max", "count"});
  require(j.contains("min") && j.contains("max") && j.contains("count"), ErrorKind::config,
          name + " needs min, max and count");
  const double count = number(j, "count", 0);
  require(count >= 1 && count == std::floor(count), ErrorKind::config, name + ".count must be a positive integer");
  return Axis::linspace(number(j, "min", 0), number(j, "max", 0), static_cast<std::size_t>(count));
}
}  // namespace detail

inline ExperimentConfig parse_config(const std::string& text) {
  using detail::json;
  using detail::number;
  json root;
  try {
    root = json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::config, std::string("malformed config: ") + e.what());
  }
  detail::reject_unknown(root, "config",
                         {"model", "grid", "potential", "packet", "packet_b", "propagation", "occupation",
                          "oracle", "sweep", "ridge"});
  ExperimentConfig cfg;
  try {
    if (root.contains("model")) {
      const auto& m = root["model"];
      detail::reject_unknown(m, "model", {"mass_ratio"});
      cfg.model.mass_ratio = number(m, "mass_ratio", cfg.model.mass_ratio);
    }
    if (root.contains("grid")) {
      const auto& g = root["grid"];
      detail::reject_unknown(g, "grid", {"x_min", "x_max", "dx"});
      cfg.grid_x_min = number(g, "x_min", cfg.grid_x_min);
      cfg.grid_x_max = number(g, "x_max", cfg.grid_x_max);
      cfg.grid_dx = number(g, "dx", cfg.grid_dx);
    }
    if (root.contains("potential")) {
      const auto& p = root["potential"];
      detail::reject_unknown(p, "potential",
                             {"v_b", "barrier_width", "well_width", "well_center", "osc_amplitude",
                              "osc_frequency", "osc_sign", "osc_phase"});
      auto& s = cfg.potential;
      s.barrier_height = number(p, "v_b", s.barrier_height);
      s.barrier_width = number(p, "barrier_width", s.barrier_width);
      s.well_width = number(p, "well_width", s.well_width);
      s.well_center = number(p, "well_center", s.well_center);
      s.osc_amplitude = number(p, "osc_amplitude", 0.5 * s.barrier_height);
      const double sign = number(p, "osc_sign", 1.0);
      require(sign == 1.0 || sign == -1.0, ErrorKind::config, "potential.osc_sign must be +1 or -1");
      s.osc_sign = static_cast<int>(sign);
      s.osc_phase = number(p, "osc_phase", 0.0);
      const double w = number(p, "osc_frequency", 0.0);
      require(std::isfinite(w), ErrorKind::config, "potential.osc_frequency must be finite");
      s = s.with_signed_frequency(w);
    } else {
      cfg.potential.osc_amplitude = 0.5 * cfg.potential.barrier_height;
    }
    if (root.contains("packet")) {
      const auto& p = root["packet"];
      detail::reject_unknown(p, "packet", {"x0", "sigma", "energy"});
      cfg.packet.x0 = number(p, "x0", cfg.packet.x0);
      cfg.packet.sigma = number(p, "sigma", cfg.packet.sigma);
      cfg.packet.energy = number(p, "energy", cfg.packet.energy);
    }
    if (root.contains("packet_b")) {
      const auto& p = root["packet_b"];
      detail::reject_unknown(p, "packet_b", {"x0", "sigma"});
      WavePacketSpec b = cfg.packet.mirrored(cfg.potential.well_center);
      b.x0 = number(p, "x0", b.x0);
      b.sigma = number(p, "sigma", b.sigma);
      cfg.packet_b = b;
    }
    if (root.contains("propagation")) {
      const auto& p = root["propagation"];
      detail::reject_unknown(p, "propagation",
                             {"dt", "max_time", "settle_threshold", "settle_window", "barrier_margin",
                              "trajectory_every"});
      auto& c = cfg.propagation;
      c.dt = number(p, "dt", c.dt);
      c.max_time = number(p, "max_time", c.max_time);
      c.settle_threshold = number(p, "settle_threshold", c.settle_threshold);
      c.settle_window = number(p, "settle_window", c.settle_window);
      c.barrier_margin = number(p, "barrier_margin", c.barrier_margin);
      const double every = number(p, "trajectory_every", 0.0);
      require(every >= 0 && every == std::floor(every), ErrorKind::config,
              "propagation.trajectory_every must be a non-negative integer");
      c.trajectory_every = static_cast<std::size_t>(every);
    }
    if (root.contains("occupation")) {
      const auto& o = root["occupation"];
      detail::reject_unknown(o, "occupation", {"f_a", "f_b"});
      cfg.occupation.f_a = number(o, "f_a", cfg.occupation.f_a);
      cfg.occupation.f_b = number(o, "f_b", cfg.occupation.f_b);
    }
    if (root.contains("oracle")) {
      const auto& o = root["oracle"];
      detail::reject_unknown(o, "oracle", {"stride"});
      const double stride = number(o, "stride", 4.0);
      require(stride >= 1 && stride == std::floor(stride), ErrorKind::config,
              "oracle.stride must be a positive integer");
      cfg.oracle_stride = static_cast<std::size_t>(stride);
    }
    if (root.contains("sweep")) {
      const auto& s = root["sweep"];
      detail::reject_unknown(s, "sweep", {"energies", "frequencies"});
      if (s.contains("energies")) cfg.energies = detail::axis(s["energies"], "sweep.energies");
      if (s.contains("frequencies")) cfg.frequencies = detail::axis(s["frequencies"], "sweep.frequencies");
    }
    if (root.contains("ridge")) {
      const auto& r = root["ridge"];
      detail::reject_unknown(r, "ridge", {"e_r0_source", "e_r0", "tolerance"});
      if (r.contains("e_r0_source")) {
        require(r["e_r0_source"].is_string(), ErrorKind::config, "ridge.e_r0_source must be a string");
        const auto src = r["e_r0_source"].get<std::string>();
        if (src == "static_noise_peak") cfg.e_r0_source = ResonanceSource::static_noise_peak;
        else if (src == "transfer_matrix") cfg.e_r0_source = ResonanceSource::transfer_matrix;
        else throw Error(ErrorKind::config, "unknown ridge.e_r0_source '" + src + "'");
      }
      if (r.contains("e_r0")) cfg.e_r0_override = number(r, "e_r0", 0.0);
      cfg.ridge_tolerance = number(r, "tolerance", cfg.ridge_tolerance);
    }
  } catch (const detail::json::exception& e) {
    throw Error(ErrorKind::config, std::string("config value error: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::config, "cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace qnoise
