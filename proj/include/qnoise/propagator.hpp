#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "qnoise/error.hpp"
#include "qnoise/format.hpp"
#include "qnoise/model.hpp"
#include "qnoise/potential.hpp"
#include "qnoise/tridiagonal.hpp"
#include "qnoise/wave_packet.hpp"

namespace qnoise {

struct PropagationConfig {
  double dt = 0.1;                   // fs
  double max_time = 4000.0;          // fs
  double settle_threshold = 1e-6;    // probability in the barrier window
  double settle_window = 20.0;       // fs
  double barrier_margin = 2.0;       // nm
  std::size_t trajectory_every = 0;  // 0 disables the trajectory dump

  std::size_t window_steps() const {
    return static_cast<std::size_t>(std::ceil(settle_window / dt - 1e-9));
  }

  void validate() const {
    require(std::isfinite(dt) && dt > 0.0, ErrorKind::config, "propagation.dt must be positive");
    require(std::isfinite(max_time) && max_time > 0.0, ErrorKind::config,
            "propagation.max_time must be positive");
    require(std::isfinite(settle_threshold) && settle_threshold > 0.0, ErrorKind::config,
            "propagation.settle_threshold must be positive");
    require(settle_window >= 10.0 * dt, ErrorKind::config,
            "propagation.settle_window must be at least 10 dt");
    require(std::isfinite(barrier_margin) && barrier_margin >= 0.0, ErrorKind::config,
            "propagation.barrier_margin must be non-negative");
  }
};

struct TimeSample {
  double t;
  double value;
};

struct PropagationResult {
  WaveField final_field;
  double t1 = 0.0;
  std::size_t steps = 0;
  double norm_drift = 0.0;
  std::vector<TimeSample> barrier_probability_history;
};

/// Crank-Nicolson integrator for one particle on a hard-wall grid:
/// (1 + i dt H/2hbar) psi(t+dt) = (1 - i dt H/2hbar) psi(t),
/// with H evaluated at the midpoint time t + dt/2.
class CrankNicolson {
 public:
  CrankNicolson(const Grid1D& grid, const PotentialSpec& spec, const PhysicalModel& model, double dt)
      : grid_(grid), spec_(spec), dt_(dt), profile_(sample_profile(spec, grid)) {
    model.validate();
    require(std::isfinite(dt) && dt > 0.0, ErrorKind::invalid_argument, "dt must be positive");
    const std::size_t n = grid.size();
    const std::size_t m = n - 2;  // interior unknowns
    const double kinetic = model.hbar * model.hbar / (2.0 * model.effective_mass() * grid.dx() * grid.dx());
    alpha_ = dt / (2.0 * model.hbar);
    kinetic_ = kinetic;
    off_ = complex(0.0, -alpha_ * kinetic);

    // Interior indices whose potential depends on time.
    std::size_t lo = m, hi = 0;
    for (std::size_t j = 0; j < m; ++j) {
      if (profile_.well_fraction[j + 1] > 0.0) {
        lo = std::min(lo, j);
        hi = std::max(hi, j);
      }
    }
    if (lo > hi) lo = hi = m / 2;
    hi = std::min(hi, m - 2);
    lo = std::min(lo, hi);
    window_lo_ = lo;

    floor_ = spec.well_floor(0.5 * dt);
    std::vector<double> v;
    profile_.evaluate(floor_, v);
    potential_ = v;
    std::vector<complex> sub(m, off_), sup(m, off_), diag(m);
    for (std::size_t j = 0; j < m; ++j) diag[j] = complex(1.0, alpha_ * (2.0 * kinetic + v[j + 1]));
    solver_.emplace(std::move(sub), std::move(diag), std::move(sup), lo, hi);
    window_diag_.resize(hi - lo + 1);
  }

  const Grid1D& grid() const { return grid_; }
  double dt() const { return dt_; }

  /// Advances psi (full grid, endpoints pinned to zero) from t to t + dt.
  void advance(std::span<complex> psi, double t) { advance_batch<1>({psi}, t); }

  /// Advances K fields that share this potential by one step.
  template <std::size_t K>
  void advance_batch(const std::array<std::span<complex>, K>& psi, double t) {
    using detail::mul;
    update_potential(spec_.well_floor(t + 0.5 * dt_));
    const std::size_t n = grid_.size();
    const std::size_t m = n - 2;
    if (rhs_.size() < K * m) rhs_.resize(K * m);
    const complex neighbor(0.0, alpha_ * kinetic_);
    std::array<std::span<const complex>, K> rhs;
    std::array<std::span<complex>, K> x;
    for (std::size_t k = 0; k < K; ++k) {
      auto& f = psi[k];
      f[0] = 0.0;
      f[n - 1] = 0.0;
      complex* r = rhs_.data() + k * m;
      for (std::size_t j = 0; j < m; ++j) {
        const std::size_t i = j + 1;
        const complex d(1.0, -alpha_ * (2.0 * kinetic_ + potential_[i]));
        r[j] = mul(d, f[i]) + mul(neighbor, f[i - 1] + f[i + 1]);
      }
      rhs[k] = std::span<const complex>(r, m);
      x[k] = f.subspan(1, m);
    }
    solver_->template solve_batch<K>(rhs, x);
  }

 private:
  void update_potential(double floor) {
    if (floor == floor_) return;
    floor_ = floor;
    profile_.evaluate(floor, potential_);
    for (std::size_t j = 0; j < window_diag_.size(); ++j) {
      const std::size_t i = window_lo_ + j + 1;
      window_diag_[j] = complex(1.0, alpha_ * (2.0 * kinetic_ + potential_[i]));
    }
    solver_->set_window_diagonal(window_diag_);
  }

  Grid1D grid_;
  PotentialSpec spec_;
  double dt_;
  PotentialProfile profile_;
  double alpha_ = 0.0;
  double kinetic_ = 0.0;
  complex off_;
  double floor_ = 0.0;
  std::vector<double> potential_;
  std::size_t window_lo_ = 0;
  std::vector<complex> window_diag_;
  std::vector<complex> rhs_;
  std::optional<PartitionedTridiagonal<complex>> solver_;
};

/// One Crank-Nicolson step of a field; builds a fresh integrator each call.
inline WaveField step(const WaveField& field, const PotentialSpec& spec, const PhysicalModel& model,
                      double dt) {
  CrankNicolson cn(field.grid, spec, model, dt);
  WaveField out = field;
  cn.advance(out.values, field.time);
  out.time = field.time + dt;
  return out;
}

/// Probability inside [a, b] (node-wise rectangle rule).
inline double probability_in(const WaveField& f, double a, double b) {
  double s = 0.0;
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    const double x = f.grid.x(i);
    if (x >= a && x <= b) s += std::norm(f.values[i]);
  }
  return s * f.grid.dx();
}

/// Window probed by the settling rule: the structure widened by the margin.
inline std::pair<double, double> settle_window_bounds(const PotentialSpec& spec,
                                                      const PropagationConfig& cfg) {
  return {spec.left_edge() - cfg.barrier_margin, spec.right_edge() + cfg.barrier_margin};
}

inline constexpr double boundary_density_limit = 1e-10;

/// Runs K fields forward in time through one shared potential, tracking the
/// barrier-window probability and the hard-wall neighbours of each.
template <std::size_t K>
class JointEvolution {
 public:
  JointEvolution(std::array<WaveField, K> fields, const PotentialSpec& spec, const PhysicalModel& model,
                 const PropagationConfig& cfg)
      : fields_(std::move(fields)),
        cn_(fields_[0].grid, spec, model, cfg.dt),
        cfg_(cfg),
        start_step_(static_cast<std::size_t>(std::llround(fields_[0].time / cfg.dt))) {
    for (const auto& f : fields_) {
      require(f.grid == fields_[0].grid, ErrorKind::mismatched_grid, "joint evolution needs one grid");
      require(f.time == fields_[0].time, ErrorKind::mismatched_time, "joint evolution needs one start time");
    }
    const auto [a, b] = settle_window_bounds(spec, cfg);
    const Grid1D& g = fields_[0].grid;
    window_begin_ = g.size();
    window_end_ = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double x = g.x(i);
      if (x >= a && x <= b) {
        window_begin_ = std::min(window_begin_, i);
        window_end_ = i + 1;
      }
    }
    if (window_begin_ > window_end_) window_begin_ = window_end_;
  }

  const WaveField& field(std::size_t k = 0) const { return fields_[k]; }
  double time() const { return fields_[0].time; }
  std::size_t steps() const { return steps_; }

  double barrier_probability(std::size_t k = 0) const {
    double s = 0.0;
    for (std::size_t i = window_begin_; i < window_end_; ++i) s += std::norm(fields_[k].values[i]);
    return s * fields_[k].grid.dx();
  }

  /// Largest |psi|^2 on the nodes adjacent to the hard walls.
  double boundary_density(std::size_t k = 0) const {
    const auto& v = fields_[k].values;
    return std::max(std::norm(v[1]), std::norm(v[v.size() - 2]));
  }

  void step() {
    std::array<std::span<complex>, K> views;
    for (std::size_t k = 0; k < K; ++k) views[k] = fields_[k].values;
    cn_.template advance_batch<K>(views, time());
    ++steps_;
    const double t = static_cast<double>(start_step_ + steps_) * cfg_.dt;
    for (std::size_t k = 0; k < K; ++k) {
      fields_[k].time = t;
      require(boundary_density(k) <= boundary_density_limit, ErrorKind::boundary_contamination,
              "probability density reached the hard wall at t = " + format_number(t) + " fs");
    }
  }

  std::array<WaveField, K> release() && { return std::move(fields_); }

 private:
  std::array<WaveField, K> fields_;
  CrankNicolson cn_;
  PropagationConfig cfg_;
  std::size_t start_step_;
  std::size_t steps_ = 0;
  std::size_t window_begin_ = 0, window_end_ = 0;
};

namespace detail {
inline void write_trajectory_row(std::ostream& out, const WaveField& f, double barrier) {
  out << format_number(f.time) << ',' << format_number(norm2(f)) << ','
      << format_number(barrier) << ',' << format_number(mean_position(f)) << '\n';
}

/// Settling rule for one field. The clock is armed once the window
/// probability first reaches the threshold or the centroid's ballistic
/// arrival time has passed, whichever comes first; the field is settled
/// after a full window of consecutive samples below the threshold.
struct SettleTracker {
  double threshold = 0.0;
  double arrival = 0.0;
  std::size_t window = 0;
  bool armed = false;
  std::size_t below = 0;
  std::optional<double> settled_at;

  void observe(double t, double p) {
    if (settled_at) return;
    if (!armed && (p >= threshold || t >= arrival)) {
      armed = true;
      below = 0;
    }
    below = p < threshold ? below + 1 : 0;
    if (armed && below >= window) settled_at = t;
  }
};

inline double ballistic_arrival(const WaveField& f, const PotentialSpec& spec, const PhysicalModel& model) {
  const double speed = model.hbar * std::abs(mean_wave_number(f)) / model.effective_mass();
  const double distance = std::abs(mean_position(f) - spec.well_center);
  return speed > 0.0 ? distance / speed : std::numeric_limits<double>::infinity();
}
}  // namespace detail

inline constexpr const char* trajectory_header = "t,norm2,barrier_probability,centroid";

template <std::size_t K>
struct JointPropagationResult {
  std::array<WaveField, K> fields;     // all at the common time t1
  std::array<double, K> settle_times;  // individual settling times
  double t1 = 0.0;                     // latest settling time
  std::size_t steps = 0;
  std::array<double, K> norm_drift;
  std::array<std::vector<TimeSample>, K> barrier_probability_history;
};

/// Steps K fields together until every one of them has settled; the fields
/// are returned at the latest settling time.
template <std::size_t K>
JointPropagationResult<K> propagate_jointly(std::array<WaveField, K> initial, const PotentialSpec& spec,
                                            const PhysicalModel& model, const PropagationConfig& cfg,
                                            std::array<std::ostream*, K> trajectories = {}) {
  cfg.validate();
  std::array<double, K> norm_start;
  std::array<detail::SettleTracker, K> trackers;
  for (std::size_t k = 0; k < K; ++k) {
    norm_start[k] = norm2(initial[k]);
    trackers[k].threshold = cfg.settle_threshold;
    trackers[k].window = cfg.window_steps();
    trackers[k].arrival = detail::ballistic_arrival(initial[k], spec, model);
    require(!std::isfinite(trackers[k].arrival) || cfg.max_time >= 2.0 * trackers[k].arrival, ErrorKind::config,
            "propagation.max_time must be at least twice the ballistic arrival time");
  }

  JointEvolution<K> evo(std::move(initial), spec, model, cfg);
  const bool dump = cfg.trajectory_every > 0;
  for (std::size_t k = 0; k < K; ++k) {
    require(evo.barrier_probability(k) < cfg.settle_threshold, ErrorKind::invalid_argument,
            "packet must start outside the barrier region");
    if (dump && trajectories[k]) detail::write_trajectory_row(*trajectories[k], evo.field(k), evo.barrier_probability(k));
  }

  std::array<std::vector<TimeSample>, K> history;
  const auto max_steps = static_cast<std::size_t>(std::ceil(cfg.max_time / cfg.dt));
  auto all_settled = [&] {
    return std::all_of(trackers.begin(), trackers.end(), [](const auto& tr) { return tr.settled_at.has_value(); });
  };
  while (!all_settled()) {
    require(evo.steps() < max_steps, ErrorKind::not_settled,
            "barrier region still populated at max_time = " + format_number(cfg.max_time) + " fs");
    evo.step();
    const double t = evo.time();
    for (std::size_t k = 0; k < K; ++k) {
      const double p = evo.barrier_probability(k);
      history[k].push_back({t, p});
      trackers[k].observe(t, p);
      if (dump && trajectories[k] && evo.steps() % cfg.trajectory_every == 0)
        detail::write_trajectory_row(*trajectories[k], evo.field(k), p);
    }
  }
  const std::size_t steps = evo.steps();
  const double t1 = evo.time();
  std::array<double, K> settle_times, drift;
  auto fields = std::move(evo).release();
  for (std::size_t k = 0; k < K; ++k) {
    settle_times[k] = *trackers[k].settled_at;
    drift[k] = std::abs(norm2(fields[k]) - norm_start[k]);
  }
  return JointPropagationResult<K>{std::move(fields), settle_times, t1, steps, drift, std::move(history)};
}

/// Steps until the barrier-window probability has stayed below the settle
/// threshold for a full settle window (see detail::SettleTracker).
inline PropagationResult propagate_until_settled(const WaveField& initial, const PotentialSpec& spec,
                                                 const PhysicalModel& model,
                                                 const PropagationConfig& cfg,
                                                 std::ostream* trajectory = nullptr) {
  auto joint = propagate_jointly<1>({initial}, spec, model, cfg, {trajectory});
  return PropagationResult{std::move(joint.fields[0]), joint.t1, joint.steps, joint.norm_drift[0],
                           std::move(joint.barrier_probability_history[0])};
}

/// Continues a settled field to a later step count on the same time lattice.
inline WaveField advance_to(const WaveField& field, const PotentialSpec& spec, const PhysicalModel& model,
                            const PropagationConfig& cfg, double t_target) {
  JointEvolution<1> evo({field}, spec, model, cfg);
  const auto target = static_cast<std::size_t>(std::llround(t_target / cfg.dt));
  const auto start = static_cast<std::size_t>(std::llround(field.time / cfg.dt));
  require(target >= start, ErrorKind::invalid_argument, "cannot propagate backwards");
  for (std::size_t s = start; s < target; ++s) evo.step();
  return std::move(std::move(evo).release()[0]);
}

}  // namespace qnoise
