#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "qnoise/error.hpp"
#include "qnoise/propagator.hpp"
#include "qnoise/wave_packet.hpp"

namespace qnoise {

enum class Side { left, right };

struct Coefficients {
  double transmission = 0.0;
  double reflection = 0.0;
};

struct QuadrantProbabilities {
  double p_ll = 0.0;
  double p_rr = 0.0;
  double p_lr = 0.0;
};

/// Single-particle coefficients of both packets, side-resolved overlaps and
/// the two-particle quadrant probabilities. Packet a is injected from the
/// left, packet b from the right.
struct ScatteringRecord {
  double t_a = 0.0, r_a = 0.0, t_b = 0.0, r_b = 0.0;
  complex i_left{}, i_right{};
  double p_ll = 0.0, p_rr = 0.0, p_lr = 0.0;
  double t1 = 0.0;
};

/// Weight of node i on one side of the divider. A node on the divider
/// contributes half of its cell to each side.
inline double side_weight(const Grid1D& grid, std::size_t i, Side side, double divider = 0.0) {
  const double x = grid.x(i) - divider;
  const double tol = 1e-9 * grid.dx();
  if (std::abs(x) <= tol) return 0.5 * grid.dx();
  const bool left = x < 0.0;
  return (left == (side == Side::left)) ? grid.dx() : 0.0;
}

inline double side_probability(const WaveField& f, Side side, double divider = 0.0) {
  double s = 0.0;
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    const double w = side_weight(f.grid, i, side, divider);
    if (w != 0.0) s += std::norm(f.values[i]) * w;
  }
  return s;
}

/// Settledness is checked against the same window and threshold the
/// propagator uses.
inline void require_settled(const WaveField& f, const PotentialSpec& spec, const PropagationConfig& cfg) {
  const auto [a, b] = settle_window_bounds(spec, cfg);
  require(probability_in(f, a, b) <= cfg.settle_threshold, ErrorKind::not_settled_input,
          "field still populates the barrier region");
}

/// R is the probability on the injection side of the divider, T on the far side.
inline Coefficients coefficients(const WaveField& f, Direction injected, const PotentialSpec& spec,
                                 const PropagationConfig& cfg) {
  require_settled(f, spec, cfg);
  const double left = side_probability(f, Side::left, spec.well_center);
  const double right = side_probability(f, Side::right, spec.well_center);
  return injected == Direction::left_to_right ? Coefficients{right, left} : Coefficients{left, right};
}

/// Discrete sum of phi_a conj(phi_b) dx over one side of the divider.
inline complex overlap(const WaveField& a, const WaveField& b, Side side, double divider = 0.0) {
  require(a.grid == b.grid, ErrorKind::mismatched_grid, "overlap fields live on different grids");
  require(std::abs(a.time - b.time) <= 1e-9 * std::max(1.0, std::abs(a.time)),
          ErrorKind::mismatched_time, "overlap fields are at different times");
  complex s{};
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    const double w = side_weight(a.grid, i, side, divider);
    if (w != 0.0) s += a.values[i] * std::conj(b.values[i]) * w;
  }
  return s;
}

inline constexpr double negative_probability_tolerance = 1e-9;

/// P_LL = R_a T_b - |I_L|^2, P_RR = T_a R_b - |I_R|^2,
/// P_LR = R_a R_b + T_a T_b + |I_L|^2 + |I_R|^2.
inline QuadrantProbabilities quadrant_probabilities(double t_a, double r_a, double t_b, double r_b,
                                                    complex i_left, complex i_right) {
  QuadrantProbabilities q;
  q.p_ll = r_a * t_b - std::norm(i_left);
  q.p_rr = t_a * r_b - std::norm(i_right);
  q.p_lr = r_a * r_b + t_a * t_b + std::norm(i_left) + std::norm(i_right);
  require(q.p_ll >= -negative_probability_tolerance && q.p_rr >= -negative_probability_tolerance,
          ErrorKind::negative_probability,
          "same-side probability is negative; settling or grid resolution is broken");
  return q;
}

inline QuadrantProbabilities quadrant_probabilities(const ScatteringRecord& rec) {
  return quadrant_probabilities(rec.t_a, rec.r_a, rec.t_b, rec.r_b, rec.i_left, rec.i_right);
}

inline ScatteringRecord analyze(const WaveField& a, const WaveField& b, const PotentialSpec& spec,
                                const PropagationConfig& cfg) {
  ScatteringRecord rec;
  const auto ca = coefficients(a, Direction::left_to_right, spec, cfg);
  const auto cb = coefficients(b, Direction::right_to_left, spec, cfg);
  rec.t_a = ca.transmission;
  rec.r_a = ca.reflection;
  rec.t_b = cb.transmission;
  rec.r_b = cb.reflection;
  rec.i_left = overlap(a, b, Side::left, spec.well_center);
  rec.i_right = overlap(a, b, Side::right, spec.well_center);
  const auto q = quadrant_probabilities(rec);
  rec.p_ll = q.p_ll;
  rec.p_rr = q.p_rr;
  rec.p_lr = q.p_lr;
  rec.t1 = a.time;
  return rec;
}

struct OracleResult {
  QuadrantProbabilities quadrants;
  std::size_t stride = 1;
  std::size_t points = 0;
};

/// Brute-force quadrant masses of the antisymmetrized two-particle state
/// Phi(x1, x2) = [a(x1) b(x2) - a(x2) b(x1)] / sqrt(2), integrated on every
/// stride-th node. The stride is raised (and reported) when the coarse grid
/// would exceed max_points nodes per axis.
inline OracleResult two_particle_quadrant_oracle(const WaveField& a, const WaveField& b,
                                                 std::size_t stride = 4, double divider = 0.0,
                                                 std::size_t max_points = 8192) {
  require(a.grid == b.grid, ErrorKind::mismatched_grid, "oracle fields live on different grids");
  require(std::abs(a.time - b.time) <= 1e-9 * std::max(1.0, std::abs(a.time)),
          ErrorKind::mismatched_time, "oracle fields are at different times");
  require(stride >= 1 && max_points >= 2, ErrorKind::invalid_argument, "stride must be >= 1");
  const std::size_t n = a.values.size();
  while ((n + stride - 1) / stride > max_points) ++stride;

  std::vector<complex> ca, cb;
  std::vector<double> wl, wr;
  const double h = static_cast<double>(stride) * a.grid.dx();
  for (std::size_t i = 0; i < n; i += stride) {
    ca.push_back(a.values[i]);
    cb.push_back(b.values[i]);
    const double x = a.grid.x(i) - divider;
    if (std::abs(x) <= 1e-9 * a.grid.dx()) {
      wl.push_back(0.5 * h);
      wr.push_back(0.5 * h);
    } else {
      wl.push_back(x < 0.0 ? h : 0.0);
      wr.push_back(x < 0.0 ? 0.0 : h);
    }
  }
  const std::size_t m = ca.size();
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  double ll = 0.0, rr = 0.0, lr = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    double row_l = 0.0, row_r = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const complex phi = (ca[i] * cb[j] - ca[j] * cb[i]) * inv_sqrt2;
      const double p = std::norm(phi);
      row_l += p * wl[j];
      row_r += p * wr[j];
    }
    ll += wl[i] * row_l;
    rr += wr[i] * row_r;
    lr += wl[i] * row_r + wr[i] * row_l;
  }
  return {{ll, rr, lr}, stride, m};
}

}  // namespace qnoise
