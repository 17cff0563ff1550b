#pragma once

#include <cmath>

#include "qnoise/error.hpp"
#include "qnoise/model.hpp"

namespace qnoise {

struct OccupationPair {
  double f_a = 1.0;
  double f_b = 1.0;

  void validate() const {
    require(f_a >= 0.0 && f_a <= 1.0 && f_b >= 0.0 && f_b <= 1.0, ErrorKind::invalid_probability,
            "occupations must lie in [0, 1]");
  }
};

/// Distribution of the net number N of electrons moved left -> right by one
/// injection attempt; N is restricted to {-1, 0, +1}.
struct CountDistribution {
  double p_minus = 0.0;
  double p_zero = 1.0;
  double p_plus = 0.0;

  double mean() const { return p_plus - p_minus; }
  double second_moment() const { return p_plus + p_minus; }
  double variance() const {
    const double m = mean();
    return second_moment() - m * m;
  }
};

namespace detail {
inline void require_probability(double p, const char* name) {
  require(std::isfinite(p) && p >= 0.0 && p <= 1.0, ErrorKind::invalid_probability,
          std::string(name) + " must lie in [0, 1]");
}
}  // namespace detail

/// Enumerates the four injection cases (both, only a, only b, neither).
inline CountDistribution count_distribution(const OccupationPair& occ, double t, double r, double p_ll,
                                            double p_rr) {
  occ.validate();
  detail::require_probability(t, "T");
  detail::require_probability(r, "R");
  detail::require_probability(p_ll, "P_LL");
  detail::require_probability(p_rr, "P_RR");
  require(std::abs(t + r - 1.0) <= 1e-9, ErrorKind::invalid_probability, "T + R must equal 1");
  require(p_ll + p_rr <= 1.0 + 1e-12, ErrorKind::invalid_probability, "P_LL + P_RR exceeds 1");

  const double both = occ.f_a * occ.f_b;
  const double only_a = occ.f_a * (1.0 - occ.f_b);
  const double only_b = (1.0 - occ.f_a) * occ.f_b;
  const double neither = (1.0 - occ.f_a) * (1.0 - occ.f_b);
  const double p_lr = 1.0 - p_ll - p_rr;

  CountDistribution d;
  d.p_plus = both * p_rr + only_a * t;
  d.p_minus = both * p_ll + only_b * t;
  d.p_zero = both * p_lr + only_a * r + only_b * r + neither;
  return d;
}

/// Zero-frequency noise in units of 4q^2/h. The bracket assumes a symmetric
/// structure (P_RR = P_LL, T_a = T_b = T).
struct NoiseRecord {
  double bracket = 0.0;
  double s = 0.0;
  OccupationPair occupations;
  double transmission = 0.0;
  double p_ll = 0.0;
  bool assumes_symmetric = true;
};

inline double noise_bracket(const OccupationPair& occ, double t, double p_ll) {
  const double fa = occ.f_a, fb = occ.f_b;
  return t * (fa * (1.0 - fa) + fb * (1.0 - fb)) + t * (1.0 - t) * (fa - fb) * (fa - fb) +
         2.0 * p_ll * fa * fb;
}

inline NoiseRecord noise(const OccupationPair& occ, double t, double p_ll) {
  occ.validate();
  detail::require_probability(t, "T");
  require(std::isfinite(p_ll) && p_ll >= -1e-12 && p_ll <= 1.0, ErrorKind::invalid_probability,
          "P_LL must lie in [0, 1]");
  NoiseRecord rec;
  rec.bracket = noise_bracket(occ, t, p_ll);
  rec.s = rec.bracket;
  rec.occupations = occ;
  rec.transmission = t;
  rec.p_ll = p_ll;
  return rec;
}

/// 4 q^2 / h in siemens; multiplies S to obtain SI units.
inline constexpr double four_q2_over_h_si =
    4.0 * constants::elementary_charge_si * constants::elementary_charge_si / constants::planck_si;

inline double noise_si(const NoiseRecord& rec) { return rec.s * four_q2_over_h_si; }

/// |Var(N) - bracket|, which vanishes when the noise formula follows from the
/// count statistics.
inline double variance_identity_check(const OccupationPair& occ, double t, double p_ll, double p_rr) {
  const auto dist = count_distribution(occ, t, 1.0 - t, p_ll, p_rr);
  return std::abs(dist.variance() - noise_bracket(occ, t, p_ll));
}

}  // namespace qnoise
