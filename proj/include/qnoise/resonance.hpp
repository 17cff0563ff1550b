#pragma once

#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <complex>
#include <optional>
#include <vector>

#include "qnoise/error.hpp"
#include "qnoise/model.hpp"
#include "qnoise/potential.hpp"

namespace qnoise {

struct TransferResult {
  double transmission = 0.0;
  std::complex<double> r{}, t{};
  bool energy_perturbed = false;
};

/// Plane-wave / evanescent matching across the five regions of the
/// double barrier with the well floor frozen at time t. Amplitudes are
/// referenced to the origin: e^{ikx} + r e^{-ikx} on the left, t e^{ikx} on
/// the right.
inline TransferResult transfer_matrix(const PotentialSpec& spec, double t, double energy,
                                      const PhysicalModel& model) {
  using cplx = std::complex<double>;
  require(std::isfinite(energy) && energy > 0.0, ErrorKind::nonpositive_energy,
          "transfer-matrix energy must be positive");
  spec.validate();
  const auto edges = spec.interfaces();
  const double floor = spec.well_floor(t);
  const std::array<double, 5> levels{0.0, spec.barrier_height, floor, spec.barrier_height, 0.0};

  TransferResult out;
  double e = energy;
  for (double v : levels) {
    if (e - v == 0.0) {
      e += 1e-12;
      out.energy_perturbed = true;
    }
  }
  const double m = model.effective_mass();
  std::array<cplx, 5> k;
  for (std::size_t j = 0; j < 5; ++j) k[j] = std::sqrt(cplx(2.0 * m * (e - levels[j]), 0.0)) / model.hbar;

  const cplx i(0.0, 1.0);
  // Walk right to left, starting from a pure outgoing wave.
  cplx a(1.0, 0.0), b(0.0, 0.0);
  for (std::size_t j = 4; j > 0; --j) {
    const double x = edges[j - 1];
    const cplx ep = std::exp(i * k[j] * x), em = std::exp(-i * k[j] * x);
    const cplx psi = a * ep + b * em;
    const cplx dpsi = i * k[j] * (a * ep - b * em);
    const cplx kl = k[j - 1];
    const cplx lp = std::exp(i * kl * x), lm = std::exp(-i * kl * x);
    a = 0.5 * (psi + dpsi / (i * kl)) / lp;
    b = 0.5 * (psi - dpsi / (i * kl)) / lm;
  }
  out.t = 1.0 / a;
  out.r = b / a;
  out.transmission = std::min(1.0, std::norm(out.t));
  return out;
}

inline double transfer_matrix_transmission(const PotentialSpec& spec, double t, double energy,
                                           const PhysicalModel& model) {
  return transfer_matrix(spec, t, energy, model).transmission;
}

struct Resonance {
  double energy = 0.0;  // eV
  double width = 0.0;   // eV, full width at half maximum
  double peak = 0.0;
};

struct StaticSpectrum {
  std::vector<double> energies;
  std::vector<double> transmissions;
  std::vector<Resonance> resonances;
};

struct ScanBounds {
  double e_min = 0.005;
  double e_max = 0.25;
  double step = 1e-4;
};

inline StaticSpectrum scan_spectrum(const PotentialSpec& spec, const PhysicalModel& model,
                                    const ScanBounds& bounds, double t = 0.0) {
  require(bounds.e_min > 0.0 && bounds.e_max > bounds.e_min && bounds.step > 0.0,
          ErrorKind::invalid_argument, "scan bounds must satisfy 0 < e_min < e_max, step > 0");
  StaticSpectrum s;
  const auto n = static_cast<std::size_t>(std::floor((bounds.e_max - bounds.e_min) / bounds.step + 1e-9)) + 1;
  for (std::size_t j = 0; j < n; ++j) {
    const double e = bounds.e_min + static_cast<double>(j) * bounds.step;
    s.energies.push_back(e);
    s.transmissions.push_back(transfer_matrix_transmission(spec, t, e, model));
  }
  return s;
}

namespace detail {
/// Golden-section maximization of f on [a, b].
template <class F>
double golden_max(F&& f, double a, double b, double tol) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

template <class F>
double bisect(F&& f, double lo, double hi, double tol) {
  double flo = f(lo);
  for (int it = 0; it < 200 && hi - lo > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}
}  // namespace detail

/// Local maxima of the frozen-potential transmission with T > 0.5, refined by
/// golden section; width is the full width at T_max / 2 (NaN if a half-maximum
/// crossing is not found).
inline std::vector<Resonance> find_resonances(const PotentialSpec& spec, const PhysicalModel& model,
                                              const ScanBounds& bounds = {}, double tolerance = 1e-6,
                                              double t = 0.0) {
  require(bounds.e_min > 0.0 && bounds.e_max <= spec.barrier_height + std::abs(spec.well_floor(t)),
          ErrorKind::invalid_argument, "resonance scan must lie inside (0, V_b)");
  const auto spectrum = scan_spectrum(spec, model, bounds, t);
  const auto& e = spectrum.energies;
  const auto& tr = spectrum.transmissions;
  auto transmission = [&](double en) { return transfer_matrix_transmission(spec, t, en, model); };

  std::vector<Resonance> found;
  for (std::size_t j = 1; j + 1 < e.size(); ++j) {
    if (!(tr[j] > tr[j - 1] && tr[j] >= tr[j + 1])) continue;
    Resonance res;
    res.energy = detail::golden_max(transmission, e[j - 1], e[j + 1], tolerance);
    res.peak = transmission(res.energy);
    if (res.peak <= 0.5) continue;
    const double half = 0.5 * res.peak;
    auto below_half = [&](double en) { return transmission(en) - half; };
    const double lo_limit = 1e-9, hi_limit = 2.0 * spec.barrier_height + spec.osc_amplitude;
    double left = std::numeric_limits<double>::quiet_NaN();
    double right = std::numeric_limits<double>::quiet_NaN();
    for (double x = res.energy; x - bounds.step > lo_limit; x -= bounds.step) {
      if (transmission(x - bounds.step) < half) {
        left = detail::bisect(below_half, x - bounds.step, x, 1e-9);
        break;
      }
    }
    for (double x = res.energy; x + bounds.step < hi_limit; x += bounds.step) {
      if (transmission(x + bounds.step) < half) {
        right = detail::bisect(below_half, x, x + bounds.step, 1e-9);
        break;
      }
    }
    res.width = right - left;
    found.push_back(res);
  }
  require(!found.empty(), ErrorKind::no_resonance_found, "no transmission maximum above 0.5 in range");
  return found;
}

/// Parameters of the quasi-static resonance ridge.
struct RidgeParams {
  double e_r0 = 0.073;       // eV, static resonance
  double amplitude = 0.2;    // eV, well oscillation amplitude (V_b / 2)
  double x0 = 175.0;         // nm, injection distance from the structure centre
  int osc_sign = 1;
  double structure_length = 7.2;  // nm, for the transit time
  PhysicalModel model;
};

/// Ballistic flight time |x0| m / sqrt(2 m E).
inline double arrival_time(double energy, double x0, const PhysicalModel& model) {
  require(std::isfinite(energy) && energy > 0.0, ErrorKind::nonpositive_energy,
          "arrival time needs a positive energy");
  require(x0 != 0.0, ErrorKind::invalid_argument, "injection distance must be non-zero");
  return std::abs(x0) * model.effective_mass() / std::sqrt(2.0 * model.effective_mass() * energy);
}

/// Barrier transit time: structure length over the group velocity at E.
inline double transit_time(double energy, double structure_length, const PhysicalModel& model) {
  require(energy > 0.0, ErrorKind::nonpositive_energy, "transit time needs a positive energy");
  return structure_length / model.velocity(energy);
}

/// E_r = E_r0 + sign * A * sin(w t_b)
inline double shifted_resonance(double t_b, const RidgeParams& p, double w) {
  return p.e_r0 + static_cast<double>(p.osc_sign) * p.amplitude * std::sin(w * t_b);
}

/// w(E_r) = sign * sqrt(2 m E_r) / (|x0| m) * asin((E_r - E_r0) / A)
inline double ridge_frequency(double e_r, const RidgeParams& p) {
  require(e_r > 0.0, ErrorKind::nonpositive_energy, "ridge energy must be positive");
  double arg = (e_r - p.e_r0) / p.amplitude;
  require(std::abs(arg) <= 1.0 + 1e-12, ErrorKind::out_of_arcsin_domain,
          "energy outside the reach of the oscillating well");
  arg = std::clamp(arg, -1.0, 1.0);
  return static_cast<double>(p.osc_sign) / arrival_time(e_r, p.x0, p.model) * std::asin(arg);
}

inline bool in_ridge_domain(double e_r, const RidgeParams& p) {
  return e_r > 0.0 && std::abs((e_r - p.e_r0) / p.amplitude) <= 1.0;
}

/// Quasi-static validity: |w| tau_t at most this fraction.
inline constexpr double ridge_regime_limit = 0.5;

inline bool ridge_regime_valid(double w, double e_r, const RidgeParams& p) {
  return std::abs(w) <= ridge_regime_limit / transit_time(e_r, p.structure_length, p.model);
}

/// Energy on the ridge branch that passes through (E_r0, w = 0) for a given
/// frequency; empty when the branch never reaches w.
inline std::optional<double> ridge_energy(double w, const RidgeParams& p) {
  if (w == 0.0) return p.e_r0;
  const double tol = 1e-13;
  auto g = [&](double e) { return static_cast<double>(p.osc_sign) * ridge_frequency(e, p); };
  const double target = static_cast<double>(p.osc_sign) * w;
  if (target > 0.0) {
    const double hi = p.e_r0 + p.amplitude;
    if (target > g(hi)) return std::nullopt;
    return detail::bisect([&](double e) { return g(e) - target; }, p.e_r0, hi, tol);
  }
  const double lo = std::max(1e-12, p.e_r0 - p.amplitude);
  const double e_min = detail::golden_max([&](double e) { return -g(e); }, lo, p.e_r0, 1e-12);
  if (target < g(e_min)) return std::nullopt;
  return detail::bisect([&](double e) { return g(e) - target; }, e_min, p.e_r0, tol);
}

struct RidgeSample {
  double e_r = 0.0;
  double w = 0.0;
  double t_b = 0.0;
  double tau_t = 0.0;
  bool regime_valid = true;
};

inline std::vector<RidgeSample> ridge_table(const RidgeParams& p, const std::vector<double>& energies) {
  std::vector<RidgeSample> out;
  for (double e : energies) {
    if (!in_ridge_domain(e, p)) continue;
    RidgeSample s;
    s.e_r = e;
    s.w = ridge_frequency(e, p);
    s.t_b = arrival_time(e, p.x0, p.model);
    s.tau_t = transit_time(e, p.structure_length, p.model);
    s.regime_valid = ridge_regime_valid(s.w, e, p);
    out.push_back(s);
  }
  return out;
}

}  // namespace qnoise
