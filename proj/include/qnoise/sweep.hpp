#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "qnoise/config.hpp"
#include "qnoise/error.hpp"
#include "qnoise/format.hpp"
#include "qnoise/noise.hpp"
#include "qnoise/propagator.hpp"
#include "qnoise/resonance.hpp"
#include "qnoise/scattering.hpp"

namespace qnoise {

struct CellResult {
  double energy = 0.0;
  double frequency = 0.0;
  ScatteringRecord scattering;
  NoiseRecord noise;
  std::string error;  // empty on success

  bool ok() const { return error.empty(); }
};

/// Settled single-particle fields of both packets at a common time.
struct SettledPair {
  WaveField a, b;
  double norm_drift_a = 0.0, norm_drift_b = 0.0;
  double t1 = 0.0;
};

struct TrajectoryStreams {
  std::ostream* a = nullptr;
  std::ostream* b = nullptr;
};

/// Propagates both packets through the same oscillating structure and brings
/// them to the later of the two settling times.
inline SettledPair propagate_pair(const ExperimentConfig& cfg, double energy, double frequency,
                                  TrajectoryStreams traj = {}) {
  const Grid1D grid = cfg.grid();
  const PotentialSpec spec = cfg.potential.with_signed_frequency(frequency);
  const auto spec_a = cfg.packet_a_at(energy);
  const auto spec_b = cfg.packet_b_at(energy);
  spec_a.validate_against(spec);
  spec_b.validate_against(spec);

  auto joint = propagate_jointly<2>({init_gaussian(spec_a, grid, cfg.model), init_gaussian(spec_b, grid, cfg.model)},
                                   spec, cfg.model, cfg.propagation, {traj.a, traj.b});
  return SettledPair{std::move(joint.fields[0]), std::move(joint.fields[1]), joint.norm_drift[0],
                     joint.norm_drift[1], joint.t1};
}

inline std::string cell_label(double energy, double frequency) {
  return "cell (E = " + format_number(energy) + " eV, w = " + format_number(frequency) + " rad/fs)";
}

/// One (E, w) cell: scattering record plus noise. Errors carry the cell identity.
inline CellResult run_single(const ExperimentConfig& cfg, double energy, double frequency,
                             TrajectoryStreams traj = {}) {
  try {
    const auto pair = propagate_pair(cfg, energy, frequency, traj);
    CellResult cell;
    cell.energy = energy;
    cell.frequency = frequency;
    cell.scattering = analyze(pair.a, pair.b, cfg.potential.with_signed_frequency(frequency), cfg.propagation);
    const double p_ll = std::max(0.0, cell.scattering.p_ll);
    cell.noise = noise(cfg.occupation, std::clamp(cell.scattering.t_a, 0.0, 1.0), p_ll);
    cell.noise.assumes_symmetric = cfg.symmetric();
    return cell;
  } catch (const Error& e) {
    throw Error(e.kind(), cell_label(energy, frequency) + ": " + e.message());
  }
}

struct RidgePoint {
  double frequency = 0.0;
  double e_star = std::numeric_limits<double>::quiet_NaN();  // refined noise argmax
  bool at_edge = false;
  double e_predicted = std::numeric_limits<double>::quiet_NaN();
  double deviation = std::numeric_limits<double>::quiet_NaN();
  bool evaluable = false;      // prediction exists inside the swept energies
  bool regime_valid = false;   // |w| <= 0.5 / tau_t
  bool within_tolerance = false;
};

struct RidgeReport {
  double e_r0 = 0.0;
  std::string e_r0_source;
  double e_r0_transfer_matrix = 0.0;
  double tolerance = 0.0;  // eV
  std::vector<RidgePoint> points;

  std::size_t evaluated() const {
    return static_cast<std::size_t>(std::count_if(points.begin(), points.end(),
                                                  [](const RidgePoint& p) { return p.evaluable && p.regime_valid; }));
  }
  std::size_t passing() const {
    return static_cast<std::size_t>(std::count_if(points.begin(), points.end(), [](const RidgePoint& p) {
      return p.evaluable && p.regime_valid && p.within_tolerance;
    }));
  }
  double pass_fraction() const {
    const auto n = evaluated();
    return n == 0 ? 0.0 : static_cast<double>(passing()) / static_cast<double>(n);
  }
};

struct SweepResult {
  std::vector<double> energies;
  std::vector<double> frequencies;
  std::vector<CellResult> cells;  // energy-major: index = ie * n_freq + iw
  RidgeReport ridge;

  const CellResult& at(std::size_t ie, std::size_t iw) const { return cells[ie * frequencies.size() + iw]; }
};

/// Argmax over a column with three-point parabolic refinement; ties go to
/// the lower energy. NaN entries are skipped.
struct PeakEstimate {
  double position = std::numeric_limits<double>::quiet_NaN();
  std::size_t index = 0;
  bool at_edge = false;
};

inline PeakEstimate refined_argmax(const std::vector<double>& x, const std::vector<double>& y) {
  PeakEstimate est;
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (std::isnan(y[i])) continue;
    if (!best || y[i] > y[*best]) best = i;
  }
  if (!best) return est;
  const std::size_t i = *best;
  est.index = i;
  est.position = x[i];
  if (i == 0 || i + 1 == y.size() || std::isnan(y[i - 1]) || std::isnan(y[i + 1])) {
    est.at_edge = true;
    return est;
  }
  // vertex of the parabola through three (possibly unevenly spaced) points
  const double x0 = x[i - 1], x1 = x[i], x2 = x[i + 1];
  const double y0 = y[i - 1], y1 = y[i], y2 = y[i + 1];
  const double num = (x1 - x0) * (x1 - x0) * (y1 - y2) - (x1 - x2) * (x1 - x2) * (y1 - y0);
  const double den = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0);
  if (den != 0.0) {
    const double v = x1 - 0.5 * num / den;
    if (v >= x0 && v <= x2) est.position = v;
  }
  return est;
}

inline double transfer_matrix_resonance(const ExperimentConfig& cfg) {
  PotentialSpec stat = cfg.potential;
  stat.osc_angular_frequency = 0.0;
  ScanBounds bounds;
  bounds.e_max = std::min(bounds.e_max, stat.barrier_height);
  return find_resonances(stat, cfg.model, bounds).front().energy;
}

inline RidgeParams ridge_params(const ExperimentConfig& cfg, double e_r0) {
  RidgeParams p;
  p.e_r0 = e_r0;
  p.amplitude = cfg.potential.osc_amplitude;
  p.x0 = std::abs(cfg.packet.x0 - cfg.potential.well_center);
  p.osc_sign = cfg.potential.osc_sign;
  p.structure_length = cfg.potential.structure_length();
  p.model = cfg.model;
  return p;
}

inline double energy_step(const std::vector<double>& energies) {
  double step = 0.0;
  for (std::size_t i = 1; i < energies.size(); ++i) step = std::max(step, energies[i] - energies[i - 1]);
  return step;
}

/// Per-frequency noise maxima compared with the quasi-static ridge.
inline RidgeReport extract_ridge(const ExperimentConfig& cfg, const std::vector<double>& energies,
                                 const std::vector<double>& frequencies,
                                 const std::vector<std::vector<double>>& noise_by_frequency) {
  RidgeReport rep;
  rep.e_r0_transfer_matrix = transfer_matrix_resonance(cfg);
  rep.tolerance = std::max(energy_step(energies), cfg.ridge_tolerance);
  rep.e_r0 = rep.e_r0_transfer_matrix;
  rep.e_r0_source = "transfer_matrix";
  if (cfg.e_r0_override) {
    rep.e_r0 = *cfg.e_r0_override;
    rep.e_r0_source = "config";
  } else if (cfg.e_r0_source == ResonanceSource::static_noise_peak) {
    const auto zero = std::find(frequencies.begin(), frequencies.end(), 0.0);
    if (zero != frequencies.end()) {
      const auto peak = refined_argmax(energies, noise_by_frequency[static_cast<std::size_t>(zero - frequencies.begin())]);
      if (!std::isnan(peak.position) && !peak.at_edge) {
        rep.e_r0 = peak.position;
        rep.e_r0_source = "static_noise_peak";
      }
    }
  }
  const RidgeParams params = ridge_params(cfg, rep.e_r0);
  for (std::size_t iw = 0; iw < frequencies.size(); ++iw) {
    RidgePoint pt;
    pt.frequency = frequencies[iw];
    const auto peak = refined_argmax(energies, noise_by_frequency[iw]);
    pt.e_star = peak.position;
    pt.at_edge = peak.at_edge;
    const auto predicted = ridge_energy(pt.frequency, params);
    if (predicted) {
      pt.e_predicted = *predicted;
      pt.evaluable = *predicted >= energies.front() && *predicted <= energies.back() && !std::isnan(pt.e_star);
      pt.regime_valid = ridge_regime_valid(pt.frequency, *predicted, params);
      pt.deviation = pt.e_star - pt.e_predicted;
      pt.within_tolerance = std::abs(pt.deviation) <= rep.tolerance;
    }
    rep.points.push_back(pt);
  }
  return rep;
}

inline RidgeReport extract_ridge(const ExperimentConfig& cfg, const SweepResult& sweep) {
  std::vector<std::vector<double>> columns(sweep.frequencies.size());
  for (std::size_t iw = 0; iw < sweep.frequencies.size(); ++iw)
    for (std::size_t ie = 0; ie < sweep.energies.size(); ++ie) {
      const auto& c = sweep.at(ie, iw);
      columns[iw].push_back(c.ok() ? c.noise.s : std::numeric_limits<double>::quiet_NaN());
    }
  return extract_ridge(cfg, sweep.energies, sweep.frequencies, columns);
}

/// Runs every (E, w) cell. Workers pull cell indices from a shared counter and
/// write into per-cell slots, so the result does not depend on scheduling.
/// Failing cells keep their error text and the sweep continues.
inline SweepResult run_sweep(const ExperimentConfig& cfg, unsigned workers = 1) {
  cfg.validate();
  SweepResult out;
  out.energies = cfg.energies.values;
  out.frequencies = cfg.frequencies.values;
  const std::size_t nw = out.frequencies.size();
  const std::size_t total = out.energies.size() * nw;
  out.cells.resize(total);

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t idx = next.fetch_add(1); idx < total; idx = next.fetch_add(1)) {
      const double e = out.energies[idx / nw];
      const double w = out.frequencies[idx % nw];
      try {
        out.cells[idx] = run_single(cfg, e, w);
      } catch (const Error& err) {
        CellResult failed;
        failed.energy = e;
        failed.frequency = w;
        failed.error = err.what();
        out.cells[idx] = std::move(failed);
      }
    }
  };
  workers = std::max(1u, workers);
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < workers; ++i) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  out.ridge = extract_ridge(cfg, out);
  return out;
}

// ---------------------------------------------------------------------------
// CSV output

inline void write_config_header(std::ostream& out, const ExperimentConfig& cfg) {
  for (const auto& [k, v] : cfg.echo()) out << "# " << k << " = " << v << '\n';
}

inline constexpr const char* records_header =
    "energy,frequency,T_a,R_a,T_b,R_b,abs_I_left_sq,abs_I_right_sq,P_LL,P_RR,P_LR,t1,S_over_4q2h,bracket,error";

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else if (c == '\n') out += ' ';
    else out += c;
  }
  return out + "\"";
}

inline void write_record_row(std::ostream& out, const CellResult& c) {
  const auto f = [](double v) { return format_number(v); };
  out << f(c.energy) << ',' << f(c.frequency);
  if (c.ok()) {
    const auto& s = c.scattering;
    out << ',' << f(s.t_a) << ',' << f(s.r_a) << ',' << f(s.t_b) << ',' << f(s.r_b) << ','
        << f(std::norm(s.i_left)) << ',' << f(std::norm(s.i_right)) << ',' << f(s.p_ll) << ','
        << f(s.p_rr) << ',' << f(s.p_lr) << ',' << f(s.t1) << ',' << f(c.noise.s) << ','
        << f(c.noise.bracket) << ',';
  } else {
    for (int i = 0; i < 12; ++i) out << ",nan";
    out << ',' << csv_escape(c.error);
  }
  out << '\n';
}

inline void write_records(std::ostream& out, const ExperimentConfig& cfg, const std::vector<CellResult>& cells) {
  write_config_header(out, cfg);
  out << records_header << '\n';
  for (const auto& c : cells) write_record_row(out, c);
}

inline void write_ridge_report(std::ostream& out, const ExperimentConfig& cfg, const RidgeReport& rep) {
  write_config_header(out, cfg);
  out << "# ridge.e_r0_used = " << format_number(rep.e_r0) << '\n';
  out << "# ridge.e_r0_source_used = " << rep.e_r0_source << '\n';
  out << "# ridge.e_r0_transfer_matrix = " << format_number(rep.e_r0_transfer_matrix) << '\n';
  out << "# ridge.tolerance_used = " << format_number(rep.tolerance) << '\n';
  out << "# ridge.evaluated = " << rep.evaluated() << '\n';
  out << "# ridge.passing = " << rep.passing() << '\n';
  out << "frequency,E_star,at_edge,E_predicted,deviation,evaluable,regime_valid,within_tolerance\n";
  for (const auto& p : rep.points) {
    out << format_number(p.frequency) << ',' << format_number(p.e_star) << ',' << (p.at_edge ? 1 : 0) << ','
        << format_number(p.e_predicted) << ',' << format_number(p.deviation) << ',' << (p.evaluable ? 1 : 0)
        << ',' << (p.regime_valid ? 1 : 0) << ',' << (p.within_tolerance ? 1 : 0) << '\n';
  }
}

/// Parsed records.csv: column name -> index, one vector of doubles per row.
struct RecordTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    require(it != columns.end(), ErrorKind::config, "records file lacks column " + name);
    return static_cast<std::size_t>(it - columns.begin());
  }
};

inline double parse_number(const std::string& s) {
  if (s == "nan" || s.empty()) return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::numeric_limits<double>::quiet_NaN();
  return v;
}

inline RecordTable read_records(std::istream& in) {
  RecordTable t;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (char c : line) {
      if (c == '"') quoted = !quoted;
      else if (c == ',' && !quoted) {
        fields.push_back(field);
        field.clear();
      } else field += c;
    }
    fields.push_back(field);
    if (t.columns.empty()) {
      t.columns = fields;
      continue;
    }
    std::vector<double> row;
    for (const auto& f : fields) row.push_back(parse_number(f));
    t.rows.push_back(std::move(row));
  }
  require(!t.columns.empty(), ErrorKind::config, "records file has no header");
  return t;
}

enum class Observable { overlap, noise };

inline Observable parse_observable(const std::string& name) {
  if (name == "I2" || name == "|I|^2" || name == "overlap") return Observable::overlap;
  if (name == "S" || name == "noise") return Observable::noise;
  throw Error(ErrorKind::unknown_observable, "unknown observable '" + name + "' (use S or I2)");
}

struct Heatmap {
  std::vector<double> energies;
  std::vector<double> frequencies;
  std::vector<std::vector<double>> values;  // [energy][frequency]
  std::vector<double> ridge_overlay;        // ridge frequency at each energy, NaN outside its domain
};

/// Rectangular (energy x frequency) matrix of one observable plus the ridge
/// frequency evaluated at each row's energy.
inline Heatmap build_heatmap(const ExperimentConfig& cfg, const RecordTable& table, Observable obs) {
  const std::size_t ce = table.column("energy"), cw = table.column("frequency");
  const std::size_t cv = table.column(obs == Observable::noise ? "S_over_4q2h" : "abs_I_left_sq");
  Heatmap h;
  for (const auto& r : table.rows) {
    if (std::find(h.energies.begin(), h.energies.end(), r[ce]) == h.energies.end()) h.energies.push_back(r[ce]);
    if (std::find(h.frequencies.begin(), h.frequencies.end(), r[cw]) == h.frequencies.end())
      h.frequencies.push_back(r[cw]);
  }
  std::sort(h.energies.begin(), h.energies.end());
  std::sort(h.frequencies.begin(), h.frequencies.end());
  const double nan = std::numeric_limits<double>::quiet_NaN();
  h.values.assign(h.energies.size(), std::vector<double>(h.frequencies.size(), nan));
  for (const auto& r : table.rows) {
    const auto ie = static_cast<std::size_t>(std::find(h.energies.begin(), h.energies.end(), r[ce]) - h.energies.begin());
    const auto iw = static_cast<std::size_t>(std::find(h.frequencies.begin(), h.frequencies.end(), r[cw]) - h.frequencies.begin());
    h.values[ie][iw] = r[cv];
  }

  // Same E_r0 rule as the ridge report, from the noise column of the table.
  std::vector<std::vector<double>> noise_cols(h.frequencies.size(), std::vector<double>(h.energies.size(), nan));
  const std::size_t cs = table.column("S_over_4q2h");
  for (const auto& r : table.rows) {
    const auto ie = static_cast<std::size_t>(std::find(h.energies.begin(), h.energies.end(), r[ce]) - h.energies.begin());
    const auto iw = static_cast<std::size_t>(std::find(h.frequencies.begin(), h.frequencies.end(), r[cw]) - h.frequencies.begin());
    noise_cols[iw][ie] = r[cs];
  }
  const auto rep = extract_ridge(cfg, h.energies, h.frequencies, noise_cols);
  const auto params = ridge_params(cfg, rep.e_r0);
  for (double e : h.energies) h.ridge_overlay.push_back(in_ridge_domain(e, params) ? ridge_frequency(e, params) : nan);
  return h;
}

inline void write_heatmap(std::ostream& out, const ExperimentConfig& cfg, const Heatmap& h, Observable obs) {
  write_config_header(out, cfg);
  out << "# observable = " << (obs == Observable::noise ? "S_over_4q2h" : "abs_I_left_sq") << '\n';
  out << "# rows: energy (eV); columns: frequency (rad/fs); last column: ridge frequency at the row energy\n";
  out << "energy";
  for (double w : h.frequencies) out << ',' << format_number(w);
  out << ",ridge_frequency\n";
  for (std::size_t ie = 0; ie < h.energies.size(); ++ie) {
    out << format_number(h.energies[ie]);
    for (double v : h.values[ie]) out << ',' << format_number(v);
    out << ',' << format_number(h.ridge_overlay[ie]) << '\n';
  }
}

inline RecordTable to_table(const std::vector<CellResult>& cells) {
  std::stringstream ss;
  ss << records_header << '\n';
  for (const auto& c : cells) write_record_row(ss, c);
  return read_records(ss);
}

}  // namespace qnoise
