// Command-line driver: single cells, (energy x frequency) sweeps, static
// spectra, ridge tables and heatmap post-processing.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "qnoise/qnoise.hpp"

namespace fs = std::filesystem;
using namespace qnoise;

namespace {

constexpr int exit_config = 2;
constexpr int exit_numerical = 3;

std::ofstream open_output(const fs::path& dir, const std::string& name) {
  fs::create_directories(dir);
  std::ofstream out(dir / name, std::ios::binary);
  require(static_cast<bool>(out), ErrorKind::io, "cannot write " + (dir / name).string());
  return out;
}

void write_manifest(const fs::path& dir, const ExperimentConfig& cfg, const std::string& command,
                    bool seedless, const std::vector<std::pair<std::string, std::string>>& summary) {
  auto out = open_output(dir, "run_manifest.txt");
  out << "command = " << command << '\n';
  out << "seedless = " << (seedless ? "asserted (no random number generation on this code path)" : "not requested")
      << '\n';
  for (const auto& [k, v] : cfg.echo()) out << k << " = " << v << '\n';
  for (const auto& [k, v] : summary) out << k << " = " << v << '\n';
}

struct Options {
  std::string config_path;
  std::string out_dir = "out";
  unsigned workers = 1;
  std::string observable = "S";
  bool seedless = false;
  std::optional<double> energy;
  std::optional<double> frequency;
  std::string records_path;
};

ExperimentConfig load(const Options& opt) {
  if (opt.config_path.empty()) {
    ExperimentConfig cfg;
    cfg.validate();
    return cfg;
  }
  return load_config(opt.config_path);
}

int cmd_single(const Options& opt) {
  const auto cfg = load(opt);
  const double e = opt.energy.value_or(cfg.packet.energy);
  const double w = opt.frequency.value_or(cfg.potential.osc_angular_frequency);
  const fs::path dir(opt.out_dir);
  std::optional<std::ofstream> ta, tb;
  TrajectoryStreams traj;
  if (cfg.propagation.trajectory_every > 0) {
    ta = open_output(dir, "trajectory_a.csv");
    tb = open_output(dir, "trajectory_b.csv");
    *ta << trajectory_header << '\n';
    *tb << trajectory_header << '\n';
    traj = {&*ta, &*tb};
  }
  const auto t0 = std::chrono::steady_clock::now();
  const auto cell = run_single(cfg, e, w, traj);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  {
    auto out = open_output(dir, "records.csv");
    write_records(out, cfg, {cell});
  }
  const auto& s = cell.scattering;
  write_manifest(dir, cfg, "single", opt.seedless,
                 {{"cell.energy", format_number(e)}, {"cell.frequency", format_number(w)},
                  {"cell.t1", format_number(s.t1)}});
  std::cout << "E = " << format_number(e) << " eV, w = " << format_number(w) << " rad/fs\n"
            << "T_a = " << format_number(s.t_a) << "  R_a = " << format_number(s.r_a)
            << "  T_b = " << format_number(s.t_b) << "  R_b = " << format_number(s.r_b) << '\n'
            << "|I_left|^2 = " << format_number(std::norm(s.i_left))
            << "  |I_right|^2 = " << format_number(std::norm(s.i_right)) << '\n'
            << "P_LL = " << format_number(s.p_ll) << "  P_RR = " << format_number(s.p_rr)
            << "  P_LR = " << format_number(s.p_lr) << '\n'
            << "S / (4q^2/h) = " << format_number(cell.noise.s) << "  t1 = " << format_number(s.t1) << " fs\n"
            << "wall time " << format_number(seconds) << " s\n";
  return 0;
}

int cmd_sweep(const Options& opt) {
  const auto cfg = load(opt);
  const fs::path dir(opt.out_dir);
  const auto t0 = std::chrono::steady_clock::now();
  const auto sweep = run_sweep(cfg, opt.workers);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  {
    auto out = open_output(dir, "records.csv");
    write_records(out, cfg, sweep.cells);
  }
  {
    auto out = open_output(dir, "ridge.csv");
    write_ridge_report(out, cfg, sweep.ridge);
  }
  const auto table = to_table(sweep.cells);
  for (auto obs : {Observable::noise, Observable::overlap}) {
    auto out = open_output(dir, obs == Observable::noise ? "heatmap_S.csv" : "heatmap_I2.csv");
    write_heatmap(out, cfg, build_heatmap(cfg, table, obs), obs);
  }
  std::size_t failed = 0;
  for (const auto& c : sweep.cells) failed += c.ok() ? 0 : 1;
  write_manifest(dir, cfg, "sweep", opt.seedless,
                 {{"cells", std::to_string(sweep.cells.size())},
                  {"failed_cells", std::to_string(failed)},
                  {"ridge.e_r0", format_number(sweep.ridge.e_r0)},
                  {"ridge.e_r0_source", sweep.ridge.e_r0_source},
                  {"ridge.e_r0_transfer_matrix", format_number(sweep.ridge.e_r0_transfer_matrix)},
                  {"ridge.evaluated_frequencies", std::to_string(sweep.ridge.evaluated())},
                  {"ridge.passing_frequencies", std::to_string(sweep.ridge.passing())}});
  std::cout << sweep.cells.size() << " cells (" << failed << " failed) in " << format_number(seconds)
            << " s on " << opt.workers << " worker(s)\n"
            << "ridge: " << sweep.ridge.passing() << " / " << sweep.ridge.evaluated()
            << " evaluable frequencies within " << format_number(sweep.ridge.tolerance) << " eV\n";
  return failed == 0 ? 0 : exit_numerical;
}

int cmd_spectrum(const Options& opt) {
  const auto cfg = load(opt);
  PotentialSpec stat = cfg.potential;
  stat.osc_angular_frequency = 0.0;
  ScanBounds bounds;
  bounds.e_max = std::min(bounds.e_max, stat.barrier_height);
  const auto spectrum = scan_spectrum(stat, cfg.model, bounds);
  const fs::path dir(opt.out_dir);
  {
    auto out = open_output(dir, "spectrum.csv");
    write_config_header(out, cfg);
    out << "E,T\n";
    for (std::size_t i = 0; i < spectrum.energies.size(); ++i)
      out << format_number(spectrum.energies[i]) << ',' << format_number(spectrum.transmissions[i]) << '\n';
  }
  const auto resonances = find_resonances(stat, cfg.model, bounds);
  auto out = open_output(dir, "resonance_report.txt");
  write_config_header(out, cfg);
  for (std::size_t i = 0; i < resonances.size(); ++i) {
    out << "resonance[" << i << "].E_r = " << format_number(resonances[i].energy) << '\n';
    out << "resonance[" << i << "].width = " << format_number(resonances[i].width) << '\n';
    out << "resonance[" << i << "].T_peak = " << format_number(resonances[i].peak) << '\n';
    std::cout << "E_r = " << format_number(resonances[i].energy) << " eV, FWHM = "
              << format_number(resonances[i].width) << " eV\n";
  }
  return 0;
}

int cmd_ridge(const Options& opt) {
  const auto cfg = load(opt);
  const double e_r0 = cfg.e_r0_override.value_or(transfer_matrix_resonance(cfg));
  const auto params = ridge_params(cfg, e_r0);
  const auto table = ridge_table(params, cfg.energies.values);
  auto out = open_output(opt.out_dir, "ridge_table.csv");
  write_config_header(out, cfg);
  out << "# ridge.e_r0_used = " << format_number(e_r0) << '\n';
  out << "E_r,w,t_b,tau_t,regime_valid\n";
  for (const auto& s : table)
    out << format_number(s.e_r) << ',' << format_number(s.w) << ',' << format_number(s.t_b) << ','
        << format_number(s.tau_t) << ',' << (s.regime_valid ? 1 : 0) << '\n';
  std::cout << table.size() << " ridge samples, E_r0 = " << format_number(e_r0) << " eV\n";
  return 0;
}

int cmd_heatmap(const Options& opt) {
  const auto cfg = load(opt);
  const auto obs = parse_observable(opt.observable);
  const fs::path dir(opt.out_dir);
  const fs::path records = opt.records_path.empty() ? dir / "records.csv" : fs::path(opt.records_path);
  std::ifstream in(records);
  require(static_cast<bool>(in), ErrorKind::io, "cannot read " + records.string());
  const auto table = read_records(in);
  auto out = open_output(dir, obs == Observable::noise ? "heatmap_S.csv" : "heatmap_I2.csv");
  write_heatmap(out, cfg, build_heatmap(cfg, table, obs), obs);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-electron scattering on an oscillating double barrier: overlaps, quadrant probabilities, noise"};
  app.require_subcommand(1);
  Options opt;
  app.set_version_flag("--version", std::string(qnoise::version));

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config_path, "JSON configuration file")->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out_dir, "output directory");
    sub->add_flag("--seedless", opt.seedless, "assert that no random numbers are used");
  };
  auto* single = app.add_subcommand("single", "run one (energy, frequency) cell");
  add_common(single);
  single->add_option("--energy", opt.energy, "central energy (eV)");
  single->add_option("--frequency", opt.frequency, "signed angular frequency (rad/fs)");

  auto* sweep = app.add_subcommand("sweep", "run the energy x frequency grid");
  add_common(sweep);
  sweep->add_option("--workers", opt.workers, "worker threads")->check(CLI::PositiveNumber);

  auto* spectrum = app.add_subcommand("spectrum", "transfer-matrix transmission scan of the static structure");
  add_common(spectrum);

  auto* ridge = app.add_subcommand("ridge", "tabulate the quasi-static resonance ridge w(E_r)");
  add_common(ridge);

  auto* heatmap = app.add_subcommand("heatmap", "rebuild a heatmap matrix from records.csv");
  add_common(heatmap);
  heatmap->add_option("--observable", opt.observable, "S or I2");
  heatmap->add_option("--records", opt.records_path, "records file (default <out>/records.csv)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_config;
  }

  try {
    if (*single) return cmd_single(opt);
    if (*sweep) return cmd_sweep(opt);
    if (*spectrum) return cmd_spectrum(opt);
    if (*ridge) return cmd_ridge(opt);
    if (*heatmap) return cmd_heatmap(opt);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return is_config_error(e.kind()) ? exit_config : exit_numerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_numerical;
  }
  return 0;
}
