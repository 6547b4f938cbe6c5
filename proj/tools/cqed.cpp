// Command-line front end: simulation, analysis and calibration runs with
// file-based interchange. See README.md for the formats.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "cqed/click_stats.hpp"
#include "cqed/conditioning.hpp"
#include "cqed/io.hpp"
#include "cqed/master_equation.hpp"
#include "cqed/source_sim.hpp"
#include "cqed/svg.hpp"

namespace fs = std::filesystem;
using namespace cqed;

namespace {

constexpr int kExitBadConfig = 2;
constexpr int kExitBadInput = 3;
constexpr int kExitIntegrator = 4;

struct Options {
  std::string config_path;
  std::string in_path;
  std::string out_dir = ".";
  std::uint64_t seed = 1;
  std::int64_t cycles = 1000;
  int threads = 0;
  int grid_points = 65;
  bool classical = false;
  bool svg = false;
  std::int64_t bin_ns = 100;
  double range_us = 40.0;
  std::int64_t phase_bin_ns = 40;
  int delta_range = 10;
  double inoise_hz = 446.0;
  double eta = 0.36;
  double ibar = 0.0;
  double inoise = 0.0;
  double target_ip_hz = 0.0;
  std::int64_t pilot_cycles = 1500;
};

void write_manifest(const std::string& out_dir, const std::string& command,
                    const std::vector<std::pair<std::string, std::string>>&
                        fields,
                    const SimConfig* config) {
  std::ostringstream m;
  m << "# cqed-manifest v1\n";
  m << "command = " << command << "\n";
  for (const auto& [k, v] : fields) m << k << " = " << v << "\n";
  if (config) {
    m << "\n[config]\n";
    m << format_config(*config);
  }
  atomic_write(out_dir + "/manifest.txt", m.str());
}

EfficiencyTable build_table_or_exit(const SimConfig& config,
                                    int grid_points) {
  try {
    return EfficiencyTable::build(config.cavity, grid_points);
  } catch (const std::runtime_error& e) {
    std::cerr << "integrator failure: " << e.what() << "\n";
    std::exit(kExitIntegrator);
  }
}

int cmd_simulate(const Options& opt) {
  if (opt.cycles < 1) {
    std::cerr << "error: --cycles must be >= 1\n";
    return kExitBadConfig;
  }
  SimConfig config = load_config(opt.config_path);
  if (opt.classical) config.classical_source = true;

  fs::create_directories(opt.out_dir);
  const EfficiencyTable table = build_table_or_exit(config, opt.grid_points);
  const SimOutput out =
      run_experiment(config, opt.cycles, opt.seed, table, opt.threads);

  save_click_stream(opt.out_dir + "/clicks.csv", to_click_stream(out));
  save_truth(opt.out_dir + "/truth.csv", out.truth);
  write_manifest(opt.out_dir, "simulate",
                 {{"config", opt.config_path},
                  {"seed", std::to_string(opt.seed)},
                  {"cycles", std::to_string(opt.cycles)},
                  {"classical", config.classical_source ? "1" : "0"},
                  {"grid_points", std::to_string(opt.grid_points)}},
                 &config);
  std::cout << "clicks=" << out.clicks.size() << " truth_rows="
            << out.truth.size() << " out=" << opt.out_dir << "\n";
  return 0;
}

int cmd_analyze_g2(const Options& opt) {
  const ClickStream stream = load_click_stream(opt.in_path);
  const auto range_ns = static_cast<std::int64_t>(opt.range_us * 1000.0);
  const CorrelationHistogram hist =
      g2_histogram(stream, opt.bin_ns, range_ns);

  fs::create_directories(opt.out_dir);
  std::vector<std::vector<double>> rows;
  rows.reserve(hist.bins());
  for (std::size_t b = 0; b < hist.bins(); ++b)
    rows.push_back({static_cast<double>(hist.bin_center_ns(b)), hist.g2(b),
                    static_cast<double>(hist.raw[b]), hist.sigma(b)});
  save_csv(opt.out_dir + "/g2.csv", "lag_ns,g2,raw_pairs,sigma", rows);

  if (opt.svg) {
    SvgSeries s;
    s.label = "g2";
    for (std::size_t b = 0; b < hist.bins(); ++b) {
      s.x.push_back(static_cast<double>(hist.bin_center_ns(b)) * 1e-3);
      s.y.push_back(hist.g2(b));
    }
    save_line_chart(opt.out_dir + "/g2.svg", "Intensity correlation",
                    "lag (us)", "g2", {s});
  }
  write_manifest(opt.out_dir, "analyze g2",
                 {{"in", opt.in_path},
                  {"bin_ns", std::to_string(opt.bin_ns)},
                  {"range_us", std::to_string(opt.range_us)}},
                 nullptr);
  return 0;
}

int cmd_analyze_pulse_avg(const Options& opt) {
  const ClickStream stream = load_click_stream(opt.in_path);
  const PulseAveragedRate rates =
      pulse_averaged_rate(stream, opt.phase_bin_ns);

  fs::create_directories(opt.out_dir);
  for (int d = 1; d <= 2; ++d) {
    const PhaseProfile& p = d == 1 ? rates.det1 : rates.det2;
    std::vector<std::vector<double>> rows;
    for (std::size_t b = 0; b < p.rate.size(); ++b)
      rows.push_back({static_cast<double>(b) * opt.phase_bin_ns, p.rate[b]});
    save_csv(opt.out_dir + "/pulse_avg_det" + std::to_string(d) + ".csv",
             "phase_ns,rate_hz", rows);
  }
  if (opt.svg) {
    std::vector<SvgSeries> series(2);
    for (int d = 0; d < 2; ++d) {
      const PhaseProfile& p = d == 0 ? rates.det1 : rates.det2;
      series[d].label = "detector " + std::to_string(d + 1);
      series[d].color = d == 0 ? "#1f77b4" : "#d62728";
      for (std::size_t b = 0; b < p.rate.size(); ++b) {
        series[d].x.push_back(static_cast<double>(b) * opt.phase_bin_ns);
        series[d].y.push_back(p.rate[b]);
      }
    }
    save_line_chart(opt.out_dir + "/pulse_avg.svg", "Pulse-averaged rate",
                    "phase (ns)", "rate (1/s)", series);
  }
  write_manifest(opt.out_dir, "analyze pulse-avg",
                 {{"in", opt.in_path},
                  {"phase_bin_ns", std::to_string(opt.phase_bin_ns)}},
                 nullptr);
  return 0;
}

int cmd_analyze_background(const Options& opt) {
  const ClickStream stream = load_click_stream(opt.in_path);
  const PulseAveragedRate rates =
      pulse_averaged_rate(stream, opt.phase_bin_ns);
  const BackgroundCorrelation bg =
      background_correlation(rates.det1, rates.det2);

  fs::create_directories(opt.out_dir);
  const auto range_ns = static_cast<std::int64_t>(opt.range_us * 1000.0);
  std::vector<std::vector<double>> rows;
  for (std::int64_t tau = -range_ns; tau <= range_ns;
       tau += opt.phase_bin_ns)
    rows.push_back({static_cast<double>(tau),
                    bg.at(static_cast<double>(tau))});
  save_csv(opt.out_dir + "/background.csv", "tau_ns,g2_background", rows);

  if (opt.svg) {
    SvgSeries s;
    s.label = "g2 background";
    for (const std::vector<double>& r : rows) {
      s.x.push_back(r[0] * 1e-3);
      s.y.push_back(r[1]);
    }
    save_line_chart(opt.out_dir + "/background.svg",
                    "Different-atom + noise background", "lag (us)", "g2",
                    {s});
  }
  write_manifest(opt.out_dir, "analyze background",
                 {{"in", opt.in_path},
                  {"phase_bin_ns", std::to_string(opt.phase_bin_ns)},
                  {"range_us", std::to_string(opt.range_us)}},
                 nullptr);
  std::printf("g2_C_min=%.3f g2_C_max=%.3f\n", bg.g2_min, bg.g2_max);
  return 0;
}

int cmd_analyze_conditional(const Options& opt, bool pdeltak) {
  const ClickStream stream = load_click_stream(opt.in_path);
  const PulseCounts pulses = bin_clicks_to_pulses(stream);
  const SelectedSeries series = select_triggered(pulses);
  const PulseAveragedRate rates = pulse_averaged_rate(stream, 40);
  const ConditioningStats stats = make_conditioning_stats(
      rates, opt.inoise_hz, static_cast<double>(stream.tau_pump_ns) * 1e-9,
      opt.eta);
  if (stats.clamped)
    std::cerr << "warning: photon rate estimate clamped at zero\n";

  fs::create_directories(opt.out_dir);
  if (pdeltak) {
    const PBarSeries p = conditional_emission_probability(
        pulses, series, stats, opt.delta_range);
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < p.delta_k.size(); ++i)
      rows.push_back({static_cast<double>(p.delta_k[i]), p.p_bar[i]});
    save_csv(opt.out_dir + "/pdeltak.csv", "delta_k,p_bar", rows);
  } else {
    const ConditionalG2 cg2 = conditional_g2(series, opt.delta_range);
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < cg2.delta.size(); ++i)
      rows.push_back({static_cast<double>(cg2.delta[i]), cg2.g2[i],
                      static_cast<double>(cg2.n_events[i]), cg2.sigma[i]});
    save_csv(opt.out_dir + "/conditional_g2.csv",
             "delta_i,g2,n_events,sigma", rows);
  }

  std::ostringstream summary;
  summary << "n_bar_p = " << stats.n_bar_p << "\n";
  summary << "n_bar_n = " << stats.n_bar_n << "\n";
  summary << "p_atom = " << stats.p_atom << "\n";
  summary << "eta = " << stats.eta << "\n";
  summary << "triggers_M = " << series.size() << "\n";
  atomic_write(opt.out_dir + "/summary.txt", summary.str());
  std::cout << summary.str();

  write_manifest(opt.out_dir,
                 pdeltak ? "analyze pdeltak" : "analyze conditional",
                 {{"in", opt.in_path},
                  {"delta_range", std::to_string(opt.delta_range)},
                  {"inoise_hz", std::to_string(opt.inoise_hz)},
                  {"eta", std::to_string(opt.eta)}},
                 nullptr);
  return 0;
}

int cmd_analyze_estimators(const Options& opt) {
  RateSummary rates;
  rates.i_bar = opt.ibar;
  rates.i_noise = opt.inoise;
  rates.i_photon = std::max(0.0, opt.ibar - opt.inoise);
  if (rates.i_bar <= 0) {
    std::cerr << "error: --ibar must be positive\n";
    return kExitBadConfig;
  }
  const auto [lo, hi] = estimator_extrema(rates);
  std::printf("g2_min=%.3f g2_max=%.3f\n", lo, hi);
  return 0;
}

int cmd_efficiency(const Options& opt) {
  const SimConfig config = load_config(opt.config_path);
  const IntegratorOptions iopts;
  const EfficiencyTable table = build_table_or_exit(config, opt.grid_points);

  fs::create_directories(opt.out_dir);
  std::vector<std::vector<double>> rows;
  for (const EfficiencyTable::Entry& e : table.entries())
    rows.push_back({e.g_eff / kTwoPi, e.p_emit,
                    e.p_emit * config.cavity.escape_fraction});
  char header[128];
  std::snprintf(header, sizeof(header),
                "# integrator_abs_tol=%g\ng_eff_hz,probability,"
                "probability_escaped",
                iopts.abs_tol);
  save_csv(opt.out_dir + "/efficiency.csv", header, rows);
  write_manifest(opt.out_dir, "efficiency",
                 {{"config", opt.config_path},
                  {"grid_points", std::to_string(opt.grid_points)}},
                 &config);
  std::cout << "p_emit(g_max)=" << table.entries().back().p_emit
            << " escaped=" << table.entries().back().p_emit *
                                  config.cavity.escape_fraction
            << "\n";
  return 0;
}

int cmd_calibrate(const Options& opt) {
  const SimConfig config = load_config(opt.config_path);
  const EfficiencyTable table = build_table_or_exit(config, opt.grid_points);
  CalibrationOptions copts;
  copts.pilot_cycles = opt.pilot_cycles;
  const double lambda =
      calibrate_flux(opt.target_ip_hz, config, table, copts);
  std::printf("rate_lambda_hz=%.6g\n", lambda);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Periodically driven single-photon source: simulation and "
               "photon statistics"};
  app.require_subcommand(1);
  Options opt;

  CLI::App* sim = app.add_subcommand("simulate", "generate a click stream");
  sim->add_option("--config", opt.config_path, "config file")->required();
  sim->add_option("--seed", opt.seed, "random seed");
  sim->add_option("--cycles", opt.cycles, "number of experimental cycles");
  sim->add_option("--out", opt.out_dir, "output directory")->required();
  sim->add_option("--threads", opt.threads, "worker threads (0 = auto)");
  sim->add_option("--grid-points", opt.grid_points, "efficiency grid size");
  sim->add_flag("--classical", opt.classical,
                "classical control source (Poisson photon numbers)");

  CLI::App* analyze = app.add_subcommand("analyze", "click-stream reports");
  analyze->require_subcommand(1);
  auto add_common = [&](CLI::App* sub, bool needs_input) {
    if (needs_input)
      sub->add_option("--in", opt.in_path, "click-stream file")->required();
    sub->add_option("--out", opt.out_dir, "output directory");
    sub->add_flag("--svg", opt.svg, "also write an SVG chart");
  };
  CLI::App* a_g2 = analyze->add_subcommand("g2", "correlation histogram");
  add_common(a_g2, true);
  a_g2->add_option("--bin-ns", opt.bin_ns, "histogram bin width (ns)");
  a_g2->add_option("--range-us", opt.range_us, "lag range (us)");

  CLI::App* a_pa = analyze->add_subcommand("pulse-avg", "folded rate");
  add_common(a_pa, true);
  a_pa->add_option("--phase-bin-ns", opt.phase_bin_ns, "phase bin (ns)");

  CLI::App* a_bg =
      analyze->add_subcommand("background", "noise + different-atom g2");
  add_common(a_bg, true);
  a_bg->add_option("--phase-bin-ns", opt.phase_bin_ns, "phase bin (ns)");
  a_bg->add_option("--range-us", opt.range_us, "lag range (us)");

  CLI::App* a_cond =
      analyze->add_subcommand("conditional", "conditioned pulse-to-pulse g2");
  add_common(a_cond, true);
  a_cond->add_option("--delta-range", opt.delta_range, "max |delta_i|");
  a_cond->add_option("--inoise-hz", opt.inoise_hz, "noise rate per detector");
  a_cond->add_option("--eta", opt.eta, "overall detection efficiency");

  CLI::App* a_pk =
      analyze->add_subcommand("pdeltak", "conditional emission probability");
  add_common(a_pk, true);
  a_pk->add_option("--delta-range", opt.delta_range, "max |delta_k|");
  a_pk->add_option("--inoise-hz", opt.inoise_hz, "noise rate per detector");
  a_pk->add_option("--eta", opt.eta, "overall detection efficiency");

  CLI::App* a_est =
      analyze->add_subcommand("estimators", "square-wave g2 extrema");
  a_est->add_option("--ibar", opt.ibar, "mean count rate per detector")
      ->required();
  a_est->add_option("--inoise", opt.inoise, "noise rate per detector")
      ->required();

  CLI::App* eff =
      app.add_subcommand("efficiency", "emission probability vs coupling");
  eff->add_option("--config", opt.config_path, "config file")->required();
  eff->add_option("--grid-points", opt.grid_points, "grid size");
  eff->add_option("--out", opt.out_dir, "output directory");

  CLI::App* cal =
      app.add_subcommand("calibrate", "atom rate for a target photon rate");
  cal->add_option("--config", opt.config_path, "config file")->required();
  cal->add_option("--target-ip-hz", opt.target_ip_hz,
                  "target photon rate per detector")
      ->required();
  cal->add_option("--pilot-cycles", opt.pilot_cycles, "pilot run length");
  cal->add_option("--grid-points", opt.grid_points, "efficiency grid size");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return cmd_simulate(opt);
    if (analyze->parsed()) {
      if (a_g2->parsed()) return cmd_analyze_g2(opt);
      if (a_pa->parsed()) return cmd_analyze_pulse_avg(opt);
      if (a_bg->parsed()) return cmd_analyze_background(opt);
      if (a_cond->parsed()) return cmd_analyze_conditional(opt, false);
      if (a_pk->parsed()) return cmd_analyze_conditional(opt, true);
      if (a_est->parsed()) return cmd_analyze_estimators(opt);
    }
    if (eff->parsed()) return cmd_efficiency(opt);
    if (cal->parsed()) return cmd_calibrate(opt);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitBadConfig;
  } catch (const ParseError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitBadInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadConfig;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
