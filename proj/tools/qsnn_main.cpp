// qsnn: command-line front end for the spiking -> quantum -> decision pipeline.

#include <cstdio>
#include <filesystem>
#include <future>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qsnn/analysis.hpp"
#include "qsnn/config.hpp"
#include "qsnn/csv.hpp"
#include "qsnn/pipeline.hpp"

namespace fs = std::filesystem;
using namespace qsnn;

namespace {

struct Common {
  std::string config;
  std::string out;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "JSON run configuration")->required();
  cmd->add_option("--out", c.out, "output directory (overrides QSNN_OUT and io.out_dir)");
}

std::optional<std::string> flag(const std::string& s) {
  return s.empty() ? std::nullopt : std::optional<std::string>(s);
}

std::vector<spiking::Spike> neuron1_spikes(const config::RunConfig& cfg,
                                           const std::string& spikes_path) {
  if (!spikes_path.empty()) return pipeline::read_spike_list(spikes_path, 1);
  return pipeline::run_spike_stage(cfg).neuron1.spikes;
}

int cmd_spike(const Common& c) {
  const auto cfg = config::parse_config(c.config);
  pipeline::RunWriter w(pipeline::resolve_out_dir(flag(c.out), cfg));
  const auto s = pipeline::run_spike_stage(cfg);
  pipeline::write_spike_artifacts(w, s, true);
  std::printf("neuron 1: %zu spikes, neuron 2: %zu spikes above %.6g\n", s.neuron1.count,
              s.neuron2.count, cfg.spiking.threshold);
  return 0;
}

int cmd_evolve(const Common& c, const std::string& spikes_path) {
  const auto cfg = config::parse_config(c.config);
  pipeline::RunWriter w(pipeline::resolve_out_dir(flag(c.out), cfg));
  const auto spikes = neuron1_spikes(cfg, spikes_path);
  const auto schedule = pipeline::spike_to_theta(spikes, cfg.mapping, cfg.spiking.t_end);
  pipeline::write_theta_schedule(w, "theta_schedule.csv", schedule);
  const auto hp = pipeline::hamiltonian_params(cfg, schedule);
  const auto rho0 =
      quantum::with_cavity_vacuum(pipeline::initial_qubit_state(cfg), cfg.quantum.fock);
  const auto traj = quantum::evolve(rho0, hp, pipeline::qubit_cavity_channels(cfg),
                                    cfg.quantum.dt, cfg.spiking.t_end, cfg.io.record_stride);
  pipeline::write_trajectory(w, "qubit_cavity_", traj, cfg.quantum.fock);
  std::printf("%zu theta entries, %zu recorded states, max trace correction %.3g\n",
              schedule.size(), traj.states.size(), traj.max_trace_correction);
  return 0;
}

int cmd_ttm(const Common& c, const std::string& spikes_path) {
  const auto cfg = config::parse_config(c.config);
  pipeline::RunWriter w(pipeline::resolve_out_dir(flag(c.out), cfg));
  const auto spikes = neuron1_spikes(cfg, spikes_path);
  const auto schedule = pipeline::spike_to_theta(spikes, cfg.mapping, cfg.spiking.t_end);
  const double horizon = static_cast<double>(2 * cfg.ttm.depth + 1) * cfg.ttm.dt_map;
  const auto s = pipeline::run_ttm_stage(
      cfg, pipeline::hamiltonian_params(cfg, pipeline::final_entry_schedule(schedule, horizon)));
  pipeline::write_ttm_artifacts(w, "", s);
  std::printf("K = %zu, max trace distance vs direct integration %.3e\n", s.tensors.depth(),
              s.max_error);
  return 0;
}

int cmd_analyze(const Common& c, const std::string& input, const std::string& signal,
                const std::string& reference, double floor, bool hann) {
  const auto cfg = config::parse_config(c.config);
  pipeline::RunWriter w(pipeline::resolve_out_dir(flag(c.out), cfg));

  std::vector<double> t, a, b;
  if (!input.empty()) {
    const auto table = csv::read(input);
    t = table.column_values("t");
    a = table.column_values(signal);
    b = table.column_values(reference);
  } else {
    const auto s = pipeline::run_spike_stage(cfg);
    for (std::size_t i = 0; i < s.trains[0].size(); ++i) t.push_back(s.trains[0].time(i));
    const std::vector<double>* cols[2] = {&s.trains[0].v, &s.trains[1].v};
    a = signal == "v2" ? *cols[1] : *cols[0];
    b = reference == "v1" ? *cols[0] : *cols[1];
  }

  int status = 0;
  try {
    const auto fit = analysis::t1_fit(t, a, {floor, analysis::EnvelopeMode::automatic});
    w.write_csv("t1_fit.csv", {"t1", "intercept", "r_squared"},
                {{fit.t1, fit.intercept, fit.r_squared}});
    std::printf("t1 = %.6g (r^2 = %.4f, %zu peaks)\n", fit.t1, fit.r_squared, fit.peaks_used);
  } catch (const Error& e) {
    std::fprintf(stderr, "t1 fit: %s\n", e.what());
    status = 1;
  }
  try {
    const double dt = analysis::uniform_step(t);
    const auto d = analysis::estimate_delay(a, b, dt);
    w.write_csv("delay.csv", {"delay_s", "peak_corr"}, {{d.delay_s, d.peak_corr}});
    std::printf("delay = %.6g (peak correlation %.4f)\n", d.delay_s, d.peak_corr);
  } catch (const Error& e) {
    std::fprintf(stderr, "delay: %s\n", e.what());
    status = 1;
  }
  try {
    const auto bins = analysis::spectrum(t, a, {hann});
    std::vector<std::vector<double>> rows;
    rows.reserve(bins.size());
    for (const auto& bin : bins) rows.push_back({bin.freq_hz, bin.magnitude});
    w.write_csv("spectrum.csv", {"freq_hz", "magnitude"}, rows);
  } catch (const Error& e) {
    std::fprintf(stderr, "spectrum: %s\n", e.what());
    status = 1;
  }
  return status;
}

void report(const std::string& label, const pipeline::RunManifest& m) {
  if (!m.ok) {
    std::fprintf(stderr, "%sfailed in stage '%s': %s\n", label.c_str(), m.failed_stage.c_str(),
                 m.error.c_str());
    return;
  }
  for (const auto& w : m.windows) {
    std::printf("%sq = %u, level = %.4g, correlation = %.4f -> %s\n", label.c_str(), w.q,
                w.level, w.correlation, std::string(decision::to_string(w.cls)).c_str());
  }
  std::printf("%s%zu packet(s), %zu files\n", label.c_str(), m.packets, m.files.size());
}

int cmd_pipeline(const Common& c, const std::string& scenario) {
  if (!scenario.empty()) {
    const auto cfg = config::parse_config(c.config, scenario);
    const auto m = pipeline::run_pipeline(cfg, pipeline::resolve_out_dir(flag(c.out), cfg));
    report("[" + scenario + "] ", m);
    return m.ok ? 0 : 1;
  }
  const auto names = config::scenario_names(c.config);
  if (names.empty()) {
    const auto cfg = config::parse_config(c.config);
    const auto m = pipeline::run_pipeline(cfg, pipeline::resolve_out_dir(flag(c.out), cfg));
    report("", m);
    return m.ok ? 0 : 1;
  }
  // Scenarios are independent, so they run side by side, each in its own directory.
  std::vector<config::RunConfig> cfgs;
  for (const auto& n : names) cfgs.push_back(config::parse_config(c.config, n));
  const fs::path root = pipeline::resolve_out_dir(flag(c.out), config::parse_config(c.config));
  std::vector<std::future<pipeline::RunManifest>> jobs;
  for (std::size_t i = 0; i < names.size(); ++i) {
    jobs.push_back(std::async(std::launch::async, [&, i] {
      return pipeline::run_pipeline(cfgs[i], root / ("scenario_" + names[i]));
    }));
  }
  int status = 0;
  for (std::size_t i = 0; i < names.size(); ++i) {
    const auto m = jobs[i].get();
    report("[" + names[i] + "] ", m);
    if (!m.ok) status = 1;
  }
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qsnn - coupled spiking neurons driving qubit-cavity dynamics"};
  app.require_subcommand(1);

  Common spike, evolve, ttm, analyze, pipe;
  std::string evolve_spikes, ttm_spikes, input, signal = "v1", reference = "v2", scenario;
  double floor = 0.0;
  bool hann = false;

  auto* c_spike = app.add_subcommand("spike", "simulate the coupled neuron circuit");
  add_common(c_spike, spike);
  auto* c_evolve = app.add_subcommand("evolve", "evolve the qubit-cavity state under the theta schedule");
  add_common(c_evolve, evolve);
  c_evolve->add_option("--spikes", evolve_spikes, "reuse a spikes.csv instead of simulating");
  auto* c_ttm = app.add_subcommand("ttm", "learn transfer tensors and check them against direct integration");
  add_common(c_ttm, ttm);
  c_ttm->add_option("--spikes", ttm_spikes, "reuse a spikes.csv instead of simulating");
  auto* c_analyze = app.add_subcommand("analyze", "decay fit, delay and spectrum of a waveform");
  add_common(c_analyze, analyze);
  c_analyze->add_option("--input", input, "CSV with a 't' column (default: simulate the circuit)");
  c_analyze->add_option("--signal", signal, "column to fit and transform")->capture_default_str();
  c_analyze->add_option("--reference", reference, "column to correlate against")->capture_default_str();
  c_analyze->add_option("--floor", floor, "ignore envelope peaks at or below this level");
  c_analyze->add_flag("--hann", hann, "apply a Hann window before the FFT");
  auto* c_pipe = app.add_subcommand("pipeline", "run every stage and emit packets");
  add_common(c_pipe, pipe);
  c_pipe->add_option("--scenario", scenario, "scenario section to run (default: all)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*c_spike) return cmd_spike(spike);
    if (*c_evolve) return cmd_evolve(evolve, evolve_spikes);
    if (*c_ttm) return cmd_ttm(ttm, ttm_spikes);
    if (*c_analyze) return cmd_analyze(analyze, input, signal, reference, floor, hann);
    if (*c_pipe) return cmd_pipeline(pipe, scenario);
  } catch (const config::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
