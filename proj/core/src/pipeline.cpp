#include "qsnn/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <memory>
#include <numbers>
#include <sstream>

#include "json.hpp"
#include "qsnn/csv.hpp"
#include "qsnn/entangled.hpp"
#include "qsnn/error.hpp"

namespace qsnn::pipeline {
namespace fs = std::filesystem;
using quantum::ComplexOperator;
using quantum::DensityMatrix;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::string read_all(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw Error(Errc::io, "cannot read " + p.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// Largest multiple of dt not above t.
double snap_down(double t, double dt) {
  return std::floor(t / dt + 1e-9) * dt;
}

DensityMatrix state_at(const DensityMatrix& rho0, const quantum::LindbladGenerator& gen,
                       double dt, double t) {
  if (t <= 0.0) return rho0;
  const auto steps = quantum::step_count(dt, t);
  return quantum::evolve_generator(rho0, gen, 0.0, dt, t, steps).states.back();
}

std::vector<quantum::CollapseChannel> network_channels(const config::NetworkRun& n) {
  std::vector<quantum::CollapseChannel> out;
  const ComplexOperator s1 = entangled::qubit1_lowering();
  const ComplexOperator s2 = entangled::qubit2_lowering();
  if (n.t1) {
    out.push_back({s1, 1.0 / *n.t1});
    out.push_back({s2, 1.0 / *n.t1});
  }
  if (n.dephasing > 0.0) {
    for (const auto* s : {&s1, &s2}) {
      const ComplexOperator z = s->adjoint() * *s - *s * s->adjoint();
      out.push_back({z, n.dephasing});
    }
  }
  return out;
}

nlohmann::ordered_json summary_json(const WindowSummary& s) {
  nlohmann::ordered_json j;
  j["window"] = s.window;
  j["theta_max"] = s.theta_max;
  j["q"] = s.q;
  j["level"] = s.level;
  j["pair_used"] = s.pair_used;
  j["correlation"] = s.correlation;
  j["correlation_defined"] = s.correlation_defined;
  j["t_report"] = s.t_report;
  j["bloch"] = s.bloch;
  j["ttm_max_error"] = s.ttm_max_error;
  j["class"] = decision::to_string(s.cls);
  j["directive"] = s.directive;
  return j;
}

}  // namespace

quantum::ThetaSchedule spike_to_theta(std::span<const spiking::Spike> spikes,
                                      const config::SpikeToThetaMap& map, double window_end) {
  quantum::ThetaSchedule out;
  if (spikes.empty()) return out;
  if (!(map.theta_max > 0.0 && map.theta_max < kTwoPi)) {
    throw Error(Errc::invalid_argument, "mapping.theta_max must be in (0, 2pi)");
  }
  for (std::size_t k = 1; k < spikes.size(); ++k) {
    if (!(spikes[k].t_peak > spikes[k - 1].t_peak)) {
      throw Error(Errc::invalid_argument, "spike_to_theta: spikes must be sorted by time");
    }
  }
  double vmax = 0.0;
  for (const auto& s : spikes) vmax = std::max(vmax, s.v_peak);

  const std::size_t n = spikes.size();
  for (std::size_t k = 0; k < n; ++k) {
    const double t_start = spikes[k].t_peak;
    const double t_end = k + 1 < n ? spikes[k + 1].t_peak : window_end;
    if (!(t_end > t_start)) continue;
    double theta = map.theta_max;
    switch (map.mode) {
      case config::ThetaMode::amplitude:
        theta = vmax > 0.0 ? map.theta_max * std::max(0.0, spikes[k].v_peak) / vmax : 0.0;
        break;
      case config::ThetaMode::index:
        theta = map.theta_max * static_cast<double>(k + 1) / static_cast<double>(n);
        break;
      case config::ThetaMode::constant:
        break;
    }
    out.entries.push_back({t_start, t_end, theta});
  }
  return out;
}

std::vector<spiking::Spike> read_spike_list(const fs::path& path, int neuron_id) {
  const csv::Table t = csv::read(path);
  const std::size_t ct = t.column("t_peak");
  const std::size_t cv = t.column("v_peak");
  const std::size_t cn = t.column("neuron_id");
  std::vector<spiking::Spike> out;
  for (const auto& r : t.rows) {
    if (static_cast<int>(r[cn]) == neuron_id) out.push_back({r[ct], r[cv]});
  }
  return out;
}

RunWriter::RunWriter(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  fs::create_directories(root_, ec);
  if (ec || !fs::is_directory(root_)) {
    throw Error(Errc::io, "cannot create output directory " + root_.string());
  }
}

void RunWriter::write(const std::string& rel, const std::string& content) {
  const fs::path p = root_ / rel;
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  f << content;
  f.close();
  if (!f) throw Error(Errc::io, "failed writing " + p.string());
  files_.push_back({rel, content.size(), config::fnv1a_hex(content)});
}

void RunWriter::write_csv(const std::string& rel, const std::vector<std::string>& header,
                          const std::vector<std::vector<double>>& rows) {
  write(rel, csv::render(header, rows));
}

void RunWriter::record(const std::string& rel) {
  const std::string content = read_all(root_ / rel);
  files_.push_back({rel, content.size(), config::fnv1a_hex(content)});
}

SpikeStage run_spike_stage(const config::RunConfig& cfg) {
  SpikeStage s;
  s.trains = spiking::simulate(cfg.circuit, cfg.spiking.initial, cfg.spiking.dt,
                               cfg.spiking.t_end);
  s.neuron1 = spiking::count_spikes(s.trains[0], cfg.spiking.threshold);
  s.neuron2 = spiking::count_spikes(s.trains[1], cfg.spiking.threshold);
  s.trains[0].spikes = s.neuron1.spikes;
  s.trains[1].spikes = s.neuron2.spikes;
  return s;
}

void write_spike_artifacts(RunWriter& w, const SpikeStage& s, bool with_portrait) {
  const auto& a = s.trains[0];
  const auto& b = s.trains[1];
  std::vector<std::vector<double>> rows;
  rows.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) rows.push_back({a.time(i), a.v[i], b.v[i]});
  w.write_csv("spike_train.csv", {"t", "v1", "v2"}, rows);

  rows.clear();
  for (const auto& sp : s.neuron1.spikes) rows.push_back({sp.t_peak, sp.v_peak, 1.0});
  for (const auto& sp : s.neuron2.spikes) rows.push_back({sp.t_peak, sp.v_peak, 2.0});
  w.write_csv("spikes.csv", {"t_peak", "v_peak", "neuron_id"}, rows);

  if (with_portrait) {
    const auto p1 = spiking::phase_portrait(a);
    const auto p2 = spiking::phase_portrait(b);
    rows.clear();
    for (std::size_t i = 0; i < p1.size(); ++i) {
      rows.push_back({a.time(i), p1[i].dv, p1[i].ddv, p2[i].dv, p2[i].ddv});
    }
    w.write_csv("portrait.csv", {"t", "dv1", "ddv1", "dv2", "ddv2"}, rows);
  }
}

quantum::HamiltonianParams hamiltonian_params(const config::RunConfig& cfg,
                                              quantum::ThetaSchedule schedule) {
  quantum::HamiltonianParams hp;
  hp.g = cfg.quantum.g;
  hp.drive_amp = cfg.quantum.drive_amp;
  hp.tau_e = cfg.quantum.tau_e;
  hp.theta_schedule = std::move(schedule);
  return hp;
}

std::vector<quantum::CollapseChannel> qubit_cavity_channels(const config::RunConfig& cfg) {
  const quantum::QubitCavity model(cfg.quantum.fock);
  return model.default_channels(
      cfg.quantum.t1.value_or(std::numeric_limits<double>::infinity()), cfg.quantum.kappa);
}

DensityMatrix initial_qubit_state(const config::RunConfig& cfg) {
  switch (cfg.quantum.initial) {
    case config::InitialQubit::excited: return DensityMatrix::basis_state(2, 1);
    case config::InitialQubit::ground: return DensityMatrix::basis_state(2, 0);
    case config::InitialQubit::plus: return quantum::qubit_state_from_bloch({1.0, 0.0, 0.0});
  }
  return DensityMatrix::basis_state(2, 1);
}

void write_theta_schedule(RunWriter& w, const std::string& rel, const quantum::ThetaSchedule& s) {
  std::vector<std::vector<double>> rows;
  for (const auto& e : s.entries) rows.push_back({e.t_start, e.t_end, e.theta});
  w.write_csv(rel, {"t_start", "t_end", "theta"}, rows);
}

void write_trajectory(RunWriter& w, const std::string& prefix, const quantum::Trajectory& tr,
                      const quantum::FockConfig& fock) {
  const int d = fock.dim();
  std::vector<std::string> header{"t"};
  for (int i = 0; i < d; ++i) {
    for (int j = i; j < d; ++j) {
      const std::string ij = std::to_string(i) + "_" + std::to_string(j);
      header.push_back("re_rho_" + ij);
      header.push_back("im_rho_" + ij);
    }
  }
  std::vector<std::vector<double>> rho_rows, bloch_rows;
  for (std::size_t k = 0; k < tr.states.size(); ++k) {
    const auto& m = tr.states[k].matrix();
    std::vector<double> row{tr.times[k]};
    for (int i = 0; i < d; ++i) {
      for (int j = i; j < d; ++j) {
        row.push_back(m(i, j).real());
        row.push_back(m(i, j).imag());
      }
    }
    rho_rows.push_back(std::move(row));
    const auto b = quantum::bloch_vector(quantum::partial_trace_to_qubit(tr.states[k], fock));
    bloch_rows.push_back({tr.times[k], b[0], b[1], b[2]});
  }
  w.write_csv(prefix + "rho.csv", header, rho_rows);
  w.write_csv(prefix + "bloch.csv", {"t", "bloch_x", "bloch_y", "bloch_z"}, bloch_rows);
}

TtmStage run_ttm_stage(const config::RunConfig& cfg, const quantum::HamiltonianParams& hp) {
  const auto& fock = cfg.quantum.fock;
  const auto channels = qubit_cavity_channels(cfg);
  const double dt = cfg.quantum.dt;
  const double dt_map = cfg.ttm.dt_map;
  const std::size_t K = cfg.ttm.depth;
  const bool qubit = cfg.ttm.space == nonmarkov::MapSpace::qubit;

  TtmStage s;
  s.maps = nonmarkov::learn_maps(hp, channels, fock, dt, dt_map, K, cfg.ttm.space);
  s.tensors = nonmarkov::compute_transfer_tensors(s.maps);

  const std::size_t sub = quantum::step_count(dt, dt_map);
  const DensityMatrix rho0 = quantum::with_cavity_vacuum(initial_qubit_state(cfg), fock);
  const auto direct = quantum::evolve(rho0, hp, channels, dt,
                                      static_cast<double>(2 * K * sub) * dt, sub);
  std::vector<DensityMatrix> ref;
  ref.reserve(direct.states.size());
  for (const auto& r : direct.states) {
    ref.push_back(qubit ? quantum::partial_trace_to_qubit(r, fock) : r);
  }
  const std::span<const DensityMatrix> history(ref.data(), K + 1);
  const auto ttm = nonmarkov::ttm_propagate(s.tensors, history, K);
  for (std::size_t i = 0; i < ttm.states.size() && i < ref.size(); ++i) {
    s.times.push_back(static_cast<double>(i) * dt_map);
    s.error.push_back(nonmarkov::trace_distance(ttm.states[i], ref[i]));
    s.max_error = std::max(s.max_error, s.error.back());
  }
  return s;
}

void write_ttm_artifacts(RunWriter& w, const std::string& prefix, const TtmStage& s) {
  const fs::path root = w.root();
  if (!prefix.empty()) fs::create_directories(root / prefix);
  nonmarkov::save_series(root / (prefix + "ttm_maps.bin"), root / (prefix + "ttm_maps.json"),
                         "maps", s.maps.dt_map, s.maps.maps);
  w.record(prefix + "ttm_maps.bin");
  w.record(prefix + "ttm_maps.json");
  nonmarkov::save_series(root / (prefix + "ttm_tensors.bin"),
                         root / (prefix + "ttm_tensors.json"), "tensors", s.tensors.dt_map,
                         s.tensors.tensors);
  w.record(prefix + "ttm_tensors.bin");
  w.record(prefix + "ttm_tensors.json");

  std::vector<std::vector<double>> rows;
  for (std::size_t n = 0; n < s.tensors.depth(); ++n) {
    rows.push_back({static_cast<double>(n + 1), s.tensors.tensors[n].norm()});
  }
  w.write_csv(prefix + "ttm_tensor_norms.csv", {"n", "value"}, rows);
  rows.clear();
  for (std::size_t i = 0; i < s.times.size(); ++i) rows.push_back({s.times[i], s.error[i]});
  w.write_csv(prefix + "ttm_error.csv", {"t", "value"}, rows);
}

quantum::ThetaSchedule final_entry_schedule(const quantum::ThetaSchedule& s, double horizon) {
  quantum::ThetaSchedule out;
  if (!s.entries.empty()) out.entries.push_back({0.0, horizon, s.entries.back().theta});
  return out;
}

double feedback_theta_max(const config::FeedbackPolicy& fb, decision::AwarenessClass cls,
                          double theta_max) {
  switch (cls) {
    case decision::AwarenessClass::EnhancedAwareness: {
      const double next = std::fmod(theta_max * fb.enhanced_scale, kTwoPi);
      return next > 0.0 ? next : fb.elevated_reset;
    }
    case decision::AwarenessClass::Elevated: return fb.elevated_reset;
    default: return theta_max;
  }
}

std::string RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["status"] = ok ? "ok" : "failed";
  j["failed_stage"] = ok ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(failed_stage);
  j["error"] = ok ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(error);
  j["config_hash"] = "fnv1a64:" + config_hash;
  auto files_j = nlohmann::ordered_json::array();
  for (const auto& f : files) {
    files_j.push_back({{"path", f.path}, {"bytes", f.bytes}, {"fnv1a", f.fnv1a}});
  }
  j["files"] = files_j;
  nlohmann::ordered_json t = nlohmann::ordered_json::object();
  for (const auto& [name, ms] : timings_ms) t[name] = ms;
  j["timings_ms"] = t;
  j["packets"] = packets;
  return j.dump(2) + "\n";
}

fs::path resolve_out_dir(const std::optional<std::string>& flag, const config::RunConfig& cfg) {
  if (flag && !flag->empty()) return *flag;
  if (const char* env = std::getenv("QSNN_OUT"); env != nullptr && *env != '\0') return env;
  return cfg.io.out_dir;
}

RunManifest run_pipeline(const config::RunConfig& cfg, const fs::path& out_dir) {
  RunManifest m;
  m.config_hash = config::fnv1a_hex(cfg.to_json());
  std::unique_ptr<RunWriter> writer;
  std::string stage = "io";

  auto timed = [&](const std::string& name, auto&& fn) {
    stage = name;
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const std::chrono::duration<double, std::milli> el = std::chrono::steady_clock::now() - t0;
    m.timings_ms.emplace_back(name, el.count());
  };

  try {
    writer = std::make_unique<RunWriter>(out_dir);
    RunWriter& w = *writer;
    timed("config", [&] {
      cfg.validate();
      w.write("effective_config.json", cfg.to_json());
    });

    SpikeStage sp;
    timed("spike", [&] {
      sp = run_spike_stage(cfg);
      write_spike_artifacts(w, sp);
    });

    const auto& fock = cfg.quantum.fock;
    const auto channels = qubit_cavity_channels(cfg);
    const double t_end = cfg.spiking.t_end;
    const double dtq = cfg.quantum.dt;
    const double dtn = cfg.network.dt;
    std::ostringstream packet_sink;
    decision::PacketEmitter emitter(&packet_sink);
    double theta_max = cfg.mapping.theta_max;
    const std::size_t windows = cfg.feedback.enabled ? cfg.feedback.windows : 1;

    for (std::size_t win = 0; win < windows; ++win) {
      const std::string prefix = win == 0 ? "" : "window_" + std::to_string(win) + "/";
      const std::string tag = win == 0 ? "" : "#" + std::to_string(win);
      WindowSummary sum;
      sum.window = win;
      sum.theta_max = theta_max;
      sum.q = static_cast<std::uint32_t>(sp.neuron1.count);

      quantum::ThetaSchedule schedule;
      timed("theta" + tag, [&] {
        config::SpikeToThetaMap map = cfg.mapping;
        map.theta_max = theta_max;
        schedule = spike_to_theta(sp.neuron1.spikes, map, t_end);
        write_theta_schedule(w, prefix + "theta_schedule.csv", schedule);
      });
      const double t_last = schedule.entries.empty() ? t_end : schedule.entries.back().t_start;
      sum.t_report = snap_down(t_last, dtq);

      const auto hp = hamiltonian_params(cfg, schedule);
      auto model = std::make_shared<quantum::QubitCavity>(fock);
      const quantum::LindbladGenerator gen(
          [model, hp](double t) { return model->hamiltonian(t, hp); }, channels, fock.dim());
      const DensityMatrix rho0 = quantum::with_cavity_vacuum(initial_qubit_state(cfg), fock);
      DensityMatrix qc_report;
      timed("evolve" + tag, [&] {
        const auto traj =
            quantum::evolve_generator(rho0, gen, 0.0, dtq, t_end, cfg.io.record_stride);
        write_trajectory(w, prefix + "qubit_cavity_", traj, fock);
        qc_report = state_at(rho0, gen, dtq, sum.t_report);
      });

      timed("ttm" + tag, [&] {
        // The switching schedule has no stationary kernel; characterise the
        // dynamics that hold from the last spike onwards instead.
        const double horizon = static_cast<double>(2 * cfg.ttm.depth + 1) * cfg.ttm.dt_map;
        const auto ttm = run_ttm_stage(
            cfg, hamiltonian_params(cfg, final_entry_schedule(schedule, horizon)));
        write_ttm_artifacts(w, prefix, ttm);
        sum.ttm_max_error = ttm.max_error;
      });

      timed("blp" + tag, [&] {
        const auto pairs = nonmarkov::default_pair_set();
        const auto rep = nonmarkov::blp_measure(hp, channels, fock, pairs, dtq, t_end);
        sum.level = rep.level;
        sum.pair_used = rep.pair_used;
        nlohmann::ordered_json j;
        j["level"] = rep.level;
        auto iv = nlohmann::ordered_json::array();
        for (const auto& r : rep.revival_intervals) iv.push_back({r.t_start, r.t_end});
        j["revival_intervals"] = iv;
        j["pair_used"] = rep.pair_used;
        w.write(prefix + "blp.json", j.dump(2) + "\n");

        const auto it = std::find_if(pairs.begin(), pairs.end(),
                                     [&](const auto& p) { return p.label == rep.pair_used; });
        const auto d = nonmarkov::pair_distance(gen, fock, *it, dtq, t_end);
        std::vector<std::vector<double>> rows;
        for (std::size_t i = 0; i < d.size(); i += cfg.io.record_stride) {
          rows.push_back({static_cast<double>(i) * dtq, d[i]});
        }
        w.write_csv(prefix + "blp_distance.csv", {"t", "value"}, rows);
      });

      DensityMatrix net_report;
      timed("network" + tag, [&] {
        entangled::TwoQubitCouplingSchedule sched;
        sched.tau_e = cfg.network.tau_e;
        for (const auto& e : schedule.entries) {
          sched.entries.push_back({e.t_start, e.t_end, cfg.network.j_exchange,
                                   cfg.network.drive, {e.theta, e.theta}});
        }
        sched.validate();
        const quantum::LindbladGenerator gen4(
            [sched](double t) { return entangled::coupled_hamiltonian(t, sched); },
            network_channels(cfg.network), 4);
        const DensityMatrix start = DensityMatrix::basis_state(4, 2);  // |e, g>
        const auto traj =
            quantum::evolve_generator(start, gen4, 0.0, dtn, t_end, cfg.io.record_stride);
        std::vector<std::vector<double>> rows;
        for (std::size_t k = 0; k < traj.states.size(); ++k) {
          rows.push_back({traj.times[k], entangled::concurrence(traj.states[k])});
        }
        w.write_csv(prefix + "concurrence.csv", {"t", "value"}, rows);

        const double t0 = snap_down(sum.t_report, dtn);
        net_report = state_at(start, gen4, dtn, t0);
        const auto g1 = entangled::g1_correlation(gen4, entangled::qubit1_lowering(), net_report,
                                                  t0, cfg.network.tau_step,
                                                  cfg.network.tau_count, dtn);
        rows.clear();
        for (std::size_t k = 0; k < g1.tau.size(); ++k) {
          rows.push_back({g1.tau[k], g1.normalization_defined ? g1.normalized[k]
                                                              : std::abs(g1.raw[k])});
        }
        w.write_csv(prefix + "g1.csv", {"t", "value"}, rows);
        sum.correlation_defined = g1.normalization_defined;
        sum.correlation = entangled::sustained_correlation(g1);
      });

      timed("mixture" + tag, [&] {
        const std::array<DensityMatrix, 3> parts{
            quantum::partial_trace_to_qubit(qc_report, fock),
            entangled::reduce_to_qubit1(net_report), entangled::reduce_to_qubit2(net_report)};
        const auto mixed = entangled::mix_density_matrices(parts, cfg.mixture);
        sum.bloch = quantum::bloch_vector(mixed);
        const auto& x = mixed.matrix();
        w.write_csv(prefix + "mixture.csv",
                    {"re_rho_0_0", "re_rho_0_1", "im_rho_0_1", "re_rho_1_1", "bloch_x",
                     "bloch_y", "bloch_z"},
                    {{x(0, 0).real(), x(0, 1).real(), x(0, 1).imag(), x(1, 1).real(),
                      sum.bloch[0], sum.bloch[1], sum.bloch[2]}});
      });

      timed("decision" + tag, [&] {
        decision::RunContext ctx;
        ctx.t_emit = sum.t_report;
        ctx.q = sum.q;
        ctx.level = sum.level;
        ctx.correlation = sum.correlation;
        ctx.bloch = sum.bloch;
        for (const auto& e : schedule.entries) ctx.theta.push_back(e.theta);
        const auto c = decision::classify(ctx.q, ctx.level, ctx.correlation, cfg.thresholds);
        sum.cls = c.cls;
        sum.directive = c.directive;
        if (emitter.generate_packet(ctx, cfg.thresholds)) ++m.packets;
      });

      m.windows.push_back(sum);
      if (cfg.feedback.enabled) theta_max = feedback_theta_max(cfg.feedback, sum.cls, theta_max);
    }

    stage = "output";
    w.write("packets.ndjson", packet_sink.str());
    auto arr = nlohmann::ordered_json::array();
    for (const auto& s : m.windows) arr.push_back(summary_json(s));
    w.write("summary.json", arr.dump(2) + "\n");
  } catch (const std::exception& e) {
    m.ok = false;
    m.failed_stage = stage;
    m.error = e.what();
  }

  if (writer) {
    m.files = writer->files();
    std::ofstream f(writer->root() / "manifest.json", std::ios::binary | std::ios::trunc);
    f << m.to_json();
  }
  return m;
}

}  // namespace qsnn::pipeline
