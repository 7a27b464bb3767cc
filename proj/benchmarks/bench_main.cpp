#include <benchmark/benchmark.h>

#include <complex>
#include <random>
#include <vector>

#include "qsnn/analysis.hpp"
#include "qsnn/entangled.hpp"
#include "qsnn/quantum.hpp"
#include "qsnn/spiking.hpp"

using namespace qsnn;

static void BM_CircuitSimulate(benchmark::State& state) {
  spiking::NeuronCircuitParams p;
  p.k1_coupled = 220.0;
  p.k2_coupled = -10.0;
  spiking::NeuronNetworkState s;
  s.v1 = 1.0;
  const double t_end = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(spiking::simulate(p, s, 1e-3, t_end));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(t_end * 1e3));
}
BENCHMARK(BM_CircuitSimulate)->Arg(1)->Arg(50);

static void BM_LindbladStep(benchmark::State& state) {
  const quantum::FockConfig cfg{static_cast<int>(state.range(0))};
  quantum::QubitCavity model(cfg);
  quantum::HamiltonianParams hp;
  hp.drive_amp = 0.5;
  hp.theta_schedule.entries = {{0.0, 1e9, 2.0}};
  const quantum::LindbladGenerator gen([&](double t) { return model.hamiltonian(t, hp); },
                                       model.default_channels(7.4, 0.5), cfg.dim());
  quantum::ComplexOperator rho =
      quantum::DensityMatrix::basis_state(cfg.dim(), cfg.fock_dim()).matrix();
  double t = 0.0;
  for (auto _ : state) {
    rho = gen.rk4_step(rho, t, 0.01);
    t += 0.01;
    benchmark::DoNotOptimize(rho.data());
  }
}
BENCHMARK(BM_LindbladStep)->Arg(2)->Arg(4)->Arg(8);

static void BM_Fft(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n;
  std::vector<std::complex<double>> x(static_cast<std::size_t>(state.range(0)));
  for (auto& v : x) v = {n(rng), n(rng)};
  for (auto _ : state) {
    auto y = x;
    analysis::fft_radix2(y);
    benchmark::DoNotOptimize(y.data());
  }
}
BENCHMARK(BM_Fft)->RangeMultiplier(8)->Range(1 << 10, 1 << 16);

static void BM_Concurrence(benchmark::State& state) {
  Eigen::VectorXcd psi(4);
  psi << 0.6, 0.0, std::complex<double>(0.0, 0.48), 0.64;
  const auto rho = quantum::DensityMatrix::pure(psi);
  for (auto _ : state) benchmark::DoNotOptimize(entangled::concurrence(rho));
}
BENCHMARK(BM_Concurrence);
BENCHMARK_MAIN();
