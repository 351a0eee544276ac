#include <cmath>
#include <vector>

#include <benchmark/benchmark.h>

#include "atomchip/chip_model.hpp"
#include "atomchip/classical_sim.hpp"
#include "atomchip/gpe_sim.hpp"
#include "atomchip/mode_analysis.hpp"
#include "atomchip/pade.hpp"
#include "atomchip/scaling_sim.hpp"
#include "atomchip/sta_design.hpp"

using namespace atomchip;

namespace {

const ChipConfig& chip() {
  static ChipConfig c = quantus_z_chip(5.0, 21.5e-4);
  return c;
}

const TrapTables& tables() {
  static TrapTables t =
      trap_tables(chip(), rb87_f2m2(), 4.3e-4, 22e-4, 40, 4);
  return t;
}

TrajectoryAnsatz ansatz() {
  TrajectoryAnsatz an;
  an.kind = AnsatzKind::ChirpedSine;
  an.chirp_a = default_chirp_a;
  an.chirp_b = default_chirp_b;
  an.t_f = 75e-3;
  an.z_i = tables().zt_of_bias(21.5e-4);
  an.z_f = tables().zt_of_bias(4.5e-4);
  return an;
}

const RampSchedule& schedule() {
  static RampSchedule s = design_ramp(ansatz(), tables(), 7501);
  return s;
}

} // namespace

static void BM_field_at(benchmark::State& state) {
  Vec3 p{1e-4, 2e-4, 5e-4};
  for (auto _ : state) benchmark::DoNotOptimize(field_at(chip(), p));
}
BENCHMARK(BM_field_at);

static void BM_characterize_trap(benchmark::State& state) {
  auto sp = rb87_f2m2();
  for (auto _ : state)
    benchmark::DoNotOptimize(characterize_trap(chip(), sp));
}
BENCHMARK(BM_characterize_trap);

static void BM_pade_eval(benchmark::State& state) {
  const auto& fit = tables().omega_z2;
  double z = 0.5 * (fit.z_min + fit.z_max);
  for (auto _ : state) benchmark::DoNotOptimize(fit(z));
}
BENCHMARK(BM_pade_eval);

static void BM_evaluate_trajectory(benchmark::State& state) {
  auto an = ansatz();
  for (auto _ : state)
    benchmark::DoNotOptimize(evaluate_trajectory(an, 30e-3));
}
BENCHMARK(BM_evaluate_trajectory);

static void BM_design_ramp(benchmark::State& state) {
  auto an = ansatz();
  for (auto _ : state)
    benchmark::DoNotOptimize(design_ramp(an, tables(), 751));
}
BENCHMARK(BM_design_ramp);

static void BM_classical_integrate(benchmark::State& state) {
  for (auto _ : state)
    benchmark::DoNotOptimize(
        integrate(schedule(), TrapModel::Anharmonic, 50e-3));
}
BENCHMARK(BM_classical_integrate);

static void BM_scaling_integrate(benchmark::State& state) {
  Vec3 w{2 * M_PI * 12.5, 2 * M_PI * 50, 2 * M_PI * 49.5};
  TrapFrequencySchedule s;
  s.segments.push_back({100e-3, 5e-5, nullptr, "free"});
  for (auto _ : state)
    benchmark::DoNotOptimize(integrate_scaling(s, w, 1e-3));
}
BENCHMARK(BM_scaling_integrate);

static void BM_gpe_step(benchmark::State& state) {
  const size_t n = static_cast<size_t>(state.range(0));
  auto sp = rb87_f2m2();
  GridSpec g;
  g.n = {n, n, n};
  g.extent = {20e-6, 20e-6, 20e-6};
  TrapSnapshot trap;
  trap.omega_x = trap.omega_y = trap.omega_z = 2 * M_PI * 100;
  auto gs = ground_state(g, sp, trap, PotentialModel::HarmonicFixed, {}, 0.0);
  PropagationOptions po;
  po.dt = 1e-6;
  po.observe_dt = 1.0;
  WaveFunction psi = gs.psi;
  for (auto _ : state) {
    auto res = propagate(psi, sp, [&](double) { return trap; },
                         PotentialModel::HarmonicFixed, {}, 0.0, 32e-6, po);
    benchmark::DoNotOptimize(res.psi.amp.data());
  }
  state.SetItemsProcessed(state.iterations() * 32); // time steps per iteration
}
BENCHMARK(BM_gpe_step)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

static void BM_analyze_series(benchmark::State& state) {
  std::vector<double> t, v;
  for (int i = 0; i < 4096; ++i) {
    t.push_back(i * 1e-3);
    v.push_back(std::sin(2 * M_PI * 37.0 * t.back()) +
                0.2 * std::sin(2 * M_PI * 80.0 * t.back()));
  }
  for (auto _ : state) benchmark::DoNotOptimize(analyze_series(t, v, 1e-2));
}
BENCHMARK(BM_analyze_series);

BENCHMARK_MAIN();
