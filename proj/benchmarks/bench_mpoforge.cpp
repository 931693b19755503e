#include <benchmark/benchmark.h>

#include <random>

#include "mpoforge/expfit.hpp"
#include "mpoforge/gate_mpo.hpp"
#include "mpoforge/ham_mpo.hpp"
#include "mpoforge/thermo.hpp"
#include "mpoforge/umps.hpp"

using namespace mpoforge;

namespace {

imps::UniformMPS random_state(int d, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g;
  imps::UniformMPS s;
  for (int i = 0; i < 2; ++i) {
    Mat a(d, d);
    for (int r = 0; r < d; ++r)
      for (int c = r; c < d; ++c) a(r, c) = a(c, r) = 0.25 * g(rng);
    if (i == 0) a += Mat::Identity(d, d);
    s.a.push_back(a);
  }
  return imps::normalize(s);
}

/// One imaginary-time sweep at bond D: apply the zz gate (doubling the bond)
/// and truncate back. This is the inner loop of the ground-state search.
void bench_sweep_truncate(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  imps::UniformMPS s = random_state(d, 7);
  const gate::GateMPO zz = gate::build_zz_gate(0.01);
  Vec warm;
  for (auto _ : state) {
    imps::UniformMPS grown = imps::apply_gate(s, zz);
    auto [next, report] = imps::truncate(grown, d, &warm);
    benchmark::DoNotOptimize(report.discarded_weight);
    s = imps::normalize(next);
  }
}

void bench_transfer_fixed_point(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  imps::UniformMPS s = random_state(d, 11);
  for (auto _ : state) {
    auto fp = thermo::fixed_points(s);
    benchmark::DoNotOptimize(fp.value);
  }
}

void bench_energy_density(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  imps::UniformMPS s = random_state(d, 5);
  ham::HamiltonianMPO h = ham::build_expdecay_mpo({1, 1, 1}, {0.5, 0.6, 0.7}, Mat::Zero(2, 2));
  for (auto _ : state) {
    auto ev = thermo::energy_density(s, h);
    benchmark::DoNotOptimize(ev.energy);
  }
}

void bench_expfit(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Vec f(400);
  for (int r = 1; r <= 400; ++r) f(r - 1) = std::pow(static_cast<double>(r), -3.0);
  for (auto _ : state) {
    auto fit = expfit::fit_exp_sum(f, n, expfit::PencilMethod::Qr);
    benchmark::DoNotOptimize(fit.weights);
  }
}

}  // namespace

BENCHMARK(bench_sweep_truncate)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(bench_transfer_fixed_point)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(bench_energy_density)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(bench_expfit)->Arg(3)->Arg(6)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
