#include <benchmark/benchmark.h>

#include <cmath>

#include "cpdesign/adjoint.hpp"
#include "cpdesign/kernel.hpp"
#include "cpdesign/levelset.hpp"
#include "cpdesign/mesh.hpp"
#include "cpdesign/potential.hpp"

using namespace cpd;

namespace {

SimulationConfig box(int dims, int resolution, double domain = 4.0) {
  SimulationConfig s;
  s.dimensions = dims;
  s.domain_size = domain;
  s.resolution = resolution;
  s.pml_thickness = 1.0;
  s.courant = 0.5;
  s.steps = s.steps_for_duration(60.0);
  return s;
}

EvaluatorSettings evaluator(int dims, int resolution, double domain = 4.0) {
  EvaluatorSettings e;
  e.simulation = box(dims, resolution, domain);
  e.atom = rubidium_preset(100.0);
  e.kernel.window_frequency = default_window_frequency(e.simulation.dx());
  return e;
}

}  // namespace

static void BM_YeeStep(benchmark::State& state) {
  const auto s = box(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  const auto media = to_media(init_disk(s, 0.6, {0.4, 0, 0}), gold_preset());
  Simulation sim(s, media);
  sim.add_source({{-0.55, 0, 0}, {1, 0, 0}, build_source_waveform(2.5, 1.0, s.dt(), s.steps).samples});
  // past the end of the pulse the fields keep evolving source-free
  for (auto _ : state) sim.step();
  state.SetItemsProcessed(state.iterations() * static_cast<long>(s.lattice().shape.size()));
}
BENCHMARK(BM_YeeStep)->Args({2, 10})->Args({2, 20})->Args({3, 8})->Unit(benchmark::kMicrosecond);

static void BM_BuildKernel(benchmark::State& state) {
  const auto e = evaluator(3, 8);
  const auto src = build_source_waveform(2.5, 1.0, e.simulation.dt(), e.simulation.steps);
  KernelOptions k = e.kernel;
  k.frequency_samples = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(build_kernel(e.atom, src, k));
}
BENCHMARK(BM_BuildKernel)->Arg(16384)->Arg(65536)->Unit(benchmark::kMillisecond);

static void BM_Merit2D(benchmark::State& state) {
  const auto e = evaluator(2, 10, 8.0);
  CasimirPolderEvaluator ev(e);
  const auto media = to_media(init_disk(e.simulation, 0.8, {0.85, 0, 0}), gold_preset());
  for (auto _ : state) benchmark::DoNotOptimize(ev.merit(media, {-0.55, 0, 0}));
}
BENCHMARK(BM_Merit2D)->Unit(benchmark::kMillisecond);

static void BM_Sensitivity2D(benchmark::State& state) {
  const auto e = evaluator(2, 10, 8.0);
  CasimirPolderEvaluator ev(e);
  auto disk = init_disk(e.simulation, 0.8, {0.85, 0, 0});
  const auto media = to_media(disk, gold_preset());
  const auto band = make_band(disk);
  for (auto _ : state) benchmark::DoNotOptimize(merit_sensitivity(ev, media, {-0.55, 0, 0}, band, {}));
}
BENCHMARK(BM_Sensitivity2D)->Unit(benchmark::kMillisecond);

static void BM_Reinitialize(benchmark::State& state) {
  const auto s = box(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)), 8.0);
  const auto f = LevelSetField::from_function(s.lattice(), [](const Vec3& p) {
    const double v = p.x * p.x / 0.81 + (p.y * p.y + p.z * p.z) / 1.44 - 1.0;
    return v * (1.5 + 0.3 * std::tanh(v));
  });
  for (auto _ : state) {
    auto g = f;
    benchmark::DoNotOptimize(reinitialize(g));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(f.phi.size()));
}
BENCHMARK(BM_Reinitialize)->Args({2, 10})->Args({3, 8})->Unit(benchmark::kMillisecond);

static void BM_ExtendVelocity(benchmark::State& state) {
  const auto s = box(3, 8, 8.0);
  const auto f = init_cylinder(s, 1.5, 0.4, {0.55, 0, 0});
  const auto band = make_band(f);
  std::vector<double> seed(band.nodes.size());
  for (std::size_t i = 0; i < seed.size(); ++i) seed[i] = std::sin(0.1 * static_cast<double>(i));
  for (auto _ : state) benchmark::DoNotOptimize(extend_velocity(f, band, seed));
}
BENCHMARK(BM_ExtendVelocity)->Unit(benchmark::kMillisecond);

static void BM_TopologyStats(benchmark::State& state) {
  const auto s = box(3, 8, 8.0);
  const auto f = LevelSetField::from_function(s.lattice(), [](const Vec3& p) {
    return std::max(std::abs(p.x) - 0.2, std::abs(std::hypot(p.y, p.z) - 1.0) - 0.5);
  });
  for (auto _ : state) benchmark::DoNotOptimize(topology_stats(f));
}
BENCHMARK(BM_TopologyStats)->Unit(benchmark::kMillisecond);

static void BM_ExtractContour(benchmark::State& state) {
  const auto f = init_cylinder(box(3, 8, 8.0), 1.5, 0.4, {0.55, 0, 0});
  for (auto _ : state) benchmark::DoNotOptimize(extract_contour(f));
}
BENCHMARK(BM_ExtractContour)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
