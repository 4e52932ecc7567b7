#include <benchmark/benchmark.h>

#include <complex>
#include <vector>

#include "ppres/field.hpp"
#include "ppres/protocols.hpp"
#include "ppres/spectroscopy.hpp"

namespace {

constexpr double kTwoPi = 2.0 * 3.14159265358979323846;

ppres::field::CrossSection reference_section() {
  ppres::field::CrossSection s;
  s.width = 300e-9;
  s.thickness = 50e-9;
  s.dielectric_thickness = 500e-9;
  s.current_zpf = 394.9e-9;
  return s;
}

void BM_DeltaB(benchmark::State& state) {
  const ppres::field::CrossSection s = reference_section();
  double y = -50e-9;
  for (auto _ : state) {
    benchmark::DoNotOptimize(ppres::field::delta_b(s, {0.0, y}));
    y = y < -40e-9 ? y + 1e-12 : -50e-9;
  }
}
BENCHMARK(BM_DeltaB);

void BM_FieldMap(benchmark::State& state) {
  const ppres::field::CrossSection s = reference_section();
  const double spacing = static_cast<double>(state.range(0)) * 1e-9;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        ppres::field::field_map(s, ppres::field::default_window(s), spacing));
  }
}
BENCHMARK(BM_FieldMap)->Arg(20)->Arg(10)->Arg(5);

void BM_FitResonance(benchmark::State& state) {
  ppres::spectroscopy::SynthParams params;
  ppres::spectroscopy::DeembedParams bg;
  const ppres::spectroscopy::ComplexTrace trace =
      ppres::spectroscopy::synthesize_trace(params, bg, 0.01, 7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ppres::spectroscopy::fit_resonance(trace));
  }
}
BENCHMARK(BM_FitResonance);

void BM_Deembed(benchmark::State& state) {
  ppres::spectroscopy::SynthParams params;
  ppres::spectroscopy::DeembedParams bg;
  bg.amplitude = 0.8;
  bg.phase_offset = 1.0;
  bg.electrical_delay = 50e-9;
  const ppres::spectroscopy::ComplexTrace trace =
      ppres::spectroscopy::synthesize_trace(params, bg, 0.01, 7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ppres::spectroscopy::deembed(trace));
  }
}
BENCHMARK(BM_Deembed);

void BM_McPhotonCounting(benchmark::State& state) {
  ppres::protocols::PhotonCountingScenario s;
  const double tau = ppres::protocols::pc_integration_time(s);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ppres::protocols::mc_photon_counting(
        s, tau, static_cast<std::size_t>(state.range(0)), 1));
  }
}
BENCHMARK(BM_McPhotonCounting)->Arg(1000)->Arg(10000);

void BM_OptimizeReadout(benchmark::State& state) {
  const ppres::protocols::DispersiveScenario s =
      ppres::protocols::critically_coupled(30e3, 1e4, 7.5e9, 0.3, 1.0);
  std::vector<double> grid;
  for (double mhz : {1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0}) grid.push_back(kTwoPi * mhz * 1e6);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ppres::protocols::optimize_readout(s, grid));
  }
}
BENCHMARK(BM_OptimizeReadout);

}  // namespace

BENCHMARK_MAIN();
