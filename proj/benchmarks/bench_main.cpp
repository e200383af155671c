#include <benchmark/benchmark.h>

#include "rodtrap/analysis.hpp"
#include "rodtrap/emitter.hpp"
#include "rodtrap/langevin.hpp"
#include "rodtrap/optics.hpp"
#include "rodtrap/trap.hpp"

using namespace rodtrap;

namespace {

langevin::TimeSeries motion(double duration) {
  trap::ClusterSample c;
  const auto alpha = trap::polarizability(c);
  trap::TrapParams tp;
  const auto k = langevin::TrapStiffness::from_depth(trap::trap_depth(alpha, tp), nanometers(50.0));
  const auto g = trap::cluster_damping(c, trap::GasParams{});
  langevin::SimConfig sc;
  sc.duration = Seconds(duration);
  sc.record_stride = 20;
  return langevin::simulate_axial_motion(k, g.gamma, trap::cluster_mass(c), Kelvin(296.0), sc);
}

void BM_Langevin(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(motion(1e-4));
  st.SetItemsProcessed(st.iterations() * 100000);
}
BENCHMARK(BM_Langevin)->Unit(benchmark::kMillisecond);

void BM_TimeTags(benchmark::State& st) {
  for (auto _ : st)
    benchmark::DoNotOptimize(emitter::generate_time_tags({}, {}, {}, 0.1, 7));
  st.SetItemsProcessed(st.iterations() * 100000);
}
BENCHMARK(BM_TimeTags)->Unit(benchmark::kMillisecond);

void BM_G2(benchmark::State& st) {
  emitter::EmitterModel em;
  em.auger_probability = 0.5;
  const auto tags = emitter::generate_time_tags({}, em, {}, 1.0, 11);
  for (auto _ : st) benchmark::DoNotOptimize(analysis::g2_zero(tags, 1e-6));
  st.SetItemsProcessed(st.iterations() * static_cast<long>(tags.events.size()));
}
BENCHMARK(BM_G2)->Unit(benchmark::kMillisecond);

void BM_ApertureImage(benchmark::State& st) {
  optics::GridSpec grid{static_cast<std::size_t>(st.range(0)), 5.0};
  const auto d = optics::DipoleOrientation::tilted(0.3, 0.7);
  for (auto _ : st) benchmark::DoNotOptimize(optics::general_dipole_image(d, {}, grid));
}
BENCHMARK(BM_ApertureImage)->Arg(128)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_WelchPsd(benchmark::State& st) {
  const auto z = motion(2e-3);
  for (auto _ : st) benchmark::DoNotOptimize(analysis::power_spectral_density(z, 4096, 2048));
}
BENCHMARK(BM_WelchPsd)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
