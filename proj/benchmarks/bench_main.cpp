#include "gsoid/config.hpp"
#include "gsoid/debiaser.hpp"
#include "gsoid/graph_core.hpp"
#include "gsoid/harness.hpp"
#include "gsoid/identifier.hpp"
#include "gsoid/topology_gen.hpp"

#include <benchmark/benchmark.h>

using namespace gsoid;

namespace {

TrialData reference_trial() {
    const auto cfg = ExperimentConfig::reference_protocol(TopologyKind::Random);
    return prepare_trial(cfg, trial_seed(cfg.seed, 0));
}

void BM_GraphFilter(benchmark::State& st) {
    const auto n = static_cast<int>(st.range(0));
    const GsoMatrix w = gen_gso(TopologySpec::random(n), RngSeed{1});
    const FilterTaps taps{0.5, -0.25, 0.125, 0.0625};
    for (auto _ : st) benchmark::DoNotOptimize(graph_filter(w, taps));
}
BENCHMARK(BM_GraphFilter)->Arg(12)->Arg(48)->Arg(128);

void BM_IdentifierStep(benchmark::State& st) {
    const auto cfg = ExperimentConfig::reference_protocol(TopologyKind::Random);
    const TrialData d = reference_trial();
    HyperParams hp = cfg.hyper;
    hp.path = st.range(0) == 1 ? Path::Path1 : Path::Path2;
    IdentifierState s = IdentifierState::zeros(d.stream.n, cfg.p_order);
    long t = 0;
    for (auto _ : st) {
        update_correlations(s, d.stream.samples[static_cast<std::size_t>(t++ % 600)], hp.lambda);
        step_psi(s, hp, cfg.stepsize);
        step_w(s, hp, cfg.stepsize);
    }
}
BENCHMARK(BM_IdentifierStep)->Arg(1)->Arg(2);

void BM_Algorithm1(benchmark::State& st) {
    const auto cfg = ExperimentConfig::reference_protocol(TopologyKind::Random);
    const TrialData d = reference_trial();
    for (auto _ : st) benchmark::DoNotOptimize(run_algorithm1(d.stream, cfg.hyper, cfg.stepsize, cfg.t_star).w_star);
}
BENCHMARK(BM_Algorithm1)->Unit(benchmark::kMillisecond);

void BM_Trial(benchmark::State& st) {
    const auto cfg = ExperimentConfig::reference_protocol(TopologyKind::Random);
    const TrialData d = reference_trial();
    for (auto _ : st) benchmark::DoNotOptimize(run_trial_on(cfg, d, cfg.hyper, cfg.debias).report.p_m);
}
BENCHMARK(BM_Trial)->Unit(benchmark::kMillisecond);

void BM_Simulate(benchmark::State& st) {
    const auto cfg = ExperimentConfig::reference_protocol(TopologyKind::Sbm);
    std::uint64_t i = 0;
    for (auto _ : st) benchmark::DoNotOptimize(prepare_trial(cfg, trial_seed(cfg.seed, i++)).stream.size());
}
BENCHMARK(BM_Simulate)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
