#include <btbsim/btb.hpp>
#include <btbsim/frontend.hpp>
#include <btbsim/synthetic.hpp>

#include <benchmark/benchmark.h>

#include <vector>

namespace {

using namespace btbsim;

const std::vector<TraceEvent>& trace() {
  static const std::vector<TraceEvent> t = [] {
    SyntheticSpec spec;
    spec.seed = 3;
    spec.event_count = 200'000;
    return gen_synthetic(spec);
  }();
  return t;
}

OrgSpec org_for(int index) {
  switch (index) {
    case 0:
      return BaselineSpec{};
    case 1:
      return SkewedSpec{};
    case 2:
      return FdipxSpec{};
    default:
      return MbtbSpec{1024, static_cast<unsigned>(index - 1), true, true};
  }
}

// Lookup followed by allocation on a taken miss, as the L2 BTB sees it.
void BM_LookupInsert(benchmark::State& state) {
  const auto spec = org_for(static_cast<int>(state.range(0)));
  state.SetLabel(describe(spec));
  const auto& t = trace();
  for (auto _ : state) {
    auto btb = make_btb(spec, 1);
    for (const auto& e : t) {
      const auto hit = btb->lookup(e.pc);
      if (e.taken && !hit) benchmark::DoNotOptimize(btb->insert(e.pc, e.target, e.kind));
    }
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(t.size()));
}
BENCHMARK(BM_LookupInsert)->DenseRange(0, 5)->Unit(benchmark::kMillisecond);

void BM_Frontend(benchmark::State& state) {
  const auto spec = org_for(static_cast<int>(state.range(0)));
  state.SetLabel(describe(spec));
  FrontendConfig config;
  config.l2btb = BtbSpec{spec, 2};
  const auto& t = trace();
  for (auto _ : state) {
    benchmark::DoNotOptimize(FrontendSim(config, t).run(20'000, t.size() - 20'000));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(t.size()));
}
BENCHMARK(BM_Frontend)->Arg(0)->Arg(3)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
