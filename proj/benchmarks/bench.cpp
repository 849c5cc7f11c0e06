#include <benchmark/benchmark.h>

#include <map>
#include <set>
#include <vector>

#include "replaygauge/eval.hpp"
#include "replaygauge/recommenders.hpp"
#include "replaygauge/rng.hpp"
#include "replaygauge/signals.hpp"
#include "replaygauge/synthgen.hpp"

using namespace replaygauge;

namespace {

InteractionMatrix bench_matrix(int users, int tracks, double density) {
  Rng rng(1);
  InteractionMatrix m;
  for (UserId u = 1; u <= users; ++u)
    for (TrackId t = 1; t <= tracks; ++t)
      if (rng.next_double() < density) m.add(u, t, 1.0);
  return m;
}

void bm_tanimoto(benchmark::State& state) {
  Rng rng(2);
  std::vector<TrackId> a, b;
  for (int j = 0; j < 500; ++j) {
    a.push_back(rng.next_int(1, 2000));
    b.push_back(rng.next_int(1, 2000));
  }
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  for (auto _ : state) benchmark::DoNotOptimize(tanimoto(a, b));
}
BENCHMARK(bm_tanimoto);

void bm_recommend_knn(benchmark::State& state) {
  auto matrix = bench_matrix(static_cast<int>(state.range(0)), 1000, 0.05);
  auto model = train_user_knn(matrix, 100);
  UserId user = matrix.users().front();
  for (auto _ : state) benchmark::DoNotOptimize(recommend_knn(model, user, 500, {}));
}
BENCHMARK(bm_recommend_knn)->Arg(200)->Arg(500)->Arg(1000);

void bm_average_precision(benchmark::State& state) {
  Rng rng(3);
  std::vector<TrackId> recs;
  std::set<TrackId> seen, relevant;
  while (recs.size() < 500) {
    TrackId t = rng.next_int(1, 5000);
    if (seen.insert(t).second) recs.push_back(t);
  }
  for (int j = 0; j < 50; ++j) relevant.insert(rng.next_int(1, 5000));
  for (auto _ : state)
    benchmark::DoNotOptimize(average_precision_at_k(recs, relevant, 500, 50));
}
BENCHMARK(bm_average_precision);

void bm_sgd_epoch(benchmark::State& state) {
  Rng rng(4);
  std::vector<RatingTriple> ratings;
  for (int j = 0; j < 20000; ++j)
    ratings.push_back({rng.next_int(1, 500), rng.next_int(1, 1000),
                       static_cast<int>(rng.next_int(1, 5))});
  SgdHyperparams hp;
  hp.factors = 50;
  hp.epochs = 1;
  for (auto _ : state) benchmark::DoNotOptimize(train_mf_sgd(ratings, hp));
}
BENCHMARK(bm_sgd_epoch);

void bm_summarize(benchmark::State& state) {
  GeneratorConfig c;
  c.user_count = 200;
  c.track_count = 1000;
  auto [log, truth] = generate(c);
  for (auto _ : state) benchmark::DoNotOptimize(summarize_interactions(log));
}
BENCHMARK(bm_summarize);

}  // namespace

BENCHMARK_MAIN();
