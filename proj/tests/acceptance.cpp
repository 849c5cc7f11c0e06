// Acceptance gate: one PASS/FAIL line per criterion, self-contained oracles.
// Exit status is the number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "replaygauge/classify.hpp"
#include "replaygauge/eval.hpp"
#include "replaygauge/eventlog.hpp"
#include "replaygauge/io.hpp"
#include "replaygauge/pipeline.hpp"
#include "replaygauge/postfilter.hpp"
#include "replaygauge/recommenders.hpp"
#include "replaygauge/rng.hpp"
#include "replaygauge/signals.hpp"
#include "replaygauge/synthgen.hpp"

namespace fs = std::filesystem;
using namespace replaygauge;

namespace {

int failures = 0;

void report(int number, const std::string& name, bool ok, double seconds,
            const std::string& detail) {
  std::printf("%s  criterion %2d  %-28s  %6.1fs  %s\n", ok ? "PASS" : "FAIL", number,
              name.c_str(), seconds, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

template <typename Fn>
void run(int number, const std::string& name, Fn fn) {
  auto start = std::chrono::steady_clock::now();
  bool ok = false;
  std::string detail;
  try {
    ok = fn(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  report(number, name, ok, seconds, detail);
}

// ---------- criterion 1: MAP oracle ----------

double oracle_ap(const std::vector<TrackId>& recs, const std::set<TrackId>& relevant, int k,
                 int denominator) {
  double total = 0.0;
  std::size_t limit = std::min(recs.size(), static_cast<std::size_t>(k));
  for (std::size_t m = 1; m <= limit; ++m) {
    if (!relevant.count(recs[m - 1])) continue;
    int hits = 0;
    for (std::size_t j = 0; j < m; ++j) hits += relevant.count(recs[j]) ? 1 : 0;
    total += static_cast<double>(hits) / static_cast<double>(m);
  }
  return total / static_cast<double>(denominator);
}

bool check_map_oracle(std::string& detail) {
  int instances = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    Rng rng(seed * 104729);
    int users = 1 + static_cast<int>(rng.next_below(50));
    int items = 4 + static_cast<int>(rng.next_below(47));
    std::map<UserId, std::vector<TrackId>> recs;
    RelevanceSets rel;
    for (UserId u = 1; u <= users; ++u) {
      std::set<TrackId> unique;
      int len = static_cast<int>(rng.next_below(31));
      while (static_cast<int>(unique.size()) < std::min(len, items))
        unique.insert(rng.next_int(1, items));
      recs[u] = {unique.begin(), unique.end()};
      rng.shuffle(recs[u]);
      int nrel = static_cast<int>(rng.next_below(12));
      for (int j = 0; j < nrel; ++j) rel.sets[u].insert(rng.next_int(1, items));
    }
    int k = 1 + static_cast<int>(rng.next_below(30));

    double sum = 0;
    int evaluable = 0;
    for (const auto& [u, relevant] : rel.sets) {
      if (relevant.empty()) continue;
      double want = oracle_ap(recs[u], relevant, k, static_cast<int>(relevant.size()));
      double got = average_precision_at_k(recs[u], relevant, k, static_cast<int>(relevant.size()));
      if (got != want) {
        detail = "AP mismatch at seed " + std::to_string(seed);
        return false;
      }
      sum += want;
      ++evaluable;
    }
    if (evaluable == 0) continue;
    ++instances;
    if (map_at_k(recs, rel, k).value != sum / evaluable) {
      detail = "MAP mismatch at seed " + std::to_string(seed);
      return false;
    }
  }
  detail = std::to_string(instances) + " instances bit-equal";
  return true;
}

// ---------- criterion 2: KNN oracle ----------

bool check_knn_oracle(std::string& detail) {
  int lists = 0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    Rng rng(seed * 7907);
    int users = 2 + static_cast<int>(rng.next_below(19));
    int tracks = 4 + static_cast<int>(rng.next_below(27));
    int neighborhood = 1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(users)));

    InteractionMatrix matrix;
    std::map<UserId, std::set<TrackId>> rows;
    for (UserId u = 1; u <= users; ++u)
      for (TrackId t = 1; t <= tracks; ++t)
        if (rng.next_double() < 0.35) {
          matrix.add(u, t, 1.0);
          rows[u].insert(t);
        }
    if (rows.empty()) continue;
    auto model = train_user_knn(matrix, neighborhood);

    for (const auto& [target, consumed] : rows) {
      std::set<TrackId> exclude = (target % 2 == 0) ? consumed : std::set<TrackId>{};

      struct Neighbor { UserId user; double sim; };
      std::vector<Neighbor> neighbors;
      for (const auto& [v, vt] : rows) {
        if (v == target) continue;
        std::size_t inter = 0;
        for (TrackId t : consumed) inter += vt.count(t);
        double sim = (consumed.empty() && vt.empty())
                         ? 0.0
                         : static_cast<double>(inter) /
                               static_cast<double>(consumed.size() + vt.size() - inter);
        if (sim > 0) neighbors.push_back({v, sim});
      }
      std::sort(neighbors.begin(), neighbors.end(), [](const Neighbor& a, const Neighbor& b) {
        if (a.sim != b.sim) return a.sim > b.sim;
        return a.user < b.user;
      });
      if (neighbors.size() > static_cast<std::size_t>(neighborhood))
        neighbors.resize(static_cast<std::size_t>(neighborhood));
      std::map<TrackId, double> scores;
      for (const auto& nb : neighbors)
        for (TrackId t : rows.at(nb.user))
          if (!exclude.count(t)) scores[t] += nb.sim;
      std::vector<ScoredTrack> want;
      for (const auto& [t, s] : scores) want.push_back({t, s});
      std::sort(want.begin(), want.end(), [](const ScoredTrack& a, const ScoredTrack& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.track < b.track;
      });
      if (want.size() > 10) want.resize(10);

      auto got = recommend_knn(model, target, 10, exclude);
      if (got.items.size() != want.size()) {
        detail = "length mismatch at seed " + std::to_string(seed);
        return false;
      }
      for (std::size_t j = 0; j < want.size(); ++j)
        if (got.items[j].track != want[j].track || got.items[j].score != want[j].score) {
          detail = "entry mismatch at seed " + std::to_string(seed);
          return false;
        }
      ++lists;
    }
  }
  detail = std::to_string(lists) + " lists bit-equal";
  return true;
}

// ---------- criterion 3: signal correctness ----------

bool check_signals(std::string& detail) {
  Rng rng(424242);
  std::vector<ListeningEvent> events;
  for (int e = 0; e < 10000; ++e)
    events.push_back({rng.next_int(1, 80), rng.next_int(1, 150), rng.next_int(0, 400),
                      rng.next_int(0, 1000000)});
  EventLog log(std::move(events));
  auto table = summarize_interactions(log);

  std::map<std::pair<UserId, TrackId>, std::pair<int, int>> fold;  // skips, streams
  for (const auto& e : log.events()) {
    auto& c = fold[{e.user, e.track}];
    (e.duration < 30 ? c.first : c.second) += 1;
  }
  if (fold.size() != table.size()) {
    detail = "pair count mismatch";
    return false;
  }
  for (const auto& [key, c] : fold) {
    const auto* s = table.find(key.first, key.second);
    bool like = c.second >= 2 && c.first == 0;
    bool dislike = c.first >= 1 && c.second == 0;
    int f1 = c.second >= 4 ? 5 : c.second == 3 ? 4 : c.second == 2 ? 3 : c.second == 1 ? 2 : 1;
    int f2 = like ? 5 : dislike ? 1 : 3;
    int f3 = (c.second >= 4 && c.first < c.second)   ? 5
             : (c.second >= 2 && c.first < c.second) ? 4
             : (c.first < c.second)                  ? 3
             : (c.second > 0)                        ? 2
                                                     : 1;
    if (!s || s->skip_count != c.first || s->stream_count != c.second ||
        s->total_plays != c.first + c.second || s->like != like || s->dislike != dislike ||
        (s->like && s->dislike) || rating_f1(*s) != f1 || rating_f2(*s) != f2 ||
        rating_f3(*s) != f3) {
      detail = "mismatch for pair (" + std::to_string(key.first) + "," +
               std::to_string(key.second) + ")";
      return false;
    }
  }
  detail = std::to_string(fold.size()) + " pairs verified";
  return true;
}

// ---------- criterion 4: numerical checks ----------

bool check_numerics(std::string& detail) {
  double worst = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Rng rng(seed * 613);
    std::vector<RatingTriple> ratings;
    for (int j = 0; j < 5; ++j)
      ratings.push_back(
          {rng.next_int(1, 3), rng.next_int(1, 3), static_cast<int>(rng.next_int(1, 5))});
    SgdHyperparams hp;
    hp.factors = 3;
    hp.epochs = 2;
    hp.seed = seed;
    auto model = train_mf_sgd(ratings, hp);
    auto analytic = sgd_gradient(ratings, model);

    std::vector<double> numeric;
    const double h = 1e-5;
    auto probe = [&](auto& factor_map) {
      for (auto& [id, vec] : factor_map)
        for (std::size_t f = 0; f < vec.size(); ++f) {
          auto plus = model;
          auto minus = model;
          (&factor_map == &model.user_factors ? plus.user_factors : plus.item_factors)
              .at(id)[f] += h;
          (&factor_map == &model.user_factors ? minus.user_factors : minus.item_factors)
              .at(id)[f] -= h;
          numeric.push_back((sgd_objective(ratings, plus) - sgd_objective(ratings, minus)) /
                            (2 * h));
        }
    };
    probe(model.user_factors);
    probe(model.item_factors);
    if (numeric.size() != analytic.size()) {
      detail = "gradient length mismatch";
      return false;
    }
    for (std::size_t j = 0; j < numeric.size(); ++j) {
      double rel = std::abs(analytic[j] - numeric[j]) / std::max(1.0, std::abs(numeric[j]));
      worst = std::max(worst, rel);
      if (rel >= 1e-4) {
        detail = "gradient relative error " + format_double(rel);
        return false;
      }
    }
  }

  Rng rng(31337);
  InteractionMatrix counts;
  for (UserId u = 1; u <= 30; ++u)
    for (TrackId t = 1; t <= 30; ++t)
      if (rng.next_double() < 0.25) counts.add(u, t, static_cast<double>(rng.next_int(1, 9)));
  AlsHyperparams hp;
  hp.factors = 6;
  hp.sweeps = 20;
  std::vector<double> objectives;
  train_als_implicit(counts, hp,
                     [&](const FactorModel& m) { objectives.push_back(als_objective(counts, m)); });
  for (std::size_t j = 1; j < objectives.size(); ++j)
    if (objectives[j] > objectives[j - 1] * (1 + 1e-9)) {
      detail = "ALS objective rose at half-sweep " + std::to_string(j);
      return false;
    }
  detail = "max gradient error " + format_double(worst) + "; " +
           std::to_string(objectives.size()) + " monotone half-sweeps";
  return true;
}

// ---------- criteria 5-7: default-dataset direction checks ----------

struct DatasetRun {
  ExperimentReport report;
  bool ready = false;
  std::string error;
};

DatasetRun& default_run() {
  static DatasetRun cached;
  if (cached.ready || !cached.error.empty()) return cached;
  try {
    GeneratorConfig gen;  // library defaults: 2000 users, 5000 tracks
    auto [raw_log, truth] = generate(gen);

    auto log = filter_min_activity(raw_log, 10);
    auto [group_a, group_b] = select_user_groups(log, 7, 0.5);
    auto split = split_dataset(group_b, 7, 0.5);

    std::vector<ListeningEvent> training_events = group_a.events();
    for (const auto& e : split.visible.events()) training_events.push_back(e);
    EventLog training_log(std::move(training_events));

    auto training = summarize_interactions(training_log);
    auto hidden = summarize_interactions(split.hidden);

    ExperimentInputs inputs;
    inputs.training_summary = &training;
    inputs.hidden_summary = &hidden;
    inputs.eval_users = split.visible.users();
    for (UserId u : inputs.eval_users) {
      const auto* idx = split.visible.user_events(u);
      for (auto i : *idx) inputs.exclude[u].insert(split.visible.events()[i].track);
    }

    ExperimentGrid grid;
    grid.algorithms = {Algorithm::popularity, Algorithm::user_knn};
    grid.input_modes = {InputMode::all_events};
    grid.filters = {FilterKind::none, FilterKind::del};
    grid.rating_functions = {RatingFunction::f3};
    grid.ranks = {10, 100};
    grid.list_length = 500;
    grid.sgd.factors = 100;
    grid.sgd.epochs = 25;
    cached.report = run_experiment_matrix(inputs, grid);
    cached.ready = true;
  } catch (const std::exception& e) {
    cached.error = e.what();
  }
  return cached;
}

double find_map(const ExperimentReport& r, Criterion c, int k, Algorithm a, FilterKind f) {
  for (const auto& row : r.rows)
    if (row.criterion == c && row.k == k && row.algorithm == a && row.filter == f)
      return row.map;
  return std::numeric_limits<double>::quiet_NaN();
}

const CompositionReport* find_composition(const ExperimentReport& r, Algorithm a, FilterKind f) {
  for (const auto& row : r.compositions)
    if (row.algorithm == a && row.filter == f) return &row.composition;
  return nullptr;
}

bool check_baseline_ordering(std::string& detail) {
  auto& run = default_run();
  if (!run.ready) {
    detail = run.error;
    return false;
  }
  double knn = find_map(run.report, Criterion::events, 10, Algorithm::user_knn, FilterKind::none);
  double pop = find_map(run.report, Criterion::events, 10, Algorithm::popularity, FilterKind::none);
  detail = "MAP_E@10 knn " + format_double(knn) + " vs popularity " + format_double(pop);
  return pop > 0 && knn >= 2.0 * pop;
}

bool check_filter_composition(std::string& detail) {
  auto& run = default_run();
  if (!run.ready) {
    detail = run.error;
    return false;
  }
  const auto* none = find_composition(run.report, Algorithm::user_knn, FilterKind::none);
  const auto* del = find_composition(run.report, Algorithm::user_knn, FilterKind::del);
  if (!none || !del || !none->has_values || !del->has_values) {
    detail = "missing composition rows";
    return false;
  }
  detail = "dislike " + format_double(none->pct_dislike) + "% -> " +
           format_double(del->pct_dislike) + "%, like " + format_double(none->pct_like) +
           "% -> " + format_double(del->pct_like) + "%";
  bool dislike_down = del->pct_dislike <= 0.6 * none->pct_dislike;
  bool like_kept = del->pct_like >= 0.9 * none->pct_like;
  return dislike_down && like_kept;
}

bool check_map_collapse(std::string& detail) {
  auto& run = default_run();
  if (!run.ready) {
    detail = run.error;
    return false;
  }
  double d_none = find_map(run.report, Criterion::dislikes, 100, Algorithm::user_knn, FilterKind::none);
  double d_del = find_map(run.report, Criterion::dislikes, 100, Algorithm::user_knn, FilterKind::del);
  double l_none = find_map(run.report, Criterion::likes, 10, Algorithm::user_knn, FilterKind::none);
  double l_del = find_map(run.report, Criterion::likes, 10, Algorithm::user_knn, FilterKind::del);
  detail = "MAP_D@100 " + format_double(d_none) + " -> " + format_double(d_del) + ", MAP_L@10 " +
           format_double(l_none) + " -> " + format_double(l_del);
  bool collapse = d_none > 0 && d_del < 0.5 * d_none;
  bool likes_stable = l_none > 0 && std::abs(l_del - l_none) <= 0.15 * l_none;
  return collapse && likes_stable;
}

// ---------- criterion 8: filter algebra ----------

bool check_filter_algebra(std::string& detail) {
  Rng rng(808);
  const double inf = std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < 1000; ++trial) {
    ScoredList list;
    list.user = 1;
    std::set<TrackId> used;
    int n = static_cast<int>(rng.next_below(40));
    for (int j = 0; j < n; ++j) {
      TrackId t = rng.next_int(1, 300);
      if (!used.insert(t).second) continue;
      list.entries.push_back({t, rng.next_gaussian(3.0, 1.5), rng.next_double() < 0.35});
    }

    auto tracks_of = [](const ScoredList& l) {
      std::vector<TrackId> v;
      for (const auto& e : l.entries) v.push_back(e.track);
      return v;
    };
    auto deleted = del_filter(list);
    auto swapped = swap_filter(list, inf);
    if (tracks_of(swapped) != tracks_of(deleted)) {
      detail = "swap(inf) != del at trial " + std::to_string(trial);
      return false;
    }
    for (const auto& e : deleted.entries)
      if (e.dislike) {
        detail = "dislike survived del";
        return false;
      }
    std::size_t cursor = 0;
    for (const auto& e : deleted.entries) {
      while (cursor < list.entries.size() && list.entries[cursor].track != e.track) ++cursor;
      if (cursor++ >= list.entries.size()) {
        detail = "del output is not a subsequence";
        return false;
      }
    }
    auto ranked = rank_filter(list);
    auto a = tracks_of(list);
    auto b = tracks_of(ranked);
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (a != b) {
      detail = "rank is not a permutation";
      return false;
    }
  }
  detail = "1000 lists verified";
  return true;
}

// ---------- criterion 9: pipeline determinism ----------

bool check_pipeline_determinism(std::string& detail) {
  auto dir = fs::temp_directory_path() / "replaygauge_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);

  GeneratorConfig gen;
  gen.user_count = 120;
  gen.track_count = 300;
  gen.events_per_user_mean = 60;
  gen.seed = 9;
  auto [log, truth] = generate(gen);
  auto log_path = (dir / "events.csv").string();
  save_event_log(log, log_path);

  PipelineConfig config;
  config.input_log = log_path;
  config.work_dir = (dir / "work").string();
  config.min_activity = 10;
  config.neighborhood_size = 30;
  config.list_length = 200;
  config.sgd.factors = 10;
  config.sgd.epochs = 8;
  config.filters = {FilterKind::none, FilterKind::rank, FilterKind::del, FilterKind::swap};
  run_pipeline(config);

  std::map<std::string, std::string> first;
  for (const auto& entry : fs::directory_iterator(config.work_dir))
    first[entry.path().filename().string()] = read_file(entry.path().string());

  fs::remove_all(config.work_dir);
  run_pipeline(config);
  for (const auto& [name, content] : first)
    if (read_file((fs::path(config.work_dir) / name).string()) != content) {
      detail = name + " differs between runs";
      return false;
    }
  detail = std::to_string(first.size()) + " artifacts byte-identical";
  return true;
}

// ---------- criterion 10: classifier sanity ----------

bool check_classifier(std::string& detail) {
  Rng rng(5150);
  std::vector<LabeledScore> samples;
  for (int j = 0; j < 500; ++j) {
    samples.push_back({rng.next_gaussian(3.7, 1.1), Label::like});
    samples.push_back({rng.next_gaussian(1.9, 0.8), Label::dislike});
  }
  double sum[2] = {0, 0};
  long long count[2] = {0, 0};
  for (const auto& s : samples) {
    int c = s.label == Label::dislike;
    sum[c] += s.score;
    count[c] += 1;
  }
  double mean[2] = {sum[0] / count[0], sum[1] / count[1]};
  double ss[2] = {0, 0};
  for (const auto& s : samples) {
    int c = s.label == Label::dislike;
    ss[c] += (s.score - mean[c]) * (s.score - mean[c]);
  }
  auto moments = fit_gnb(samples);
  if (moments.mu_like != mean[0] || moments.mu_dislike != mean[1] ||
      moments.var_like != ss[0] / count[0] || moments.var_dislike != ss[1] / count[1]) {
    detail = "moments differ from the brute-force computation";
    return false;
  }

  // separable operating point: like ~ N(4.5, 0.25), dislike ~ N(1.5, 0.25)
  std::vector<LabeledScore> train, held_out;
  for (int j = 0; j < 1000; ++j) {
    train.push_back({rng.next_gaussian(4.5, 0.5), Label::like});
    train.push_back({rng.next_gaussian(1.5, 0.5), Label::dislike});
    held_out.push_back({rng.next_gaussian(4.5, 0.5), Label::like});
    held_out.push_back({rng.next_gaussian(1.5, 0.5), Label::dislike});
  }
  auto model = fit_gnb(train);
  auto metrics = evaluate_classifier(model, held_out);
  detail = "precision/recall like " + format_double(metrics.precision_like) + "/" +
           format_double(metrics.recall_like) + ", dislike " +
           format_double(metrics.precision_dislike) + "/" + format_double(metrics.recall_dislike);
  return metrics.precision_like >= 0.95 && metrics.recall_like >= 0.95 &&
         metrics.precision_dislike >= 0.95 && metrics.recall_dislike >= 0.95;
}

}  // namespace

int main() {
  run(1, "MAP oracle equivalence", check_map_oracle);
  run(2, "KNN oracle equivalence", check_knn_oracle);
  run(3, "signal correctness", check_signals);
  run(4, "numerical checks", check_numerics);
  run(5, "baseline ordering", check_baseline_ordering);
  run(6, "post-filter composition", check_filter_composition);
  run(7, "MAP_D collapse", check_map_collapse);
  run(8, "filter algebra", check_filter_algebra);
  run(9, "pipeline determinism", check_pipeline_determinism);
  run(10, "classifier sanity", check_classifier);
  return failures;
}
