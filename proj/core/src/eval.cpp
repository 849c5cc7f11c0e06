#include "replaygauge/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "replaygauge/errors.hpp"
#include "replaygauge/io.hpp"

namespace replaygauge {

Criterion parse_criterion(std::string_view name) {
  if (name == "events") return Criterion::events;
  if (name == "streams") return Criterion::streams;
  if (name == "likes") return Criterion::likes;
  if (name == "skips") return Criterion::skips;
  if (name == "dislikes") return Criterion::dislikes;
  throw UnknownMode(std::string(name));
}

std::string to_string(Criterion c) {
  switch (c) {
    case Criterion::events: return "events";
    case Criterion::streams: return "streams";
    case Criterion::likes: return "likes";
    case Criterion::skips: return "skips";
    case Criterion::dislikes: return "dislikes";
  }
  return "?";
}

Algorithm parse_algorithm(std::string_view name) {
  if (name == "popularity") return Algorithm::popularity;
  if (name == "user_knn" || name == "ub") return Algorithm::user_knn;
  throw UnknownMode(std::string(name));
}

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::popularity: return "popularity";
    case Algorithm::user_knn: return "user_knn";
  }
  return "?";
}

RelevanceSets criterion_relevance(const SummaryTable& hidden_summary, Criterion criterion) {
  RelevanceSets out;
  for (const auto& [key, s] : hidden_summary.entries()) {
    bool relevant = false;
    switch (criterion) {
      case Criterion::events: relevant = s.total_plays > 0; break;
      case Criterion::streams: relevant = s.stream_count >= 1; break;
      case Criterion::likes: relevant = s.like; break;
      case Criterion::skips: relevant = s.skip_count >= 1; break;
      case Criterion::dislikes: relevant = s.dislike; break;
    }
    if (relevant) out.sets[key.first].insert(key.second);
  }
  return out;
}

double average_precision_at_k(const std::vector<TrackId>& recs, const std::set<TrackId>& relevant,
                              int k, int denominator) {
  if (denominator < 1) throw ZeroDenominator("average_precision_at_k");
  std::size_t limit = std::min<std::size_t>(recs.size(), static_cast<std::size_t>(k));
  double sum = 0;
  int hits = 0;
  for (std::size_t m = 0; m < limit; ++m) {
    if (relevant.count(recs[m])) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(m + 1);
    }
  }
  return sum / static_cast<double>(denominator);
}

MapResult map_at_k(const std::map<UserId, std::vector<TrackId>>& per_user_recs,
                   const RelevanceSets& relevance, int k, const RelevanceSets* denominators) {
  if (k < 1) throw InvalidHyperparameter("k must be >= 1");
  MapResult result;
  double sum = 0;
  for (const auto& [user, recs] : per_user_recs) {
    auto rel_it = relevance.sets.find(user);
    std::size_t denom;
    if (denominators) {
      auto den_it = denominators->sets.find(user);
      denom = den_it == denominators->sets.end() ? 0 : den_it->second.size();
    } else {
      denom = rel_it == relevance.sets.end() ? 0 : rel_it->second.size();
    }
    if (denom == 0 || rel_it == relevance.sets.end() || rel_it->second.empty()) {
      ++result.users_excluded;
      continue;
    }
    sum += average_precision_at_k(recs, rel_it->second, k, static_cast<int>(denom));
    ++result.users_evaluated;
  }
  if (result.users_evaluated == 0) throw NoEvaluableUsers("map_at_k");
  result.value = sum / static_cast<double>(result.users_evaluated);
  return result;
}

CompositionReport composition_report(const std::map<UserId, std::vector<TrackId>>& per_user_recs,
                                     const SummaryTable& hidden_summary, int k) {
  if (k < 1) throw InvalidHyperparameter("k must be >= 1");
  long long events = 0, streams = 0, likes = 0, skips = 0, dislikes = 0;
  for (const auto& [user, recs] : per_user_recs) {
    std::size_t limit = std::min<std::size_t>(recs.size(), static_cast<std::size_t>(k));
    for (std::size_t m = 0; m < limit; ++m) {
      const auto* s = hidden_summary.find(user, recs[m]);
      if (!s || s->total_plays == 0) continue;
      ++events;
      if (s->stream_count >= 1) ++streams;
      if (s->skip_count >= 1) ++skips;
      if (s->like) ++likes;
      if (s->dislike) ++dislikes;
    }
  }
  CompositionReport r;
  r.events = events;
  if (events > 0) {
    auto pct = [events](long long n) { return 100.0 * static_cast<double>(n) / static_cast<double>(events); };
    r.pct_streams = pct(streams);
    r.pct_like = pct(likes);
    r.pct_skips = pct(skips);
    r.pct_dislike = pct(dislikes);
    r.has_values = true;
  }
  return r;
}

namespace {

std::vector<TrackId> tracks_of(const ScoredList& list) {
  std::vector<TrackId> out;
  out.reserve(list.entries.size());
  for (const auto& e : list.entries) out.push_back(e.track);
  return out;
}

}  // namespace

ExperimentReport run_experiment_matrix(const ExperimentInputs& inputs,
                                       const ExperimentGrid& grid) {
  if (!inputs.training_summary || !inputs.hidden_summary)
    throw InvalidConfig("experiment inputs missing summaries");
  const auto& training = *inputs.training_summary;
  const auto& hidden = *inputs.hidden_summary;
  const std::set<TrackId> kNoExclude;

  auto exclude_of = [&](UserId u) -> const std::set<TrackId>& {
    auto it = inputs.exclude.find(u);
    return it == inputs.exclude.end() ? kNoExclude : it->second;
  };

  // Relevance and denominator sets per criterion, visible tracks removed.
  std::map<Criterion, RelevanceSets> relevance;
  for (Criterion c : grid.criteria) relevance[c] = criterion_relevance(hidden, c);
  if (inputs.exclude_visible_from_relevance) {
    for (auto& [_, rs] : relevance)
      for (auto& [u, set] : rs.sets)
        for (TrackId t : exclude_of(u)) set.erase(t);
  }
  RelevanceSets event_denoms;  // used when the denominator is not adapted
  if (!inputs.adapted_denominator) {
    event_denoms = criterion_relevance(hidden, Criterion::events);
    if (inputs.exclude_visible_from_relevance)
      for (auto& [u, set] : event_denoms.sets)
        for (TrackId t : exclude_of(u)) set.erase(t);
  }
  const RelevanceSets* denoms = inputs.adapted_denominator ? nullptr : &event_denoms;

  bool any_filter = std::any_of(grid.filters.begin(), grid.filters.end(),
                                [](FilterKind f) { return f != FilterKind::none; });

  ExperimentReport report;
  // One rating model + classifier per rating function, shared across cells.
  std::map<std::string, FactorModel> rating_models;
  if (any_filter) {
    for (RatingFunction fn : grid.rating_functions) {
      auto ratings = map_ratings(training, fn);
      FactorModel model = train_mf_sgd(ratings, grid.sgd);
      std::vector<LabeledScore> labeled;
      for (const auto& [key, s] : training.entries()) {
        if (!s.like && !s.dislike) continue;
        double score = grid.use_observed_ratings
                           ? static_cast<double>(map_rating(s, fn))
                           : predict_rating(model, key.first, key.second);
        labeled.push_back({score, s.like ? Label::like : Label::dislike});
      }
      GnbModel gnb = fit_gnb(labeled, grid.variance_floor);
      std::string name = to_string(fn);
      double alpha = std::isnan(grid.alpha) ? gnb.mu_like - std::sqrt(gnb.var_like) : grid.alpha;
      report.classifiers[name] = gnb;
      report.alphas_used[name] = alpha;
      rating_models.emplace(name, std::move(model));
    }
  }

  auto evaluate_cell = [&](const std::map<UserId, std::vector<TrackId>>& recs,
                           Algorithm algorithm, InputMode mode, FilterKind filter,
                           std::optional<RatingFunction> fn) {
    for (Criterion c : grid.criteria) {
      for (int k : grid.ranks) {
        ReportRow row;
        row.criterion = c;
        row.k = k;
        row.algorithm = algorithm;
        row.input_mode = mode;
        row.filter = filter;
        row.rating_fn = fn;
        MapResult mr = map_at_k(recs, relevance.at(c), k, denoms);
        row.map = mr.value;
        row.users_evaluated = mr.users_evaluated;
        row.users_excluded = mr.users_excluded;
        report.rows.push_back(row);
      }
    }
    CompositionRow comp;
    comp.algorithm = algorithm;
    comp.input_mode = mode;
    comp.filter = filter;
    comp.rating_fn = fn;
    comp.composition = composition_report(recs, hidden, grid.composition_rank);
    report.compositions.push_back(comp);
  };

  for (Algorithm algorithm : grid.algorithms) {
    for (InputMode mode : grid.input_modes) {
      InteractionMatrix matrix = build_training_input(training, mode);
      PopularityModel pop;
      KnnModel knn;
      if (algorithm == Algorithm::popularity)
        pop = train_popularity(matrix);
      else
        knn = train_user_knn(matrix, grid.neighborhood_size);

      // Base lists at full length; filters run before truncation to rank k.
      std::map<UserId, ScoredList> base;
      for (UserId u : inputs.eval_users) {
        RecommendationList rl;
        if (algorithm == Algorithm::popularity) {
          rl = recommend_scores(pop, u, grid.list_length, exclude_of(u));
        } else if (matrix.row(u)) {
          rl = recommend_knn(knn, u, grid.list_length, exclude_of(u));
        } else {
          rl.user = u;  // user filtered out of this input mode: empty list
        }
        ScoredList sl;
        sl.user = u;
        for (const auto& item : rl.items) sl.entries.push_back({item.track, item.score, false});
        base.emplace(u, std::move(sl));
      }

      for (FilterKind filter : grid.filters) {
        if (filter == FilterKind::none) {
          std::map<UserId, std::vector<TrackId>> recs;
          for (const auto& [u, sl] : base) recs.emplace(u, tracks_of(sl));
          evaluate_cell(recs, algorithm, mode, filter, std::nullopt);
          continue;
        }
        for (RatingFunction fn : grid.rating_functions) {
          const std::string name = to_string(fn);
          const FactorModel& model = rating_models.at(name);
          const GnbModel& gnb = report.classifiers.at(name);
          double alpha = report.alphas_used.at(name);
          std::map<UserId, std::vector<TrackId>> recs;
          for (const auto& [u, sl] : base) {
            ScoredList scored;
            scored.user = u;
            for (const auto& e : sl.entries) {
              double r = predict_rating(model, u, e.track);
              bool dis = classify(gnb, r).label == Label::dislike;
              scored.entries.push_back({e.track, r, dis});
            }
            recs.emplace(u, tracks_of(apply_filter(scored, filter, alpha)));
          }
          evaluate_cell(recs, algorithm, mode, filter, fn);
        }
      }
    }
  }
  return report;
}

namespace {
std::string fn_name(const std::optional<RatingFunction>& fn) {
  return fn ? to_string(*fn) : std::string("-");
}
}  // namespace

void write_report_csv(const ExperimentReport& report, std::ostream& out) {
  out << "criterion,k,algorithm,input_mode,rating_fn,filter,map,users_evaluated,users_excluded\n";
  for (const auto& r : report.rows)
    out << to_string(r.criterion) << ',' << r.k << ',' << to_string(r.algorithm) << ','
        << to_string(r.input_mode) << ',' << fn_name(r.rating_fn) << ',' << to_string(r.filter)
        << ',' << format_double(r.map) << ',' << r.users_evaluated << ',' << r.users_excluded
        << '\n';
}

void write_report_text(const ExperimentReport& report, std::ostream& out) {
  // Group rows: criterion -> (algorithm, input_mode, filter, fn) -> k -> map.
  std::map<Criterion, std::map<std::string, std::map<int, double>>> grouped;
  std::set<int> ranks;
  for (const auto& r : report.rows) {
    std::ostringstream label;
    label << std::left << std::setw(11) << to_string(r.algorithm) << ' ' << std::setw(12)
          << to_string(r.input_mode) << ' ' << std::setw(5) << to_string(r.filter) << ' '
          << std::setw(2) << fn_name(r.rating_fn);
    grouped[r.criterion][label.str()][r.k] = r.map;
    ranks.insert(r.k);
  }
  for (const auto& [criterion, cells] : grouped) {
    out << "== MAP_" << to_string(criterion) << " ==\n";
    out << std::left << std::setw(34) << "algorithm   input        filt  fn";
    for (int k : ranks) out << std::right << std::setw(12) << ("MAP@" + std::to_string(k));
    out << '\n';
    for (const auto& [label, by_k] : cells) {
      out << std::left << std::setw(34) << label;
      for (int k : ranks) {
        auto it = by_k.find(k);
        std::ostringstream v;
        if (it != by_k.end()) v << std::fixed << std::setprecision(5) << it->second;
        out << std::right << std::setw(12) << v.str();
      }
      out << '\n';
    }
    out << '\n';
  }
  out << "== composition (interacted top-k pairs; stream/skip shares non-exclusive) ==\n";
  out << std::left << std::setw(34) << "algorithm   input        filt  fn" << std::right
      << std::setw(10) << "events" << std::setw(10) << "%stream" << std::setw(10) << "%like"
      << std::setw(10) << "%skip" << std::setw(10) << "%dislike" << '\n';
  for (const auto& c : report.compositions) {
    std::ostringstream label;
    label << std::left << std::setw(11) << to_string(c.algorithm) << ' ' << std::setw(12)
          << to_string(c.input_mode) << ' ' << std::setw(5) << to_string(c.filter) << ' '
          << std::setw(2) << fn_name(c.rating_fn);
    out << std::left << std::setw(34) << label.str() << std::right << std::setw(10)
        << c.composition.events;
    if (c.composition.has_values) {
      out << std::fixed << std::setprecision(1) << std::setw(10) << c.composition.pct_streams
          << std::setw(10) << c.composition.pct_like << std::setw(10) << c.composition.pct_skips
          << std::setw(10) << c.composition.pct_dislike;
    } else {
      for (int i = 0; i < 4; ++i) out << std::setw(10) << "-";
    }
    out << '\n';
  }
}

void write_report_json(const ExperimentReport& report, std::ostream& out) {
  nlohmann::json j;
  j["rows"] = nlohmann::json::array();
  for (const auto& r : report.rows) {
    j["rows"].push_back({{"criterion", to_string(r.criterion)},
                         {"k", r.k},
                         {"algorithm", to_string(r.algorithm)},
                         {"input_mode", to_string(r.input_mode)},
                         {"rating_fn", fn_name(r.rating_fn)},
                         {"filter", to_string(r.filter)},
                         {"map", r.map},
                         {"users_evaluated", r.users_evaluated},
                         {"users_excluded", r.users_excluded}});
  }
  j["compositions"] = nlohmann::json::array();
  for (const auto& c : report.compositions) {
    nlohmann::json jc = {{"algorithm", to_string(c.algorithm)},
                         {"input_mode", to_string(c.input_mode)},
                         {"filter", to_string(c.filter)},
                         {"rating_fn", fn_name(c.rating_fn)},
                         {"events", c.composition.events}};
    if (c.composition.has_values) {
      jc["pct_streams"] = c.composition.pct_streams;
      jc["pct_like"] = c.composition.pct_like;
      jc["pct_skips"] = c.composition.pct_skips;
      jc["pct_dislike"] = c.composition.pct_dislike;
    }
    j["compositions"].push_back(jc);
  }
  j["alphas"] = report.alphas_used;
  out << j.dump(2) << '\n';
}

}  // namespace replaygauge
