#include "replaygauge/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "replaygauge/eventlog.hpp"

#include "replaygauge/errors.hpp"
#include "replaygauge/io.hpp"

namespace replaygauge {

namespace {

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream ss(s);
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

bool parse_bool(const std::string& v) {
  if (v == "1" || v == "true" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "no") return false;
  throw InvalidConfig("expected boolean, got '" + v + "'");
}

}  // namespace

PipelineConfig parse_pipeline_config(std::istream& in) {
  PipelineConfig c;
  for (const auto& [key, value] : read_key_values(in)) {
    try {
      if (key == "paths.input_log") c.input_log = value;
      else if (key == "paths.work_dir") c.work_dir = value;
      else if (key == "split.seed") c.seed = static_cast<std::uint64_t>(parse_int64(value));
      else if (key == "split.holdout_fraction") c.holdout_fraction = parse_double_strict(value);
      else if (key == "split.group_b_fraction") c.group_b_fraction = parse_double_strict(value);
      else if (key == "split.min_activity") c.min_activity = static_cast<int>(parse_int64(value));
      else if (key == "model.algorithm") c.algorithm = parse_algorithm(value);
      else if (key == "model.neighborhood_size") c.neighborhood_size = static_cast<int>(parse_int64(value));
      else if (key == "model.input_mode") c.input_mode = parse_input_mode(value);
      else if (key == "sgd.factors") c.sgd.factors = static_cast<int>(parse_int64(value));
      else if (key == "sgd.epochs") c.sgd.epochs = static_cast<int>(parse_int64(value));
      else if (key == "sgd.regularization") c.sgd.regularization = parse_double_strict(value);
      else if (key == "sgd.learning_rate") c.sgd.learning_rate = parse_double_strict(value);
      else if (key == "sgd.seed") c.sgd.seed = static_cast<std::uint64_t>(parse_int64(value));
      else if (key == "rating.function") c.rating_function = parse_rating_function(value);
      else if (key == "filter.kinds") {
        c.filters.clear();
        for (const auto& f : split_list(value)) c.filters.push_back(parse_filter_kind(f));
      } else if (key == "filter.alpha") {
        c.alpha = value.empty() ? std::numeric_limits<double>::quiet_NaN()
                                : parse_double_strict(value);
      } else if (key == "eval.ranks") {
        c.ranks.clear();
        for (const auto& r : split_list(value)) c.ranks.push_back(static_cast<int>(parse_int64(r)));
      } else if (key == "eval.criteria") {
        c.criteria.clear();
        for (const auto& cr : split_list(value)) c.criteria.push_back(parse_criterion(cr));
      }
      else if (key == "eval.list_length") c.list_length = static_cast<int>(parse_int64(value));
      else if (key == "eval.composition_rank") c.composition_rank = static_cast<int>(parse_int64(value));
      else if (key == "eval.adapted_denominator") c.adapted_denominator = parse_bool(value);
      else if (key == "eval.exclude_visible") c.exclude_visible = parse_bool(value);
      else if (key == "classify.use_observed") c.use_observed_ratings = parse_bool(value);
      else if (key == "classify.variance_floor") c.variance_floor = parse_double_strict(value);
      else if (key == "run.threads") c.threads = static_cast<int>(parse_int64(value));
      else throw InvalidConfig("unknown key '" + key + "'");
    } catch (const MalformedRow& e) {
      throw InvalidConfig(key + ": " + e.what());
    }
  }
  return c;
}

PipelineConfig load_pipeline_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return parse_pipeline_config(in);
}

void write_pipeline_config(const PipelineConfig& c, std::ostream& out) {
  KeyValueList kv;
  kv.emplace_back("paths.input_log", c.input_log);
  kv.emplace_back("paths.work_dir", c.work_dir);
  kv.emplace_back("split.seed", std::to_string(c.seed));
  kv.emplace_back("split.holdout_fraction", format_double(c.holdout_fraction));
  kv.emplace_back("split.group_b_fraction", format_double(c.group_b_fraction));
  kv.emplace_back("split.min_activity", std::to_string(c.min_activity));
  kv.emplace_back("model.algorithm", to_string(c.algorithm));
  kv.emplace_back("model.neighborhood_size", std::to_string(c.neighborhood_size));
  kv.emplace_back("model.input_mode", to_string(c.input_mode));
  kv.emplace_back("sgd.factors", std::to_string(c.sgd.factors));
  kv.emplace_back("sgd.epochs", std::to_string(c.sgd.epochs));
  kv.emplace_back("sgd.regularization", format_double(c.sgd.regularization));
  kv.emplace_back("sgd.learning_rate", format_double(c.sgd.learning_rate));
  kv.emplace_back("sgd.seed", std::to_string(c.sgd.seed));
  kv.emplace_back("rating.function", to_string(c.rating_function));
  std::string filters;
  for (const auto& f : c.filters) filters += (filters.empty() ? "" : ",") + to_string(f);
  kv.emplace_back("filter.kinds", filters);
  kv.emplace_back("filter.alpha", std::isnan(c.alpha) ? "" : format_double(c.alpha));
  std::string ranks;
  for (int r : c.ranks) ranks += (ranks.empty() ? "" : ",") + std::to_string(r);
  kv.emplace_back("eval.ranks", ranks);
  std::string criteria;
  for (auto cr : c.criteria) criteria += (criteria.empty() ? "" : ",") + to_string(cr);
  kv.emplace_back("eval.criteria", criteria);
  kv.emplace_back("eval.list_length", std::to_string(c.list_length));
  kv.emplace_back("eval.composition_rank", std::to_string(c.composition_rank));
  kv.emplace_back("eval.adapted_denominator", c.adapted_denominator ? "1" : "0");
  kv.emplace_back("eval.exclude_visible", c.exclude_visible ? "1" : "0");
  kv.emplace_back("classify.use_observed", c.use_observed_ratings ? "1" : "0");
  kv.emplace_back("classify.variance_floor", format_double(c.variance_floor));
  kv.emplace_back("run.threads", std::to_string(c.threads));
  write_key_values(out, kv);
}

namespace {

void save_text(const std::filesystem::path& path, const std::function<void(std::ostream&)>& fn) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  fn(out);
}

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& config) {
  namespace fs = std::filesystem;
  if (config.input_log.empty()) throw InvalidConfig("paths.input_log is required");
  if (config.work_dir.empty()) throw InvalidConfig("paths.work_dir is required");
  if (config.threads < 1) throw InvalidConfig("run.threads must be >= 1");
  if (!fs::exists(config.input_log)) throw IoError("input log not found: " + config.input_log);
  fs::create_directories(config.work_dir);
  const fs::path work(config.work_dir);

  // split
  EventLog raw = load_event_log(config.input_log);
  EventLog active = filter_min_activity(raw, config.min_activity);
  if (active.empty()) throw EmptyLog("no users pass min_activity=" + std::to_string(config.min_activity));
  auto [group_a, group_b] = select_user_groups(active, config.seed, config.group_b_fraction);
  DatasetSplit split = split_dataset(group_b, config.seed, config.holdout_fraction);
  save_text(work / "group_manifest.csv",
            [&](std::ostream& o) { write_group_manifest(group_a, group_b, o); });
  save_text(work / "split.meta",
            [&](std::ostream& o) { write_split_meta(config.seed, config.holdout_fraction, o); });
  save_event_log(split.visible, (work / "b_visible.csv").string());
  save_event_log(split.hidden, (work / "b_hidden.csv").string());

  // summarize: training = A events plus B visible events
  std::vector<ListeningEvent> training_events(group_a.events());
  training_events.insert(training_events.end(), split.visible.events().begin(),
                         split.visible.events().end());
  EventLog training_log(std::move(training_events));
  SummaryTable training_summary = summarize_interactions(training_log);
  SummaryTable hidden_summary = summarize_interactions(split.hidden);
  save_text(work / "summary_train.csv",
            [&](std::ostream& o) { write_summary_table(training_summary, o); });
  save_text(work / "summary_hidden.csv",
            [&](std::ostream& o) { write_summary_table(hidden_summary, o); });

  auto ratings = map_ratings(training_summary, config.rating_function);
  save_text(work / "ratings.csv", [&](std::ostream& o) { write_ratings(ratings, o); });

  // experiment inputs: evaluate B users that kept visible events
  ExperimentInputs inputs;
  inputs.training_summary = &training_summary;
  inputs.hidden_summary = &hidden_summary;
  inputs.eval_users = split.visible.users();
  for (UserId u : inputs.eval_users) {
    auto& ex = inputs.exclude[u];
    for (std::size_t idx : *split.visible.user_events(u))
      ex.insert(split.visible.events()[idx].track);
  }
  inputs.exclude_visible_from_relevance = config.exclude_visible;
  inputs.adapted_denominator = config.adapted_denominator;

  ExperimentGrid grid;
  grid.algorithms = {config.algorithm};
  grid.input_modes = {config.input_mode};
  grid.filters = config.filters;
  grid.rating_functions = {config.rating_function};
  grid.criteria = config.criteria;
  grid.ranks = config.ranks;
  grid.list_length = config.list_length;
  grid.composition_rank = config.composition_rank;
  grid.neighborhood_size = config.neighborhood_size;
  grid.sgd = config.sgd;
  grid.alpha = config.alpha;
  grid.variance_floor = config.variance_floor;
  grid.use_observed_ratings = config.use_observed_ratings;

  // persist models and recommendation lists for the configured cell
  InteractionMatrix matrix = build_training_input(training_summary, config.input_mode);
  std::map<UserId, ScoredList> base_lists;
  if (config.algorithm == Algorithm::popularity) {
    PopularityModel pop = train_popularity(matrix);
    save_text(work / "recommender.model", [&](std::ostream& o) { save_model(pop, o); });
    for (UserId u : inputs.eval_users) {
      auto rl = recommend_scores(pop, u, config.list_length, inputs.exclude.at(u));
      ScoredList sl{u, {}};
      for (const auto& it : rl.items) sl.entries.push_back({it.track, it.score, false});
      base_lists.emplace(u, std::move(sl));
    }
  } else {
    KnnModel knn = train_user_knn(matrix, config.neighborhood_size);
    save_text(work / "recommender.model", [&](std::ostream& o) { save_model(knn, o); });
    for (UserId u : inputs.eval_users) {
      ScoredList sl{u, {}};
      if (matrix.row(u)) {
        auto rl = recommend_knn(knn, u, config.list_length, inputs.exclude.at(u));
        for (const auto& it : rl.items) sl.entries.push_back({it.track, it.score, false});
      }
      base_lists.emplace(u, std::move(sl));
    }
  }
  {
    std::vector<ScoredList> lists;
    for (const auto& [_, sl] : base_lists) lists.push_back(sl);
    save_text(work / "recommendations.csv",
              [&](std::ostream& o) { write_recommendation_csv(lists, o); });
  }

  bool any_filter = std::any_of(config.filters.begin(), config.filters.end(),
                                [](FilterKind f) { return f != FilterKind::none; });
  if (any_filter) {
    FactorModel sgd_model = train_mf_sgd(ratings, config.sgd);
    save_text(work / "rating.model", [&](std::ostream& o) { save_model(sgd_model, o); });
    std::vector<LabeledScore> labeled;
    for (const auto& [key, s] : training_summary.entries()) {
      if (!s.like && !s.dislike) continue;
      double score = config.use_observed_ratings
                         ? static_cast<double>(map_rating(s, config.rating_function))
                         : predict_rating(sgd_model, key.first, key.second);
      labeled.push_back({score, s.like ? Label::like : Label::dislike});
    }
    GnbModel gnb = fit_gnb(labeled, config.variance_floor);
    save_text(work / "classifier.model", [&](std::ostream& o) { save_gnb(gnb, o); });
    double alpha = std::isnan(config.alpha) ? gnb.mu_like - std::sqrt(gnb.var_like) : config.alpha;

    std::vector<ScoredList> scored;
    for (auto& [u, sl] : base_lists) {
      ScoredList s{u, {}};
      for (const auto& e : sl.entries) {
        double r = predict_rating(sgd_model, u, e.track);
        s.entries.push_back({e.track, r, classify(gnb, r).label == Label::dislike});
      }
      scored.push_back(std::move(s));
    }
    save_text(work / "scored.csv", [&](std::ostream& o) { write_scored_lists(scored, o); });
    for (FilterKind f : config.filters) {
      if (f == FilterKind::none) continue;
      std::vector<ScoredList> filtered;
      for (const auto& sl : scored) filtered.push_back(apply_filter(sl, f, alpha));
      save_text(work / ("filtered_" + to_string(f) + ".csv"),
                [&](std::ostream& o) { write_recommendation_csv(filtered, o); });
    }
  }

  PipelineResult result;
  result.report = run_experiment_matrix(inputs, grid);
  result.group_a_users = static_cast<int>(group_a.user_count());
  result.group_b_users = static_cast<int>(group_b.user_count());
  result.training_events = training_log.size();
  result.hidden_events = split.hidden.size();

  save_text(work / "map_report.csv",
            [&](std::ostream& o) { write_report_csv(result.report, o); });
  save_text(work / "report.txt", [&](std::ostream& o) { write_report_text(result.report, o); });
  save_text(work / "report.json", [&](std::ostream& o) { write_report_json(result.report, o); });

  // run.meta: config + input content hashes, for provenance checks
  std::ostringstream cfg;
  write_pipeline_config(config, cfg);
  KeyValueList meta;
  meta.emplace_back("config_hash", std::to_string(fnv1a(cfg.str())));
  meta.emplace_back("input_hash", std::to_string(fnv1a(read_file(config.input_log))));
  meta.emplace_back("seed", std::to_string(config.seed));
  meta.emplace_back("sgd_seed", std::to_string(config.sgd.seed));
  meta.emplace_back("format_version", "1");
  save_text(work / "run.meta", [&](std::ostream& o) { write_key_values(o, meta); });
  return result;
}

}  // namespace replaygauge
