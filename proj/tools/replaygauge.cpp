// replaygauge command-line tool. Thin plumbing over the core library: every
// subcommand reads and writes the file formats owned by the library modules.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "replaygauge/classify.hpp"
#include "replaygauge/errors.hpp"
#include "replaygauge/eval.hpp"
#include "replaygauge/eventlog.hpp"
#include "replaygauge/io.hpp"
#include "replaygauge/pipeline.hpp"
#include "replaygauge/postfilter.hpp"
#include "replaygauge/recommenders.hpp"
#include "replaygauge/signals.hpp"
#include "replaygauge/synthgen.hpp"

namespace fs = std::filesystem;
using namespace replaygauge;

namespace {

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return in;
}

std::ofstream open_out(const std::string& path) {
  if (auto parent = fs::path(path).parent_path(); !parent.empty())
    fs::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  return out;
}

SummaryTable load_summary(const std::string& path) {
  auto in = open_in(path);
  return read_summary_table(in);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  for (auto part : split_csv(s)) out.emplace_back(part);
  return out;
}

// ---- generate ----

void add_generate(CLI::App& app, int& rc) {
  auto* cmd = app.add_subcommand("generate", "write a synthetic listening log");
  auto cfg = std::make_shared<GeneratorConfig>();
  auto out_dir = std::make_shared<std::string>();
  cmd->add_option("--users", cfg->user_count)->check(CLI::PositiveNumber);
  cmd->add_option("--tracks", cfg->track_count)->check(CLI::PositiveNumber);
  cmd->add_option("--genres", cfg->genre_count)->check(CLI::PositiveNumber);
  cmd->add_option("--events-mean", cfg->events_per_user_mean)->check(CLI::PositiveNumber);
  cmd->add_option("--dislike-threshold", cfg->dislike_threshold);
  cmd->add_option("--like-threshold", cfg->like_threshold);
  cmd->add_option("--skip-prob", cfg->skip_probability_given_dislike)
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--replay-rate", cfg->replay_rate_given_like)->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--sharpness", cfg->sampling_sharpness);
  cmd->add_option("--seed", cfg->seed);
  cmd->add_option("--out", *out_dir, "output directory")->required();
  cmd->callback([cfg, out_dir, &rc] {
    auto [log, truth] = generate(*cfg);
    fs::create_directories(*out_dir);
    save_event_log(log, (fs::path(*out_dir) / "events.csv").string());
    { auto out = open_out((fs::path(*out_dir) / "truth.csv").string()); truth.write_csv(out); }
    { auto out = open_out((fs::path(*out_dir) / "generator.meta").string());
      write_generator_meta(*cfg, out); }
    std::cout << "generated " << log.size() << " events for " << log.user_count()
              << " users, " << log.track_count() << " tracks\n";
    rc = 0;
  });
}

// ---- stats ----

void add_stats(CLI::App& app, int& rc) {
  auto* cmd = app.add_subcommand("stats", "dataset statistics for an event log");
  auto log_path = std::make_shared<std::string>();
  auto csv_path = std::make_shared<std::string>();
  auto ratings = std::make_shared<std::vector<std::string>>();
  cmd->add_option("log", *log_path, "event log CSV")->required();
  cmd->add_option("--out", *csv_path, "also write the report to this file");
  cmd->add_option("--ratings", *ratings, "append the histogram for f1/f2/f3");
  cmd->callback([log_path, csv_path, ratings, &rc] {
    auto log = load_event_log(*log_path);
    auto report = dataset_stats(log, summarize_interactions(log));
    std::set<std::string> wanted;
    for (const auto& r : *ratings) wanted.insert(to_string(parse_rating_function(r)));
    std::ostringstream full;
    write_stats_report(report, full);
    std::ostringstream shown;
    std::istringstream lines(full.str());
    std::string line;
    while (std::getline(lines, line)) {
      if (line.rfind("rating_histogram_", 0) == 0 && !wanted.count(line.substr(17, 2)))
        continue;
      shown << line << '\n';
    }
    std::cout << shown.str();
    if (!csv_path->empty()) open_out(*csv_path) << shown.str();
    rc = 0;
  });
}

// ---- split ----

void add_split(CLI::App& app, int& rc) {
  auto* cmd = app.add_subcommand("split", "group and holdout split of an event log");
  struct Args {
    std::string in, out;
    std::uint64_t seed = 7;
    double holdout = 0.5, group_b = 0.5;
    int min_activity = 0;
  };
  auto a = std::make_shared<Args>();
  cmd->add_option("--in", a->in)->required();
  cmd->add_option("--out", a->out, "output directory")->required();
  cmd->add_option("--seed", a->seed);
  cmd->add_option("--holdout", a->holdout)->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--group-b", a->group_b)->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--min-activity", a->min_activity)->check(CLI::NonNegativeNumber);
  cmd->callback([a, &rc] {
    auto log = load_event_log(a->in);
    if (a->min_activity > 0) log = filter_min_activity(log, a->min_activity);
    auto [group_a, group_b] = select_user_groups(log, a->seed, a->group_b);
    auto split = split_dataset(group_b, a->seed, a->holdout);
    fs::create_directories(a->out);
    fs::path out(a->out);
    save_event_log(group_a, (out / "group_a.csv").string());
    save_event_log(split.visible, (out / "b_visible.csv").string());
    save_event_log(split.hidden, (out / "b_hidden.csv").string());
    { auto o = open_out((out / "group_manifest.csv").string());
      write_group_manifest(group_a, group_b, o); }
    { auto o = open_out((out / "split.meta").string());
      write_split_meta(a->seed, a->holdout, o); }
    std::cout << "group A: " << group_a.user_count() << " users, group B: "
              << group_b.user_count() << " users (" << split.visible.size() << " visible / "
              << split.hidden.size() << " hidden events)\n";
    rc = 0;
  });
}

// ---- summarize ----

void add_summarize(CLI::App& app, int& rc) {
  auto* cmd = app.add_subcommand("summarize", "per-pair interaction summary and ratings");
  struct Args {
    std::string in, out, ratings_out, rating_fn = "f3";
  };
  auto a = std::make_shared<Args>();
  cmd->add_option("--in", a->in)->required();
  cmd->add_option("--out", a->out, "summary CSV")->required();
  cmd->add_option("--ratings-out", a->ratings_out, "also write mapped ratings");
  cmd->add_option("--rating-fn", a->rating_fn, "f1, f2 or f3");
  cmd->callback([a, &rc] {
    auto table = summarize_interactions(load_event_log(a->in));
    { auto o = open_out(a->out); write_summary_table(table, o); }
    if (!a->ratings_out.empty()) {
      auto ratings = map_ratings(table, parse_rating_function(a->rating_fn));
      auto o = open_out(a->ratings_out);
      write_ratings(ratings, o);
    }
    std::cout << table.size() << " pairs\n";
    rc = 0;
  });
}

// ---- train ----

void add_train(CLI::App& app, int& rc) {
  auto* cmd = app.add_subcommand("train", "train a recommender from a summary table");
  struct Args {
    std::string summary, out, algorithm = "knn", mode = "all_events", rating_fn = "f3";
    std::string ratings;  // pre-mapped ratings CSV, overrides --rating-fn for sgd
    int neighborhood = 100;
    SgdHyperparams sgd;
    AlsHyperparams als;
  };
  auto a = std::make_shared<Args>();
  cmd->add_option("--summary", a->summary)->required();
  cmd->add_option("--out", a->out, "model file")->required();
  cmd->add_option("--algorithm", a->algorithm)
      ->check(CLI::IsMember({"popularity", "knn", "sgd", "als"}));
  cmd->add_option("--mode", a->mode, "training input mode");
  cmd->add_option("--neighborhood", a->neighborhood)->check(CLI::PositiveNumber);
  cmd->add_option("--rating-fn", a->rating_fn);
  cmd->add_option("--ratings", a->ratings);
  cmd->add_option("--factors", a->sgd.factors)->check(CLI::PositiveNumber);
  cmd->add_option("--epochs", a->sgd.epochs)->check(CLI::PositiveNumber);
  cmd->add_option("--sweeps", a->als.sweeps)->check(CLI::PositiveNumber);
  cmd->add_option("--regularization", a->sgd.regularization)->check(CLI::NonNegativeNumber);
  cmd->add_option("--learning-rate", a->sgd.learning_rate)->check(CLI::PositiveNumber);
  cmd->add_option("--confidence", a->als.confidence_weight)->check(CLI::NonNegativeNumber);
  cmd->add_option("--seed", a->sgd.seed);
  cmd->callback([a, &rc] {
    auto table = load_summary(a->summary);
    auto out = open_out(a->out);
    if (a->algorithm == "popularity") {
      save_model(train_popularity(build_training_input(table, parse_input_mode(a->mode))), out);
    } else if (a->algorithm == "knn") {
      save_model(train_user_knn(build_training_input(table, parse_input_mode(a->mode)),
                                a->neighborhood),
                 out);
    } else if (a->algorithm == "sgd") {
      std::vector<RatingTriple> ratings;
      if (a->ratings.empty()) {
        ratings = map_ratings(table, parse_rating_function(a->rating_fn));
      } else {
        auto in = open_in(a->ratings);
        ratings = read_ratings(in);
      }
      save_model(train_mf_sgd(ratings, a->sgd), out);
    } else {
      a->als.factors = a->sgd.factors;
      a->als.regularization = a->sgd.regularization;
      a->als.seed = a->sgd.seed;
      auto counts = build_training_input(table, parse_input_mode(a->mode.empty() ? "play_counts"
                                                                                 : a->mode));
      save_model(train_als_implicit(counts, a->als), out);
    }
    std::cout << "wrote " << a->out << '\n';
    rc = 0;
  });
}

// ---- recommend ----

void add_recommend(CLI::App& app, int& rc) {
  auto* cmd = app.add_subcommand("recommend", "top-n lists for every user in a summary");
  struct Args {
    std::string model, summary, out;
    int n = 500;
    bool keep_consumed = false;
  };
  auto a = std::make_shared<Args>();
  cmd->add_option("--model", a->model)->required();
  cmd->add_option("--summary", a->summary, "training summary; users + consumed tracks")
      ->required();
  cmd->add_option("--out", a->out)->required();
  cmd->add_option("-n,--n", a->n)->check(CLI::PositiveNumber);
  cmd->add_flag("--keep-consumed", a->keep_consumed, "do not exclude consumed tracks");
  cmd->callback([a, &rc] {
    auto table = load_summary(a->summary);
    std::map<UserId, std::set<TrackId>> consumed;
    for (const auto& [key, s] : table.entries()) consumed[key.first].insert(key.second);

    auto in = open_in(a->model);
    auto kind = peek_model_kind(in);
    std::vector<ScoredList> lists;
    auto emit = [&](const RecommendationList& rec) {
      ScoredList list;
      list.user = rec.user;
      for (const auto& st : rec.items) list.entries.push_back({st.track, st.score, false});
      lists.push_back(std::move(list));
    };
    static const std::set<TrackId> kNoExclude;
    auto exclude_for = [&](UserId u) -> const std::set<TrackId>& {
      return a->keep_consumed ? kNoExclude : consumed[u];
    };
    if (kind == "popularity") {
      auto model = load_popularity_model(in);
      for (const auto& [u, _] : consumed) emit(recommend_scores(model, u, a->n, exclude_for(u)));
    } else if (kind == "knn") {
      auto model = load_knn_model(in);
      for (const auto& [u, _] : consumed) emit(recommend_knn(model, u, a->n, exclude_for(u)));
    } else {
      auto model = load_factor_model(in);
      for (const auto& [u, _] : consumed) emit(recommend_scores(model, u, a->n, exclude_for(u)));
    }
    auto out = open_out(a->out);
    write_recommendation_csv(lists, out);
    std::cout << lists.size() << " lists\n";
    rc = 0;
  });
}

// ---- classify ----

void add_classify(CLI::App& app, int& rc) {
  auto* cmd = app.add_subcommand(
      "classify", "fit the like/dislike classifier; optionally score recommendation lists");
  struct Args {
    std::string summary, rating_model, model_out;
    std::string recommendations, scored_out;
    std::string rating_fn = "f3";
    bool use_observed = false;
    double variance_floor = kDefaultVarianceFloor;
  };
  auto a = std::make_shared<Args>();
  cmd->add_option("--summary", a->summary, "labeled training summary")->required();
  cmd->add_option("--rating-model", a->rating_model, "trained sgd/als model")->required();
  cmd->add_option("--model-out", a->model_out)->required();
  cmd->add_option("--recommendations", a->recommendations, "lists to annotate");
  cmd->add_option("--scored-out", a->scored_out, "annotated output CSV");
  cmd->add_option("--rating-fn", a->rating_fn, "observed rating function");
  cmd->add_flag("--use-observed", a->use_observed, "train on observed instead of estimated");
  cmd->add_option("--variance-floor", a->variance_floor)->check(CLI::PositiveNumber);
  cmd->callback([a, &rc] {
    auto table = load_summary(a->summary);
    auto model_in = open_in(a->rating_model);
    auto factor = load_factor_model(model_in);
    auto fn = parse_rating_function(a->rating_fn);

    std::vector<LabeledScore> samples;
    for (const auto& [key, s] : table.entries()) {
      if (!s.like && !s.dislike) continue;
      double score = a->use_observed ? static_cast<double>(map_rating(s, fn))
                                     : predict_rating(factor, key.first, key.second);
      samples.push_back({score, s.like ? Label::like : Label::dislike});
    }
    auto gnb = fit_gnb(samples, a->variance_floor);
    { auto o = open_out(a->model_out); save_gnb(gnb, o); }
    std::cout << "classifier: mu_like=" << format_double(gnb.mu_like)
              << " mu_dislike=" << format_double(gnb.mu_dislike)
              << " prior_like=" << format_double(gnb.prior_like) << '\n';

    if (!a->recommendations.empty()) {
      if (a->scored_out.empty()) throw InvalidConfig("--scored-out required with --recommendations");
      auto in = open_in(a->recommendations);
      auto lists = read_scored_lists(in);
      for (auto& list : lists)
        for (auto& e : list.entries) {
          e.score = predict_rating(factor, list.user, e.track);
          e.dislike = classify(gnb, e.score).label == Label::dislike;
        }
      auto o = open_out(a->scored_out);
      write_scored_lists(lists, o);
      std::cout << "scored " << lists.size() << " lists\n";
    }
    rc = 0;
  });
}

// ---- filter ----

void add_filter(CLI::App& app, int& rc) {
  auto* cmd = app.add_subcommand("filter", "post-filter scored recommendation lists");
  struct Args {
    std::string in, out, kind = "del", classifier;
    double alpha = std::numeric_limits<double>::quiet_NaN();
  };
  auto a = std::make_shared<Args>();
  cmd->add_option("--in", a->in, "scored lists CSV")->required();
  cmd->add_option("--out", a->out)->required();
  cmd->add_option("--kind", a->kind)->check(CLI::IsMember({"none", "rank", "del", "swap"}));
  cmd->add_option("--alpha", a->alpha, "swap threshold");
  cmd->add_option("--classifier", a->classifier,
                  "gnb model; default alpha = mu_like - sd_like when --alpha is absent");
  cmd->callback([a, &rc] {
    auto kind = parse_filter_kind(a->kind);
    double alpha = a->alpha;
    if (kind == FilterKind::swap && std::isnan(alpha)) {
      if (a->classifier.empty())
        throw InvalidHyperparameter("swap needs --alpha or --classifier");
      auto in = open_in(a->classifier);
      auto gnb = load_gnb(in);
      alpha = gnb.mu_like - std::sqrt(gnb.var_like);
    }
    auto in = open_in(a->in);
    auto lists = read_scored_lists(in);
    for (auto& list : lists) list = apply_filter(list, kind, alpha);
    auto out = open_out(a->out);
    write_recommendation_csv(lists, out);
    std::cout << lists.size() << " lists filtered (" << a->kind << ")\n";
    rc = 0;
  });
}

// ---- evaluate ----

void add_evaluate(CLI::App& app, int& rc) {
  auto* cmd = app.add_subcommand("evaluate", "MAP@k of recommendation lists vs hidden data");
  struct Args {
    std::string recommendations, hidden_summary, training_summary, csv_out;
    std::string ranks = "10,100,500";
    std::string criteria = "events,streams,likes,skips,dislikes";
    bool full_denominator = false;
    int composition_rank = 10;
  };
  auto a = std::make_shared<Args>();
  cmd->add_option("--recommendations", a->recommendations)->required();
  cmd->add_option("--hidden-summary", a->hidden_summary)->required();
  cmd->add_option("--training-summary", a->training_summary,
                  "consumed tracks to drop from relevance sets");
  cmd->add_option("--ranks", a->ranks);
  cmd->add_option("--criteria", a->criteria);
  cmd->add_flag("--full-denominator", a->full_denominator,
                "divide by the full hidden event set instead of the criterion set");
  cmd->add_option("--composition-rank", a->composition_rank)->check(CLI::PositiveNumber);
  cmd->add_option("--out", a->csv_out, "also write rows as CSV");
  cmd->callback([a, &rc] {
    auto in = open_in(a->recommendations);
    auto lists = read_scored_lists(in);
    std::map<UserId, std::vector<TrackId>> recs;
    for (const auto& list : lists) {
      auto& tracks = recs[list.user];
      for (const auto& e : list.entries) tracks.push_back(e.track);
    }
    auto hidden = load_summary(a->hidden_summary);

    std::map<UserId, std::set<TrackId>> consumed;
    if (!a->training_summary.empty())
      for (const auto& [key, s] : load_summary(a->training_summary).entries())
        consumed[key.first].insert(key.second);
    auto prune = [&](RelevanceSets sets) {
      for (auto& [user, tracks] : sets.sets)
        if (auto it = consumed.find(user); it != consumed.end())
          for (TrackId t : it->second) tracks.erase(t);
      return sets;
    };

    auto denominators = prune(criterion_relevance(hidden, Criterion::events));
    std::ostringstream csv;
    csv << "criterion,k,map,users_evaluated,users_excluded\n";
    for (const auto& cname : split_list(a->criteria)) {
      auto criterion = parse_criterion(cname);
      auto relevance = prune(criterion_relevance(hidden, criterion));
      for (const auto& rk : split_list(a->ranks)) {
        int k = static_cast<int>(parse_int64(rk));
        auto result = map_at_k(recs, relevance, k,
                               a->full_denominator ? &denominators : nullptr);
        std::cout << "MAP_" << to_string(criterion) << "@" << k << " = "
                  << format_double(result.value) << "  (" << result.users_evaluated
                  << " users, " << result.users_excluded << " excluded)\n";
        csv << to_string(criterion) << ',' << k << ',' << format_double(result.value) << ','
            << result.users_evaluated << ',' << result.users_excluded << '\n';
      }
    }
    auto comp = composition_report(recs, hidden, a->composition_rank);
    if (comp.has_values)
      std::cout << "top-" << a->composition_rank << " composition: streams "
                << format_double(comp.pct_streams) << "%, likes " << format_double(comp.pct_like)
                << "%, skips " << format_double(comp.pct_skips) << "%, dislikes "
                << format_double(comp.pct_dislike) << "% over " << comp.events << " pairs\n";
    if (!a->csv_out.empty()) open_out(a->csv_out) << csv.str();
    rc = 0;
  });
}

// ---- pipeline ----

void add_pipeline(CLI::App& app, int& rc) {
  auto* cmd = app.add_subcommand("pipeline", "run split through evaluate from a config file");
  struct Args {
    std::string config, input, work_dir, algorithm, mode, rating_fn, filters;
    std::uint64_t seed = 0;
    double holdout = 0, group_b = 0, alpha = 0;
    int min_activity = 0, neighborhood = 0, list_length = 0;
  };
  auto a = std::make_shared<Args>();
  auto* config_opt = cmd->add_option("config", a->config, "key=value config file");
  auto* input_opt = cmd->add_option("--input", a->input);
  auto* work_opt = cmd->add_option("--work-dir", a->work_dir);
  auto* seed_opt = cmd->add_option("--seed", a->seed);
  auto* holdout_opt = cmd->add_option("--holdout", a->holdout)->check(CLI::Range(0.0, 1.0));
  auto* group_opt = cmd->add_option("--group-b", a->group_b)->check(CLI::Range(0.0, 1.0));
  auto* min_opt = cmd->add_option("--min-activity", a->min_activity)
                      ->check(CLI::NonNegativeNumber);
  auto* algo_opt = cmd->add_option("--algorithm", a->algorithm)
                       ->check(CLI::IsMember({"popularity", "user_knn"}));
  auto* mode_opt = cmd->add_option("--mode", a->mode);
  auto* fn_opt = cmd->add_option("--rating-fn", a->rating_fn);
  auto* filter_opt = cmd->add_option("--filters", a->filters, "comma list: none,rank,del,swap");
  auto* alpha_opt = cmd->add_option("--alpha", a->alpha);
  auto* nb_opt = cmd->add_option("--neighborhood", a->neighborhood)->check(CLI::PositiveNumber);
  auto* len_opt = cmd->add_option("--list-length", a->list_length)->check(CLI::PositiveNumber);
  cmd->callback([=, &rc] {
    PipelineConfig config;
    if (config_opt->count()) config = load_pipeline_config(a->config);
    if (input_opt->count()) config.input_log = a->input;
    if (work_opt->count()) config.work_dir = a->work_dir;
    if (seed_opt->count()) config.seed = a->seed;
    if (holdout_opt->count()) config.holdout_fraction = a->holdout;
    if (group_opt->count()) config.group_b_fraction = a->group_b;
    if (min_opt->count()) config.min_activity = a->min_activity;
    if (algo_opt->count()) config.algorithm = parse_algorithm(a->algorithm);
    if (mode_opt->count()) config.input_mode = parse_input_mode(a->mode);
    if (fn_opt->count()) config.rating_function = parse_rating_function(a->rating_fn);
    if (filter_opt->count()) {
      config.filters.clear();
      for (const auto& f : split_list(a->filters))
        config.filters.push_back(parse_filter_kind(f));
    }
    if (alpha_opt->count()) config.alpha = a->alpha;
    if (nb_opt->count()) config.neighborhood_size = a->neighborhood;
    if (len_opt->count()) config.list_length = a->list_length;

    auto result = run_pipeline(config);
    std::cout << "pipeline done: " << result.group_a_users << " group-A users, "
              << result.group_b_users << " group-B users, " << result.training_events
              << " training events, " << result.hidden_events << " hidden events\n"
              << "reports under " << config.work_dir << '\n';
    rc = 0;
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"implicit-feedback music recommendation toolkit"};
  app.require_subcommand(1);
  int rc = 1;
  add_generate(app, rc);
  add_stats(app, rc);
  add_split(app, rc);
  add_summarize(app, rc);
  add_train(app, rc);
  add_recommend(app, rc);
  add_classify(app, rc);
  add_filter(app, rc);
  add_evaluate(app, rc);
  add_pipeline(app, rc);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "replaygauge: error: " << e.what() << '\n';
    return 1;
  }
  return rc;
}
