#pragma once

#include <iosfwd>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "replaygauge/classify.hpp"
#include "replaygauge/postfilter.hpp"
#include "replaygauge/recommenders.hpp"
#include "replaygauge/signals.hpp"
#include "replaygauge/types.hpp"

namespace replaygauge {

enum class Criterion { events, streams, likes, skips, dislikes };
Criterion parse_criterion(std::string_view name);  // throws UnknownMode
std::string to_string(Criterion c);
inline constexpr Criterion kAllCriteria[] = {Criterion::events, Criterion::streams,
                                             Criterion::likes, Criterion::skips,
                                             Criterion::dislikes};

// Per-user sets of unique hidden tracks satisfying a criterion.
struct RelevanceSets {
  std::map<UserId, std::set<TrackId>> sets;
};

RelevanceSets criterion_relevance(const SummaryTable& hidden_summary, Criterion criterion);

// AP truncated at k with an explicit denominator (Eq-9 style). recs must be
// duplicate-free. Throws ZeroDenominator when denominator < 1.
double average_precision_at_k(const std::vector<TrackId>& recs, const std::set<TrackId>& relevant,
                              int k, int denominator);

struct MapResult {
  double value = 0;
  int users_evaluated = 0;
  int users_excluded = 0;
};

// Mean AP over users with non-empty relevance (and denominator) sets. When
// denominators is null the relevance-set sizes are used (adapted denominator).
MapResult map_at_k(const std::map<UserId, std::vector<TrackId>>& per_user_recs,
                   const RelevanceSets& relevance, int k,
                   const RelevanceSets* denominators = nullptr);

// Breakdown of top-k recommended tracks the user interacted with in hidden
// data. %streams / %skips are non-exclusive shares (a pair can have both);
// %like / %dislike are mutually exclusive.
struct CompositionReport {
  long long events = 0;  // interacted (user, track) pairs in the top-k
  double pct_streams = 0;
  double pct_like = 0;
  double pct_skips = 0;
  double pct_dislike = 0;
  bool has_values = false;  // false when events == 0
};

CompositionReport composition_report(const std::map<UserId, std::vector<TrackId>>& per_user_recs,
                                     const SummaryTable& hidden_summary, int k);

// ---- experiment grid (input modes x filters x rating functions x criteria x ranks) ----

enum class Algorithm { popularity, user_knn };
Algorithm parse_algorithm(std::string_view name);  // throws UnknownMode
std::string to_string(Algorithm a);

struct ExperimentInputs {
  const SummaryTable* training_summary = nullptr;  // visible data (A + B_V)
  const SummaryTable* hidden_summary = nullptr;    // B_H
  std::vector<UserId> eval_users;                  // users of group B under evaluation
  // Per-user tracks known from the visible partition; excluded from candidate
  // recommendations and (by default) from relevance sets.
  std::map<UserId, std::set<TrackId>> exclude;
  bool exclude_visible_from_relevance = true;
  bool adapted_denominator = true;  // criterion-set size vs full hidden-event-set size
};

struct ExperimentGrid {
  std::vector<Algorithm> algorithms{Algorithm::user_knn};
  std::vector<InputMode> input_modes{InputMode::all_events};
  std::vector<FilterKind> filters{FilterKind::none};
  std::vector<RatingFunction> rating_functions{RatingFunction::f3};
  std::vector<Criterion> criteria{kAllCriteria, kAllCriteria + 5};
  std::vector<int> ranks{10, 100, 500};
  int list_length = 500;       // generated list size, filtered before truncation
  int composition_rank = 10;
  int neighborhood_size = 100;
  SgdHyperparams sgd;
  // Swap threshold; NaN selects the default mu_like - sd_like from the classifier.
  double alpha = std::numeric_limits<double>::quiet_NaN();
  double variance_floor = kDefaultVarianceFloor;
  bool use_observed_ratings = false;  // train the classifier on observed r, not estimated
};

struct ReportRow {
  Criterion criterion = Criterion::events;
  int k = 0;
  Algorithm algorithm = Algorithm::user_knn;
  InputMode input_mode = InputMode::all_events;
  FilterKind filter = FilterKind::none;
  std::optional<RatingFunction> rating_fn;  // empty for the unfiltered rows
  double map = 0;
  int users_evaluated = 0;
  int users_excluded = 0;
};

struct CompositionRow {
  Algorithm algorithm = Algorithm::user_knn;
  InputMode input_mode = InputMode::all_events;
  FilterKind filter = FilterKind::none;
  std::optional<RatingFunction> rating_fn;
  CompositionReport composition;
};

struct ExperimentReport {
  std::vector<ReportRow> rows;
  std::vector<CompositionRow> compositions;
  std::map<std::string, GnbModel> classifiers;  // keyed by rating-function name
  std::map<std::string, double> alphas_used;
};

ExperimentReport run_experiment_matrix(const ExperimentInputs& inputs, const ExperimentGrid& grid);

// CSV `criterion,k,algorithm,input_mode,rating_fn,filter,map,users_evaluated,users_excluded`.
void write_report_csv(const ExperimentReport& report, std::ostream& out);
// Aligned plain-text tables, one block per criterion, plus composition rows.
void write_report_text(const ExperimentReport& report, std::ostream& out);
void write_report_json(const ExperimentReport& report, std::ostream& out);

}  // namespace replaygauge
