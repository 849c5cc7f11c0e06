#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "replaygauge/eval.hpp"

namespace replaygauge {

// Flat key=value configuration with section prefixes (`split.seed=7`).
// Command-line flags override file values; the tool layer applies them.
struct PipelineConfig {
  std::string input_log;  // paths.input_log
  std::string work_dir;   // paths.work_dir

  std::uint64_t seed = 7;             // split.seed
  double holdout_fraction = 0.5;      // split.holdout_fraction
  double group_b_fraction = 0.5;      // split.group_b_fraction
  int min_activity = 10;              // split.min_activity

  Algorithm algorithm = Algorithm::user_knn;  // model.algorithm
  int neighborhood_size = 100;                // model.neighborhood_size
  InputMode input_mode = InputMode::all_events;  // model.input_mode

  SgdHyperparams sgd;  // sgd.factors / epochs / regularization / learning_rate / seed

  RatingFunction rating_function = RatingFunction::f3;  // rating.function
  std::vector<FilterKind> filters{FilterKind::none};    // filter.kinds (comma list)
  double alpha = std::numeric_limits<double>::quiet_NaN();  // filter.alpha (blank = auto)

  std::vector<int> ranks{10, 100, 500};  // eval.ranks
  std::vector<Criterion> criteria{kAllCriteria, kAllCriteria + 5};  // eval.criteria
  int list_length = 500;        // eval.list_length
  int composition_rank = 10;    // eval.composition_rank
  bool adapted_denominator = true;      // eval.adapted_denominator
  bool exclude_visible = true;          // eval.exclude_visible
  bool use_observed_ratings = false;    // classify.use_observed
  double variance_floor = kDefaultVarianceFloor;  // classify.variance_floor

  int threads = 1;  // upper bound accepted for forward compatibility
};

PipelineConfig parse_pipeline_config(std::istream& in);
PipelineConfig load_pipeline_config(const std::string& path);
void write_pipeline_config(const PipelineConfig& config, std::ostream& out);

struct PipelineResult {
  ExperimentReport report;
  int group_a_users = 0;
  int group_b_users = 0;
  std::size_t training_events = 0;
  std::size_t hidden_events = 0;
};

// Runs split -> summarize -> train -> recommend -> classify -> filter ->
// evaluate, persisting every stage under work_dir. Deterministic: identical
// config and input produce byte-identical artifacts.
PipelineResult run_pipeline(const PipelineConfig& config);

}  // namespace replaygauge
