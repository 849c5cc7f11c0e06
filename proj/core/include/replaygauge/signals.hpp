#pragma once

#include <array>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "replaygauge/eventlog.hpp"
#include "replaygauge/matrix.hpp"
#include "replaygauge/types.hpp"

namespace replaygauge {

// Events shorter than this are skips; at this duration or longer, streams.
constexpr std::int64_t kStreamThresholdSeconds = 30;

inline bool is_skip(const ListeningEvent& e) { return e.duration < kStreamThresholdSeconds; }
inline bool is_stream(const ListeningEvent& e) { return e.duration >= kStreamThresholdSeconds; }

// Per (user, track) aggregate: p = total plays, K = skips, P = streams,
// L / D = implicit like / dislike.
struct InteractionSummary {
  UserId user = 0;
  TrackId track = 0;
  int total_plays = 0;
  int skip_count = 0;
  int stream_count = 0;
  bool like = false;
  bool dislike = false;
};

class SummaryTable {
 public:
  using Key = std::pair<UserId, TrackId>;

  void insert(InteractionSummary s) { entries_[{s.user, s.track}] = s; }
  const InteractionSummary* find(UserId u, TrackId t) const;
  const std::map<Key, InteractionSummary>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

 private:
  std::map<Key, InteractionSummary> entries_;
};

SummaryTable summarize_interactions(const EventLog& log);

// Like: at least two streams and no skip. Dislike: at least one skip and no
// stream. Never both.
bool derive_like(const InteractionSummary& s);
bool derive_dislike(const InteractionSummary& s);

enum class RatingFunction { f1, f2, f3 };
RatingFunction parse_rating_function(std::string_view name);  // throws UnknownFunction
std::string to_string(RatingFunction f);

int rating_f1(const InteractionSummary& s);  // stream-count ladder
int rating_f2(const InteractionSummary& s);  // 5 / 3 / 1 from like / neutral / dislike
int rating_f3(const InteractionSummary& s);  // streams vs skips, first-match top-down
int map_rating(const InteractionSummary& s, RatingFunction f);

// One triple per summary, sorted by (user, track).
std::vector<RatingTriple> map_ratings(const SummaryTable& table, RatingFunction f);

enum class InputMode { all_events, streams, likes, play_counts, total_counts };
InputMode parse_input_mode(std::string_view name);  // throws UnknownMode
std::string to_string(InputMode m);

// all_events / streams / likes: binary presence. play_counts: stream count
// P(u,i). total_counts: all plays p(u,i), kept behind its own mode.
InteractionMatrix build_training_input(const SummaryTable& table, InputMode mode);

struct StatsReport {
  std::size_t event_count = 0;
  std::size_t unique_pair_count = 0;
  // Events with duration < 5, 30, 60, 120 seconds.
  std::array<std::size_t, 4> duration_bucket_counts{};
  std::array<double, 4> duration_bucket_shares{};
  // Pairs with p(u,i) >= 2, 5, 10.
  std::array<std::size_t, 3> replay_bucket_counts{};
  double stream_share = 0;   // event-level
  double skip_share = 0;     // event-level
  double like_share = 0;     // share of unique pairs
  double dislike_share = 0;  // share of unique pairs
  // Histogram over ratings 1..5 per mapping function (f1, f2, f3).
  std::array<std::array<std::size_t, 5>, 3> rating_histograms{};
};

constexpr std::array<std::int64_t, 4> kDurationBucketEdges{5, 30, 60, 120};
constexpr std::array<int, 3> kReplayBucketEdges{2, 5, 10};

// Throws InconsistentInputs when the table's pair count does not match the log.
StatsReport dataset_stats(const EventLog& log, const SummaryTable& table);

// CSV `user,track,plays,skips,streams,like,dislike`.
void write_summary_table(const SummaryTable& table, std::ostream& out);
SummaryTable read_summary_table(std::istream& in);

// CSV `user,track,rating`.
void write_ratings(const std::vector<RatingTriple>& ratings, std::ostream& out);
std::vector<RatingTriple> read_ratings(std::istream& in);

// key=value rendering plus table-style text.
void write_stats_report(const StatsReport& r, std::ostream& out);

}  // namespace replaygauge
