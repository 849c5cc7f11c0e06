#pragma once

#include <iosfwd>
#include <string_view>
#include <vector>

#include "replaygauge/types.hpp"

namespace replaygauge {

// One recommended track with its estimated rating and predicted-dislike flag.
struct ScoredEntry {
  TrackId track = 0;
  double score = 0;     // estimated rating
  bool dislike = false;  // predicted dislike
};

struct ScoredList {
  UserId user = 0;
  std::vector<ScoredEntry> entries;  // no duplicate tracks
};

enum class FilterKind { none, rank, del, swap };
FilterKind parse_filter_kind(std::string_view name);  // throws UnknownMode
std::string to_string(FilterKind f);

// Stable sort by estimated rating descending; equal scores keep input order.
ScoredList rank_filter(ScoredList list);

// Drops predicted dislikes, preserving order.
ScoredList del_filter(ScoredList list);

// Single left-to-right pass: a predicted dislike is replaced by the first
// later unconsumed non-dislike entry scoring >= alpha; the replacement is
// consumed and never reused. A dislike without a qualifying replacement is
// dropped. With alpha = +infinity this reduces to del_filter.
ScoredList swap_filter(const ScoredList& list, double alpha);

ScoredList apply_filter(const ScoredList& list, FilterKind kind, double alpha);

// CSV `user,rank,track,score,dislike` (ranks are 1-based).
void write_scored_lists(const std::vector<ScoredList>& lists, std::ostream& out);
std::vector<ScoredList> read_scored_lists(std::istream& in);

// CSV `user,rank,track,score` for filtered output.
void write_recommendation_csv(const std::vector<ScoredList>& lists, std::ostream& out);

}  // namespace replaygauge
