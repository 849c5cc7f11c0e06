#include "replaygauge/signals.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <set>

#include "replaygauge/errors.hpp"
#include "replaygauge/io.hpp"

namespace replaygauge {

const InteractionSummary* SummaryTable::find(UserId u, TrackId t) const {
  auto it = entries_.find({u, t});
  return it == entries_.end() ? nullptr : &it->second;
}

SummaryTable summarize_interactions(const EventLog& log) {
  SummaryTable table;
  std::map<SummaryTable::Key, InteractionSummary> acc;
  for (const auto& e : log.events()) {
    auto& s = acc[{e.user, e.track}];
    s.user = e.user;
    s.track = e.track;
    ++s.total_plays;
    if (is_skip(e))
      ++s.skip_count;
    else
      ++s.stream_count;
  }
  for (auto& [_, s] : acc) {
    s.like = derive_like(s);
    s.dislike = derive_dislike(s);
    table.insert(s);
  }
  return table;
}

bool derive_like(const InteractionSummary& s) {
  return s.stream_count >= 2 && s.skip_count == 0;
}

bool derive_dislike(const InteractionSummary& s) {
  return s.skip_count >= 1 && s.stream_count == 0;
}

RatingFunction parse_rating_function(std::string_view name) {
  if (name == "f1") return RatingFunction::f1;
  if (name == "f2") return RatingFunction::f2;
  if (name == "f3") return RatingFunction::f3;
  throw UnknownFunction(std::string(name));
}

std::string to_string(RatingFunction f) {
  switch (f) {
    case RatingFunction::f1: return "f1";
    case RatingFunction::f2: return "f2";
    case RatingFunction::f3: return "f3";
  }
  return "?";
}

int rating_f1(const InteractionSummary& s) {
  int p = s.stream_count;
  if (p >= 4) return 5;
  if (p == 3) return 4;
  if (p == 2) return 3;
  if (p == 1) return 2;
  return 1;
}

int rating_f2(const InteractionSummary& s) {
  if (s.like) return 5;
  if (s.dislike) return 1;
  return 3;
}

int rating_f3(const InteractionSummary& s) {
  int p = s.stream_count, k = s.skip_count;
  if (p >= 4 && k < p) return 5;
  if (p >= 2 && k < p) return 4;
  if (k < p) return 3;
  if (k >= p && p > 0) return 2;
  return 1;  // p == 0
}

int map_rating(const InteractionSummary& s, RatingFunction f) {
  switch (f) {
    case RatingFunction::f1: return rating_f1(s);
    case RatingFunction::f2: return rating_f2(s);
    case RatingFunction::f3: return rating_f3(s);
  }
  throw UnknownFunction("invalid enum value");
}

std::vector<RatingTriple> map_ratings(const SummaryTable& table, RatingFunction f) {
  std::vector<RatingTriple> out;
  out.reserve(table.size());
  for (const auto& [key, s] : table.entries())
    out.push_back({key.first, key.second, map_rating(s, f)});
  return out;  // entries() is already (user, track) ordered
}

InputMode parse_input_mode(std::string_view name) {
  if (name == "events" || name == "all_events") return InputMode::all_events;
  if (name == "streams") return InputMode::streams;
  if (name == "likes") return InputMode::likes;
  if (name == "play_counts") return InputMode::play_counts;
  if (name == "total_counts") return InputMode::total_counts;
  throw UnknownMode(std::string(name));
}

std::string to_string(InputMode m) {
  switch (m) {
    case InputMode::all_events: return "events";
    case InputMode::streams: return "streams";
    case InputMode::likes: return "likes";
    case InputMode::play_counts: return "play_counts";
    case InputMode::total_counts: return "total_counts";
  }
  return "?";
}

InteractionMatrix build_training_input(const SummaryTable& table, InputMode mode) {
  InteractionMatrix m;
  for (const auto& [key, s] : table.entries()) {
    switch (mode) {
      case InputMode::all_events:
        if (s.total_plays > 0) m.add(key.first, key.second, 1.0);
        break;
      case InputMode::streams:
        if (s.stream_count >= 1) m.add(key.first, key.second, 1.0);
        break;
      case InputMode::likes:
        if (s.like) m.add(key.first, key.second, 1.0);
        break;
      case InputMode::play_counts:
        if (s.stream_count > 0) m.add(key.first, key.second, s.stream_count);
        break;
      case InputMode::total_counts:
        if (s.total_plays > 0) m.add(key.first, key.second, s.total_plays);
        break;
    }
  }
  return m;
}

StatsReport dataset_stats(const EventLog& log, const SummaryTable& table) {
  // Pair-count mismatch means the table was not derived from this log.
  std::set<SummaryTable::Key> pairs;
  for (const auto& e : log.events()) pairs.insert({e.user, e.track});
  if (pairs.size() != table.size())
    throw InconsistentInputs("log has " + std::to_string(pairs.size()) +
                             " unique pairs, table has " + std::to_string(table.size()));

  StatsReport r;
  r.event_count = log.size();
  r.unique_pair_count = table.size();
  std::size_t streams = 0;
  for (const auto& e : log.events()) {
    for (std::size_t b = 0; b < kDurationBucketEdges.size(); ++b)
      if (e.duration < kDurationBucketEdges[b]) ++r.duration_bucket_counts[b];
    if (is_stream(e)) ++streams;
  }
  std::size_t likes = 0, dislikes = 0;
  for (const auto& [_, s] : table.entries()) {
    for (std::size_t b = 0; b < kReplayBucketEdges.size(); ++b)
      if (s.total_plays >= kReplayBucketEdges[b]) ++r.replay_bucket_counts[b];
    if (s.like) ++likes;
    if (s.dislike) ++dislikes;
    r.rating_histograms[0][rating_f1(s) - 1]++;
    r.rating_histograms[1][rating_f2(s) - 1]++;
    r.rating_histograms[2][rating_f3(s) - 1]++;
  }
  if (r.event_count > 0) {
    auto n = static_cast<double>(r.event_count);
    for (std::size_t b = 0; b < 4; ++b)
      r.duration_bucket_shares[b] = static_cast<double>(r.duration_bucket_counts[b]) / n;
    r.stream_share = static_cast<double>(streams) / n;
    r.skip_share = static_cast<double>(r.event_count - streams) / n;
  }
  if (r.unique_pair_count > 0) {
    auto n = static_cast<double>(r.unique_pair_count);
    r.like_share = static_cast<double>(likes) / n;
    r.dislike_share = static_cast<double>(dislikes) / n;
  }
  return r;
}

void write_summary_table(const SummaryTable& table, std::ostream& out) {
  out << "user,track,plays,skips,streams,like,dislike\n";
  for (const auto& [_, s] : table.entries())
    out << s.user << ',' << s.track << ',' << s.total_plays << ',' << s.skip_count << ','
        << s.stream_count << ',' << (s.like ? 1 : 0) << ',' << (s.dislike ? 1 : 0) << '\n';
}

SummaryTable read_summary_table(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw MalformedRow("missing summary header");
  SummaryTable table;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto f = split_csv(line);
    if (f.size() != 7)
      throw MalformedRow("line " + std::to_string(line_no) + ": expected 7 columns");
    InteractionSummary s;
    s.user = parse_int64(f[0]);
    s.track = parse_int64(f[1]);
    s.total_plays = static_cast<int>(parse_int64(f[2]));
    s.skip_count = static_cast<int>(parse_int64(f[3]));
    s.stream_count = static_cast<int>(parse_int64(f[4]));
    s.like = parse_int64(f[5]) != 0;
    s.dislike = parse_int64(f[6]) != 0;
    table.insert(s);
  }
  return table;
}

void write_ratings(const std::vector<RatingTriple>& ratings, std::ostream& out) {
  out << "user,track,rating\n";
  for (const auto& r : ratings) out << r.user << ',' << r.track << ',' << r.rating << '\n';
}

std::vector<RatingTriple> read_ratings(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw MalformedRow("missing ratings header");
  std::vector<RatingTriple> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto f = split_csv(line);
    if (f.size() != 3)
      throw MalformedRow("line " + std::to_string(line_no) + ": expected 3 columns");
    out.push_back({parse_int64(f[0]), parse_int64(f[1]), static_cast<int>(parse_int64(f[2]))});
  }
  return out;
}

void write_stats_report(const StatsReport& r, std::ostream& out) {
  out << "events=" << r.event_count << '\n';
  out << "unique_pairs=" << r.unique_pair_count << '\n';
  for (std::size_t b = 0; b < 4; ++b)
    out << "events_lt_" << kDurationBucketEdges[b] << "s=" << r.duration_bucket_counts[b] << " ("
        << format_double(r.duration_bucket_shares[b]) << ")\n";
  for (std::size_t b = 0; b < 3; ++b)
    out << "pairs_p" << kReplayBucketEdges[b] << "=" << r.replay_bucket_counts[b] << '\n';
  out << "stream_share_of_events=" << format_double(r.stream_share) << '\n';
  out << "skip_share_of_events=" << format_double(r.skip_share) << '\n';
  out << "like_share_of_pairs=" << format_double(r.like_share) << '\n';
  out << "dislike_share_of_pairs=" << format_double(r.dislike_share) << '\n';
  const char* names[3] = {"f1", "f2", "f3"};
  for (int f = 0; f < 3; ++f) {
    out << "rating_histogram_" << names[f] << '=';
    for (int v = 0; v < 5; ++v) out << (v ? "," : "") << r.rating_histograms[f][v];
    out << '\n';
  }
}

}  // namespace replaygauge
