#pragma once

#include <cstdint>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "replaygauge/eventlog.hpp"
#include "replaygauge/rng.hpp"
#include "replaygauge/signals.hpp"
#include "replaygauge/types.hpp"

namespace rgtest {

using namespace replaygauge;

inline EventLog make_log(
    const std::vector<std::tuple<std::int64_t, std::int64_t, std::int64_t, std::int64_t>>& rows) {
  std::vector<ListeningEvent> events;
  for (const auto& [u, i, d, t] : rows) events.push_back({u, i, d, t});
  return EventLog(std::move(events));
}

// Random log for property tests; determinism of the instance is all that
// matters here, so reusing the library Rng is fine.
inline EventLog random_log(std::uint64_t seed, int n_events, int n_users, int n_tracks,
                           std::int64_t max_duration = 400) {
  Rng rng(seed);
  std::vector<ListeningEvent> events;
  events.reserve(static_cast<std::size_t>(n_events));
  for (int e = 0; e < n_events; ++e) {
    ListeningEvent ev;
    ev.user = rng.next_int(1, n_users);
    ev.track = rng.next_int(1, n_tracks);
    ev.duration = rng.next_int(0, max_duration);
    ev.timestamp = rng.next_int(0, 1000000);
    events.push_back(ev);
  }
  return EventLog(std::move(events));
}

inline std::string to_csv(const EventLog& log) {
  std::ostringstream out;
  write_event_log(log, out);
  return out.str();
}

inline InteractionSummary make_summary(int plays, int skips, int streams) {
  InteractionSummary s;
  s.user = 1;
  s.track = 1;
  s.total_plays = plays;
  s.skip_count = skips;
  s.stream_count = streams;
  s.like = streams >= 2 && skips == 0;
  s.dislike = skips >= 1 && streams == 0;
  return s;
}

}  // namespace rgtest
