#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "replaygauge/types.hpp"

namespace replaygauge {

// Immutable multiset of listening events with per-user and per-track indices.
// Iteration order is construction (row) order.
class EventLog {
 public:
  EventLog() = default;
  explicit EventLog(std::vector<ListeningEvent> events);

  const std::vector<ListeningEvent>& events() const { return events_; }
  std::size_t size() const { return events_.size(); }
  bool empty() const { return events_.empty(); }

  // Indices into events(); nullptr when the id is absent.
  const std::vector<std::size_t>* user_events(UserId u) const;
  const std::vector<std::size_t>* track_events(TrackId t) const;

  std::vector<UserId> users() const;    // sorted ascending
  std::vector<TrackId> tracks() const;  // sorted ascending
  std::size_t user_count() const { return by_user_.size(); }
  std::size_t track_count() const { return by_track_.size(); }

  const std::map<UserId, std::vector<std::size_t>>& user_index() const { return by_user_; }

 private:
  std::vector<ListeningEvent> events_;
  std::map<UserId, std::vector<std::size_t>> by_user_;
  std::map<TrackId, std::vector<std::size_t>> by_track_;
};

struct DatasetSplit {
  EventLog visible;  // B_V
  EventLog hidden;   // B_H
  std::uint64_t seed = 0;
  double holdout_fraction = 0.5;
};

// CSV with header `user,track,duration,timestamp`. Integer fields, LF or CRLF.
EventLog parse_event_log(std::istream& source);
EventLog load_event_log(const std::string& path);
void write_event_log(const EventLog& log, std::ostream& out);
void save_event_log(const EventLog& log, const std::string& path);

// Drops every user with fewer than min_events events.
EventLog filter_min_activity(const EventLog& log, int min_events);

// Per-user seeded event holdout: floor(n * holdout_fraction) events go hidden,
// the rest stay visible. Users with a single event are not split.
DatasetSplit split_dataset(const EventLog& log, std::uint64_t seed, double holdout_fraction);

// Seeded user partition into groups A and B. B gets floor(|U| * group_b_fraction)
// users, at least one when the fraction is positive and |U| >= 2.
std::pair<EventLog, EventLog> select_user_groups(const EventLog& log, std::uint64_t seed,
                                                 double group_b_fraction);

// Split manifest: CSV `user,group` (A/B), plus a key=value sidecar with
// seed, holdout_fraction, format_version.
void write_group_manifest(const EventLog& group_a, const EventLog& group_b, std::ostream& out);
void write_split_meta(std::uint64_t seed, double holdout_fraction, std::ostream& out);

}  // namespace replaygauge
