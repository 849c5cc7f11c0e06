#include "replaygauge/eventlog.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "replaygauge/errors.hpp"
#include "replaygauge/io.hpp"
#include "replaygauge/rng.hpp"

namespace replaygauge {

EventLog::EventLog(std::vector<ListeningEvent> events) : events_(std::move(events)) {
  for (std::size_t i = 0; i < events_.size(); ++i) {
    const auto& e = events_[i];
    if (e.duration < 0) throw NegativeDuration("event " + std::to_string(i));
    if (e.timestamp < 0) throw NegativeTimestamp("event " + std::to_string(i));
    by_user_[e.user].push_back(i);
    by_track_[e.track].push_back(i);
  }
}

const std::vector<std::size_t>* EventLog::user_events(UserId u) const {
  auto it = by_user_.find(u);
  return it == by_user_.end() ? nullptr : &it->second;
}

const std::vector<std::size_t>* EventLog::track_events(TrackId t) const {
  auto it = by_track_.find(t);
  return it == by_track_.end() ? nullptr : &it->second;
}

std::vector<UserId> EventLog::users() const {
  std::vector<UserId> out;
  out.reserve(by_user_.size());
  for (const auto& [u, _] : by_user_) out.push_back(u);
  return out;
}

std::vector<TrackId> EventLog::tracks() const {
  std::vector<TrackId> out;
  out.reserve(by_track_.size());
  for (const auto& [t, _] : by_track_) out.push_back(t);
  return out;
}

namespace {
constexpr const char* kHeader = "user,track,duration,timestamp";
}

EventLog parse_event_log(std::istream& source) {
  std::string line;
  if (!std::getline(source, line)) throw MalformedRow("missing header line");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kHeader)
    throw MalformedRow("line 1: expected header '" + std::string(kHeader) + "', got '" + line + "'");

  std::vector<ListeningEvent> events;
  std::size_t line_no = 1;
  while (std::getline(source, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto fields = split_csv(line);
    if (fields.size() != 4)
      throw MalformedRow("line " + std::to_string(line_no) + ": expected 4 columns, got " +
                         std::to_string(fields.size()));
    ListeningEvent e;
    try {
      e.user = parse_int64(fields[0]);
      e.track = parse_int64(fields[1]);
      e.duration = parse_int64(fields[2]);
      e.timestamp = parse_int64(fields[3]);
    } catch (const MalformedRow& err) {
      throw MalformedRow("line " + std::to_string(line_no) + ": " + err.what());
    }
    if (e.duration < 0) throw NegativeDuration("line " + std::to_string(line_no));
    if (e.timestamp < 0) throw NegativeTimestamp("line " + std::to_string(line_no));
    events.push_back(e);
  }
  return EventLog(std::move(events));
}

EventLog load_event_log(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return parse_event_log(in);
}

void write_event_log(const EventLog& log, std::ostream& out) {
  out << kHeader << '\n';
  for (const auto& e : log.events())
    out << e.user << ',' << e.track << ',' << e.duration << ',' << e.timestamp << '\n';
}

void save_event_log(const EventLog& log, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  write_event_log(log, out);
}

EventLog filter_min_activity(const EventLog& log, int min_events) {
  if (min_events < 1) throw InvalidHyperparameter("min_events must be >= 1");
  std::vector<ListeningEvent> kept;
  kept.reserve(log.size());
  for (const auto& e : log.events()) {
    if (log.user_events(e.user)->size() >= static_cast<std::size_t>(min_events))
      kept.push_back(e);
  }
  return EventLog(std::move(kept));
}

DatasetSplit split_dataset(const EventLog& log, std::uint64_t seed, double holdout_fraction) {
  if (log.empty()) throw EmptyLog("split_dataset");
  if (!(holdout_fraction > 0.0 && holdout_fraction < 1.0))
    throw InvalidHyperparameter("holdout_fraction must be in (0,1)");

  std::vector<ListeningEvent> visible, hidden;
  visible.reserve(log.size());
  for (const auto& [user, indices] : log.user_index()) {
    std::size_t n = indices.size();
    std::size_t n_hidden =
        n < 2 ? 0 : static_cast<std::size_t>(static_cast<double>(n) * holdout_fraction);
    if (n_hidden >= n) n_hidden = n - 1;  // guard against fraction rounding at 1
    // Shuffle keyed on (seed, user) so one user's split is independent of the rest.
    std::vector<std::size_t> order(indices.begin(), indices.end());
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(user)));
    rng.shuffle(order);
    std::set<std::size_t> hidden_idx(order.begin(), order.begin() + n_hidden);
    // Emit in original row order within each partition.
    for (std::size_t idx : indices) {
      if (hidden_idx.count(idx))
        hidden.push_back(log.events()[idx]);
      else
        visible.push_back(log.events()[idx]);
    }
  }
  DatasetSplit split;
  split.visible = EventLog(std::move(visible));
  split.hidden = EventLog(std::move(hidden));
  split.seed = seed;
  split.holdout_fraction = holdout_fraction;
  return split;
}

std::pair<EventLog, EventLog> select_user_groups(const EventLog& log, std::uint64_t seed,
                                                 double group_b_fraction) {
  if (log.empty()) throw EmptyLog("select_user_groups");
  if (!(group_b_fraction > 0.0 && group_b_fraction < 1.0))
    throw InvalidHyperparameter("group_b_fraction must be in (0,1)");

  std::vector<UserId> users = log.users();
  std::size_t n_b =
      static_cast<std::size_t>(static_cast<double>(users.size()) * group_b_fraction);
  if (n_b == 0 && users.size() >= 2) n_b = 1;
  if (n_b >= users.size()) n_b = users.size() - 1;

  Rng rng(mix_seed(seed, 0x67726f7570ULL));  // distinct stream from the event split
  rng.shuffle(users);
  std::set<UserId> b_users(users.begin(), users.begin() + n_b);

  std::vector<ListeningEvent> a_events, b_events;
  for (const auto& e : log.events()) {
    if (b_users.count(e.user))
      b_events.push_back(e);
    else
      a_events.push_back(e);
  }
  return {EventLog(std::move(a_events)), EventLog(std::move(b_events))};
}

void write_group_manifest(const EventLog& group_a, const EventLog& group_b, std::ostream& out) {
  out << "user,group\n";
  auto a_users = group_a.users();
  auto b_users = group_b.users();
  std::size_t i = 0, j = 0;
  while (i < a_users.size() || j < b_users.size()) {
    if (j == b_users.size() || (i < a_users.size() && a_users[i] < b_users[j]))
      out << a_users[i++] << ",A\n";
    else
      out << b_users[j++] << ",B\n";
  }
}

void write_split_meta(std::uint64_t seed, double holdout_fraction, std::ostream& out) {
  KeyValueList kv;
  kv.emplace_back("seed", std::to_string(seed));
  kv.emplace_back("holdout_fraction", format_double(holdout_fraction));
  kv.emplace_back("format_version", "1");
  write_key_values(out, kv);
}

}  // namespace replaygauge
