#include "replaygauge/postfilter.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "replaygauge/errors.hpp"
#include "replaygauge/io.hpp"

namespace replaygauge {

FilterKind parse_filter_kind(std::string_view name) {
  if (name == "none" || name == "no") return FilterKind::none;
  if (name == "rank") return FilterKind::rank;
  if (name == "del") return FilterKind::del;
  if (name == "swap") return FilterKind::swap;
  throw UnknownMode(std::string(name));
}

std::string to_string(FilterKind f) {
  switch (f) {
    case FilterKind::none: return "none";
    case FilterKind::rank: return "rank";
    case FilterKind::del: return "del";
    case FilterKind::swap: return "swap";
  }
  return "?";
}

ScoredList rank_filter(ScoredList list) {
  std::stable_sort(list.entries.begin(), list.entries.end(),
                   [](const ScoredEntry& a, const ScoredEntry& b) { return a.score > b.score; });
  return list;
}

ScoredList del_filter(ScoredList list) {
  std::erase_if(list.entries, [](const ScoredEntry& e) { return e.dislike; });
  return list;
}

ScoredList swap_filter(const ScoredList& list, double alpha) {
  ScoredList out;
  out.user = list.user;
  std::vector<bool> consumed(list.entries.size(), false);
  for (std::size_t i = 0; i < list.entries.size(); ++i) {
    if (consumed[i]) continue;
    const auto& e = list.entries[i];
    if (!e.dislike) {
      out.entries.push_back(e);
      continue;
    }
    // Find a replacement further down the list.
    for (std::size_t j = i + 1; j < list.entries.size(); ++j) {
      const auto& cand = list.entries[j];
      if (consumed[j] || cand.dislike || cand.score < alpha) continue;
      out.entries.push_back(cand);
      consumed[j] = true;
      break;
    }
    // No qualifying replacement: the dislike is simply dropped.
  }
  return out;
}

ScoredList apply_filter(const ScoredList& list, FilterKind kind, double alpha) {
  switch (kind) {
    case FilterKind::none: return list;
    case FilterKind::rank: return rank_filter(list);
    case FilterKind::del: return del_filter(list);
    case FilterKind::swap: return swap_filter(list, alpha);
  }
  throw UnknownMode("invalid filter enum");
}

void write_scored_lists(const std::vector<ScoredList>& lists, std::ostream& out) {
  out << "user,rank,track,score,dislike\n";
  for (const auto& l : lists) {
    std::size_t rank = 0;
    for (const auto& e : l.entries)
      out << l.user << ',' << ++rank << ',' << e.track << ',' << format_double(e.score) << ','
          << (e.dislike ? 1 : 0) << '\n';
  }
}

std::vector<ScoredList> read_scored_lists(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw MalformedRow("missing scored-list header");
  std::vector<ScoredList> lists;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto f = split_csv(line);
    if (f.size() != 5 && f.size() != 4)
      throw MalformedRow("line " + std::to_string(line_no) + ": expected 4 or 5 columns");
    UserId user = parse_int64(f[0]);
    if (lists.empty() || lists.back().user != user) {
      lists.push_back({user, {}});
    }
    ScoredEntry e;
    e.track = parse_int64(f[2]);
    e.score = parse_double_strict(f[3]);
    e.dislike = f.size() == 5 && parse_int64(f[4]) != 0;
    lists.back().entries.push_back(e);
  }
  return lists;
}

void write_recommendation_csv(const std::vector<ScoredList>& lists, std::ostream& out) {
  out << "user,rank,track,score\n";
  for (const auto& l : lists) {
    std::size_t rank = 0;
    for (const auto& e : l.entries)
      out << l.user << ',' << ++rank << ',' << e.track << ',' << format_double(e.score) << '\n';
  }
}

}  // namespace replaygauge
