#include <map>
#include <set>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "replaygauge/errors.hpp"
#include "replaygauge/signals.hpp"

using namespace replaygauge;
using rgtest::make_log;
using rgtest::make_summary;
using rgtest::random_log;

namespace {

// Independent per-event fold: recounts everything from scratch per pair.
struct OracleCounts {
  int plays = 0, skips = 0, streams = 0;
};

std::map<std::pair<UserId, TrackId>, OracleCounts> oracle_fold(const EventLog& log) {
  std::map<std::pair<UserId, TrackId>, OracleCounts> out;
  for (const auto& e : log.events()) {
    auto& c = out[{e.user, e.track}];
    c.plays += 1;
    if (e.duration < 30)
      c.skips += 1;
    else
      c.streams += 1;
  }
  return out;
}

}  // namespace

TEST_CASE("summarize_interactions on hand instances") {
  SUBCASE("durations 10, 45, 200") {
    auto t = summarize_interactions(make_log({{1, 9, 10, 0}, {1, 9, 45, 1}, {1, 9, 200, 2}}));
    const auto* s = t.find(1, 9);
    REQUIRE(s != nullptr);
    CHECK(s->total_plays == 3);
    CHECK(s->skip_count == 1);
    CHECK(s->stream_count == 2);
    CHECK_FALSE(s->like);
    CHECK_FALSE(s->dislike);
  }
  SUBCASE("30 seconds exactly is a stream") {
    auto t = summarize_interactions(make_log({{1, 9, 30, 0}}));
    const auto* s = t.find(1, 9);
    REQUIRE(s != nullptr);
    CHECK(s->total_plays == 1);
    CHECK(s->skip_count == 0);
    CHECK(s->stream_count == 1);
  }
  SUBCASE("two skips make a dislike") {
    auto t = summarize_interactions(make_log({{1, 9, 5, 0}, {1, 9, 5, 1}}));
    const auto* s = t.find(1, 9);
    REQUIRE(s != nullptr);
    CHECK(s->total_plays == 2);
    CHECK(s->skip_count == 2);
    CHECK(s->stream_count == 0);
    CHECK(s->dislike);
  }
  SUBCASE("duration 0 is a valid skip") {
    auto t = summarize_interactions(make_log({{1, 9, 0, 0}}));
    REQUIRE(t.find(1, 9) != nullptr);
    CHECK(t.find(1, 9)->skip_count == 1);
  }
}

TEST_CASE("derive_like and derive_dislike") {
  CHECK(derive_like(make_summary(2, 0, 2)));
  CHECK_FALSE(derive_like(make_summary(4, 1, 3)));  // any skip vetoes like
  CHECK_FALSE(derive_like(make_summary(1, 0, 1)));
  CHECK(derive_dislike(make_summary(1, 1, 0)));
  CHECK_FALSE(derive_dislike(make_summary(4, 3, 1)));  // one stream cancels dislike
  CHECK_FALSE(derive_dislike(make_summary(0, 0, 0)));
}

TEST_CASE("rating functions") {
  SUBCASE("f1 stream ladder") {
    CHECK(rating_f1(make_summary(4, 0, 4)) == 5);
    CHECK(rating_f1(make_summary(7, 0, 7)) == 5);
    CHECK(rating_f1(make_summary(3, 0, 3)) == 4);
    CHECK(rating_f1(make_summary(2, 0, 2)) == 3);
    CHECK(rating_f1(make_summary(1, 0, 1)) == 2);
    CHECK(rating_f1(make_summary(9, 9, 0)) == 1);
  }
  SUBCASE("f2 from like and dislike") {
    CHECK(rating_f2(make_summary(2, 0, 2)) == 5);   // like
    CHECK(rating_f2(make_summary(1, 1, 0)) == 1);   // dislike
    CHECK(rating_f2(make_summary(2, 1, 1)) == 3);   // neutral
  }
  SUBCASE("f3 first-match branches") {
    CHECK(rating_f3(make_summary(7, 3, 4)) == 5);   // P>=4, K<P
    CHECK(rating_f3(make_summary(3, 1, 2)) == 4);   // P>=2, K<P
    CHECK(rating_f3(make_summary(1, 0, 1)) == 3);   // K<P
    CHECK(rating_f3(make_summary(3, 2, 1)) == 2);   // K>=P, P>0
    CHECK(rating_f3(make_summary(0, 0, 0)) == 1);   // P=0
    CHECK(rating_f3(make_summary(2, 2, 0)) == 1);
  }
  SUBCASE("f1 is non-decreasing in P") {
    int prev = 0;
    for (int p = 0; p <= 12; ++p) {
      int r = rating_f1(make_summary(p, 0, p));
      CHECK(r >= prev);
      prev = r;
    }
  }
}

TEST_CASE("floor agreement of f1, f3 and skip-only pairs under f2") {
  // all three assign the minimum exactly to P=0 pairs with at least one skip
  for (int streams = 0; streams <= 5; ++streams)
    for (int skips = 0; skips <= 5; ++skips) {
      auto s = make_summary(streams + skips, skips, streams);
      CHECK((rating_f1(s) == 1) == (streams == 0));
      CHECK((rating_f3(s) == 1) == (streams == 0));
      if (skips >= 1 && streams == 0) {
        CHECK(rating_f1(s) == 1);
        CHECK(rating_f2(s) == 1);
        CHECK(rating_f3(s) == 1);
      }
    }
}

TEST_CASE("parse helpers reject unknown names") {
  CHECK_THROWS_AS(parse_rating_function("f9"), UnknownFunction);
  CHECK_THROWS_AS(parse_input_mode("bogus"), UnknownMode);
  CHECK(parse_rating_function("f2") == RatingFunction::f2);
  CHECK(parse_input_mode("streams") == InputMode::streams);
}

TEST_CASE("map_ratings preserves cardinality and sorts by key") {
  auto log = make_log({{2, 5, 40, 0}, {1, 7, 40, 1}, {1, 3, 5, 2}});
  auto ratings = map_ratings(summarize_interactions(log), RatingFunction::f2);
  REQUIRE(ratings.size() == 3);
  CHECK(ratings[0].user == 1);
  CHECK(ratings[0].track == 3);
  CHECK(ratings[1].track == 7);
  CHECK(ratings[2].user == 2);
  for (const auto& r : ratings) {
    CHECK(r.rating >= 1);
    CHECK(r.rating <= 5);
  }
  CHECK(map_ratings(SummaryTable{}, RatingFunction::f1).empty());
}

TEST_CASE("build_training_input modes") {
  SummaryTable table;
  auto skip_only = make_summary(2, 2, 0);
  auto liked = make_summary(2, 0, 2);
  auto three_streams = make_summary(3, 0, 3);
  skip_only.track = 1;
  liked.track = 2;
  three_streams.track = 3;
  table.insert(skip_only);
  table.insert(liked);
  table.insert(three_streams);

  auto all = build_training_input(table, InputMode::all_events);
  CHECK(all.row(1)->count(1) == 1);
  CHECK(all.row(1)->at(1) == 1.0);

  auto streams = build_training_input(table, InputMode::streams);
  CHECK(streams.row(1)->count(1) == 0);
  CHECK(streams.row(1)->count(2) == 1);

  auto likes = build_training_input(table, InputMode::likes);
  CHECK(likes.row(1)->count(1) == 0);
  CHECK(likes.row(1)->count(2) == 1);
  CHECK(likes.row(1)->count(3) == 1);  // three clean streams with no skips is still a like
}

TEST_CASE("play_counts carries stream counts, total_counts all plays") {
  SummaryTable table;
  auto s = make_summary(5, 2, 3);
  table.insert(s);
  auto plays = build_training_input(table, InputMode::play_counts);
  CHECK(plays.row(1)->at(1) == 3.0);
  auto totals = build_training_input(table, InputMode::total_counts);
  CHECK(totals.row(1)->at(1) == 5.0);
}

TEST_CASE("dataset_stats on hand instances") {
  SUBCASE("duration buckets") {
    auto log = make_log({{1, 1, 3, 0}, {1, 2, 20, 1}, {2, 1, 40, 2}, {2, 2, 300, 3}});
    auto r = dataset_stats(log, summarize_interactions(log));
    CHECK(r.event_count == 4);
    CHECK(r.duration_bucket_shares[0] == doctest::Approx(0.25));
    CHECK(r.duration_bucket_shares[1] == doctest::Approx(0.5));
    CHECK(r.stream_share == doctest::Approx(0.5));
    CHECK(r.skip_share == doctest::Approx(0.5));
  }
  SUBCASE("replay buckets p2, p5, p10") {
    std::vector<std::tuple<std::int64_t, std::int64_t, std::int64_t, std::int64_t>> rows;
    auto add_pair = [&](std::int64_t track, int plays) {
      for (int e = 0; e < plays; ++e) rows.push_back({1, track, 60, (std::int64_t)rows.size()});
    };
    add_pair(1, 1);
    add_pair(2, 2);
    add_pair(3, 5);
    add_pair(4, 10);
    auto log = make_log(rows);
    auto r = dataset_stats(log, summarize_interactions(log));
    CHECK(r.replay_bucket_counts[0] == 3);
    CHECK(r.replay_bucket_counts[1] == 2);
    CHECK(r.replay_bucket_counts[2] == 1);
  }
  SUBCASE("mismatched table is rejected") {
    auto log = make_log({{1, 1, 40, 0}, {1, 2, 40, 1}});
    auto other = summarize_interactions(make_log({{1, 1, 40, 0}}));
    CHECK_THROWS_AS(dataset_stats(log, other), InconsistentInputs);
  }
  SUBCASE("empty log gives zero counts") {
    EventLog log;
    auto r = dataset_stats(log, summarize_interactions(log));
    CHECK(r.event_count == 0);
    CHECK(r.unique_pair_count == 0);
    CHECK(r.stream_share == 0);
  }
}

TEST_CASE("oracle: summaries and ratings match a per-event recount on 10^4 events") {
  auto log = random_log(99, 10000, 60, 120, 350);
  auto table = summarize_interactions(log);
  auto oracle = oracle_fold(log);
  REQUIRE(table.size() == oracle.size());
  for (const auto& [key, counts] : oracle) {
    const auto* s = table.find(key.first, key.second);
    REQUIRE(s != nullptr);
    CHECK(s->total_plays == counts.plays);
    CHECK(s->skip_count == counts.skips);
    CHECK(s->stream_count == counts.streams);
    CHECK(s->total_plays == s->skip_count + s->stream_count);
    // Eqs 6-8 recomputed independently
    bool like = counts.streams >= 2 && counts.skips == 0;
    bool dislike = counts.skips >= 1 && counts.streams == 0;
    CHECK(s->like == like);
    CHECK(s->dislike == dislike);
    CHECK_FALSE((s->like && s->dislike));
    // rating functions against a literal transcription
    int f1 = counts.streams >= 4   ? 5
             : counts.streams == 3 ? 4
             : counts.streams == 2 ? 3
             : counts.streams == 1 ? 2
                                   : 1;
    int f2 = like ? 5 : dislike ? 1 : 3;
    int f3 = (counts.streams >= 4 && counts.skips < counts.streams)   ? 5
             : (counts.streams >= 2 && counts.skips < counts.streams) ? 4
             : (counts.skips < counts.streams)                        ? 3
             : (counts.streams > 0)                                   ? 2
                                                                      : 1;
    CHECK(rating_f1(*s) == f1);
    CHECK(rating_f2(*s) == f2);
    CHECK(rating_f3(*s) == f3);
  }
}

TEST_CASE("rating histograms sum to the unique pair count") {
  auto log = random_log(4, 5000, 40, 80);
  auto r = dataset_stats(log, summarize_interactions(log));
  for (int f = 0; f < 3; ++f) {
    std::size_t total = 0;
    for (int v = 0; v < 5; ++v) total += r.rating_histograms[f][v];
    CHECK(total == r.unique_pair_count);
  }
}

TEST_CASE("summary and ratings CSV round-trip") {
  auto log = random_log(21, 2000, 25, 50);
  auto table = summarize_interactions(log);
  std::ostringstream out;
  write_summary_table(table, out);
  std::istringstream in(out.str());
  auto reread = read_summary_table(in);
  REQUIRE(reread.size() == table.size());
  for (const auto& [key, s] : table.entries()) {
    const auto* r = reread.find(key.first, key.second);
    REQUIRE(r != nullptr);
    CHECK(r->total_plays == s.total_plays);
    CHECK(r->skip_count == s.skip_count);
    CHECK(r->stream_count == s.stream_count);
    CHECK(r->like == s.like);
    CHECK(r->dislike == s.dislike);
  }

  auto ratings = map_ratings(table, RatingFunction::f3);
  std::ostringstream rout;
  write_ratings(ratings, rout);
  std::istringstream rin(rout.str());
  CHECK(read_ratings(rin) == ratings);
}
