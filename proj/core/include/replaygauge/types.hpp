#pragma once

#include <compare>
#include <cstdint>

namespace replaygauge {

using UserId = std::int64_t;
using TrackId = std::int64_t;

// One row of a listening log: user u played track i for `duration` seconds
// starting at `timestamp` (epoch seconds).
struct ListeningEvent {
  UserId user = 0;
  TrackId track = 0;
  std::int64_t duration = 0;
  std::int64_t timestamp = 0;

  friend auto operator<=>(const ListeningEvent&, const ListeningEvent&) = default;
};

struct RatingTriple {
  UserId user = 0;
  TrackId track = 0;
  int rating = 0;  // 1..5

  friend auto operator<=>(const RatingTriple&, const RatingTriple&) = default;
};

}  // namespace replaygauge
