#pragma once

#include <map>
#include <set>
#include <vector>

#include "replaygauge/types.hpp"

namespace replaygauge {

// Sparse user-by-track matrix, row-major, no explicit zero entries.
class InteractionMatrix {
 public:
  using Row = std::map<TrackId, double>;  // sorted by track

  // Zero values are dropped; duplicate (user, track) adds are summed.
  void add(UserId user, TrackId track, double value);

  const Row* row(UserId user) const;
  const std::map<UserId, Row>& rows() const { return rows_; }

  std::vector<UserId> users() const;
  std::vector<TrackId> tracks() const;
  std::size_t user_count() const { return rows_.size(); }
  std::size_t track_count() const { return track_set_.size(); }
  std::size_t nonzero_count() const;

  bool is_binary() const;  // every stored value exactly 1

 private:
  std::map<UserId, Row> rows_;
  std::set<TrackId> track_set_;
};

}  // namespace replaygauge
