#include "replaygauge/matrix.hpp"

namespace replaygauge {

void InteractionMatrix::add(UserId user, TrackId track, double value) {
  if (value == 0.0) return;
  auto& row = rows_[user];
  auto [it, inserted] = row.try_emplace(track, value);
  if (!inserted) {
    it->second += value;
    if (it->second == 0.0) row.erase(it);
  }
  track_set_.insert(track);
  if (rows_[user].empty()) rows_.erase(user);
}

const InteractionMatrix::Row* InteractionMatrix::row(UserId user) const {
  auto it = rows_.find(user);
  return it == rows_.end() ? nullptr : &it->second;
}

std::vector<UserId> InteractionMatrix::users() const {
  std::vector<UserId> out;
  out.reserve(rows_.size());
  for (const auto& [u, _] : rows_) out.push_back(u);
  return out;
}

std::vector<TrackId> InteractionMatrix::tracks() const {
  return {track_set_.begin(), track_set_.end()};
}

std::size_t InteractionMatrix::nonzero_count() const {
  std::size_t n = 0;
  for (const auto& [_, row] : rows_) n += row.size();
  return n;
}

bool InteractionMatrix::is_binary() const {
  for (const auto& [_, row] : rows_)
    for (const auto& [__, v] : row)
      if (v != 1.0) return false;
  return true;
}

}  // namespace replaygauge
