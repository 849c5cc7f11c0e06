#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <utility>
#include <vector>

#include "replaygauge/eventlog.hpp"
#include "replaygauge/types.hpp"

namespace replaygauge {

// Seeded synthetic listening-log generator. Users and tracks carry latent
// genre vectors; the cosine of a (user, track) pair is its affinity in [0,1].
// Low-affinity pairs mostly skip, high-affinity pairs stream fully and replay.
struct GeneratorConfig {
  int user_count = 2000;
  int track_count = 5000;
  int genre_count = 12;
  double events_per_user_mean = 220;  // base picks; replays add more events
  double dislike_threshold = 0.65;    // affinity below: pair is disliked
  double like_threshold = 0.78;       // affinity at or above: pair is liked
  double skip_probability_given_dislike = 0.92;
  double replay_rate_given_like = 0.40;  // geometric continuation probability
  double sampling_sharpness = 3.5;       // track weight = affinity^sharpness
  double track_length_mean = 210;        // seconds; Gaussian, clipped below
  double track_length_stddev = 30;
  std::int64_t track_length_min = 90;
  std::int64_t track_length_max = 420;
  std::uint64_t seed = 1;
};

class GroundTruth {
 public:
  // Affinity for any pair, computed from the latent vectors.
  double affinity(UserId user, TrackId track) const;
  bool liked(UserId user, TrackId track) const;
  std::int64_t track_length(TrackId track) const;

  // Pairs that actually produced events, with their sampled affinity.
  const std::map<std::pair<UserId, TrackId>, double>& generated_pairs() const {
    return generated_;
  }

  // CSV `user,track,affinity,liked` over generated pairs.
  void write_csv(std::ostream& out) const;

 private:
  friend std::pair<EventLog, GroundTruth> generate(const GeneratorConfig&);
  std::vector<std::vector<double>> user_vectors_;
  std::vector<std::vector<double>> track_vectors_;
  std::vector<std::int64_t> track_lengths_;
  std::map<std::pair<UserId, TrackId>, double> generated_;
  double like_threshold_ = 0;
};

// Deterministic under a fixed config. Throws InvalidConfig.
std::pair<EventLog, GroundTruth> generate(const GeneratorConfig& config);

// Mean ground-truth affinity over top-k recommended pairs, averaged across
// users with non-empty lists. Returns -1 when every list is empty.
double validate_against_truth(const std::map<UserId, std::vector<TrackId>>& per_user_recs,
                              const GroundTruth& truth, int k);

// key=value dump of every parameter plus the seed (`generator.meta`).
void write_generator_meta(const GeneratorConfig& config, std::ostream& out);

}  // namespace replaygauge
