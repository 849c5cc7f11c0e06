#include "replaygauge/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>

#include "replaygauge/errors.hpp"
#include "replaygauge/signals.hpp"
#include "replaygauge/io.hpp"
#include "replaygauge/rng.hpp"

namespace replaygauge {

namespace {

void validate(const GeneratorConfig& c) {
  if (c.user_count < 1 || c.track_count < 1 || c.genre_count < 1)
    throw InvalidConfig("counts must be >= 1");
  if (!(c.events_per_user_mean > 0)) throw InvalidConfig("events_per_user_mean must be > 0");
  if (c.skip_probability_given_dislike < 0 || c.skip_probability_given_dislike > 1)
    throw InvalidConfig("skip_probability_given_dislike must be in [0,1]");
  if (c.replay_rate_given_like < 0 || c.replay_rate_given_like > 1)
    throw InvalidConfig("replay_rate_given_like must be in [0,1]");
  if (!(c.track_length_stddev > 0)) throw InvalidConfig("track_length_stddev must be > 0");
  if (!(c.dislike_threshold >= 0 && c.like_threshold <= 1 &&
        c.dislike_threshold < c.like_threshold))
    throw InvalidConfig("need 0 <= dislike_threshold < like_threshold <= 1");
  if (c.track_length_min < kStreamThresholdSeconds)
    throw InvalidConfig("track_length_min must be at least 30");
  if (c.track_length_min > c.track_length_max)
    throw InvalidConfig("track_length_min > track_length_max");
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0 || nb == 0) return 0;
  return dot / std::sqrt(na * nb);
}

// Sharpened nonnegative genre weights; most mass on a few genres.
std::vector<double> user_genre_vector(Rng& rng, int genres) {
  std::vector<double> v(static_cast<std::size_t>(genres));
  for (auto& x : v) {
    double u = rng.next_double();
    x = u * u * u;
  }
  return v;
}

std::vector<double> track_genre_vector(Rng& rng, int genres) {
  std::vector<double> v(static_cast<std::size_t>(genres));
  auto main_genre = static_cast<std::size_t>(rng.next_below(static_cast<std::uint64_t>(genres)));
  for (auto& x : v) {
    double u = rng.next_double();
    x = 0.25 * u * u;
  }
  v[main_genre] = 0.6 + 0.4 * rng.next_double();
  return v;
}

}  // namespace

double GroundTruth::affinity(UserId user, TrackId track) const {
  if (user < 1 || static_cast<std::size_t>(user) > user_vectors_.size())
    throw UnknownUser(std::to_string(user));
  if (track < 1 || static_cast<std::size_t>(track) > track_vectors_.size())
    throw UnknownUser("track " + std::to_string(track));
  auto it = generated_.find({user, track});
  if (it != generated_.end()) return it->second;
  return cosine(user_vectors_[static_cast<std::size_t>(user - 1)],
                track_vectors_[static_cast<std::size_t>(track - 1)]);
}

bool GroundTruth::liked(UserId user, TrackId track) const {
  return affinity(user, track) >= like_threshold_;
}

std::int64_t GroundTruth::track_length(TrackId track) const {
  if (track < 1 || static_cast<std::size_t>(track) > track_lengths_.size())
    throw UnknownUser("track " + std::to_string(track));
  return track_lengths_[static_cast<std::size_t>(track - 1)];
}

void GroundTruth::write_csv(std::ostream& out) const {
  out << "user,track,affinity,liked\n";
  for (const auto& [key, aff] : generated_)
    out << key.first << ',' << key.second << ',' << format_double(aff) << ','
        << (aff >= like_threshold_ ? 1 : 0) << '\n';
}

std::pair<EventLog, GroundTruth> generate(const GeneratorConfig& config) {
  validate(config);
  GroundTruth truth;
  truth.like_threshold_ = config.like_threshold;

  // Track catalog from the master stream; user data from per-user streams so
  // one user's events do not depend on another's draws.
  Rng master(mix_seed(config.seed, 0x747261636bULL));
  truth.track_vectors_.reserve(static_cast<std::size_t>(config.track_count));
  truth.track_lengths_.reserve(static_cast<std::size_t>(config.track_count));
  for (int t = 0; t < config.track_count; ++t) {
    truth.track_vectors_.push_back(track_genre_vector(master, config.genre_count));
    auto len = static_cast<std::int64_t>(
        std::lround(master.next_gaussian(config.track_length_mean, config.track_length_stddev)));
    len = std::clamp(len, config.track_length_min, config.track_length_max);
    truth.track_lengths_.push_back(len);
  }

  std::vector<ListeningEvent> events;
  events.reserve(static_cast<std::size_t>(config.events_per_user_mean) *
                 static_cast<std::size_t>(config.user_count));
  truth.user_vectors_.resize(static_cast<std::size_t>(config.user_count));

  constexpr std::int64_t kEpochBase = 1600000000;
  for (int ui = 0; ui < config.user_count; ++ui) {
    UserId user = ui + 1;
    Rng rng(mix_seed(config.seed, static_cast<std::uint64_t>(user)));
    auto& uvec = truth.user_vectors_[static_cast<std::size_t>(ui)];
    uvec = user_genre_vector(rng, config.genre_count);

    // Track sampling weights: softened affinity with a small floor so every
    // track keeps support.
    std::vector<double> cum(static_cast<std::size_t>(config.track_count));
    std::vector<double> affinities(static_cast<std::size_t>(config.track_count));
    double total = 0;
    for (int t = 0; t < config.track_count; ++t) {
      double aff = cosine(uvec, truth.track_vectors_[static_cast<std::size_t>(t)]);
      affinities[static_cast<std::size_t>(t)] = aff;
      total += 0.01 + std::pow(aff, config.sampling_sharpness);
      cum[static_cast<std::size_t>(t)] = total;
    }

    int n_base = rng.next_poisson(config.events_per_user_mean);
    std::int64_t now = kEpochBase + user;
    std::set<TrackId> replayed;  // liked pairs that already got their replay burst
    for (int e = 0; e < n_base; ++e) {
      double draw = rng.next_double() * total;
      auto idx = static_cast<std::size_t>(
          std::lower_bound(cum.begin(), cum.end(), draw) - cum.begin());
      if (idx >= cum.size()) idx = cum.size() - 1;
      TrackId track = static_cast<TrackId>(idx) + 1;
      double aff = affinities[idx];
      std::int64_t len = truth.track_lengths_[idx];
      truth.generated_[{user, track}] = aff;

      auto emit = [&](std::int64_t duration) {
        events.push_back({user, track, duration, now});
        now += duration + rng.next_int(1, 30);
      };

      if (aff >= config.like_threshold) {
        emit(len);
        if (!replayed.count(track)) {
          replayed.insert(track);
          // at least one replay, then geometric continuation, so a liked pair
          // reaches two streams even if it is never sampled again
          do {
            emit(len);
          } while (rng.next_double() < config.replay_rate_given_like);
        }
      } else if (aff < config.dislike_threshold) {
        if (rng.next_double() < config.skip_probability_given_dislike)
          emit(rng.next_int(1, kStreamThresholdSeconds - 1));
        else
          emit(rng.next_int(kStreamThresholdSeconds, len));
      } else {
        emit(rng.next_int(kStreamThresholdSeconds, len));
      }
    }
  }
  return {EventLog(std::move(events)), std::move(truth)};
}

double validate_against_truth(const std::map<UserId, std::vector<TrackId>>& per_user_recs,
                              const GroundTruth& truth, int k) {
  if (k < 1) throw InvalidHyperparameter("k must be >= 1");
  double sum = 0;
  int users = 0;
  for (const auto& [user, recs] : per_user_recs) {
    if (recs.empty()) continue;
    std::size_t limit = std::min<std::size_t>(recs.size(), static_cast<std::size_t>(k));
    double s = 0;
    for (std::size_t i = 0; i < limit; ++i) s += truth.affinity(user, recs[i]);
    sum += s / static_cast<double>(limit);
    ++users;
  }
  return users == 0 ? -1.0 : sum / users;
}

void write_generator_meta(const GeneratorConfig& c, std::ostream& out) {
  KeyValueList kv;
  kv.emplace_back("user_count", std::to_string(c.user_count));
  kv.emplace_back("track_count", std::to_string(c.track_count));
  kv.emplace_back("genre_count", std::to_string(c.genre_count));
  kv.emplace_back("events_per_user_mean", format_double(c.events_per_user_mean));
  kv.emplace_back("dislike_threshold", format_double(c.dislike_threshold));
  kv.emplace_back("like_threshold", format_double(c.like_threshold));
  kv.emplace_back("skip_probability_given_dislike",
                  format_double(c.skip_probability_given_dislike));
  kv.emplace_back("replay_rate_given_like", format_double(c.replay_rate_given_like));
  kv.emplace_back("sampling_sharpness", format_double(c.sampling_sharpness));
  kv.emplace_back("track_length_mean", format_double(c.track_length_mean));
  kv.emplace_back("track_length_stddev", format_double(c.track_length_stddev));
  kv.emplace_back("track_length_min", std::to_string(c.track_length_min));
  kv.emplace_back("track_length_max", std::to_string(c.track_length_max));
  kv.emplace_back("seed", std::to_string(c.seed));
  kv.emplace_back("format_version", "1");
  write_key_values(out, kv);
}

}  // namespace replaygauge
