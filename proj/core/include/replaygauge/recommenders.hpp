#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "replaygauge/matrix.hpp"
#include "replaygauge/types.hpp"

namespace replaygauge {

struct ScoredTrack {
  TrackId track = 0;
  double score = 0;
};

struct RecommendationList {
  UserId user = 0;
  std::vector<ScoredTrack> items;
};

// ---- popularity ----

struct PopularityModel {
  // Sorted by (distinct-listener count desc, track id asc).
  std::vector<ScoredTrack> ranked_tracks;
};

PopularityModel train_popularity(const InteractionMatrix& matrix);

// ---- user-based KNN ----

// Intersection over union of two sorted track lists. 0 when both empty.
double tanimoto(const std::vector<TrackId>& a, const std::vector<TrackId>& b);

struct KnnModel {
  InteractionMatrix matrix;  // binary
  int neighborhood_size = 100;
  // Inverted index track -> users, cached at training time.
  std::map<TrackId, std::vector<UserId>> track_users;
};

KnnModel train_user_knn(const InteractionMatrix& matrix, int neighborhood_size);

// Neighbors: top neighborhood_size users by (Tanimoto desc, id asc), target and
// zero-similarity users excluded. score(i) = sum of neighbor similarities over
// neighbors holding i. Output: top n unexcluded tracks by (score desc, id asc).
RecommendationList recommend_knn(const KnnModel& model, UserId user, int n,
                                 const std::set<TrackId>& exclude);

// ---- matrix factorization ----

struct SgdHyperparams {
  int factors = 50;
  int epochs = 20;
  double regularization = 0.05;
  double learning_rate = 0.005;
  std::uint64_t seed = 1;
};

struct AlsHyperparams {
  int factors = 50;
  int sweeps = 20;
  double regularization = 0.07;
  double confidence_weight = 40.0;  // c = 1 + confidence_weight * count
  std::uint64_t seed = 1;
};

enum class FactorKind { sgd, als };

struct FactorModel {
  FactorKind kind = FactorKind::sgd;
  int factors = 0;
  double global_mean = 0;  // SGD variant only
  std::map<UserId, std::vector<double>> user_factors;
  std::map<TrackId, std::vector<double>> item_factors;
  SgdHyperparams sgd;
  AlsHyperparams als;
};

// Funk-style SGD on r_hat = mu + p_u . q_i with L2 regularization. Seeded
// uniform [-0.05, 0.05] init, per-epoch seeded example shuffle.
FactorModel train_mf_sgd(const std::vector<RatingTriple>& ratings, const SgdHyperparams& hp);

// r_hat = mu + p.q (SGD) or p.q (ALS). Cold start: mu (SGD) / 0 (ALS).
double predict_rating(const FactorModel& model, UserId user, TrackId track);

// Squared-error objective the SGD trainer descends:
//   sum over ratings of (r - r_hat)^2 + lambda (|p_u|^2 + |q_i|^2).
double sgd_objective(const std::vector<RatingTriple>& ratings, const FactorModel& model);

// Gradient of sgd_objective w.r.t. all user factors (sorted user order) then
// all item factors (sorted track order), flattened.
std::vector<double> sgd_gradient(const std::vector<RatingTriple>& ratings,
                                 const FactorModel& model);

using AlsObserver = std::function<void(const FactorModel&)>;

// Confidence-weighted implicit ALS (preference 1 iff count > 0, confidence
// 1 + alpha*count). The observer, when set, runs after every half-sweep.
FactorModel train_als_implicit(const InteractionMatrix& counts, const AlsHyperparams& hp,
                               const AlsObserver& observer = {});

// Full objective sum over all (user, item) cells plus regularization.
double als_objective(const InteractionMatrix& counts, const FactorModel& model);

// ---- uniform top-N ----

RecommendationList recommend_scores(const PopularityModel& model, UserId user, int n,
                                    const std::set<TrackId>& exclude);
RecommendationList recommend_scores(const FactorModel& model, UserId user, int n,
                                    const std::set<TrackId>& exclude, bool strict = false);

// ---- persistence (versioned text, round-trippable doubles) ----

void save_model(const PopularityModel& model, std::ostream& out);
void save_model(const KnnModel& model, std::ostream& out);
void save_model(const FactorModel& model, std::ostream& out);
PopularityModel load_popularity_model(std::istream& in);
KnnModel load_knn_model(std::istream& in);
FactorModel load_factor_model(std::istream& in);
std::string peek_model_kind(std::istream& in);  // reads the header, rewinds

}  // namespace replaygauge
