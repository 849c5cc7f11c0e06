#pragma once

#include <iosfwd>
#include <vector>

namespace replaygauge {

enum class Label { like, dislike };

struct LabeledScore {
  double score = 0;  // an estimated rating
  Label label = Label::like;
};

// One-dimensional Gaussian naive Bayes over estimated ratings.
struct GnbModel {
  double mu_like = 0;
  double var_like = 1;
  double mu_dislike = 0;
  double var_dislike = 1;
  double prior_like = 0.5;  // prior_dislike = 1 - prior_like
};

constexpr double kDefaultVarianceFloor = 1e-6;

// Class means, population variances (floored), and frequency priors.
// Throws MissingClass unless both classes are present.
GnbModel fit_gnb(const std::vector<LabeledScore>& samples,
                 double variance_floor = kDefaultVarianceFloor);

struct Classification {
  Label label = Label::like;
  double posterior_like = 0;
  double posterior_dislike = 0;  // the two sum to 1
};

// Densities evaluated in the log domain; dislike wins only on strictly
// greater posterior, so ties go to like.
Classification classify(const GnbModel& model, double score);

struct ClassifierMetrics {
  double precision_like = 0;
  double recall_like = 0;
  double precision_dislike = 0;
  double recall_dislike = 0;
};

ClassifierMetrics evaluate_classifier(const GnbModel& model,
                                      const std::vector<LabeledScore>& held_out);

// key=value persistence: mu_like, var_like, mu_dislike, var_dislike,
// prior_like, version.
void save_gnb(const GnbModel& model, std::ostream& out);
GnbModel load_gnb(std::istream& in);

}  // namespace replaygauge
