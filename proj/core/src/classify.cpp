#include "replaygauge/classify.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>

#include "replaygauge/errors.hpp"
#include "replaygauge/io.hpp"

namespace replaygauge {

GnbModel fit_gnb(const std::vector<LabeledScore>& samples, double variance_floor) {
  double sum[2] = {0, 0};
  std::size_t count[2] = {0, 0};
  for (const auto& s : samples) {
    int c = s.label == Label::like ? 0 : 1;
    sum[c] += s.score;
    ++count[c];
  }
  if (count[0] == 0) throw MissingClass("no like samples");
  if (count[1] == 0) throw MissingClass("no dislike samples");

  double mean[2] = {sum[0] / static_cast<double>(count[0]),
                    sum[1] / static_cast<double>(count[1])};
  double ss[2] = {0, 0};
  for (const auto& s : samples) {
    int c = s.label == Label::like ? 0 : 1;
    double d = s.score - mean[c];
    ss[c] += d * d;
  }
  GnbModel model;
  model.mu_like = mean[0];
  model.mu_dislike = mean[1];
  model.var_like = std::max(ss[0] / static_cast<double>(count[0]), variance_floor);
  model.var_dislike = std::max(ss[1] / static_cast<double>(count[1]), variance_floor);
  model.prior_like =
      static_cast<double>(count[0]) / static_cast<double>(count[0] + count[1]);
  return model;
}

namespace {
double log_gaussian(double x, double mu, double var) {
  double d = x - mu;
  return -0.5 * std::log(2.0 * M_PI * var) - d * d / (2.0 * var);
}
}  // namespace

Classification classify(const GnbModel& model, double score) {
  double ll = std::log(model.prior_like) + log_gaussian(score, model.mu_like, model.var_like);
  double ld =
      std::log(1.0 - model.prior_like) + log_gaussian(score, model.mu_dislike, model.var_dislike);
  double hi = std::max(ll, ld);
  double el = std::exp(ll - hi), ed = std::exp(ld - hi);
  Classification out;
  out.posterior_like = el / (el + ed);
  out.posterior_dislike = ed / (el + ed);
  out.label = out.posterior_dislike > out.posterior_like ? Label::dislike : Label::like;
  return out;
}

ClassifierMetrics evaluate_classifier(const GnbModel& model,
                                      const std::vector<LabeledScore>& held_out) {
  // confusion[truth][predicted], 0 = like, 1 = dislike
  std::size_t confusion[2][2] = {{0, 0}, {0, 0}};
  for (const auto& s : held_out) {
    int truth = s.label == Label::like ? 0 : 1;
    int pred = classify(model, s.score).label == Label::like ? 0 : 1;
    ++confusion[truth][pred];
  }
  auto ratio = [](std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
  };
  ClassifierMetrics m;
  m.precision_like = ratio(confusion[0][0], confusion[0][0] + confusion[1][0]);
  m.recall_like = ratio(confusion[0][0], confusion[0][0] + confusion[0][1]);
  m.precision_dislike = ratio(confusion[1][1], confusion[1][1] + confusion[0][1]);
  m.recall_dislike = ratio(confusion[1][1], confusion[1][1] + confusion[1][0]);
  return m;
}

void save_gnb(const GnbModel& model, std::ostream& out) {
  KeyValueList kv;
  kv.emplace_back("mu_like", format_double(model.mu_like));
  kv.emplace_back("var_like", format_double(model.var_like));
  kv.emplace_back("mu_dislike", format_double(model.mu_dislike));
  kv.emplace_back("var_dislike", format_double(model.var_dislike));
  kv.emplace_back("prior_like", format_double(model.prior_like));
  kv.emplace_back("version", "1");
  write_key_values(out, kv);
}

GnbModel load_gnb(std::istream& in) {
  std::map<std::string, std::string> kv;
  for (auto& [k, v] : read_key_values(in)) kv[k] = v;
  if (kv["version"] != "1") throw MalformedRow("unsupported classifier version");
  GnbModel m;
  m.mu_like = parse_double_strict(kv.at("mu_like"));
  m.var_like = parse_double_strict(kv.at("var_like"));
  m.mu_dislike = parse_double_strict(kv.at("mu_dislike"));
  m.var_dislike = parse_double_strict(kv.at("var_dislike"));
  m.prior_like = parse_double_strict(kv.at("prior_like"));
  return m;
}

}  // namespace replaygauge
