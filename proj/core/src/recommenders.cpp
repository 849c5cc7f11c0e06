#include "replaygauge/recommenders.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <unordered_map>

#include "replaygauge/errors.hpp"
#include "replaygauge/io.hpp"
#include "replaygauge/rng.hpp"

namespace replaygauge {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void sort_scored(std::vector<ScoredTrack>& v) {
  std::sort(v.begin(), v.end(), [](const ScoredTrack& a, const ScoredTrack& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.track < b.track;
  });
}

// In-place Cholesky solve of A x = b for symmetric positive definite A (k x k,
// row-major). A and b are clobbered; the solution lands in b.
void cholesky_solve(std::vector<double>& a, std::vector<double>& b, int k) {
  for (int j = 0; j < k; ++j) {
    double d = a[j * k + j];
    for (int p = 0; p < j; ++p) d -= a[j * k + p] * a[j * k + p];
    d = std::sqrt(d);
    a[j * k + j] = d;
    for (int i = j + 1; i < k; ++i) {
      double s = a[i * k + j];
      for (int p = 0; p < j; ++p) s -= a[i * k + p] * a[j * k + p];
      a[i * k + j] = s / d;
    }
  }
  for (int i = 0; i < k; ++i) {  // L y = b
    double s = b[i];
    for (int p = 0; p < i; ++p) s -= a[i * k + p] * b[p];
    b[i] = s / a[i * k + i];
  }
  for (int i = k - 1; i >= 0; --i) {  // L^T x = y
    double s = b[i];
    for (int p = i + 1; p < k; ++p) s -= a[p * k + i] * b[p];
    b[i] = s / a[i * k + i];
  }
}

}  // namespace

PopularityModel train_popularity(const InteractionMatrix& matrix) {
  std::map<TrackId, double> listeners;
  for (const auto& [_, row] : matrix.rows())
    for (const auto& [t, __] : row) listeners[t] += 1.0;
  PopularityModel model;
  model.ranked_tracks.reserve(listeners.size());
  for (const auto& [t, n] : listeners) model.ranked_tracks.push_back({t, n});
  sort_scored(model.ranked_tracks);
  return model;
}

double tanimoto(const std::vector<TrackId>& a, const std::vector<TrackId>& b) {
  if (a.empty() && b.empty()) return 0.0;
  std::size_t i = 0, j = 0, inter = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) {
      ++inter;
      ++i;
      ++j;
    } else if (a[i] < b[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  std::size_t uni = a.size() + b.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

KnnModel train_user_knn(const InteractionMatrix& matrix, int neighborhood_size) {
  if (neighborhood_size < 1) throw InvalidHyperparameter("neighborhood_size must be >= 1");
  if (!matrix.is_binary()) throw NonBinaryMatrix("train_user_knn requires binary input");
  KnnModel model;
  model.matrix = matrix;
  model.neighborhood_size = neighborhood_size;
  for (const auto& [u, row] : matrix.rows())
    for (const auto& [t, _] : row) model.track_users[t].push_back(u);
  return model;
}

RecommendationList recommend_knn(const KnnModel& model, UserId user, int n,
                                 const std::set<TrackId>& exclude) {
  if (n < 1) throw InvalidHyperparameter("n must be >= 1");
  const auto* row = model.matrix.row(user);
  if (!row) throw UnknownUser(std::to_string(user));

  // Intersection counts against every user sharing at least one track.
  std::unordered_map<UserId, std::size_t> inter;
  for (const auto& [t, _] : *row) {
    auto it = model.track_users.find(t);
    if (it == model.track_users.end()) continue;
    for (UserId v : it->second)
      if (v != user) ++inter[v];
  }
  struct Neighbor {
    UserId id;
    double sim;
  };
  std::vector<Neighbor> neighbors;
  neighbors.reserve(inter.size());
  std::size_t na = row->size();
  for (const auto& [v, cnt] : inter) {
    std::size_t nb = model.matrix.row(v)->size();
    double sim = static_cast<double>(cnt) / static_cast<double>(na + nb - cnt);
    neighbors.push_back({v, sim});
  }
  std::sort(neighbors.begin(), neighbors.end(), [](const Neighbor& a, const Neighbor& b) {
    if (a.sim != b.sim) return a.sim > b.sim;
    return a.id < b.id;
  });
  if (neighbors.size() > static_cast<std::size_t>(model.neighborhood_size))
    neighbors.resize(static_cast<std::size_t>(model.neighborhood_size));

  // Accumulate in neighbor-rank order so scores are reproducible bit-for-bit.
  std::map<TrackId, double> scores;
  for (const auto& nb : neighbors) {
    for (const auto& [t, _] : *model.matrix.row(nb.id)) {
      if (exclude.count(t)) continue;
      scores[t] += nb.sim;
    }
  }
  RecommendationList out;
  out.user = user;
  out.items.reserve(scores.size());
  for (const auto& [t, s] : scores) out.items.push_back({t, s});
  sort_scored(out.items);
  if (out.items.size() > static_cast<std::size_t>(n))
    out.items.resize(static_cast<std::size_t>(n));
  return out;
}

namespace {

void validate_sgd(const SgdHyperparams& hp) {
  if (hp.factors < 1) throw InvalidHyperparameter("factors must be >= 1");
  if (hp.epochs < 0) throw InvalidHyperparameter("epochs must be >= 0");
  if (!(hp.learning_rate > 0)) throw InvalidHyperparameter("learning_rate must be > 0");
  if (hp.regularization < 0) throw InvalidHyperparameter("regularization must be >= 0");
}

void validate_als(const AlsHyperparams& hp) {
  if (hp.factors < 1) throw InvalidHyperparameter("factors must be >= 1");
  if (hp.sweeps < 0) throw InvalidHyperparameter("sweeps must be >= 0");
  if (!(hp.regularization > 0)) throw InvalidHyperparameter("regularization must be > 0");
  if (!(hp.confidence_weight > 0)) throw InvalidHyperparameter("confidence_weight must be > 0");
}

std::vector<double> init_factors(Rng& rng, int k) {
  std::vector<double> f(static_cast<std::size_t>(k));
  for (auto& v : f) v = rng.next_double() * 0.1 - 0.05;
  return f;
}

}  // namespace

FactorModel train_mf_sgd(const std::vector<RatingTriple>& ratings, const SgdHyperparams& hp) {
  validate_sgd(hp);
  if (ratings.empty()) throw EmptyRatings("train_mf_sgd");

  FactorModel model;
  model.kind = FactorKind::sgd;
  model.factors = hp.factors;
  model.sgd = hp;

  double sum = 0;
  for (const auto& r : ratings) sum += r.rating;
  model.global_mean = sum / static_cast<double>(ratings.size());

  // Seeded init, users in sorted id order, then items.
  for (const auto& r : ratings) {
    model.user_factors.try_emplace(r.user);
    model.item_factors.try_emplace(r.track);
  }
  Rng rng(mix_seed(hp.seed, 0x73676400ULL));
  for (auto& [_, f] : model.user_factors) f = init_factors(rng, hp.factors);
  for (auto& [_, f] : model.item_factors) f = init_factors(rng, hp.factors);

  std::vector<std::size_t> order(ratings.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  const double eta = hp.learning_rate, lambda = hp.regularization;
  for (int epoch = 0; epoch < hp.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t idx : order) {
      const auto& r = ratings[idx];
      auto& p = model.user_factors[r.user];
      auto& q = model.item_factors[r.track];
      double err = r.rating - (model.global_mean + dot(p, q));
      for (int f = 0; f < hp.factors; ++f) {
        double pf = p[f], qf = q[f];
        p[f] += eta * (err * qf - lambda * pf);
        q[f] += eta * (err * pf - lambda * qf);
      }
    }
  }
  return model;
}

double predict_rating(const FactorModel& model, UserId user, TrackId track) {
  auto ui = model.user_factors.find(user);
  auto ti = model.item_factors.find(track);
  double base = model.kind == FactorKind::sgd ? model.global_mean : 0.0;
  if (ui == model.user_factors.end() || ti == model.item_factors.end()) return base;
  return base + dot(ui->second, ti->second);
}

double sgd_objective(const std::vector<RatingTriple>& ratings, const FactorModel& model) {
  const double lambda = model.sgd.regularization;
  double obj = 0;
  for (const auto& r : ratings) {
    const auto& p = model.user_factors.at(r.user);
    const auto& q = model.item_factors.at(r.track);
    double err = r.rating - (model.global_mean + dot(p, q));
    obj += err * err + lambda * (dot(p, p) + dot(q, q));
  }
  return obj;
}

std::vector<double> sgd_gradient(const std::vector<RatingTriple>& ratings,
                                 const FactorModel& model) {
  const double lambda = model.sgd.regularization;
  const int k = model.factors;
  std::map<UserId, std::vector<double>> gu;
  std::map<TrackId, std::vector<double>> gi;
  for (const auto& [u, _] : model.user_factors) gu[u].assign(static_cast<std::size_t>(k), 0.0);
  for (const auto& [t, _] : model.item_factors) gi[t].assign(static_cast<std::size_t>(k), 0.0);
  for (const auto& r : ratings) {
    const auto& p = model.user_factors.at(r.user);
    const auto& q = model.item_factors.at(r.track);
    double err = r.rating - (model.global_mean + dot(p, q));
    auto& du = gu[r.user];
    auto& di = gi[r.track];
    for (int f = 0; f < k; ++f) {
      du[f] += -2.0 * err * q[f] + 2.0 * lambda * p[f];
      di[f] += -2.0 * err * p[f] + 2.0 * lambda * q[f];
    }
  }
  std::vector<double> flat;
  flat.reserve((gu.size() + gi.size()) * static_cast<std::size_t>(k));
  for (const auto& [_, g] : gu) flat.insert(flat.end(), g.begin(), g.end());
  for (const auto& [_, g] : gi) flat.insert(flat.end(), g.begin(), g.end());
  return flat;
}

FactorModel train_als_implicit(const InteractionMatrix& counts, const AlsHyperparams& hp,
                               const AlsObserver& observer) {
  validate_als(hp);
  for (const auto& [_, row] : counts.rows())
    for (const auto& [t, v] : row)
      if (v < 0) throw NegativeCounts("track " + std::to_string(t));

  FactorModel model;
  model.kind = FactorKind::als;
  model.factors = hp.factors;
  model.als = hp;

  auto users = counts.users();
  auto tracks = counts.tracks();
  Rng rng(mix_seed(hp.seed, 0x616c7300ULL));
  for (UserId u : users) model.user_factors[u] = init_factors(rng, hp.factors);
  for (TrackId t : tracks) model.item_factors[t] = init_factors(rng, hp.factors);

  const int k = hp.factors;
  const double lambda = hp.regularization;
  const double alpha = hp.confidence_weight;

  auto gram = [k](const std::map<std::int64_t, std::vector<double>>& factors) {
    std::vector<double> g(static_cast<std::size_t>(k) * k, 0.0);
    for (const auto& [_, f] : factors)
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) g[i * k + j] += f[i] * f[j];
    return g;
  };

  // One least-squares solve per row of the side being updated.
  auto half_sweep = [&](std::map<std::int64_t, std::vector<double>>& solve_side,
                        const std::map<std::int64_t, std::vector<double>>& fixed_side,
                        auto observed_of) {
    std::vector<double> gtg = gram(fixed_side);
    for (auto& [id, x] : solve_side) {
      std::vector<double> a = gtg;
      for (int i = 0; i < k; ++i) a[i * k + i] += lambda;
      std::vector<double> b(static_cast<std::size_t>(k), 0.0);
      for (const auto& [other, count] : observed_of(id)) {
        const auto& y = fixed_side.at(other);
        double extra = alpha * count;  // c - 1
        double c = 1.0 + extra;
        for (int i = 0; i < k; ++i) {
          b[i] += c * y[i];
          for (int j = 0; j < k; ++j) a[i * k + j] += extra * y[i] * y[j];
        }
      }
      cholesky_solve(a, b, k);
      x = b;
    }
  };

  // Column view for the item half-sweep.
  std::map<TrackId, std::vector<std::pair<UserId, double>>> by_track;
  for (const auto& [u, row] : counts.rows())
    for (const auto& [t, v] : row) by_track[t].push_back({u, v});

  for (int sweep = 0; sweep < hp.sweeps; ++sweep) {
    half_sweep(model.user_factors, model.item_factors,
               [&](UserId u) -> const InteractionMatrix::Row& { return *counts.row(u); });
    if (observer) observer(model);
    half_sweep(model.item_factors, model.user_factors,
               [&](TrackId t) -> const std::vector<std::pair<UserId, double>>& {
                 return by_track[t];
               });
    if (observer) observer(model);
  }
  return model;
}

double als_objective(const InteractionMatrix& counts, const FactorModel& model) {
  const double alpha = model.als.confidence_weight;
  const double lambda = model.als.regularization;
  double obj = 0;
  // Sum over every (user, item) cell; unobserved cells have c = 1, p = 0.
  for (const auto& [u, x] : model.user_factors) {
    const auto* row = counts.row(u);
    for (const auto& [t, y] : model.item_factors) {
      double pred = dot(x, y);
      double count = 0;
      if (row) {
        auto it = row->find(t);
        if (it != row->end()) count = it->second;
      }
      double pref = count > 0 ? 1.0 : 0.0;
      double c = 1.0 + alpha * count;
      double err = pref - pred;
      obj += c * err * err;
    }
    obj += lambda * dot(x, x);
  }
  for (const auto& [_, y] : model.item_factors) obj += lambda * dot(y, y);
  return obj;
}

RecommendationList recommend_scores(const PopularityModel& model, UserId user, int n,
                                    const std::set<TrackId>& exclude) {
  if (n < 1) throw InvalidHyperparameter("n must be >= 1");
  RecommendationList out;
  out.user = user;
  for (const auto& st : model.ranked_tracks) {
    if (exclude.count(st.track)) continue;
    out.items.push_back(st);
    if (out.items.size() == static_cast<std::size_t>(n)) break;
  }
  return out;
}

RecommendationList recommend_scores(const FactorModel& model, UserId user, int n,
                                    const std::set<TrackId>& exclude, bool strict) {
  if (n < 1) throw InvalidHyperparameter("n must be >= 1");
  if (strict && !model.user_factors.count(user)) throw UnknownUser(std::to_string(user));
  RecommendationList out;
  out.user = user;
  out.items.reserve(model.item_factors.size());
  for (const auto& [t, _] : model.item_factors) {
    if (exclude.count(t)) continue;
    out.items.push_back({t, predict_rating(model, user, t)});
  }
  sort_scored(out.items);
  if (out.items.size() > static_cast<std::size_t>(n))
    out.items.resize(static_cast<std::size_t>(n));
  return out;
}

// ---- persistence ----

namespace {

constexpr const char* kFormatLine = "format=replaygauge-model";

void write_header(std::ostream& out, const char* kind) {
  out << kFormatLine << "\nkind=" << kind << "\nversion=1\n";
}

std::map<std::string, std::string> read_header(std::istream& in, std::vector<std::string>* rest) {
  std::map<std::string, std::string> header;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line == "---") break;
    auto pos = line.find('=');
    if (pos == std::string::npos) throw MalformedRow("model header: '" + line + "'");
    header[line.substr(0, pos)] = line.substr(pos + 1);
  }
  if (rest) {
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) rest->push_back(line);
    }
  }
  if (header["format"] != "replaygauge-model") throw MalformedRow("not a replaygauge model file");
  if (header["version"] != "1") throw MalformedRow("unsupported model version");
  return header;
}

void write_factor_rows(std::ostream& out, const std::map<std::int64_t, std::vector<double>>& m) {
  for (const auto& [id, f] : m) {
    out << id;
    for (double v : f) out << ',' << format_double(v);
    out << '\n';
  }
}

}  // namespace

void save_model(const PopularityModel& model, std::ostream& out) {
  write_header(out, "popularity");
  out << "tracks=" << model.ranked_tracks.size() << "\n---\n";
  for (const auto& st : model.ranked_tracks)
    out << st.track << ',' << format_double(st.score) << '\n';
}

void save_model(const KnnModel& model, std::ostream& out) {
  write_header(out, "knn");
  out << "neighborhood_size=" << model.neighborhood_size
      << "\nentries=" << model.matrix.nonzero_count() << "\n---\n";
  for (const auto& [u, row] : model.matrix.rows())
    for (const auto& [t, v] : row) out << u << ',' << t << ',' << format_double(v) << '\n';
}

void save_model(const FactorModel& model, std::ostream& out) {
  write_header(out, model.kind == FactorKind::sgd ? "mf_sgd" : "als");
  out << "factors=" << model.factors << '\n';
  if (model.kind == FactorKind::sgd) {
    out << "global_mean=" << format_double(model.global_mean) << '\n';
    out << "epochs=" << model.sgd.epochs << '\n';
    out << "regularization=" << format_double(model.sgd.regularization) << '\n';
    out << "learning_rate=" << format_double(model.sgd.learning_rate) << '\n';
    out << "seed=" << model.sgd.seed << '\n';
  } else {
    out << "sweeps=" << model.als.sweeps << '\n';
    out << "regularization=" << format_double(model.als.regularization) << '\n';
    out << "confidence_weight=" << format_double(model.als.confidence_weight) << '\n';
    out << "seed=" << model.als.seed << '\n';
  }
  out << "users=" << model.user_factors.size() << '\n';
  out << "items=" << model.item_factors.size() << '\n';
  out << "---\n";
  write_factor_rows(out, model.user_factors);
  write_factor_rows(out, model.item_factors);
}

PopularityModel load_popularity_model(std::istream& in) {
  std::vector<std::string> rows;
  auto header = read_header(in, &rows);
  if (header["kind"] != "popularity") throw MalformedRow("expected popularity model");
  PopularityModel model;
  for (const auto& line : rows) {
    auto f = split_csv(line);
    if (f.size() != 2) throw MalformedRow("popularity row: '" + line + "'");
    model.ranked_tracks.push_back({parse_int64(f[0]), parse_double_strict(f[1])});
  }
  return model;
}

KnnModel load_knn_model(std::istream& in) {
  std::vector<std::string> rows;
  auto header = read_header(in, &rows);
  if (header["kind"] != "knn") throw MalformedRow("expected knn model");
  InteractionMatrix m;
  for (const auto& line : rows) {
    auto f = split_csv(line);
    if (f.size() != 3) throw MalformedRow("knn row: '" + line + "'");
    m.add(parse_int64(f[0]), parse_int64(f[1]), parse_double_strict(f[2]));
  }
  return train_user_knn(m, static_cast<int>(parse_int64(header.at("neighborhood_size"))));
}

FactorModel load_factor_model(std::istream& in) {
  std::vector<std::string> rows;
  auto header = read_header(in, &rows);
  FactorModel model;
  if (header["kind"] == "mf_sgd") {
    model.kind = FactorKind::sgd;
    model.global_mean = parse_double_strict(header.at("global_mean"));
    model.sgd.epochs = static_cast<int>(parse_int64(header.at("epochs")));
    model.sgd.regularization = parse_double_strict(header.at("regularization"));
    model.sgd.learning_rate = parse_double_strict(header.at("learning_rate"));
    model.sgd.seed = static_cast<std::uint64_t>(parse_int64(header.at("seed")));
  } else if (header["kind"] == "als") {
    model.kind = FactorKind::als;
    model.als.sweeps = static_cast<int>(parse_int64(header.at("sweeps")));
    model.als.regularization = parse_double_strict(header.at("regularization"));
    model.als.confidence_weight = parse_double_strict(header.at("confidence_weight"));
    model.als.seed = static_cast<std::uint64_t>(parse_int64(header.at("seed")));
  } else {
    throw MalformedRow("expected factor model, got kind=" + header["kind"]);
  }
  model.factors = static_cast<int>(parse_int64(header.at("factors")));
  if (model.kind == FactorKind::sgd)
    model.sgd.factors = model.factors;
  else
    model.als.factors = model.factors;
  auto n_users = static_cast<std::size_t>(parse_int64(header.at("users")));
  if (rows.size() != n_users + static_cast<std::size_t>(parse_int64(header.at("items"))))
    throw MalformedRow("factor row count mismatch");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto f = split_csv(rows[i]);
    if (f.size() != static_cast<std::size_t>(model.factors) + 1)
      throw MalformedRow("factor row: '" + rows[i] + "'");
    std::vector<double> vec(static_cast<std::size_t>(model.factors));
    for (int j = 0; j < model.factors; ++j) vec[static_cast<std::size_t>(j)] = parse_double_strict(f[static_cast<std::size_t>(j) + 1]);
    if (i < n_users)
      model.user_factors[parse_int64(f[0])] = std::move(vec);
    else
      model.item_factors[parse_int64(f[0])] = std::move(vec);
  }
  return model;
}

std::string peek_model_kind(std::istream& in) {
  std::string line, kind;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line == "---") break;
    if (line.rfind("kind=", 0) == 0) {
      kind = line.substr(5);
      break;
    }
  }
  in.clear();
  in.seekg(0);
  if (kind.empty()) throw MalformedRow("model file has no kind header");
  return kind;
}

}  // namespace replaygauge
