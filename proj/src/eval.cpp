#include "bigraph/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "bigraph/rng.hpp"

namespace bigraph {
namespace {

double sigmoid(double x) { return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }

// mean log-loss; probabilities clamped away from {0,1} for finiteness
double mean_log_loss(const Vec& margin, const std::vector<int>& y) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < margin.size(); ++i) {
    const double m = y[i] == 1 ? margin[i] : -margin[i];
    s += m > 0.0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m));
  }
  return s / static_cast<double>(margin.size());
}

}  // namespace

// -- logistic regression --------------------------------------------------------

double LogRegModel::predict_proba(const Vec& x) const {
  if (constant_prob) return *constant_prob;
  return sigmoid(weights.dot(x) + intercept);
}

Vec LogRegModel::predict_proba(const Mat& X) const {
  Vec out(X.rows());
  if (constant_prob) {
    out.setConstant(*constant_prob);
    return out;
  }
  const Vec margin = X * weights;
  for (Eigen::Index i = 0; i < X.rows(); ++i) out[i] = sigmoid(margin[i] + intercept);
  return out;
}

LogRegModel logreg_fit(const Mat& X, const std::vector<int>& y, const LogRegConfig& cfg) {
  const auto n = X.rows();
  const auto d = X.cols();
  if (n == 0 || static_cast<std::size_t>(n) != y.size())
    throw DataError("logreg_fit: bad shapes");
  if (cfg.C <= 0.0) throw DataError("logreg_fit: C must be positive");

  LogRegModel model;
  model.weights = Vec::Zero(d);

  const auto n_pos = std::count(y.begin(), y.end(), 1);
  if (n_pos == 0 || n_pos == n) {
    std::fprintf(stderr, "logreg_fit: single-class target, constant predictor\n");
    model.constant_prob = static_cast<double>(n_pos) / static_cast<double>(n);
    return model;
  }

  const double lambda = 1.0 / (cfg.C * static_cast<double>(n));
  Vec yv(n);
  for (Eigen::Index i = 0; i < n; ++i) yv[i] = static_cast<double>(y[i]);

  // Accelerated proximal gradient with backtracking. The momentum point is
  // reset whenever it would raise the objective, so the accepted iterates
  // decrease monotonically. Margins are carried between iterations: the
  // momentum margin is a linear combination of two known margin vectors,
  // leaving two n x d products per iteration (gradient and candidate).
  Vec w = Vec::Zero(d);
  double b = 0.0;
  Vec mw = Vec::Zero(n);  // X*w + b for the accepted iterate
  Vec wy = w, my = mw;
  double by = b;
  double t = 1.0;
  double step = 1.0;
  double obj = mean_log_loss(mw, y);  // w = 0 has no penalty term

  for (int iter = 0; iter < cfg.max_iter; ++iter) {
    const Vec p = my.unaryExpr([](double m) { return sigmoid(m); });
    const Vec resid = p - yv;
    const Vec gw = X.transpose() * resid / static_cast<double>(n);
    const double gb = resid.mean();
    const double f0 = mean_log_loss(my, y);

    // backtracking on the proximal step from the momentum point
    Vec w_next, m_next;
    double b_next, f_next;
    for (;;) {
      w_next = wy - step * gw;
      for (Eigen::Index j = 0; j < d; ++j) {
        const double thr = step * lambda;
        w_next[j] = w_next[j] > thr ? w_next[j] - thr
                                    : (w_next[j] < -thr ? w_next[j] + thr : 0.0);
      }
      b_next = by - step * gb;  // intercept unpenalized
      m_next = X * w_next + Vec::Constant(n, b_next);
      f_next = mean_log_loss(m_next, y);
      const Vec dw = w_next - wy;
      const double db = b_next - by;
      const double quad =
          f0 + gw.dot(dw) + gb * db + (dw.squaredNorm() + db * db) / (2.0 * step);
      if (f_next <= quad + 1e-12) break;
      step *= 0.5;
      if (step < 1e-12) break;
    }
    const double next_obj = f_next + lambda * w_next.lpNorm<1>();

    if (next_obj > obj && (wy - w).squaredNorm() + (by - b) * (by - b) > 0.0) {
      // momentum overshot: restart from the accepted iterate
      wy = w;
      by = b;
      my = mw;
      t = 1.0;
      continue;
    }

    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double beta = (t - 1.0) / t_next;
    wy = w_next + beta * (w_next - w);
    by = b_next + beta * (b_next - b);
    my = m_next + beta * (m_next - mw);
    const bool converged = std::abs(obj - next_obj) < cfg.tol;
    w = w_next;
    b = b_next;
    mw = m_next;
    obj = next_obj;
    t = t_next;
    if (converged) break;
    step = std::min(step * 2.0, 1.0);  // allow recovery after conservative steps
  }
  model.weights = w;
  model.intercept = b;
  if (!model.weights.allFinite() || !std::isfinite(model.intercept))
    throw NumericError("logreg_fit: non-finite parameters");
  return model;
}

// -- decision tree / random forest ------------------------------------------------

int DecisionTree::predict(const Vec& x) const {
  int node = 0;
  while (nodes[node].feature >= 0)
    node = x[nodes[node].feature] < nodes[node].threshold ? nodes[node].left
                                                          : nodes[node].right;
  return nodes[node].label;
}

namespace {

double gini(int n0, int n1) {
  const double n = static_cast<double>(n0 + n1);
  if (n == 0.0) return 0.0;
  const double p0 = n0 / n, p1 = n1 / n;
  return 1.0 - p0 * p0 - p1 * p1;
}

struct TreeBuilder {
  const Mat& X;
  const std::vector<int>& y;
  int features_per_split;
  rng::Engine gen;
  std::vector<DecisionTree::Node> nodes;

  int build(std::vector<int> idx) {
    int n0 = 0, n1 = 0;
    for (const int i : idx) (y[i] == 1 ? n1 : n0)++;
    const int majority = n1 > n0 ? 1 : 0;

    const int node_id = static_cast<int>(nodes.size());
    nodes.push_back({});
    nodes[node_id].label = majority;
    if (n0 == 0 || n1 == 0 || idx.size() < 2) return node_id;

    const int d = static_cast<int>(X.cols());
    std::vector<int> features(d);
    std::iota(features.begin(), features.end(), 0);
    if (features_per_split > 0 && features_per_split < d) {
      for (int i = 0; i < features_per_split; ++i) {
        const int j =
            i + static_cast<int>(rng::next_below(gen, static_cast<std::size_t>(d - i)));
        std::swap(features[i], features[j]);
      }
      features.resize(features_per_split);
      std::sort(features.begin(), features.end());
    }

    const double parent = gini(n0, n1);
    double best_gain = 1e-12;
    int best_feature = -1;
    double best_threshold = 0.0;

    std::vector<int> order = idx;
    for (const int f : features) {
      std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (X(a, f) != X(b, f)) return X(a, f) < X(b, f);
        return a < b;
      });
      int l0 = 0, l1 = 0, r0 = n0, r1 = n1;
      const int m = static_cast<int>(order.size());
      for (int pos = 0; pos + 1 < m; ++pos) {
        (y[order[pos]] == 1 ? l1 : l0)++;
        (y[order[pos]] == 1 ? r1 : r0)--;
        if (X(order[pos], f) == X(order[pos + 1], f)) continue;
        const double nl = l0 + l1, nr = r0 + r1, nt = nl + nr;
        const double gain = parent - (nl / nt) * gini(l0, l1) - (nr / nt) * gini(r0, r1);
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = f;
          best_threshold = X(order[pos], f) + (X(order[pos + 1], f) - X(order[pos], f)) / 2.0;
        }
      }
    }
    if (best_feature < 0) return node_id;

    std::vector<int> left, right;
    for (const int i : idx) (X(i, best_feature) < best_threshold ? left : right).push_back(i);
    if (left.empty() || right.empty()) return node_id;  // numeric ties collapsed the split

    nodes[node_id].feature = best_feature;
    nodes[node_id].threshold = best_threshold;
    const int l = build(std::move(left));
    nodes[node_id].left = l;
    const int r = build(std::move(right));
    nodes[node_id].right = r;
    return node_id;
  }
};

}  // namespace

DecisionTree tree_fit(const Mat& X, const std::vector<int>& y, const std::vector<int>& sample_idx,
                      int features_per_split, std::uint64_t seed) {
  if (sample_idx.empty()) throw DataError("tree_fit: empty sample");
  TreeBuilder builder{X, y, features_per_split, rng::Engine(seed), {}};
  builder.build(sample_idx);
  DecisionTree tree;
  tree.nodes = std::move(builder.nodes);
  return tree;
}

double ForestModel::predict_proba(const Vec& x) const {
  int votes = 0;
  for (const auto& t : trees) votes += t.predict(x);
  return static_cast<double>(votes) / static_cast<double>(trees.size());
}

Vec ForestModel::predict_proba(const Mat& X) const {
  Vec out(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const Vec xi = X.row(i).transpose();
    out[i] = predict_proba(xi);
  }
  return out;
}

ForestModel forest_fit(const Mat& X, const std::vector<int>& y, const ForestConfig& cfg) {
  const auto n = X.rows();
  if (n == 0 || static_cast<std::size_t>(n) != y.size())
    throw DataError("forest_fit: bad shapes");
  const int mtry = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(X.cols()))));
  ForestModel model;
  model.trees.reserve(cfg.n_trees);
  for (int t = 0; t < cfg.n_trees; ++t) {
    const std::uint64_t tree_seed = rng::derive(cfg.seed, "tree", static_cast<std::uint64_t>(t));
    rng::Engine boot(rng::derive(cfg.seed, "bootstrap", static_cast<std::uint64_t>(t)));
    std::vector<int> sample(n);
    for (Eigen::Index i = 0; i < n; ++i)
      sample[i] = static_cast<int>(rng::next_below(boot, static_cast<std::size_t>(n)));
    model.trees.push_back(tree_fit(X, y, sample, mtry, tree_seed));
  }
  return model;
}

// -- metrics ------------------------------------------------------------------------

double auroc_score(const std::vector<int>& y, const std::vector<double>& scores) {
  if (y.size() != scores.size() || y.empty()) throw DataError("auroc: bad shapes");
  const auto n_pos = std::count(y.begin(), y.end(), 1);
  const auto n_neg = static_cast<long>(y.size()) - n_pos;
  if (n_pos == 0 || n_neg == 0)
    throw DataError("auroc: undefined for a single-class target");

  std::vector<int> order(y.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return scores[a] < scores[b]; });

  // average ranks across ties; rank sum of positives gives the Mann-Whitney U
  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k)
      if (y[order[k]] == 1) rank_sum_pos += avg_rank;
    i = j + 1;
  }
  const double u = rank_sum_pos - static_cast<double>(n_pos) * (static_cast<double>(n_pos) + 1.0) / 2.0;
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

FoldMetrics compute_metrics(const std::vector<int>& y, const std::vector<double>& scores,
                            double threshold) {
  std::vector<int> y_hat(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) y_hat[i] = scores[i] >= threshold ? 1 : 0;
  return compute_metrics_voted(y, y_hat, scores);
}

FoldMetrics compute_metrics_voted(const std::vector<int>& y, const std::vector<int>& y_hat,
                                  const std::vector<double>& scores) {
  if (y.size() != y_hat.size() || y.size() != scores.size() || y.empty())
    throw DataError("metrics: bad shapes");
  long tp = 0, tn = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] == 1)
      (y_hat[i] == 1 ? tp : fn)++;
    else
      (y_hat[i] == 1 ? fp : tn)++;
  }
  FoldMetrics m;
  m.accuracy = static_cast<double>(tp + tn) / static_cast<double>(y.size());
  m.precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  m.recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  m.f1 = m.precision + m.recall > 0.0
             ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
             : 0.0;
  m.auroc = auroc_score(y, scores);
  return m;
}

// -- cross-validation -----------------------------------------------------------------

std::vector<int> stratified_folds(const std::vector<int>& y, int k, std::uint64_t seed) {
  if (k < 2) throw DataError("stratified_folds: k must be >= 2");
  std::vector<int> fold(y.size(), -1);
  for (const int cls : {0, 1}) {
    std::vector<int> idx;
    for (std::size_t i = 0; i < y.size(); ++i)
      if (y[i] == cls) idx.push_back(static_cast<int>(i));
    if (static_cast<int>(idx.size()) < k)
      throw DataError("stratified_folds: class " + std::to_string(cls) + " has " +
                      std::to_string(idx.size()) + " members, fewer than k = " +
                      std::to_string(k));
    rng::Engine gen(rng::derive(seed, "folds", static_cast<std::uint64_t>(cls)));
    for (std::size_t i = 0; i + 1 < idx.size(); ++i) {
      const std::size_t j = i + rng::next_below(gen, idx.size() - i);
      std::swap(idx[i], idx[j]);
    }
    for (std::size_t i = 0; i < idx.size(); ++i) fold[idx[i]] = static_cast<int>(i % k);
  }
  return fold;
}

MetricReport summarize_folds(const std::vector<FoldMetrics>& folds) {
  if (folds.empty()) throw DataError("summarize_folds: no folds");
  const auto stat = [&](const std::function<double(const FoldMetrics&)>& get) {
    MetricStat s;
    for (const auto& f : folds) s.mean += get(f);
    s.mean /= static_cast<double>(folds.size());
    double ss = 0.0;
    for (const auto& f : folds) {
      const double d = get(f) - s.mean;
      ss += d * d;
    }
    s.stddev = std::sqrt(ss / static_cast<double>(folds.size()));
    return s;
  };
  MetricReport r;
  r.folds = folds;
  r.accuracy = stat([](const FoldMetrics& f) { return f.accuracy; });
  r.precision = stat([](const FoldMetrics& f) { return f.precision; });
  r.recall = stat([](const FoldMetrics& f) { return f.recall; });
  r.f1 = stat([](const FoldMetrics& f) { return f.f1; });
  r.auroc = stat([](const FoldMetrics& f) { return f.auroc; });
  return r;
}

std::string MetricReport::to_text() const {
  std::ostringstream out;
  char line[128];
  out << "metric      mean    std\n";
  const auto row = [&](const char* name, const MetricStat& s) {
    std::snprintf(line, sizeof line, "%-10s %6.4f %6.4f\n", name, s.mean, s.stddev);
    out << line;
  };
  row("accuracy", accuracy);
  row("precision", precision);
  row("recall", recall);
  row("f1", f1);
  row("auroc", auroc);
  return out.str();
}

std::string MetricReport::to_json() const {
  nlohmann::json j;
  const auto put = [&](const char* name, const MetricStat& s) {
    j[name] = {{"mean", s.mean}, {"std", s.stddev}};
  };
  put("accuracy", accuracy);
  put("precision", precision);
  put("recall", recall);
  put("f1", f1);
  put("auroc", auroc);
  j["folds"] = nlohmann::json::array();
  for (const auto& f : folds)
    j["folds"].push_back({{"accuracy", f.accuracy},
                          {"precision", f.precision},
                          {"recall", f.recall},
                          {"f1", f.f1},
                          {"auroc", f.auroc}});
  return j.dump(2);
}

MetricReport cross_validate(const Mat& X, const std::vector<int>& y, const CvConfig& cfg) {
  if (X.rows() != static_cast<Eigen::Index>(y.size()))
    throw DataError("cross_validate: bad shapes");
  const std::vector<int> fold = stratified_folds(y, cfg.k, cfg.seed);

  std::vector<FoldMetrics> metrics;
  for (int f = 0; f < cfg.k; ++f) {
    std::vector<int> train_idx, test_idx;
    for (std::size_t i = 0; i < y.size(); ++i)
      (fold[i] == f ? test_idx : train_idx).push_back(static_cast<int>(i));

    Mat X_train(train_idx.size(), X.cols()), X_test(test_idx.size(), X.cols());
    std::vector<int> y_train(train_idx.size()), y_test(test_idx.size());
    for (std::size_t i = 0; i < train_idx.size(); ++i) {
      X_train.row(i) = X.row(train_idx[i]);
      y_train[i] = y[train_idx[i]];
    }
    for (std::size_t i = 0; i < test_idx.size(); ++i) {
      X_test.row(i) = X.row(test_idx[i]);
      y_test[i] = y[test_idx[i]];
    }

    Vec scores;
    if (cfg.model == ClassifierKind::LogReg) {
      const LogRegModel m = logreg_fit(X_train, y_train, cfg.logreg);
      scores = m.predict_proba(X_test);
    } else {
      ForestConfig fc = cfg.forest;
      fc.seed = rng::derive(cfg.seed, "fold-forest", static_cast<std::uint64_t>(f));
      const ForestModel m = forest_fit(X_train, y_train, fc);
      scores = m.predict_proba(X_test);
    }
    metrics.push_back(
        compute_metrics(y_test, std::vector<double>(scores.data(), scores.data() + scores.size())));
  }
  return summarize_folds(metrics);
}

}  // namespace bigraph
