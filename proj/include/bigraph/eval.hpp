#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bigraph/types.hpp"

namespace bigraph {

// Native classifiers and the cross-validation protocol. Positive class is
// Right (y = 1); scores are P(y = 1).

// -- logistic regression -------------------------------------------------------

struct LogRegConfig {
  double C = 0.5;  // inverse regularization strength
  double tol = 1e-8;
  int max_iter = 10000;
};

/// L1-penalized logistic regression fit by proximal gradient descent with
/// backtracking. Objective: mean log-loss + ||w||_1 / (C * n); the
/// intercept is not penalized. A single-class target degenerates to a
/// constant predictor at the class prior.
class LogRegModel {
 public:
  Vec weights;
  double intercept = 0.0;
  std::optional<double> constant_prob;  // set when y had a single class

  double predict_proba(const Vec& x) const;
  Vec predict_proba(const Mat& X) const;
};

LogRegModel logreg_fit(const Mat& X, const std::vector<int>& y,
                       const LogRegConfig& cfg = {});

// -- random forest ---------------------------------------------------------------

struct DecisionTree {
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1, right = -1;
    int label = 0;
  };
  std::vector<Node> nodes;

  int predict(const Vec& x) const;
};

/// Single CART tree: Gini impurity, unlimited depth, optional feature
/// subsampling (features_per_split <= 0 uses all features).
DecisionTree tree_fit(const Mat& X, const std::vector<int>& y,
                      const std::vector<int>& sample_idx, int features_per_split,
                      std::uint64_t seed);

struct ForestConfig {
  int n_trees = 100;
  std::uint64_t seed = 0;
  int threads = 1;
};

class ForestModel {
 public:
  std::vector<DecisionTree> trees;

  /// Fraction of trees voting class 1.
  double predict_proba(const Vec& x) const;
  Vec predict_proba(const Mat& X) const;
};

/// Bootstrap-bagged trees with sqrt(d) features per split; each tree owns
/// an RNG derived from (seed, tree index), so the forest is identical for
/// any thread count.
ForestModel forest_fit(const Mat& X, const std::vector<int>& y,
                       const ForestConfig& cfg = {});

// -- metrics ------------------------------------------------------------------------

struct FoldMetrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double auroc = 0.0;
};

struct MetricStat {
  double mean = 0.0;
  double stddev = 0.0;
};

struct MetricReport {
  MetricStat accuracy, precision, recall, f1, auroc;
  std::vector<FoldMetrics> folds;

  std::string to_text() const;
  std::string to_json() const;
};

/// Rank-based AUROC (Mann-Whitney, ties get half credit). Throws DataError
/// when y is single-class.
double auroc_score(const std::vector<int>& y, const std::vector<double>& scores);

/// Threshold metrics from scores: label 1 iff score >= threshold.
FoldMetrics compute_metrics(const std::vector<int>& y, const std::vector<double>& scores,
                            double threshold = 0.5);

/// Same, but with the hard labels decided elsewhere (per-tweet voting);
/// scores only feed the AUROC.
FoldMetrics compute_metrics_voted(const std::vector<int>& y, const std::vector<int>& y_hat,
                                  const std::vector<double>& scores);

// -- cross-validation ------------------------------------------------------------------

/// Stratified fold assignment: per-class shuffle then round-robin, so fold
/// class counts stay within one of proportional. Throws DataError naming
/// any class smaller than k.
std::vector<int> stratified_folds(const std::vector<int>& y, int k, std::uint64_t seed);

MetricReport summarize_folds(const std::vector<FoldMetrics>& folds);

enum class ClassifierKind { LogReg, RandomForest };

struct CvConfig {
  ClassifierKind model = ClassifierKind::LogReg;
  int k = 10;
  std::uint64_t seed = 0;
  LogRegConfig logreg;
  ForestConfig forest;
};

/// The evaluation protocol: stratified k-fold, fit on k-1 folds, metrics on
/// the held-out fold, mean and standard deviation across folds.
MetricReport cross_validate(const Mat& X, const std::vector<int>& y, const CvConfig& cfg);

}  // namespace bigraph
