#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bigraph/encoders.hpp"
#include "bigraph/eval.hpp"
#include "bigraph/graph.hpp"
#include "bigraph/sampling.hpp"

namespace bigraph {

// Comparison suite: concatenated feature variants fed to the same
// classifiers, a homogeneous two-layer GCN trained with InfoNCE, late
// fusion of the single-modality models, and per-tweet voting.

enum class BaselineVariant {
  UserInfo,
  Textual,
  Visual,
  TextualVisual,
  UserTextualVisual,
  LateFusion,
  Gcn,
};

const char* to_string(BaselineVariant v);
BaselineVariant baseline_variant_from_string(const std::string& s);

/// Feature vector for one (user, tweet) pair under a concatenation
/// variant. Missing modalities are zero-filled here (unlike the model
/// path) so every variant has a fixed dimension. UserInfo ignores the
/// tweet; Textual/Visual ignore the user.
Vec concat_features(BaselineVariant v, const UserRecord& user,
                    const std::optional<TweetRecord>& tweet, const ScalarNormalizer& norm,
                    const EncoderConfig& cfg);

int concat_dim(BaselineVariant v, const EncoderConfig& cfg);

// -- PCA ----------------------------------------------------------------------

struct PcaModel {
  Vec mean;
  Mat components;         // r x d, orthonormal rows
  Vec explained_variance; // non-increasing
  bool truncated_to_rank = false;
};

/// Principal components via SVD of the centered data matrix. Requesting
/// more components than the data's rank keeps the rank and flags it.
PcaModel pca_fit(const Mat& X, int r);
Mat pca_transform(const PcaModel& model, const Mat& X);

// -- homogeneous GCN baseline -----------------------------------------------------

struct GcnConfig {
  int layers = 2;
  int hidden_dim = 128;
  int output_dim = 128;
  int pca_dim = 128;
  double temperature = 0.1;
  double learning_rate = 1e-2;
  int steps = 200;
  int batch_pairs = 256;
  std::uint64_t seed = 0;
};

/// Two-layer symmetric-normalized propagation over the user+tweet graph
/// treated as one node type, trained with InfoNCE over windowed walk
/// co-occurrence pairs and in-batch negatives. Features are PCA-projected
/// per node kind to a shared dimension before the first layer.
Mat gcn_embed(const TrainView& g, const Mat& node_features, const GcnConfig& cfg,
              const std::vector<std::pair<int, int>>& positive_pairs);

/// PCA-reduced node feature matrix for the GCN: users carry the UserInfo
/// concatenation, tweets carry text (+) image.
Mat gcn_node_features(const BipartiteGraph& g, const ScalarNormalizer& norm,
                      const EncoderConfig& enc, int pca_dim);

/// Dense symmetric-normalized adjacency with self-loops,
/// D^{-1/2} (A + I) D^{-1/2}, exposed for testing.
Mat normalized_adjacency(const TrainView& g);

// -- fusion and voting ---------------------------------------------------------------

/// F1-weighted mean of per-model probabilities; models with zero weight
/// drop out. Throws DataError when every weight is zero.
double late_fusion_proba(const std::vector<double>& probs, const std::vector<double>& f1_weights);
int late_fusion_predict(const std::vector<double>& probs, const std::vector<double>& f1_weights,
                        double threshold = 0.5);

/// Majority vote over per-tweet labels; ties go to the training majority
/// class.
int vote_user_label(const std::vector<int>& tweet_labels, int majority_class);

// -- baseline evaluation drivers ------------------------------------------------------

struct BaselineInputs {
  const BipartiteGraph& graph;
  const ScalarNormalizer& norm;
  const EncoderConfig& enc;
  std::vector<int> labeled_users;  // user indices with labels
  std::vector<int> y;              // 1 = Right
};

BaselineInputs make_baseline_inputs(const BipartiteGraph& g, const ScalarNormalizer& norm,
                                    const EncoderConfig& enc);

/// Cross-validated metrics for one variant. Per-user variants evaluate the
/// user feature directly; per-tweet variants classify each interaction and
/// vote per user, with mean probability as the user score.
MetricReport evaluate_baseline(BaselineVariant v, const BaselineInputs& in, const CvConfig& cv,
                               const GcnConfig& gcn = {});

}  // namespace bigraph
