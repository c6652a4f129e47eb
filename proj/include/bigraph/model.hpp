#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bigraph/encoders.hpp"
#include "bigraph/graph.hpp"
#include "bigraph/sampling.hpp"

namespace bigraph {

// The node encoder: each node's attribute vectors are projected per tag,
// fused by a bidirectional LSTM with mean pooling into the content
// embedding, same-type neighbor content embeddings are aggregated by two
// further Bi-LSTMs, and a softmax attention over the available parts mixes
// everything into the final d-dimensional embedding.

struct LstmParams {
  // Fused gate layout: rows [input; forget; cell; output], each hidden-size
  // high. One weight block for the input, one for the recurrent state.
  Mat w_input;  // 4H x D
  Mat w_recur;  // 4H x H
  Vec bias;     // 4H
};

struct BiLstmParams {
  LstmParams fwd;
  LstmParams bwd;
};

struct Projection {
  Mat weight;  // d x d_f
  Vec bias;    // d
};

enum class LossSign { Standard, PaperLiteral };

struct ModelParams {
  int dim = 128;  // final embedding size; must be even (two LSTM directions)
  std::map<AttrTag, Projection> projections;
  BiLstmParams content;
  BiLstmParams neighbor_user;
  BiLstmParams neighbor_tweet;
  Vec attention;  // 2d

  int hidden() const { return dim / 2; }
};

// Gradients share the exact tensor layout of the parameters.
using ModelGrad = ModelParams;

/// Initializes all tensors: weights uniform in +-1/sqrt(fan-in), biases
/// zero except the LSTM forget gates which start at +1.
ModelParams init_params(int dim, const EncoderConfig& enc, std::uint64_t seed);
ModelGrad zero_grad_like(const ModelParams& p);

/// Visits every tensor as a flat view, in a fixed order shared by
/// parameters and gradients. Used by the optimizer and the gradient check.
void for_each_tensor(ModelParams& p,
                     const std::function<void(const std::string&, Eigen::Map<Eigen::VectorXd>)>& fn);
void for_each_tensor(const ModelParams& p,
                     const std::function<void(const std::string&, Eigen::Map<const Eigen::VectorXd>)>& fn);

// -- forward caches ---------------------------------------------------------

struct LstmCache {
  std::vector<Vec> x;  // inputs per position
  std::vector<Vec> i, f, g, o, c, h;
};

struct BiLstmCache {
  LstmCache fwd, bwd;
  int length = 0;
  Vec pooled;  // mean over positions of [h_fwd ; h_bwd]
};

struct FuseCache {
  std::vector<AttrTag> tags;
  std::vector<Vec> raw;  // attribute vectors, pre-projection
  BiLstmCache lstm;
  Vec f1;
};

struct AttentionCache {
  std::vector<Vec> candidates;  // F(v, i); candidates[0] is the self term
  std::vector<double> logits;   // pre-softmax, after LeakyReLU
  std::vector<double> pre;      // u^T [self + cand], before LeakyReLU
  std::vector<double> alpha;
  Vec out;
};

struct NodeEmbedCache {
  int node = -1;  // global index
  std::optional<BiLstmCache> f2_user;
  std::optional<BiLstmCache> f2_tweet;
  std::vector<int> user_neighbors;   // global indices feeding f2_user
  std::vector<int> tweet_neighbors;  // global indices feeding f2_tweet
  AttentionCache attn;
  const Vec& embedding() const { return attn.out; }
};

// -- forward ----------------------------------------------------------------

/// Content embedding of one node. The attribute set must be
/// non-empty.
Vec fuse_attributes(const ModelParams& p, const AttributeSet& attrs, FuseCache* cache);

/// Bi-LSTM mean aggregation over an ordered neighbor embedding list.
/// Returns nothing for an empty list; the attention stage then skips the
/// term entirely.
std::optional<Vec> aggregate_neighbors(const ModelParams& p, NodeKind neighbor_kind,
                                       const std::vector<Vec>& neighbor_f1,
                                       BiLstmCache* cache);

/// LeakyReLU(0.2) logits over [self (+) candidate], softmax, weighted sum.
/// Absent aggregates are excluded from the candidate set, so an isolated
/// node comes out with alpha_self == 1.
Vec attention_combine(const ModelParams& p, const Vec& f1,
                      const std::optional<Vec>& f2_user,
                      const std::optional<Vec>& f2_tweet, AttentionCache* cache);

/// Skip-gram style triple loss. Standard sign is
///   -log(sigmoid(e_pos . e_v)) - log(sigmoid(-e_neg . e_v));
/// PaperLiteral negates it.
double nce_loss(const Vec& e_v, const Vec& e_pos, const Vec& e_neg,
                LossSign sign = LossSign::Standard);

// -- batched forward/backward over shared content embeddings ----------------

/// Per-batch workspace. Content embeddings (f1) are computed once per
/// distinct node and shared by every triple that touches the node; the
/// backward pass accumulates into the same slots and walks them once.
class BatchWorkspace {
 public:
  BatchWorkspace(const ModelParams& params, const std::vector<AttributeSet>& attrs,
                 const NeighborSets& neighbors);

  /// Forward for one node, cached. Returns the cache entry.
  const NodeEmbedCache& embed(int node);
  const FuseCache& content(int node);

  /// Adds dL/dE for an embedded node; backward() consumes the accumulation.
  void add_embedding_grad(int node, const Vec& grad);

  /// Runs attention/aggregation/content backward for everything touched so
  /// far, accumulating parameter gradients into `grad`. Node order is
  /// sorted, so results do not depend on map iteration order.
  void backward(ModelGrad& grad);

  void reset();

 private:
  const ModelParams& params_;
  const std::vector<AttributeSet>& attrs_;
  const NeighborSets& neighbors_;
  std::map<int, FuseCache> f1_;
  std::map<int, NodeEmbedCache> emb_;
  std::map<int, Vec> d_emb_;
};

// -- training ----------------------------------------------------------------

struct TrainConfig {
  int dim = 128;
  int epochs = 3;
  int batch_size = 64;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  int negatives_per_positive = 1;
  // Triples drawn per epoch from the shuffled positive-pair pool;
  // 0 means the full pool.
  int pairs_per_epoch = 4096;
  LossSign loss_sign = LossSign::Standard;
  WalkConfig walk;  // pair generation reuses the sampling configuration
  bool verbose = false;
};

struct EmbeddingTable {
  int dim = 0;
  std::vector<std::string> ids;
  std::unordered_map<std::string, int> index;
  Mat rows;  // count x dim
  // attention coefficients per node, diagnostics only
  std::vector<std::vector<double>> alphas;

  const Vec row(const std::string& id) const;
  bool contains(const std::string& id) const { return index.count(id) > 0; }
};

struct TrainResult {
  ModelParams params;
  EmbeddingTable embeddings;
  std::vector<double> epoch_loss;  // mean triple loss per epoch
};

/// Minibatch training over (center, positive, negative) triples with an
/// adaptive-moment optimizer. Deterministic for a fixed seed in
/// single-threaded mode. Throws NumericError with batch diagnostics when
/// the loss goes non-finite.
TrainResult train(const TrainView& g, const NeighborSets& neighbors,
                  const std::vector<AttributeSet>& attrs, const EncoderConfig& enc,
                  const TrainConfig& cfg);

/// Full forward pass over every node with fixed parameters. Isolated nodes
/// get content-only embeddings.
EmbeddingTable compute_embeddings(const TrainView& g, const NeighborSets& neighbors,
                                  const std::vector<AttributeSet>& attrs,
                                  const ModelParams& params);

// -- gradient check -----------------------------------------------------------

/// A self-contained triple scenario: three embedded nodes drawing on a
/// shared pool of neighbor attribute sets, which exercises every gradient
/// accumulation path.
struct CheckScenario {
  std::vector<AttributeSet> pool;                 // all nodes' attributes
  int center = 0, positive = 1, negative = 2;     // indices into pool
  std::vector<std::vector<int>> user_neighbors;   // per pool node
  std::vector<std::vector<int>> tweet_neighbors;  // per pool node
};

CheckScenario make_check_scenario(const EncoderConfig& enc, std::uint64_t seed);

/// Triple loss under the scenario with full parameter gradients;
/// independent of BatchWorkspace bookkeeping is not possible here (the
/// scenario runs through the same forward graph the trainer uses).
double scenario_loss(const ModelParams& p, const CheckScenario& s, ModelGrad* grad,
                     LossSign sign = LossSign::Standard);

/// Central-difference comparison of analytic gradients over every
/// parameter entry (or those whose tensor name passes `filter`). Returns
/// the maximum relative error |a - f| / max(1e-8, |a| + |f|). The FD side
/// reruns the forward pass in extended precision: at h = 1e-5 double
/// rounding alone would exceed the bound on near-zero entries.
double gradient_check(const ModelParams& p, const CheckScenario& s, double h = 1e-5,
                      const std::function<bool(const std::string&)>& filter = nullptr);

// -- persistence --------------------------------------------------------------

void export_embeddings(const EmbeddingTable& table, const std::string& path);
EmbeddingTable import_embeddings(const std::string& path);

void save_checkpoint(const std::string& path, const ModelParams& params,
                     const EncoderConfig& enc, std::uint64_t seed,
                     const std::string& config_echo);
struct Checkpoint {
  ModelParams params;
  EncoderConfig enc;
  std::uint64_t seed = 0;
  std::string config_echo;
};
Checkpoint load_checkpoint(const std::string& path);

}  // namespace bigraph
