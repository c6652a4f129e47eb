#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "bigraph/graph.hpp"
#include "bigraph/rng.hpp"

namespace bigraph {

struct WalkConfig {
  int walk_length = 30;
  int window = 5;  // must stay below walk_length
  int walks_per_node = 10;
  double restart_prob = 0.5;
  int topk_user = 10;
  int topk_tweet = 10;
  std::uint64_t seed = 0;
};

/// Top-k visited neighbors per type for one node, sorted by visit count
/// descending, index ascending. The node itself never appears.
struct TypedNeighbors {
  std::vector<std::pair<int, int>> users;   // (global index, visit count)
  std::vector<std::pair<int, int>> tweets;  // (global index, visit count)
};

struct NeighborSets {
  std::vector<TypedNeighbors> per_node;  // indexed by global node index
};

/// Random walk with restart from `start` (global index). The sequence has
/// exactly walk_length entries and begins at the start node; every step
/// restarts with probability restart_prob, otherwise moves to a uniformly
/// random neighbor. A node without neighbors always yields the start.
std::vector<int> rwr_walk(const TrainView& g, int start, const WalkConfig& cfg,
                          rng::Engine& gen);

/// walks_per_node restarts from every node; the walk RNG is keyed by
/// (seed, node index) so results do not depend on scheduling. threads <= 1
/// runs inline.
std::vector<std::vector<int>> generate_walks(const TrainView& g, const WalkConfig& cfg,
                                             int threads = 1);

NeighborSets build_neighbor_sets(const TrainView& g, const WalkConfig& cfg,
                                 int threads = 1);

/// All ordered pairs (w_i, w_j) with 0 < |i-j| <= window and w_i != w_j.
std::vector<std::pair<int, int>> positive_pairs(
    const std::vector<std::vector<int>>& walks, int window);

/// Vose alias table for O(1) draws from a fixed discrete distribution.
class AliasTable {
 public:
  AliasTable() = default;
  explicit AliasTable(const std::vector<double>& weights);

  int sample(rng::Engine& gen) const;
  int size() const { return static_cast<int>(prob_.size()); }
  const std::vector<double>& probabilities() const { return target_; }

 private:
  std::vector<double> prob_;
  std::vector<int> alias_;
  std::vector<double> target_;  // normalized weights, kept for inspection
};

/// Negative draws mirror the positive node's type: users come out
/// proportional to statuses + 1, tweets uniformly.
class NegativeSampler {
 public:
  explicit NegativeSampler(const TrainView& g);

  /// Returns a global node index of the requested kind. Throws DataError
  /// when the graph has no node of that kind.
  int sample(NodeKind kind, rng::Engine& gen) const;

  const AliasTable& user_table() const { return user_table_; }

 private:
  AliasTable user_table_;
  int n_users_ = 0;
  int n_tweets_ = 0;
};

}  // namespace bigraph
