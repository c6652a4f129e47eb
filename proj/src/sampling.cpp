#include "bigraph/sampling.hpp"

#include <algorithm>
#include <map>

namespace bigraph {

std::vector<int> rwr_walk(const TrainView& g, int start, const WalkConfig& cfg,
                          rng::Engine& gen) {
  std::vector<int> walk;
  walk.reserve(cfg.walk_length);
  walk.push_back(start);
  int current = start;
  for (int step = 1; step < cfg.walk_length; ++step) {
    if (rng::next_double(gen) < cfg.restart_prob) {
      current = start;
    } else {
      const auto& adj = g.adjacency(g.node_at(current));
      if (adj.empty()) {
        current = start;
      } else {
        const auto pick = adj[rng::next_below(gen, adj.size())];
        const NodeId cur = g.node_at(current);
        const NodeKind other = cur.kind == NodeKind::User ? NodeKind::Tweet : NodeKind::User;
        current = g.global_index({other, pick.counterpart});
      }
    }
    walk.push_back(current);
  }
  return walk;
}

std::vector<std::vector<int>> generate_walks(const TrainView& g, const WalkConfig& cfg,
                                             int /*threads*/) {
  // One RNG per start node, keyed by (seed, node index): output is identical
  // regardless of scheduling. Single-threaded is fast enough at this scale.
  std::vector<std::vector<int>> walks;
  walks.reserve(static_cast<std::size_t>(g.n_nodes()) * cfg.walks_per_node);
  for (int node = 0; node < g.n_nodes(); ++node) {
    rng::Engine gen(rng::derive(cfg.seed, "walks", static_cast<std::uint64_t>(node)));
    for (int w = 0; w < cfg.walks_per_node; ++w) walks.push_back(rwr_walk(g, node, cfg, gen));
  }
  return walks;
}

namespace {

std::vector<std::pair<int, int>> top_k(const std::map<int, int>& counts, int k) {
  std::vector<std::pair<int, int>> entries(counts.begin(), counts.end());
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (static_cast<int>(entries.size()) > k) entries.resize(k);
  return entries;
}

}  // namespace

NeighborSets build_neighbor_sets(const TrainView& g, const WalkConfig& cfg, int threads) {
  const auto walks = generate_walks(g, cfg, threads);
  const int n_users = g.n_users();
  std::vector<std::map<int, int>> user_counts(g.n_nodes()), tweet_counts(g.n_nodes());
  for (const auto& walk : walks) {
    const int start = walk.front();
    for (std::size_t i = 1; i < walk.size(); ++i) {
      const int v = walk[i];
      if (v == start) continue;
      if (v < n_users)
        ++user_counts[start][v];
      else
        ++tweet_counts[start][v];
    }
  }
  NeighborSets sets;
  sets.per_node.resize(g.n_nodes());
  for (int node = 0; node < g.n_nodes(); ++node) {
    sets.per_node[node].users = top_k(user_counts[node], cfg.topk_user);
    sets.per_node[node].tweets = top_k(tweet_counts[node], cfg.topk_tweet);
  }
  return sets;
}

std::vector<std::pair<int, int>> positive_pairs(const std::vector<std::vector<int>>& walks,
                                                int window) {
  std::vector<std::pair<int, int>> pairs;
  for (const auto& walk : walks) {
    const int n = static_cast<int>(walk.size());
    for (int i = 0; i < n; ++i)
      for (int j = std::max(0, i - window); j <= std::min(n - 1, i + window); ++j) {
        if (i == j || walk[i] == walk[j]) continue;
        pairs.emplace_back(walk[i], walk[j]);
      }
  }
  return pairs;
}

AliasTable::AliasTable(const std::vector<double>& weights) {
  const int n = static_cast<int>(weights.size());
  if (n == 0) throw DataError("alias table: empty weights");
  double total = 0.0;
  for (const double w : weights) {
    if (w < 0.0 || !std::isfinite(w)) throw DataError("alias table: weights must be finite, >= 0");
    total += w;
  }
  if (total <= 0.0) throw DataError("alias table: all weights zero");

  target_.resize(n);
  for (int i = 0; i < n; ++i) target_[i] = weights[i] / total;

  prob_.assign(n, 0.0);
  alias_.assign(n, 0);
  std::vector<double> scaled(n);
  for (int i = 0; i < n; ++i) scaled[i] = target_[i] * n;

  std::vector<int> small, large;
  for (int i = 0; i < n; ++i) (scaled[i] < 1.0 ? small : large).push_back(i);
  while (!small.empty() && !large.empty()) {
    const int s = small.back();
    const int l = large.back();
    small.pop_back();
    prob_[s] = scaled[s];
    alias_[s] = l;
    scaled[l] = (scaled[l] + scaled[s]) - 1.0;
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  for (const int i : large) prob_[i] = 1.0;
  for (const int i : small) prob_[i] = 1.0;  // numeric leftovers
}

int AliasTable::sample(rng::Engine& gen) const {
  const int col = static_cast<int>(rng::next_below(gen, prob_.size()));
  return rng::next_double(gen) < prob_[col] ? col : alias_[col];
}

NegativeSampler::NegativeSampler(const TrainView& g)
    : n_users_(g.n_users()), n_tweets_(g.n_tweets()) {
  if (n_users_ > 0) {
    std::vector<double> weights(n_users_);
    for (int i = 0; i < n_users_; ++i)
      weights[i] = static_cast<double>(g.user(i).statuses) + 1.0;
    user_table_ = AliasTable(weights);
  }
}

int NegativeSampler::sample(NodeKind kind, rng::Engine& gen) const {
  if (kind == NodeKind::User) {
    if (n_users_ == 0) throw DataError("negative sampler: no users");
    return user_table_.sample(gen);
  }
  if (n_tweets_ == 0) throw DataError("negative sampler: no tweets");
  return n_users_ + static_cast<int>(rng::next_below(gen, static_cast<std::size_t>(n_tweets_)));
}

}  // namespace bigraph
