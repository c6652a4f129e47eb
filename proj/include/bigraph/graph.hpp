#pragma once

#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "bigraph/types.hpp"

namespace bigraph {

/// One endpoint of an edge as seen from the other side.
struct AdjEntry {
  int counterpart;  // index within the counterpart kind
  Relation relation;

  friend bool operator<(const AdjEntry& a, const AdjEntry& b) {
    if (a.counterpart != b.counterpart) return a.counterpart < b.counterpart;
    return a.relation < b.relation;
  }
  friend bool operator==(const AdjEntry& a, const AdjEntry& b) {
    return a.counterpart == b.counterpart && a.relation == b.relation;
  }
};

/// Immutable user-tweet interaction graph. Edges only ever connect a user
/// to a tweet; adjacency lists are sorted by (counterpart, relation) so the
/// structure is deterministic for identical inputs. Labels ride along for
/// evaluation but are invisible through TrainView.
class BipartiteGraph {
 public:
  std::vector<UserRecord> users;
  std::vector<TweetRecord> tweets;
  std::vector<std::vector<AdjEntry>> user_adj;   // user index -> tweet entries
  std::vector<std::vector<AdjEntry>> tweet_adj;  // tweet index -> user entries
  std::unordered_map<std::string, int> user_index;
  std::unordered_map<std::string, int> tweet_index;
  // evaluation-only ideology labels, keyed by user index
  std::unordered_map<int, Leaning> label_map;
  std::unordered_map<int, double> score_map;

  int n_users() const { return static_cast<int>(users.size()); }
  int n_tweets() const { return static_cast<int>(tweets.size()); }
  int n_nodes() const { return n_users() + n_tweets(); }
  std::size_t n_edges() const;

  // Global node indexing: users first, then tweets.
  int global_index(NodeId id) const {
    return id.kind == NodeKind::User ? id.index : n_users() + id.index;
  }
  NodeId node_at(int global) const {
    return global < n_users() ? NodeId{NodeKind::User, global}
                              : NodeId{NodeKind::Tweet, global - n_users()};
  }
  const std::vector<AdjEntry>& adjacency(NodeId id) const {
    return id.kind == NodeKind::User ? user_adj[id.index] : tweet_adj[id.index];
  }
  const std::string& external_id(NodeId id) const {
    return id.kind == NodeKind::User ? users[id.index].external_id
                                     : tweets[id.index].external_id;
  }

  /// Checks the bipartite and consistency invariants, throws DataError on
  /// violation. Cheap enough to run after every build.
  void validate() const;
};

/// Label-free view handed to every training path. Holds a reference; the
/// graph must outlive it.
class TrainView {
 public:
  explicit TrainView(const BipartiteGraph& g) : g_(g) {}
  int n_users() const { return g_.n_users(); }
  int n_tweets() const { return g_.n_tweets(); }
  int n_nodes() const { return g_.n_nodes(); }
  NodeId node_at(int global) const { return g_.node_at(global); }
  int global_index(NodeId id) const { return g_.global_index(id); }
  const std::vector<AdjEntry>& adjacency(NodeId id) const { return g_.adjacency(id); }
  const UserRecord& user(int i) const { return g_.users[i]; }
  const TweetRecord& tweet(int i) const { return g_.tweets[i]; }

 private:
  const BipartiteGraph& g_;
};

struct Dataset {
  std::vector<UserRecord> users;
  std::vector<TweetRecord> tweets;
  std::vector<EdgeRecord> edges;
  std::vector<LabelRecord> labels;  // optional, may be empty
  int synthetic_authors = 0;        // placeholder users added during load
};

/// Sidecar vector files to attach during load. Empty path = skip.
struct VectorsConfig {
  std::string text_vectors_path;
  std::string image_vectors_path;
  int text_dim = 384;
  int image_dim = 2048;
};

/// Reads users/tweets/edges JSONL files and optional vector sidecars.
/// Tweets whose author_id is unknown get a zero-feature placeholder user
/// appended, so author features always resolve. Edge endpoints must resolve
/// exactly; anything else is a DataError with the offending id.
Dataset load_dataset(const std::string& users_path, const std::string& tweets_path,
                     const std::string& edges_path, const VectorsConfig& vectors);

/// Parses labels.jsonl (user_id, score in [-1, 1]).
std::vector<LabelRecord> load_labels(const std::string& labels_path);

/// Assembles the graph from loaded records. Rejects duplicate
/// (user, tweet, relation) triples and anything that breaks bipartiteness.
/// Isolated nodes are kept. Deterministic: identical records produce a
/// byte-identical serialization.
BipartiteGraph build_graph(const Dataset& dataset);

/// Canonical text dump used for determinism checks and debugging.
void serialize_graph(const BipartiteGraph& g, std::ostream& out);

}  // namespace bigraph
