#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace bigraph {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// ---------------------------------------------------------------------------
// Errors. The CLI maps these onto exit codes: ParseError/DataError -> 2,
// NumericError -> 3. Anything thrown by argument handling stays at 1.
// ---------------------------------------------------------------------------

/// Malformed input file (bad JSON line, bad header, ...).
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Structurally invalid data: dangling references, duplicate edges,
/// bipartite violations, dimension mismatches.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Numeric failure during optimization (NaN loss and friends).
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Node identity
// ---------------------------------------------------------------------------

enum class NodeKind : std::uint8_t { User = 0, Tweet = 1 };

enum class Relation : std::uint8_t { Post = 0, Retweet = 1, Quote = 2 };

const char* to_string(NodeKind k);
const char* to_string(Relation r);
Relation relation_from_string(const std::string& s);

struct NodeId {
  NodeKind kind;
  int index;  // dense, unique within kind

  friend bool operator==(const NodeId& a, const NodeId& b) {
    return a.kind == b.kind && a.index == b.index;
  }
  friend bool operator<(const NodeId& a, const NodeId& b) {
    if (a.kind != b.kind) return a.kind < b.kind;
    return a.index < b.index;
  }
};

// ---------------------------------------------------------------------------
// Raw records as ingested from JSONL + vector sidecars
// ---------------------------------------------------------------------------

struct UserRecord {
  std::string external_id;
  // social counts, all >= 0
  std::int64_t followers = 0;
  std::int64_t friends = 0;
  std::int64_t listed = 0;
  std::int64_t statuses = 0;
  std::int64_t favorites = 0;
  bool verified = false;
  std::optional<std::string> description_text;
  std::optional<Vec> description_vec;
  // true for author placeholders created during ingest for tweets whose
  // author is not in users.jsonl
  bool synthetic = false;
};

struct TweetRecord {
  std::string external_id;
  std::string author_external_id;
  std::optional<std::string> text;
  std::optional<Vec> text_vec;
  std::optional<Vec> image_vec;
  bool has_image = false;
};

struct EdgeRecord {
  std::string user_external_id;
  std::string tweet_external_id;
  Relation relation = Relation::Post;
};

enum class Leaning : std::uint8_t { Left = 0, Right = 1 };

struct LabelRecord {
  std::string user_external_id;
  double score = 0.0;  // in [-1, 1]; >= 0 labels Right
};

}  // namespace bigraph
