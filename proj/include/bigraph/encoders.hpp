#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "bigraph/types.hpp"

namespace bigraph {

// Attribute tags, one per projection in the model. Order within a node's
// attribute list is fixed: users [Scalars, Description], tweets
// [Text, Image, AuthorScalars, AuthorDescription] with missing optional
// modalities omitted rather than zero-filled.
enum class AttrTag : std::uint8_t {
  UserScalars = 0,
  UserDescription,
  TweetText,
  TweetImage,
  AuthorScalars,
  AuthorDescription,
};
constexpr int kNumAttrTags = 6;
constexpr int kNumScalarFeatures = 5;  // followers, friends, listed, statuses, favorites
constexpr int kScalarVecLen = kNumScalarFeatures + 1;  // + verified flag

const char* to_string(AttrTag t);

struct Attribute {
  AttrTag tag;
  Vec value;
};
using AttributeSet = std::vector<Attribute>;

struct EncoderConfig {
  int text_dim = 384;
  int image_dim = 2048;
  std::uint64_t hash_seed = 0;
};

/// Per-feature mean/std of log1p(count), fit on the user population.
/// Verified status bypasses normalization and maps to {0, 1}.
struct ScalarNormalizer {
  std::array<double, kNumScalarFeatures> mean{};
  std::array<double, kNumScalarFeatures> stddev{};  // 1 for constant features

  double z(int feature, double raw_count) const {
    return (std::log1p(raw_count) - mean[feature]) / stddev[feature];
  }
};

ScalarNormalizer fit_normalizer(const std::vector<UserRecord>& users);

/// [z(followers), z(friends), z(listed), z(statuses), z(favorites), verified]
Vec scalar_features(const UserRecord& user, const ScalarNormalizer& norm);

/// Signed feature hashing over whitespace tokens (lowercased, punctuation
/// stripped). Deterministic fallback when no precomputed text vector is
/// available. Empty input gives the zero vector; anything else is
/// L2-normalized.
Vec hash_embed(const std::string& text, int dim, std::uint64_t seed);

AttributeSet encode_user(const UserRecord& user, const ScalarNormalizer& norm,
                         const EncoderConfig& cfg);

/// Author attributes are the already-encoded author set; its Scalars /
/// Description entries are re-tagged as author attributes on the tweet.
/// Throws DataError when the tweet has neither text nor a text vector.
AttributeSet encode_tweet(const TweetRecord& tweet, const AttributeSet& author,
                          const EncoderConfig& cfg);

/// Dimension each tag feeds into the model projections.
int attr_dim(AttrTag tag, const EncoderConfig& cfg);

}  // namespace bigraph
