#include "bigraph/encoders.hpp"

#include <cmath>

#include "bigraph/rng.hpp"

namespace bigraph {

const char* to_string(AttrTag t) {
  switch (t) {
    case AttrTag::UserScalars: return "user_scalars";
    case AttrTag::UserDescription: return "user_description";
    case AttrTag::TweetText: return "tweet_text";
    case AttrTag::TweetImage: return "tweet_image";
    case AttrTag::AuthorScalars: return "author_scalars";
    case AttrTag::AuthorDescription: return "author_description";
  }
  return "?";
}

ScalarNormalizer fit_normalizer(const std::vector<UserRecord>& users) {
  if (users.empty()) throw DataError("fit_normalizer: no users");
  ScalarNormalizer norm;
  const auto raw = [](const UserRecord& u, int f) -> double {
    switch (f) {
      case 0: return static_cast<double>(u.followers);
      case 1: return static_cast<double>(u.friends);
      case 2: return static_cast<double>(u.listed);
      case 3: return static_cast<double>(u.statuses);
      default: return static_cast<double>(u.favorites);
    }
  };
  const double n = static_cast<double>(users.size());
  for (int f = 0; f < kNumScalarFeatures; ++f) {
    double sum = 0.0;
    for (const auto& u : users) sum += std::log1p(raw(u, f));
    norm.mean[f] = sum / n;
    double ss = 0.0;
    for (const auto& u : users) {
      const double d = std::log1p(raw(u, f)) - norm.mean[f];
      ss += d * d;
    }
    const double sd = std::sqrt(ss / n);  // population std
    norm.stddev[f] = sd > 0.0 ? sd : 1.0;
  }
  return norm;
}

Vec scalar_features(const UserRecord& user, const ScalarNormalizer& norm) {
  Vec v(kScalarVecLen);
  v[0] = norm.z(0, static_cast<double>(user.followers));
  v[1] = norm.z(1, static_cast<double>(user.friends));
  v[2] = norm.z(2, static_cast<double>(user.listed));
  v[3] = norm.z(3, static_cast<double>(user.statuses));
  v[4] = norm.z(4, static_cast<double>(user.favorites));
  v[5] = user.verified ? 1.0 : 0.0;
  return v;
}

Vec hash_embed(const std::string& text, int dim, std::uint64_t seed) {
  if (dim < 1) throw DataError("hash_embed: dim must be >= 1");
  Vec v = Vec::Zero(dim);
  std::string token;
  const auto flush = [&] {
    if (token.empty()) return;
    const std::uint64_t h = rng::mix64(rng::fnv1a64(token) ^ seed);
    const int bucket = static_cast<int>(h % static_cast<std::uint64_t>(dim));
    const double sign = (h >> 63) ? -1.0 : 1.0;
    v[bucket] += sign;
    token.clear();
  };
  for (const char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c)))
      token += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    else
      flush();
  }
  flush();
  const double n = v.norm();
  if (n > 0.0) v /= n;
  return v;
}

AttributeSet encode_user(const UserRecord& user, const ScalarNormalizer& norm,
                         const EncoderConfig& cfg) {
  AttributeSet attrs;
  attrs.push_back({AttrTag::UserScalars, scalar_features(user, norm)});
  if (user.description_vec) {
    if (user.description_vec->size() != cfg.text_dim)
      throw DataError("user '" + user.external_id + "': description vector dimension " +
                      std::to_string(user.description_vec->size()) + " != " +
                      std::to_string(cfg.text_dim));
    attrs.push_back({AttrTag::UserDescription, *user.description_vec});
  } else if (user.description_text && !user.description_text->empty()) {
    attrs.push_back(
        {AttrTag::UserDescription, hash_embed(*user.description_text, cfg.text_dim, cfg.hash_seed)});
  }
  return attrs;
}

AttributeSet encode_tweet(const TweetRecord& tweet, const AttributeSet& author,
                          const EncoderConfig& cfg) {
  AttributeSet attrs;
  if (tweet.text_vec) {
    if (tweet.text_vec->size() != cfg.text_dim)
      throw DataError("tweet '" + tweet.external_id + "': text vector dimension " +
                      std::to_string(tweet.text_vec->size()) + " != " +
                      std::to_string(cfg.text_dim));
    attrs.push_back({AttrTag::TweetText, *tweet.text_vec});
  } else if (tweet.text) {
    attrs.push_back({AttrTag::TweetText, hash_embed(*tweet.text, cfg.text_dim, cfg.hash_seed)});
  } else {
    throw DataError("tweet '" + tweet.external_id + "' has neither text nor text vector");
  }
  if (tweet.image_vec) {
    if (tweet.image_vec->size() != cfg.image_dim)
      throw DataError("tweet '" + tweet.external_id + "': image vector dimension " +
                      std::to_string(tweet.image_vec->size()) + " != " +
                      std::to_string(cfg.image_dim));
    attrs.push_back({AttrTag::TweetImage, *tweet.image_vec});
  }
  for (const auto& a : author) {
    if (a.tag == AttrTag::UserScalars)
      attrs.push_back({AttrTag::AuthorScalars, a.value});
    else if (a.tag == AttrTag::UserDescription)
      attrs.push_back({AttrTag::AuthorDescription, a.value});
  }
  return attrs;
}

int attr_dim(AttrTag tag, const EncoderConfig& cfg) {
  switch (tag) {
    case AttrTag::UserScalars:
    case AttrTag::AuthorScalars: return kScalarVecLen;
    case AttrTag::UserDescription:
    case AttrTag::AuthorDescription:
    case AttrTag::TweetText: return cfg.text_dim;
    case AttrTag::TweetImage: return cfg.image_dim;
  }
  throw DataError("attr_dim: bad tag");
}

}  // namespace bigraph
