#include "bigraph/synth.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "bigraph/encoders.hpp"
#include "bigraph/io.hpp"
#include "bigraph/rng.hpp"

namespace bigraph {

SynthConfig synth_profile_small() { return SynthConfig{}; }

SynthConfig synth_profile_medium() {
  SynthConfig cfg;
  cfg.users_per_community = 400;
  cfg.tweets_per_community = 1200;
  cfg.p_in = 0.015;
  cfg.p_out = 0.0015;
  return cfg;
}

namespace {

using nlohmann::json;

std::string token_from(const char* stem, int k) { return std::string(stem) + std::to_string(k); }

// content_signal controls how partisan the text reads
std::string make_text(rng::Engine& gen, int community, int n_tokens, double signal,
                      const char* community_stem_left, const char* community_stem_right,
                      const char* shared_stem, int community_vocab, int shared_vocab) {
  std::string text;
  for (int i = 0; i < n_tokens; ++i) {
    if (!text.empty()) text += ' ';
    if (rng::next_double(gen) < signal) {
      const int k = static_cast<int>(rng::next_below(gen, community_vocab));
      text += token_from(community == 0 ? community_stem_left : community_stem_right, k);
    } else {
      const int k = static_cast<int>(rng::next_below(gen, shared_vocab));
      text += token_from(shared_stem, k);
    }
  }
  return text;
}

std::int64_t log_normal_count(rng::Engine& gen, double mu, double sigma) {
  return static_cast<std::int64_t>(std::llround(std::exp(mu + sigma * rng::next_normal(gen))));
}

}  // namespace

SynthSummary synth_generate(const SynthConfig& cfg, const std::string& out_dir) {
  if (cfg.users_per_community < 1 || cfg.tweets_per_community < 1)
    throw DataError("synth: counts must be >= 1");
  if (cfg.p_in < 0.0 || cfg.p_in > 1.0 || cfg.p_out < 0.0 || cfg.p_out > 1.0)
    throw DataError("synth: probabilities must lie in [0, 1]");

  std::filesystem::create_directories(out_dir);
  const auto path = [&](const char* name) { return (std::filesystem::path(out_dir) / name).string(); };

  const int n_users = 2 * cfg.users_per_community;
  const int n_tweets = 2 * cfg.tweets_per_community;
  const auto community_of_user = [&](int u) { return u < cfg.users_per_community ? 0 : 1; };
  const auto community_of_tweet = [&](int t) { return t < cfg.tweets_per_community ? 0 : 1; };

  // users
  rng::Engine ugen(rng::derive(cfg.seed, "synth-users"));
  std::vector<std::string> descriptions(n_users);
  {
    std::ofstream users(path("users.jsonl"));
    std::ofstream labels(path("labels.jsonl"));
    if (!users || !labels) throw ParseError("synth: cannot write under " + out_dir);
    for (int u = 0; u < n_users; ++u) {
      const int c = community_of_user(u);
      json j;
      j["id"] = "u" + std::to_string(u);
      j["followers"] = log_normal_count(ugen, 5.0, 1.5);
      j["friends"] = log_normal_count(ugen, 4.5, 1.2);
      j["listed"] = log_normal_count(ugen, 1.0, 1.0);
      j["statuses"] = log_normal_count(ugen, cfg.statuses_mu, cfg.statuses_sigma);
      j["favorites"] = log_normal_count(ugen, 4.0, 1.5);
      j["verified"] = rng::next_double(ugen) < 0.05;
      descriptions[u] = make_text(ugen, c, cfg.tokens_per_description, cfg.content_signal,
                                  "leftway", "rightway", "plain", 40, 120);
      j["description"] = descriptions[u];
      users << j.dump() << '\n';

      json l;
      l["user_id"] = "u" + std::to_string(u);
      l["score"] = c == 0 ? -1.0 : 1.0;
      labels << l.dump() << '\n';
    }
  }

  // tweets
  rng::Engine tgen(rng::derive(cfg.seed, "synth-tweets"));
  std::vector<std::string> texts(n_tweets);
  std::vector<int> authors(n_tweets);
  std::vector<bool> has_image(n_tweets);
  {
    std::ofstream tweets(path("tweets.jsonl"));
    if (!tweets) throw ParseError("synth: cannot write under " + out_dir);
    for (int t = 0; t < n_tweets; ++t) {
      const int c = community_of_tweet(t);
      const int author = static_cast<int>(rng::next_below(tgen, cfg.users_per_community)) +
                         c * cfg.users_per_community;
      authors[t] = author;
      texts[t] = make_text(tgen, c, cfg.tokens_per_tweet, cfg.content_signal, "leftsay",
                           "rightsay", "talk", 40, 120);
      has_image[t] = rng::next_double(tgen) < cfg.image_fraction;
      json j;
      j["id"] = "t" + std::to_string(t);
      j["author_id"] = "u" + std::to_string(author);
      j["text"] = texts[t];
      j["has_image"] = has_image[t];
      tweets << j.dump() << '\n';
    }
  }

  // edges: author post + community-biased interactions
  SynthSummary summary;
  summary.n_users = n_users;
  summary.n_tweets = n_tweets;
  rng::Engine egen(rng::derive(cfg.seed, "synth-edges"));
  {
    std::ofstream edges(path("edges.jsonl"));
    if (!edges) throw ParseError("synth: cannot write under " + out_dir);
    const auto emit = [&](int u, int t, const char* relation) {
      json j;
      j["user_id"] = "u" + std::to_string(u);
      j["tweet_id"] = "t" + std::to_string(t);
      j["relation"] = relation;
      edges << j.dump() << '\n';
      ++summary.n_edges;
      if (community_of_user(u) != community_of_tweet(t)) ++summary.n_cross_edges;
    };
    for (int t = 0; t < n_tweets; ++t) emit(authors[t], t, "post");
    for (int u = 0; u < n_users; ++u)
      for (int t = 0; t < n_tweets; ++t) {
        const double p = community_of_user(u) == community_of_tweet(t) ? cfg.p_in : cfg.p_out;
        if (rng::next_double(egen) >= p) continue;
        if (u == authors[t]) continue;  // the author already posted it
        emit(u, t, rng::next_double(egen) < 0.7 ? "retweet" : "quote");
      }
  }

  // sidecars: hash-encoded text vectors for every node, image vectors for
  // image-bearing tweets built from a token stream of their own
  {
    std::vector<std::string> ids;
    Mat rows(n_users + n_tweets, cfg.text_dim);
    for (int u = 0; u < n_users; ++u) {
      ids.push_back("u" + std::to_string(u));
      rows.row(u) = hash_embed(descriptions[u], cfg.text_dim, cfg.hash_seed).transpose();
    }
    for (int t = 0; t < n_tweets; ++t) {
      ids.push_back("t" + std::to_string(t));
      rows.row(n_users + t) = hash_embed(texts[t], cfg.text_dim, cfg.hash_seed).transpose();
    }
    io::write_vector_table(path("text_vectors.tsv"), ids, rows);
  }
  {
    rng::Engine igen(rng::derive(cfg.seed, "synth-images"));
    std::vector<std::string> ids;
    std::vector<std::string> img_text;
    for (int t = 0; t < n_tweets; ++t) {
      if (!has_image[t]) continue;
      ids.push_back("t" + std::to_string(t));
      img_text.push_back(make_text(igen, community_of_tweet(t), 12, cfg.content_signal,
                                   "leftshot", "rightshot", "pic", 40, 120));
    }
    Mat rows(ids.size(), cfg.image_dim);
    for (std::size_t i = 0; i < ids.size(); ++i)
      rows.row(i) = hash_embed(img_text[i], cfg.image_dim, cfg.hash_seed).transpose();
    io::write_vector_table(path("image_vectors.tsv"), ids, rows);
  }

  return summary;
}

}  // namespace bigraph
