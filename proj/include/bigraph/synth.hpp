#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bigraph/types.hpp"

namespace bigraph {

/// Two-community polarized dataset generator. Community 0 is Left
/// (score -1), community 1 Right (+1). Users interact with same-community
/// tweets with probability p_in and with the other community's tweets with
/// probability p_out; every tweet gets a Post edge from its author.
struct SynthConfig {
  int users_per_community = 100;
  int tweets_per_community = 300;
  double p_in = 0.03;
  double p_out = 0.003;
  double statuses_mu = 4.0;     // log-normal location of the statuses count
  double statuses_sigma = 1.2;  // log-normal scale
  double content_signal = 0.3;  // share of community-specific tokens per text
  double image_fraction = 0.3;
  int tokens_per_tweet = 8;
  int tokens_per_description = 6;
  int text_dim = 384;
  int image_dim = 2048;
  std::uint64_t hash_seed = 0;
  std::uint64_t seed = 0;
};

/// The acceptance profile: weak content, strong structure.
SynthConfig synth_profile_small();
/// Same shape, four times the node counts, halved densities.
SynthConfig synth_profile_medium();

struct SynthSummary {
  int n_users = 0;
  int n_tweets = 0;
  int n_edges = 0;
  int n_cross_edges = 0;  // user and tweet from different communities
};

/// Writes users/tweets/edges/labels JSONL plus hash-encoded text and image
/// vector sidecars into out_dir. Byte-identical for identical configs.
SynthSummary synth_generate(const SynthConfig& cfg, const std::string& out_dir);

}  // namespace bigraph
