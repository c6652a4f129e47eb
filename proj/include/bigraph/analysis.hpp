#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bigraph/graph.hpp"
#include "bigraph/types.hpp"

namespace bigraph {

// Polarization toolkit: follow-count political scores, k-means-with-
// silhouette clustering of embeddings, per-cluster interaction intensity,
// description word frequencies and a 2D projection for plotting.

struct PoliticalScore {
  std::int64_t n_right = 0;
  std::int64_t n_left = 0;
  bool eligible = false;           // at least five follows on either side
  std::optional<double> score;    // (N_R - N_L) / (N_R + N_L); empty when both 0
  std::optional<Leaning> label;   // Right iff score >= 0
};

PoliticalScore political_score(std::int64_t n_right, std::int64_t n_left);

// -- clustering ------------------------------------------------------------------

struct KMeansResult {
  Mat centroids;               // k x d
  std::vector<int> assignment; // per row
  double inertia = 0.0;        // within-cluster sum of squares
  int iterations = 0;
};

KMeansResult kmeans(const Mat& X, int k, std::uint64_t seed, int max_iter = 300);

/// Mean silhouette over all points (Euclidean). Points in singleton
/// clusters and points with a zero denominator score 0; the degenerate
/// flag reports when that happened.
struct SilhouetteResult {
  double mean = 0.0;
  bool degenerate = false;
};
SilhouetteResult silhouette(const Mat& X, const std::vector<int>& assignment, int k);

struct ClusterReport {
  int chosen_k = 0;
  std::vector<int> assignment;
  std::vector<std::pair<int, double>> silhouette_by_k;  // every k scanned
  std::vector<int> cluster_sizes;
  std::vector<double> mean_scores;  // mean political score per cluster, NaN if none
  bool degenerate = false;
};

/// K-means over k in [k_min, k_max], keeping the k with the best mean
/// silhouette (smallest k wins ties). Deterministic per seed.
ClusterReport cluster_embeddings(const Mat& X, int k_min, int k_max, std::uint64_t seed,
                                 const std::vector<double>& scores = {});

// -- activity ---------------------------------------------------------------------

/// Users-per-unique-tweet for each cluster of users: member interaction
/// edges divided by distinct tweets touched. Clusters touching no tweet
/// report no value.
std::vector<std::optional<double>> activity_stat(const BipartiteGraph& g,
                                                 const std::vector<int>& user_assignment,
                                                 int n_clusters);

// -- word frequency ------------------------------------------------------------------

struct WordCount {
  std::string word;
  std::int64_t count;
};

/// The stopword list shipped with the tool (also at data/stopwords.txt).
const std::vector<std::string>& default_stopwords();

/// Lowercase, strip punctuation, drop stopwords, count, sort by count
/// descending then word ascending.
std::vector<WordCount> word_frequency(const std::vector<std::string>& documents,
                                      const std::vector<std::string>& stopwords,
                                      int top_n);

// -- 2D projection --------------------------------------------------------------------

struct Projection2D {
  Mat coords;  // n x 2
};

/// PCA projection to two components (second column zero when the data has
/// rank one).
Projection2D project_2d(const Mat& embeddings);

}  // namespace bigraph
