#include "bigraph/analysis.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <unordered_set>

#include "bigraph/baselines.hpp"
#include "bigraph/rng.hpp"

namespace bigraph {

PoliticalScore political_score(std::int64_t n_right, std::int64_t n_left) {
  if (n_right < 0 || n_left < 0) throw DataError("political_score: negative counts");
  PoliticalScore p;
  p.n_right = n_right;
  p.n_left = n_left;
  p.eligible = n_right >= 5 || n_left >= 5;
  if (n_right + n_left > 0) {
    p.score = static_cast<double>(n_right - n_left) / static_cast<double>(n_right + n_left);
    p.label = *p.score >= 0.0 ? Leaning::Right : Leaning::Left;
  }
  return p;
}

// -- k-means ----------------------------------------------------------------------

KMeansResult kmeans(const Mat& X, int k, std::uint64_t seed, int max_iter) {
  const auto n = X.rows();
  if (k < 1 || k > n) throw DataError("kmeans: k out of range");

  rng::Engine gen(rng::derive(seed, "kmeans"));

  // k-means++ seeding
  Mat centroids(k, X.cols());
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  const auto first = static_cast<Eigen::Index>(rng::next_below(gen, static_cast<std::size_t>(n)));
  centroids.row(0) = X.row(first);
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double d = (X.row(i) - centroids.row(c - 1)).squaredNorm();
      d2[i] = std::min(d2[i], d);
      total += d2[i];
    }
    Eigen::Index pick = 0;
    if (total > 0.0) {
      const double target = rng::next_double(gen) * total;
      double acc = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc >= target) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<Eigen::Index>(rng::next_below(gen, static_cast<std::size_t>(n)));
    }
    centroids.row(c) = X.row(pick);
  }

  KMeansResult result;
  result.assignment.assign(n, 0);
  for (int iter = 0; iter < max_iter; ++iter) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d = (X.row(i) - centroids.row(0)).squaredNorm();
      for (int c = 1; c < k; ++c) {
        const double d = (X.row(i) - centroids.row(c)).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (result.assignment[i] != best) {
        result.assignment[i] = best;
        changed = true;
      }
    }
    Mat sums = Mat::Zero(k, X.cols());
    std::vector<int> counts(k, 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(result.assignment[i]) += X.row(i);
      ++counts[result.assignment[i]];
    }
    for (int c = 0; c < k; ++c) {
      // an emptied cluster keeps its previous centroid
      if (counts[c] > 0) centroids.row(c) = sums.row(c) / counts[c];
    }
    result.iterations = iter + 1;
    if (!changed && iter > 0) break;
  }

  result.centroids = centroids;
  result.inertia = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    result.inertia += (X.row(i) - centroids.row(result.assignment[i])).squaredNorm();
  return result;
}

SilhouetteResult silhouette(const Mat& X, const std::vector<int>& assignment, int k) {
  const auto n = X.rows();
  if (static_cast<std::size_t>(n) != assignment.size())
    throw DataError("silhouette: bad shapes");
  std::vector<int> counts(k, 0);
  for (const int a : assignment) ++counts[a];

  SilhouetteResult out;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const int ci = assignment[i];
    if (counts[ci] <= 1) {
      out.degenerate = true;  // singleton scores 0
      continue;
    }
    std::vector<double> mean_dist(k, 0.0);
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      mean_dist[assignment[j]] += (X.row(i) - X.row(j)).norm();
    }
    double a = mean_dist[ci] / (counts[ci] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (int c = 0; c < k; ++c) {
      if (c == ci || counts[c] == 0) continue;
      b = std::min(b, mean_dist[c] / counts[c]);
    }
    const double denom = std::max(a, b);
    if (!(denom > 0.0) || !std::isfinite(b)) {
      out.degenerate = true;  // coincident points (or only one populated cluster)
      continue;
    }
    sum += (b - a) / denom;
  }
  out.mean = sum / static_cast<double>(n);
  return out;
}

ClusterReport cluster_embeddings(const Mat& X, int k_min, int k_max, std::uint64_t seed,
                                 const std::vector<double>& scores) {
  if (k_min < 2 || k_max < k_min || k_max >= X.rows())
    throw DataError("cluster_embeddings: k range must fit in [2, n-1]");
  if (!scores.empty() && static_cast<Eigen::Index>(scores.size()) != X.rows())
    throw DataError("cluster_embeddings: scores length mismatch");

  ClusterReport report;
  double best = -2.0;
  for (int k = k_min; k <= k_max; ++k) {
    const KMeansResult km = kmeans(X, k, rng::derive(seed, "k", static_cast<std::uint64_t>(k)));
    const SilhouetteResult s = silhouette(X, km.assignment, k);
    report.silhouette_by_k.emplace_back(k, s.mean);
    if (s.mean > best) {  // strict: ties keep the smaller k
      best = s.mean;
      report.chosen_k = k;
      report.assignment = km.assignment;
      report.degenerate = s.degenerate;
    }
  }

  report.cluster_sizes.assign(report.chosen_k, 0);
  for (const int a : report.assignment) ++report.cluster_sizes[a];
  report.mean_scores.assign(report.chosen_k, std::numeric_limits<double>::quiet_NaN());
  if (!scores.empty()) {
    std::vector<double> sums(report.chosen_k, 0.0);
    std::vector<int> counts(report.chosen_k, 0);
    for (std::size_t i = 0; i < report.assignment.size(); ++i) {
      if (std::isnan(scores[i])) continue;
      sums[report.assignment[i]] += scores[i];
      ++counts[report.assignment[i]];
    }
    for (int c = 0; c < report.chosen_k; ++c)
      if (counts[c] > 0) report.mean_scores[c] = sums[c] / counts[c];
  }
  return report;
}

// -- activity ----------------------------------------------------------------------

std::vector<std::optional<double>> activity_stat(const BipartiteGraph& g,
                                                 const std::vector<int>& user_assignment,
                                                 int n_clusters) {
  if (static_cast<int>(user_assignment.size()) != g.n_users())
    throw DataError("activity_stat: assignment must cover the user nodes");
  std::vector<long> interactions(n_clusters, 0);
  std::vector<std::unordered_set<int>> tweets(n_clusters);
  for (int u = 0; u < g.n_users(); ++u) {
    const int c = user_assignment[u];
    if (c < 0 || c >= n_clusters) throw DataError("activity_stat: assignment out of range");
    for (const auto& e : g.user_adj[u]) {
      ++interactions[c];
      tweets[c].insert(e.counterpart);
    }
  }
  std::vector<std::optional<double>> out(n_clusters);
  for (int c = 0; c < n_clusters; ++c)
    if (!tweets[c].empty())
      out[c] = static_cast<double>(interactions[c]) / static_cast<double>(tweets[c].size());
  return out;
}

// -- word frequency ------------------------------------------------------------------

const std::vector<std::string>& default_stopwords() {
  // mirrored verbatim in data/stopwords.txt
  static const std::vector<std::string> words = {
      "a",    "about", "after", "all",  "also", "an",   "and",  "any",  "are",  "as",
      "at",   "be",    "been",  "but",  "by",   "can",  "do",   "for",  "from", "get",
      "had",  "has",   "have",  "he",   "her",  "his",  "i",    "if",   "in",   "is",
      "it",   "its",   "just",  "like", "me",   "more", "my",   "no",   "not",  "of",
      "on",   "one",   "or",    "our",  "out",  "she",  "so",   "that", "the",  "their",
      "them", "there", "they",  "this", "to",   "up",   "us",   "was",  "we",   "were",
      "what", "when",  "who",   "will", "with", "you",  "your"};
  return words;
}

std::vector<WordCount> word_frequency(const std::vector<std::string>& documents,
                                      const std::vector<std::string>& stopwords, int top_n) {
  const std::set<std::string> stop(stopwords.begin(), stopwords.end());
  std::map<std::string, std::int64_t> counts;
  std::string token;
  const auto flush = [&] {
    if (!token.empty() && !stop.count(token)) ++counts[token];
    token.clear();
  };
  for (const auto& doc : documents) {
    for (const char ch : doc) {
      if (std::isalnum(static_cast<unsigned char>(ch)))
        token += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
      else
        flush();
    }
    flush();
  }
  std::vector<WordCount> out;
  out.reserve(counts.size());
  for (const auto& [word, count] : counts) out.push_back({word, count});
  std::sort(out.begin(), out.end(), [](const WordCount& a, const WordCount& b) {
    if (a.count != b.count) return a.count > b.count;
    return a.word < b.word;
  });
  if (top_n >= 0 && static_cast<int>(out.size()) > top_n) out.resize(top_n);
  return out;
}

// -- 2D projection ---------------------------------------------------------------------

Projection2D project_2d(const Mat& embeddings) {
  if (embeddings.rows() < 2) throw DataError("project_2d: need at least 2 points");
  const PcaModel m = pca_fit(embeddings, 2);
  const Mat y = pca_transform(m, embeddings);
  Projection2D p;
  p.coords = Mat::Zero(embeddings.rows(), 2);
  p.coords.leftCols(y.cols()) = y;  // rank-1 data leaves the second column zero
  return p;
}

}  // namespace bigraph
