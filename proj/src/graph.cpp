#include "bigraph/graph.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>
#include <set>

#include <json.hpp>

#include "bigraph/io.hpp"

namespace bigraph {
namespace {

using nlohmann::json;

json parse_line(const std::string& path, long long lineno, const std::string& line) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    throw ParseError(path + ":" + std::to_string(lineno) + ": not a JSON object");
  return j;
}

std::string require_string(const json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string())
    throw ParseError(where + ": missing string field '" + std::string(key) + "'");
  return it->get<std::string>();
}

std::int64_t require_count(const json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_number_integer())
    throw ParseError(where + ": missing integer field '" + std::string(key) + "'");
  const auto v = it->get<std::int64_t>();
  if (v < 0) throw ParseError(where + ": field '" + std::string(key) + "' must be >= 0");
  return v;
}

template <typename Fn>
void for_each_jsonl(const std::string& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open: " + path);
  std::string line;
  for (long long lineno = 1; std::getline(in, line); ++lineno) {
    if (line.empty()) continue;
    fn(lineno, parse_line(path, lineno, line));
  }
}

void attach(std::optional<Vec>& slot, const io::VectorTable& table, const std::string& id,
            int want_dim, const char* what) {
  auto it = table.index.find(id);
  if (it == table.index.end()) return;
  if (table.dim != want_dim)
    throw DataError(std::string(what) + " sidecar dimension " + std::to_string(table.dim) +
                    " != expected " + std::to_string(want_dim));
  slot = table.rows.row(it->second).transpose();
}

}  // namespace

std::size_t BipartiteGraph::n_edges() const {
  std::size_t n = 0;
  for (const auto& adj : user_adj) n += adj.size();
  return n;
}

void BipartiteGraph::validate() const {
  if (user_adj.size() != users.size() || tweet_adj.size() != tweets.size())
    throw DataError("graph: adjacency size mismatch");
  std::size_t from_users = 0, from_tweets = 0;
  for (int u = 0; u < n_users(); ++u) {
    from_users += user_adj[u].size();
    for (std::size_t k = 0; k < user_adj[u].size(); ++k) {
      const auto& e = user_adj[u][k];
      if (e.counterpart < 0 || e.counterpart >= n_tweets())
        throw DataError("graph: user adjacency points outside tweet range");
      if (k > 0 && !(user_adj[u][k - 1] < e))
        throw DataError("graph: user adjacency not strictly sorted");
    }
  }
  for (int t = 0; t < n_tweets(); ++t) {
    from_tweets += tweet_adj[t].size();
    for (std::size_t k = 0; k < tweet_adj[t].size(); ++k) {
      const auto& e = tweet_adj[t][k];
      if (e.counterpart < 0 || e.counterpart >= n_users())
        throw DataError("graph: tweet adjacency points outside user range");
      if (k > 0 && !(tweet_adj[t][k - 1] < e))
        throw DataError("graph: tweet adjacency not strictly sorted");
    }
  }
  if (from_users != from_tweets)
    throw DataError("graph: degree sums disagree (" + std::to_string(from_users) + " vs " +
                    std::to_string(from_tweets) + ")");
  for (const auto& [idx, _] : label_map)
    if (idx < 0 || idx >= n_users()) throw DataError("graph: label for unknown user index");
}

Dataset load_dataset(const std::string& users_path, const std::string& tweets_path,
                     const std::string& edges_path, const VectorsConfig& vectors) {
  Dataset d;

  io::VectorTable text_table, image_table;
  if (!vectors.text_vectors_path.empty()) text_table = io::read_vector_table(vectors.text_vectors_path);
  if (!vectors.image_vectors_path.empty())
    image_table = io::read_vector_table(vectors.image_vectors_path);

  std::unordered_map<std::string, int> user_seen;
  for_each_jsonl(users_path, [&](long long lineno, const json& j) {
    const std::string where = users_path + ":" + std::to_string(lineno);
    UserRecord u;
    u.external_id = require_string(j, "id", where);
    if (user_seen.count(u.external_id))
      throw DataError(where + ": duplicate user id '" + u.external_id + "'");
    u.followers = require_count(j, "followers", where);
    u.friends = require_count(j, "friends", where);
    u.listed = require_count(j, "listed", where);
    u.statuses = require_count(j, "statuses", where);
    u.favorites = require_count(j, "favorites", where);
    auto v = j.find("verified");
    if (v == j.end() || !v->is_boolean())
      throw ParseError(where + ": missing boolean field 'verified'");
    u.verified = v->get<bool>();
    if (auto it = j.find("description"); it != j.end() && it->is_string())
      u.description_text = it->get<std::string>();
    attach(u.description_vec, text_table, u.external_id, vectors.text_dim, "text");
    user_seen.emplace(u.external_id, static_cast<int>(d.users.size()));
    d.users.push_back(std::move(u));
  });

  std::set<std::string> tweet_seen;
  for_each_jsonl(tweets_path, [&](long long lineno, const json& j) {
    const std::string where = tweets_path + ":" + std::to_string(lineno);
    TweetRecord t;
    t.external_id = require_string(j, "id", where);
    if (!tweet_seen.insert(t.external_id).second)
      throw DataError(where + ": duplicate tweet id '" + t.external_id + "'");
    t.author_external_id = require_string(j, "author_id", where);
    if (auto it = j.find("text"); it != j.end() && it->is_string())
      t.text = it->get<std::string>();
    if (auto it = j.find("has_image"); it != j.end() && it->is_boolean())
      t.has_image = it->get<bool>();
    attach(t.text_vec, text_table, t.external_id, vectors.text_dim, "text");
    attach(t.image_vec, image_table, t.external_id, vectors.image_dim, "image");
    if (t.image_vec) t.has_image = true;
    if (!t.text && !t.text_vec)
      throw DataError(where + ": tweet '" + t.external_id + "' has neither text nor text vector");
    // Tweets by users outside the crawl keep their author features through a
    // placeholder record; features default to zero counts.
    if (!user_seen.count(t.author_external_id)) {
      UserRecord placeholder;
      placeholder.external_id = t.author_external_id;
      placeholder.synthetic = true;
      user_seen.emplace(placeholder.external_id, static_cast<int>(d.users.size()));
      d.users.push_back(std::move(placeholder));
      ++d.synthetic_authors;
    }
    d.tweets.push_back(std::move(t));
  });

  for_each_jsonl(edges_path, [&](long long lineno, const json& j) {
    const std::string where = edges_path + ":" + std::to_string(lineno);
    EdgeRecord e;
    e.user_external_id = require_string(j, "user_id", where);
    e.tweet_external_id = require_string(j, "tweet_id", where);
    e.relation = relation_from_string(require_string(j, "relation", where));
    if (!user_seen.count(e.user_external_id))
      throw DataError(where + ": edge references unknown user '" + e.user_external_id + "'");
    if (!tweet_seen.count(e.tweet_external_id))
      throw DataError(where + ": edge references unknown tweet '" + e.tweet_external_id + "'");
    d.edges.push_back(std::move(e));
  });

  return d;
}

std::vector<LabelRecord> load_labels(const std::string& labels_path) {
  std::vector<LabelRecord> out;
  std::set<std::string> seen;
  for_each_jsonl(labels_path, [&](long long lineno, const json& j) {
    const std::string where = labels_path + ":" + std::to_string(lineno);
    LabelRecord r;
    r.user_external_id = require_string(j, "user_id", where);
    auto it = j.find("score");
    if (it == j.end() || !it->is_number())
      throw ParseError(where + ": missing numeric field 'score'");
    r.score = it->get<double>();
    if (r.score < -1.0 || r.score > 1.0)
      throw DataError(where + ": score outside [-1, 1]");
    if (!seen.insert(r.user_external_id).second)
      throw DataError(where + ": duplicate label for user '" + r.user_external_id + "'");
    out.push_back(std::move(r));
  });
  return out;
}

BipartiteGraph build_graph(const Dataset& dataset) {
  BipartiteGraph g;
  g.users = dataset.users;
  g.tweets = dataset.tweets;
  for (int i = 0; i < g.n_users(); ++i) g.user_index.emplace(g.users[i].external_id, i);
  for (int i = 0; i < g.n_tweets(); ++i) g.tweet_index.emplace(g.tweets[i].external_id, i);
  g.user_adj.resize(g.users.size());
  g.tweet_adj.resize(g.tweets.size());

  std::set<std::tuple<int, int, Relation>> seen;
  for (const auto& e : dataset.edges) {
    auto ui = g.user_index.find(e.user_external_id);
    auto ti = g.tweet_index.find(e.tweet_external_id);
    if (ui == g.user_index.end())
      throw DataError("edge references unknown user '" + e.user_external_id + "'");
    if (ti == g.tweet_index.end())
      throw DataError("edge references unknown tweet '" + e.tweet_external_id + "'");
    if (!seen.insert({ui->second, ti->second, e.relation}).second)
      throw DataError("duplicate edge (" + e.user_external_id + ", " + e.tweet_external_id +
                      ", " + to_string(e.relation) + ")");
    g.user_adj[ui->second].push_back({ti->second, e.relation});
    g.tweet_adj[ti->second].push_back({ui->second, e.relation});
  }
  for (auto& adj : g.user_adj) std::sort(adj.begin(), adj.end());
  for (auto& adj : g.tweet_adj) std::sort(adj.begin(), adj.end());

  for (const auto& l : dataset.labels) {
    auto it = g.user_index.find(l.user_external_id);
    if (it == g.user_index.end())
      throw DataError("label references unknown user '" + l.user_external_id + "'");
    g.score_map[it->second] = l.score;
    g.label_map[it->second] = l.score >= 0.0 ? Leaning::Right : Leaning::Left;
  }

  g.validate();
  return g;
}

void serialize_graph(const BipartiteGraph& g, std::ostream& out) {
  out << "users " << g.n_users() << "\ntweets " << g.n_tweets() << "\nedges " << g.n_edges()
      << "\n";
  for (int i = 0; i < g.n_users(); ++i) {
    const auto& u = g.users[i];
    out << "u " << u.external_id << ' ' << u.followers << ' ' << u.friends << ' ' << u.listed
        << ' ' << u.statuses << ' ' << u.favorites << ' ' << (u.verified ? 1 : 0) << ' '
        << (u.synthetic ? 1 : 0) << '\n';
    for (const auto& e : g.user_adj[i])
      out << "  -> " << g.tweets[e.counterpart].external_id << ' ' << to_string(e.relation)
          << '\n';
  }
  for (int i = 0; i < g.n_tweets(); ++i) {
    const auto& t = g.tweets[i];
    out << "t " << t.external_id << " by " << t.author_external_id << '\n';
    for (const auto& e : g.tweet_adj[i])
      out << "  -> " << g.users[e.counterpart].external_id << ' ' << to_string(e.relation)
          << '\n';
  }
}

}  // namespace bigraph
