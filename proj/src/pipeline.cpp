#include "bigraph/pipeline.hpp"

#include <filesystem>

#include "bigraph/io.hpp"
#include "bigraph/rng.hpp"
#include "bigraph/sampling.hpp"

namespace bigraph {

namespace fs = std::filesystem;

LoadedData load_data_dir(const std::string& data_dir, const EncoderConfig& enc) {
  const auto at = [&](const char* name) { return (fs::path(data_dir) / name).string(); };
  VectorsConfig vec;
  if (fs::exists(at("text_vectors.tsv"))) vec.text_vectors_path = at("text_vectors.tsv");
  if (fs::exists(at("image_vectors.tsv"))) vec.image_vectors_path = at("image_vectors.tsv");
  vec.text_dim = enc.text_dim;
  vec.image_dim = enc.image_dim;

  Dataset ds = load_dataset(at("users.jsonl"), at("tweets.jsonl"), at("edges.jsonl"), vec);
  if (fs::exists(at("labels.jsonl"))) ds.labels = load_labels(at("labels.jsonl"));

  LoadedData out;
  out.enc = enc;
  out.graph = build_graph(ds);
  out.norm = fit_normalizer(out.graph.users);

  const auto& g = out.graph;
  out.attrs.reserve(g.users.size() + g.tweets.size());
  for (const auto& u : g.users) out.attrs.push_back(encode_user(u, out.norm, out.enc));
  for (const auto& t : g.tweets) {
    const auto it = g.user_index.find(t.author_external_id);
    if (it == g.user_index.end()) throw DataError("tweet with unindexed author: " + t.external_id);
    out.attrs.push_back(encode_tweet(t, out.attrs[it->second], out.enc));
  }
  return out;
}

TrainOutputs run_training(const LoadedData& data, const TrainConfig& cfg,
                          const std::string& out_dir) {
  TrainConfig local = cfg;
  local.walk.seed = rng::derive(cfg.seed, "walk");

  TrainView view(data.graph);
  const NeighborSets neighbors = build_neighbor_sets(view, local.walk);

  TrainOutputs out;
  out.result = train(view, neighbors, data.attrs, data.enc, local);

  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    out.embeddings_path = (fs::path(out_dir) / "embeddings.tsv").string();
    out.checkpoint_path = (fs::path(out_dir) / "checkpoint.bin").string();
    export_embeddings(out.result.embeddings, out.embeddings_path);
    save_checkpoint(out.checkpoint_path, out.result.params, data.enc, local.seed,
                    "dim=" + std::to_string(local.dim));
  }
  return out;
}

void labeled_user_matrix(const BipartiteGraph& g, const EmbeddingTable& table, Mat* X,
                         std::vector<int>* y) {
  std::vector<int> rows;
  for (int i = 0; i < g.n_users(); ++i)
    if (g.label_map.count(i)) rows.push_back(i);
  if (rows.empty()) throw DataError("no labeled users");
  X->resize(static_cast<Eigen::Index>(rows.size()), table.rows.cols());
  y->clear();
  y->reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const int i = rows[r];
    X->row(static_cast<Eigen::Index>(r)) = table.row(g.users[i].external_id).transpose();
    y->push_back(g.label_map.at(i) == Leaning::Right ? 1 : 0);
  }
}

MetricReport evaluate_embeddings(const BipartiteGraph& g, const EmbeddingTable& table,
                                 const CvConfig& cv) {
  Mat X;
  std::vector<int> y;
  labeled_user_matrix(g, table, &X, &y);
  return cross_validate(X, y, cv);
}

}  // namespace bigraph
