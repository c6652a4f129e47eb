#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bigraph/baselines.hpp"
#include "bigraph/encoders.hpp"
#include "bigraph/eval.hpp"
#include "bigraph/graph.hpp"
#include "bigraph/model.hpp"

namespace bigraph {

// End-to-end plumbing shared by the CLI subcommands and the acceptance
// suite, so both drive the exact same code path.

struct LoadedData {
  BipartiteGraph graph;
  ScalarNormalizer norm;
  EncoderConfig enc;
  std::vector<AttributeSet> attrs;  // per global node index
};

/// Loads a dataset directory (users/tweets/edges[.jsonl], optional
/// labels.jsonl and vector sidecars), builds and validates the graph and
/// encodes every node.
LoadedData load_data_dir(const std::string& data_dir, const EncoderConfig& enc);

struct TrainOutputs {
  TrainResult result;
  std::string embeddings_path;
  std::string checkpoint_path;
};

/// sample + train + embed; writes embeddings.tsv and checkpoint.bin under
/// out_dir when out_dir is non-empty.
TrainOutputs run_training(const LoadedData& data, const TrainConfig& cfg,
                          const std::string& out_dir);

/// Rows of the embedding table for labeled users, paired with y (1=Right).
void labeled_user_matrix(const BipartiteGraph& g, const EmbeddingTable& table, Mat* X,
                         std::vector<int>* y);

MetricReport evaluate_embeddings(const BipartiteGraph& g, const EmbeddingTable& table,
                                 const CvConfig& cv);

}  // namespace bigraph
