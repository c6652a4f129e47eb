#pragma once

#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "bigraph/types.hpp"

namespace bigraph::io {

// Vector table file format, shared by sidecars and embedding exports:
//   line 1:  "<count> <dim>"
//   then:    "<external_id>\t<v0>,<v1>,...,<v_{dim-1}>"

struct VectorTable {
  int dim = 0;
  std::vector<std::string> ids;  // file order
  std::unordered_map<std::string, int> index;
  Mat rows;  // count x dim

  const Vec row(const std::string& id) const;
  bool contains(const std::string& id) const { return index.count(id) > 0; }
};

VectorTable read_vector_table(const std::string& path);
void write_vector_table(const std::string& path, const std::vector<std::string>& ids,
                        const Mat& rows);

/// FNV-1a digest of a file's bytes, hex encoded. Used in run manifests.
std::string file_digest(const std::string& path);

/// Writes manifest.json into out_dir: subcommand, effective config, root
/// seed and input file digests. Enough to replay a run bit for bit.
void write_manifest(const std::string& out_dir, const std::string& command,
                    const std::map<std::string, std::string>& config,
                    const std::map<std::string, std::string>& input_files);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace bigraph::io
