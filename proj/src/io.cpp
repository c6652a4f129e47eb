#include "bigraph/io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "bigraph/rng.hpp"

namespace bigraph::io {

const Vec VectorTable::row(const std::string& id) const {
  auto it = index.find(id);
  if (it == index.end()) throw DataError("vector table: unknown id '" + id + "'");
  return rows.row(it->second).transpose();
}

VectorTable read_vector_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open vector file: " + path);

  std::string header;
  if (!std::getline(in, header)) throw ParseError(path + ": empty file");
  std::istringstream hs(header);
  long long count = -1, dim = -1;
  if (!(hs >> count >> dim) || count < 0 || dim <= 0)
    throw ParseError(path + ":1: expected header '<count> <dim>'");

  VectorTable table;
  table.dim = static_cast<int>(dim);
  table.rows.resize(count, dim);
  table.ids.reserve(count);

  std::string line;
  long long row = 0;
  for (long long lineno = 2; std::getline(in, line); ++lineno) {
    if (line.empty()) continue;
    if (row >= count)
      throw ParseError(path + ": more rows than the header declares");
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw ParseError(path + ":" + std::to_string(lineno) + ": missing tab separator");
    std::string id = line.substr(0, tab);
    if (table.index.count(id))
      throw ParseError(path + ":" + std::to_string(lineno) + ": duplicate id '" + id + "'");

    const char* p = line.c_str() + tab + 1;
    for (long long j = 0; j < dim; ++j) {
      char* end = nullptr;
      const double v = std::strtod(p, &end);
      if (end == p)
        throw ParseError(path + ":" + std::to_string(lineno) + ": expected " +
                         std::to_string(dim) + " floats");
      table.rows(row, j) = v;
      p = end;
      if (*p == ',') ++p;
    }
    table.index.emplace(std::move(id), static_cast<int>(row));
    table.ids.push_back(line.substr(0, tab));
    ++row;
  }
  if (row != count)
    throw ParseError(path + ": header declares " + std::to_string(count) + " rows, found " +
                     std::to_string(row));
  return table;
}

void write_vector_table(const std::string& path, const std::vector<std::string>& ids,
                        const Mat& rows) {
  if (static_cast<Eigen::Index>(ids.size()) != rows.rows())
    throw DataError("write_vector_table: id/row count mismatch");
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write: " + path);
  out << ids.size() << ' ' << rows.cols() << '\n';
  char buf[64];
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    out << ids[i] << '\t';
    for (Eigen::Index j = 0; j < rows.cols(); ++j) {
      // max_digits10 keeps the round trip lossless
      std::snprintf(buf, sizeof buf, "%.17g", rows(i, j));
      if (j) out << ',';
      out << buf;
    }
    out << '\n';
  }
}

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open for digest: " + path);
  std::uint64_t h = rng::kFnvOffset;
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    const auto n = in.gcount();
    for (std::streamsize i = 0; i < n; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= rng::kFnvPrime;
    }
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

void write_manifest(const std::string& out_dir, const std::string& command,
                    const std::map<std::string, std::string>& config,
                    const std::map<std::string, std::string>& input_files) {
  nlohmann::json j;
  j["command"] = command;
  j["config"] = config;
  j["inputs"] = input_files;
  std::filesystem::create_directories(out_dir);
  std::ofstream out(std::filesystem::path(out_dir) / "manifest.json");
  if (!out) throw ParseError("cannot write manifest under: " + out_dir);
  out << j.dump(2) << '\n';
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write: " + path);
  out << content;
}

}  // namespace bigraph::io
