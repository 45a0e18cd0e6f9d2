#pragma once

#include <array>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "protoset/common.hpp"
#include "protoset/pattern.hpp"

namespace protoset {

using json = nlohmann::json;

// Shortest round-trip decimal representation; the one formatting used for
// CSV so outputs are byte-stable.
inline std::string format_double(double v) {
  std::array<char, 32> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

inline std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  char out[17];
  std::snprintf(out, sizeof(out), "%016llx",
                static_cast<unsigned long long>(h));
  return std::string(out, 16);
}

// Canonical pattern-file encoding: a meta header line followed by one JSON
// object per pattern, LF-terminated.
inline std::string instance_to_jsonl(const Instance& inst) {
  validate_instance(inst);
  std::ostringstream os;
  json meta;
  meta["meta"]["n"] = inst.size();
  meta["meta"]["k"] = inst.k();
  meta["meta"]["d"] = inst.dim();
  if (inst.weighted()) meta["meta"]["W"] = inst.total_weight();
  os << meta.dump() << '\n';
  for (std::size_t i = 0; i < inst.size(); ++i) {
    json line;
    line["id"] = i;
    line["points"] = inst.patterns[i].points;
    if (inst.patterns[i].weighted()) line["weights"] = inst.patterns[i].weights;
    os << line.dump() << '\n';
  }
  return os.str();
}

inline std::string instance_fingerprint(const Instance& inst) {
  return fnv1a_hex(instance_to_jsonl(inst));
}

inline void atomic_write(const std::filesystem::path& path,
                         const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    check_data(out.good(), "cannot open " + tmp.string() + " for writing");
    out << content;
    check_data(out.good(), "write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline void write_instance(const std::filesystem::path& path,
                           const Instance& inst) {
  atomic_write(path, instance_to_jsonl(inst));
}

inline Instance read_instance(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  check_data(in.good(), "cannot open " + path.string());
  std::string line;
  check_data(static_cast<bool>(std::getline(in, line)),
             "empty pattern file: " + path.string());
  json meta;
  try {
    meta = json::parse(line);
  } catch (const json::exception& e) {
    throw DataError("bad meta line in " + path.string() + ": " + e.what());
  }
  check_data(meta.contains("meta"), "pattern file missing meta header");
  std::size_t n = meta["meta"].at("n").get<std::size_t>();

  Instance inst;
  inst.patterns.reserve(n);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json row;
    try {
      row = json::parse(line);
    } catch (const json::exception& e) {
      throw DataError("bad pattern line in " + path.string() + ": " + e.what());
    }
    Pattern p;
    p.points = row.at("points").get<std::vector<std::vector<double>>>();
    if (row.contains("weights"))
      p.weights = row["weights"].get<std::vector<long long>>();
    inst.patterns.push_back(std::move(p));
  }
  check_data(inst.size() == n, "pattern count does not match meta n");
  validate_instance(inst);
  return inst;
}

// Ground-truth labels sidecar: a single JSON line.
inline void write_labels(const std::filesystem::path& path,
                         const std::vector<int>& labels) {
  json line;
  line["labels"] = labels;
  atomic_write(path, line.dump() + "\n");
}

inline std::vector<int> read_labels(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  check_data(in.good(), "cannot open " + path.string());
  std::string line;
  check_data(static_cast<bool>(std::getline(in, line)),
             "empty labels file: " + path.string());
  return json::parse(line).at("labels").get<std::vector<int>>();
}

}  // namespace protoset
