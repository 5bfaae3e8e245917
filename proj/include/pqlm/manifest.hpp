#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace pqlm {

// SHA-256 of a byte range / file, lowercase hex.
std::string sha256_hex(const void* data, std::size_t n);
std::string sha256_hex_file(const std::string& path);

// One manifest per CLI run, written beside the primary output artifact.
// Content-addressed hashes make "same inputs, same outputs" checkable
// without keeping the artifacts around.
struct RunManifest {
  std::string subcommand;
  nlohmann::ordered_json config; // resolved values, seed included
  std::vector<std::pair<std::string, std::string>> inputs;  // path, sha256
  std::vector<std::pair<std::string, std::string>> outputs; // path, sha256
  double duration_seconds = 0.0;
};

nlohmann::ordered_json manifest_to_json(const RunManifest& m);
void write_manifest(const RunManifest& m, const std::string& path);

}  // namespace pqlm
