#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace volfeed {

// Reproducibility record written next to every command's outputs: tool
// version, input content hashes, the fully resolved configuration, and the
// seed. Deliberately no timestamps, so a re-run writes identical bytes.
struct RunManifest {
  std::string command;
  std::string tool_version;
  std::vector<std::pair<std::string, std::string>> inputs;  // path, fnv1a64
  std::vector<std::pair<std::string, std::string>> config;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> outputs;

  std::string render() const;
  void write(const std::string& path) const;
};

std::uint64_t fnv1a64(const void* data, std::size_t size);
std::string fnv1a64_file_hex(const std::string& path);

}  // namespace volfeed
