#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace volfeed {

// Line-based "key = value" file with '#' comments. Keys keep their file
// order so manifests can echo the configuration deterministically.
class KeyValueFile {
 public:
  static KeyValueFile load(const std::string& path);
  static KeyValueFile from_string(const std::string& text,
                                  const std::string& name = "<string>");

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  std::size_t get_size(const std::string& key, std::size_t fallback) const;
  // Comma-separated list of doubles, or a path to a one-column CSV when the
  // value starts with '@'.
  std::vector<double> get_double_list(const std::string& key) const;

  const std::vector<std::pair<std::string, std::string>>& entries() const {
    return entries_;
  }
  const std::string& source() const { return source_; }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
  std::string source_;
};

}  // namespace volfeed
