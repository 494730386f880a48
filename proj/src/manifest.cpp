#include "volfeed/manifest.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "volfeed/errors.hpp"

namespace volfeed {

std::uint64_t fnv1a64(const void* data, std::size_t size) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < size; ++i) {
    hash ^= bytes[i];
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::string fnv1a64_file_hex(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  char buf[65536];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    const std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      hash ^= static_cast<unsigned char>(buf[i]);
      hash *= 0x100000001b3ULL;
    }
    if (got < static_cast<std::streamsize>(sizeof buf)) break;
  }
  char hex[24];
  std::snprintf(hex, sizeof hex, "%016llx",
                static_cast<unsigned long long>(hash));
  return hex;
}

std::string RunManifest::render() const {
  std::ostringstream out;
  out << "tool = volfeed " << tool_version << "\n";
  out << "command = " << command << "\n";
  for (const auto& [path, hash] : inputs)
    out << "input = " << path << " fnv1a64:" << hash << "\n";
  for (const auto& [key, value] : config)
    out << "config." << key << " = " << value << "\n";
  if (seed) out << "seed = " << *seed << "\n";
  for (const std::string& path : outputs) out << "output = " << path << "\n";
  return out.str();
}

void RunManifest::write(const std::string& path) const {
  std::ofstream outf(path, std::ios::binary);
  if (!outf) throw InputError("cannot write " + path);
  outf << render();
}

}  // namespace volfeed
