#include "volfeed/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "volfeed/csv.hpp"
#include "volfeed/errors.hpp"

namespace volfeed {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

KeyValueFile KeyValueFile::from_string(const std::string& text,
                                       const std::string& name) {
  KeyValueFile kv;
  kv.source_ = name;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::string stripped = trim(line);
    if (stripped.empty()) continue;
    std::size_t eq = stripped.find('=');
    if (eq == std::string::npos)
      throw InputError(name + ":" + std::to_string(line_no) +
                       ": expected 'key = value'");
    std::string key = trim(stripped.substr(0, eq));
    std::string value = trim(stripped.substr(eq + 1));
    if (key.empty())
      throw InputError(name + ":" + std::to_string(line_no) + ": empty key");
    for (const auto& [k, v] : kv.entries_)
      if (k == key)
        throw InputError(name + ":" + std::to_string(line_no) +
                         ": duplicate key '" + key + "'");
    kv.entries_.emplace_back(std::move(key), std::move(value));
  }
  return kv;
}

KeyValueFile KeyValueFile::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_string(buf.str(), path);
}

bool KeyValueFile::has(const std::string& key) const {
  for (const auto& [k, v] : entries_)
    if (k == key) return true;
  return false;
}

std::string KeyValueFile::get_string(const std::string& key) const {
  for (const auto& [k, v] : entries_)
    if (k == key) return v;
  throw ConfigError(source_ + ": missing key '" + key + "'");
}

std::string KeyValueFile::get_string(const std::string& key,
                                     const std::string& fallback) const {
  return has(key) ? get_string(key) : fallback;
}

double KeyValueFile::get_double(const std::string& key) const {
  const std::string v = get_string(key);
  const char* begin = v.c_str();
  char* end = nullptr;
  double x = std::strtod(begin, &end);
  if (v.empty() || end != begin + v.size())
    throw ConfigError(source_ + ": key '" + key + "': bad number '" + v + "'");
  return x;
}

double KeyValueFile::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

std::uint64_t KeyValueFile::get_u64(const std::string& key,
                                    std::uint64_t fallback) const {
  if (!has(key)) return fallback;
  const std::string v = get_string(key);
  const char* begin = v.c_str();
  char* end = nullptr;
  unsigned long long x = std::strtoull(begin, &end, 10);
  if (v.empty() || end != begin + v.size())
    throw ConfigError(source_ + ": key '" + key + "': bad integer '" + v + "'");
  return static_cast<std::uint64_t>(x);
}

std::size_t KeyValueFile::get_size(const std::string& key,
                                   std::size_t fallback) const {
  return static_cast<std::size_t>(get_u64(key, fallback));
}

std::vector<double> KeyValueFile::get_double_list(const std::string& key) const {
  const std::string v = get_string(key);
  std::vector<double> out;
  if (!v.empty() && v[0] == '@') {
    // value names a CSV whose first column is read top to bottom
    CsvTable table = read_csv(v.substr(1));
    if (table.header.empty())
      throw InputError(v.substr(1) + ": no columns");
    out.reserve(table.rows.size());
    for (std::size_t i = 0; i < table.rows.size(); ++i)
      out.push_back(parse_double(table.rows[i][0],
                                 v.substr(1) + ":" +
                                     std::to_string(table.line_numbers[i])));
    return out;
  }
  std::size_t start = 0;
  while (start <= v.size()) {
    std::size_t comma = v.find(',', start);
    std::string item = trim(comma == std::string::npos
                                ? v.substr(start)
                                : v.substr(start, comma - start));
    if (!item.empty()) {
      const char* begin = item.c_str();
      char* end = nullptr;
      double x = std::strtod(begin, &end);
      if (end != begin + item.size())
        throw ConfigError(source_ + ": key '" + key + "': bad number '" +
                          item + "'");
      out.push_back(x);
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace volfeed
