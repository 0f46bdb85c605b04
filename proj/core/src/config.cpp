#include "btbsim/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace btbsim {

namespace pt = boost::property_tree;

std::string trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r\n");
  return std::string(text.substr(first, last - first + 1));
}

std::uint64_t parse_uint(std::string_view text, std::string_view what) {
  const std::string s = trim(text);
  std::uint64_t value = 0;
  int base = 10;
  std::string_view digits = s;
  if (digits.starts_with("0x") || digits.starts_with("0X")) {
    digits.remove_prefix(2);
    base = 16;
  }
  auto [ptr, ec] =
      std::from_chars(digits.data(), digits.data() + digits.size(), value, base);
  if (digits.empty() || ec != std::errc{} ||
      ptr != digits.data() + digits.size()) {
    throw ConfigError(fmt::format("{}: expected unsigned integer, got '{}'",
                                  what, s));
  }
  return value;
}

double parse_double(std::string_view text, std::string_view what) {
  const std::string s = trim(text);
  try {
    std::size_t used = 0;
    const double value = std::stod(s, &used);
    if (used == s.size()) return value;
  } catch (const std::exception&) {
  }
  throw ConfigError(fmt::format("{}: expected number, got '{}'", what, s));
}

bool parse_bool(std::string_view text, std::string_view what) {
  const std::string s = trim(text);
  if (s == "true" || s == "on" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "off" || s == "0" || s == "no") return false;
  throw ConfigError(fmt::format("{}: expected boolean, got '{}'", what, s));
}

std::vector<std::string> split_list(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = std::min(text.find(sep, start), text.size());
    auto item = trim(text.substr(start, end - start));
    if (!item.empty()) out.push_back(std::move(item));
    start = end + 1;
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> parse_pairs(
    std::string_view text, char sep, char kv) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& item : split_list(text, sep)) {
    const auto pos = item.find(kv);
    if (pos == std::string::npos) {
      throw ConfigError(fmt::format("expected key{}value, got '{}'", kv, item));
    }
    out.emplace_back(trim(std::string_view(item).substr(0, pos)),
                     trim(std::string_view(item).substr(pos + 1)));
  }
  return out;
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::optional<std::string> KeyValueFile::Section::get(
    std::string_view key) const {
  for (const auto& [k, v] : entries) {
    if (k == key) return v;
  }
  return std::nullopt;
}

std::string KeyValueFile::Section::require(std::string_view key) const {
  auto v = get(key);
  if (!v) {
    throw ConfigError(fmt::format("[{}]: missing key '{}'", name, key));
  }
  return *v;
}

std::uint64_t KeyValueFile::Section::get_uint(std::string_view key,
                                              std::uint64_t fallback) const {
  auto v = get(key);
  return v ? parse_uint(*v, fmt::format("[{}] {}", name, key)) : fallback;
}

double KeyValueFile::Section::get_double(std::string_view key,
                                         double fallback) const {
  auto v = get(key);
  return v ? parse_double(*v, fmt::format("[{}] {}", name, key)) : fallback;
}

bool KeyValueFile::Section::get_bool(std::string_view key,
                                     bool fallback) const {
  auto v = get(key);
  return v ? parse_bool(*v, fmt::format("[{}] {}", name, key)) : fallback;
}

void KeyValueFile::Section::reject_unknown(
    std::initializer_list<std::string_view> allowed) const {
  for (const auto& [k, v] : entries) {
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) {
      throw ConfigError(fmt::format("[{}]: unknown key '{}'", name, k));
    }
  }
}

KeyValueFile KeyValueFile::parse(std::istream& in) {
  // Strip '#' comments, which the ini parser does not understand.
  // The ini parser also drops sections without keys, so headers are
  // collected here to keep them.
  std::ostringstream cleaned;
  std::vector<std::string> headers;
  std::string line;
  while (std::getline(in, line)) {
    const auto t = trim(line);
    if (t.starts_with('#')) continue;
    if (t.size() > 2 && t.front() == '[' && t.back() == ']') {
      headers.push_back(trim(std::string_view(t).substr(1, t.size() - 2)));
    }
    cleaned << line << '\n';
  }
  std::istringstream src(cleaned.str());
  pt::ptree tree;
  try {
    pt::ini_parser::read_ini(src, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(fmt::format("config parse error: {}", e.message()));
  }
  KeyValueFile file;
  for (const auto& [section_name, section] : tree) {
    if (section.empty() && !section.data().empty()) {
      throw ConfigError(
          fmt::format("key '{}' appears outside any [section]", section_name));
    }
    Section s{section_name, {}};
    for (const auto& [key, value] : section) {
      s.entries.emplace_back(key, trim(value.data()));
    }
    file.sections_.push_back(std::move(s));
  }
  for (std::size_t i = 0; i < headers.size(); ++i) {
    if (tree.find(headers[i]) == tree.not_found()) {
      file.sections_.insert(file.sections_.begin() + static_cast<std::ptrdiff_t>(i),
                            Section{headers[i], {}});
    }
  }
  return file;
}

KeyValueFile KeyValueFile::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError(fmt::format("cannot open config '{}'", path.string()));
  }
  return parse(in);
}

const KeyValueFile::Section* KeyValueFile::find(std::string_view name) const {
  for (const auto& s : sections_) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

}  // namespace btbsim
