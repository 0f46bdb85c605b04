#ifndef BTBSIM_CONFIG_HPP
#define BTBSIM_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace btbsim {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Flat `[section]` + `key = value` text, sections and keys kept in file
/// order. Comments start with ';' or '#'.
class KeyValueFile {
 public:
  struct Section {
    std::string name;
    std::vector<std::pair<std::string, std::string>> entries;

    std::optional<std::string> get(std::string_view key) const;
    std::string require(std::string_view key) const;
    std::uint64_t get_uint(std::string_view key, std::uint64_t fallback) const;
    double get_double(std::string_view key, double fallback) const;
    bool get_bool(std::string_view key, bool fallback) const;
    /// Throws ConfigError naming the first key not in `allowed`.
    void reject_unknown(std::initializer_list<std::string_view> allowed) const;
  };

  static KeyValueFile parse(std::istream& in);
  static KeyValueFile load(const std::filesystem::path& path);

  const std::vector<Section>& sections() const { return sections_; }
  const Section* find(std::string_view name) const;

 private:
  std::vector<Section> sections_;
};

std::uint64_t parse_uint(std::string_view text, std::string_view what);
double parse_double(std::string_view text, std::string_view what);
bool parse_bool(std::string_view text, std::string_view what);

/// Splits on `sep`, trimming whitespace and dropping empty items.
std::vector<std::string> split_list(std::string_view text, char sep = ',');

/// Parses "a:b, c:d" into pairs.
std::vector<std::pair<std::string, std::string>> parse_pairs(
    std::string_view text, char sep = ',', char kv = ':');

std::string trim(std::string_view text);

/// 64-bit FNV-1a, stable across platforms.
std::uint64_t fnv1a64(std::string_view data);

}  // namespace btbsim

#endif  // BTBSIM_CONFIG_HPP
