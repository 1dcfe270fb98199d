#pragma once

#include <charconv>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/property_tree/ptree.hpp>

namespace porestat::cli {

// Bad flags, bad config values, unresolvable paths: exit code 1.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Optional INI file of `[section]` blocks with `key = value` lines. Lookups
// take "section.key"; a flag given on the command line always wins.
class Settings {
 public:
  static Settings load(const std::optional<std::string>& path);

  std::optional<std::string> raw(const std::string& key) const;

  template <class T>
  std::optional<T> find(const std::optional<T>& flag, const std::string& key) const {
    if (flag) return flag;
    const auto text = raw(key);
    if (!text) return std::nullopt;
    return convert<T>(*text, key);
  }

  template <class T>
  T get(const std::optional<T>& flag, const std::string& key, T fallback) const {
    return find(flag, key).value_or(std::move(fallback));
  }

  const std::string& source() const noexcept { return source_; }

 private:
  template <class T>
  static T convert(const std::string& text, const std::string& key) {
    if constexpr (std::is_same_v<T, std::string>) {
      return text;
    } else {
      T v{};
      const char* end = text.data() + text.size();
      auto [ptr, ec] = std::from_chars(text.data(), end, v);
      if (ec != std::errc{} || ptr != end || text.empty()) {
        throw UsageError("config key '" + key + "': cannot parse '" + text + "'");
      }
      return v;
    }
  }

  boost::property_tree::ptree tree_;
  std::string source_;
};

/// Comma-separated numbers; throws UsageError naming `what` on a bad entry.
std::vector<double> parse_number_list(const std::string& text, const std::string& what);

}  // namespace porestat::cli
