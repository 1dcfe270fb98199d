#include "settings.hpp"

#include <boost/property_tree/ini_parser.hpp>

namespace porestat::cli {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

}  // namespace

Settings Settings::load(const std::optional<std::string>& path) {
  Settings s;
  if (!path) return s;
  s.source_ = *path;
  try {
    boost::property_tree::ini_parser::read_ini(*path, s.tree_);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw UsageError("config file " + *path + ": " + e.message() + " (line " +
                     std::to_string(e.line()) + ")");
  }
  return s;
}

std::optional<std::string> Settings::raw(const std::string& key) const {
  const auto v = tree_.get_optional<std::string>(key);
  if (!v) return std::nullopt;
  return trim(*v);
}

std::vector<double> parse_number_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const std::string cell = trim(text.substr(start, comma == std::string::npos ? std::string::npos
                                                                               : comma - start));
    if (!cell.empty()) {
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc{} || ptr != cell.data() + cell.size()) {
        throw UsageError(what + ": cannot parse '" + cell + "'");
      }
      out.push_back(v);
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace porestat::cli
