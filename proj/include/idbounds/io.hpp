// File formats and report serialization.
//
// Channels load from JSON ({"input_labels": [...], "output_labels": [...],
// "rows": [[...], ...]}) or CSV (one row per input symbol), and from the
// built-in names bsc:<p>, bec:<p>, identity:<k>, useless:<k>x<m>.
// Distributions load from a JSON array, {"probs": [...]}, a CSV line, or
// the names uniform:<k> and point:<k>:<i>.  Identification codes load from
// {"encoders": [[...]], "acceptors": [[y-indices]]}.

#ifndef IDBOUNDS_IO_HPP
#define IDBOUNDS_IO_HPP

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "idbounds/core.hpp"
#include "idbounds/idcode.hpp"

namespace idbounds {

using Json = nlohmann::json;

namespace io {

/// FNV-1a 64-bit hash, hex encoded; used to fingerprint input files in
/// run manifests.
inline std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace detail_io {

inline bool has_prefix(const std::string& s, const char* prefix) {
  return s.rfind(prefix, 0) == 0;
}

inline bool looks_like_named_channel(const std::string& spec) {
  return has_prefix(spec, "bsc:") || has_prefix(spec, "bec:") ||
         has_prefix(spec, "identity:") || has_prefix(spec, "useless:");
}

inline bool looks_like_named_distribution(const std::string& spec) {
  return has_prefix(spec, "uniform:") || has_prefix(spec, "point:");
}

inline std::vector<double> parse_csv_line(const std::string& line) {
  std::vector<double> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    if (cell.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(std::stod(cell));
    } catch (const std::exception&) {
      throw ValidationError("CSV: cannot parse number '" + cell + "'");
    }
  }
  return out;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, sep)) parts.push_back(part);
  return parts;
}

inline long parse_long(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    long v = std::stol(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ValidationError(what + ": cannot parse integer '" + s + "'");
  }
}

inline double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ValidationError(what + ": cannot parse number '" + s + "'");
  }
}

}  // namespace detail_io

/// Channel with display labels attached (labels never affect the math).
struct LabeledChannel {
  Channel channel{std::vector<double>{1.0}, 1, 1};
  std::vector<std::string> input_labels;
  std::vector<std::string> output_labels;
  std::string source;  // file path or builtin spec
  std::string hash;    // fingerprint of the bytes or of the spec string
};

inline LabeledChannel named_channel(const std::string& spec) {
  auto parts = detail_io::split(spec, ':');
  LabeledChannel lc;
  lc.source = spec;
  lc.hash = fnv1a_hex(spec);
  if (parts.size() == 2 && parts[0] == "bsc") {
    lc.channel = Channel::bsc(detail_io::parse_double(parts[1], "bsc"));
    lc.input_labels = {"0", "1"};
    lc.output_labels = {"0", "1"};
    return lc;
  }
  if (parts.size() == 2 && parts[0] == "bec") {
    lc.channel = Channel::bec(detail_io::parse_double(parts[1], "bec"));
    lc.input_labels = {"0", "1"};
    lc.output_labels = {"0", "e", "1"};
    return lc;
  }
  if (parts.size() == 2 && parts[0] == "identity") {
    long k = detail_io::parse_long(parts[1], "identity");
    detail::check(k >= 1, "identity: size must be >= 1");
    lc.channel = Channel::identity(static_cast<std::size_t>(k));
    return lc;
  }
  if (parts.size() == 2 && parts[0] == "useless") {
    auto dims = detail_io::split(parts[1], 'x');
    detail::check(dims.size() == 2, "useless: expected useless:<inputs>x<outputs>");
    long k = detail_io::parse_long(dims[0], "useless");
    long m = detail_io::parse_long(dims[1], "useless");
    detail::check(k >= 1 && m >= 1, "useless: sizes must be >= 1");
    lc.channel = Channel::useless(static_cast<std::size_t>(k), static_cast<std::size_t>(m));
    return lc;
  }
  throw ValidationError("unknown channel name '" + spec +
                        "' (expected bsc:<p>, bec:<p>, identity:<k>, useless:<k>x<m>)");
}

inline LabeledChannel parse_channel_text(const std::string& text, const std::string& source) {
  LabeledChannel lc;
  lc.source = source;
  lc.hash = fnv1a_hex(text);
  std::size_t first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    Json j = Json::parse(text);
    detail::check(j.contains("rows"), "channel JSON must contain \"rows\"");
    std::vector<std::vector<double>> rows;
    for (const auto& row : j.at("rows")) rows.push_back(row.get<std::vector<double>>());
    lc.channel = Channel(rows);
    if (j.contains("input_labels"))
      lc.input_labels = j.at("input_labels").get<std::vector<std::string>>();
    if (j.contains("output_labels"))
      lc.output_labels = j.at("output_labels").get<std::vector<std::string>>();
    detail::check(lc.input_labels.empty() || lc.input_labels.size() == lc.channel.input_size(),
                  "channel JSON: input_labels length mismatch");
    detail::check(
        lc.output_labels.empty() || lc.output_labels.size() == lc.channel.output_size(),
        "channel JSON: output_labels length mismatch");
    return lc;
  }
  std::vector<std::vector<double>> rows;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    std::vector<double> row = detail_io::parse_csv_line(line);
    if (!row.empty()) rows.push_back(std::move(row));
  }
  detail::check(!rows.empty(), "channel CSV: no rows found in " + source);
  lc.channel = Channel(rows);
  return lc;
}

/// Accepts a builtin name or a path to a JSON/CSV file.
inline LabeledChannel load_channel(const std::string& spec) {
  if (detail_io::looks_like_named_channel(spec)) return named_channel(spec);
  return parse_channel_text(read_file(spec), spec);
}

inline Distribution parse_distribution_text(const std::string& text) {
  std::size_t first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && (text[first] == '{' || text[first] == '[')) {
    Json j = Json::parse(text);
    if (j.is_array()) return Distribution(j.get<std::vector<double>>());
    detail::check(j.contains("probs"), "distribution JSON must be an array or contain \"probs\"");
    return Distribution(j.at("probs").get<std::vector<double>>());
  }
  std::vector<double> v = detail_io::parse_csv_line(text);
  detail::check(!v.empty(), "distribution CSV: no entries");
  return Distribution(v);
}

/// Accepts uniform:<k>, point:<k>:<i>, or a path to a JSON/CSV file.
inline Distribution load_distribution(const std::string& spec) {
  if (detail_io::looks_like_named_distribution(spec)) {
    auto parts = detail_io::split(spec, ':');
    if (parts.size() == 2 && parts[0] == "uniform")
      return Distribution::uniform(
          static_cast<std::size_t>(detail_io::parse_long(parts[1], "uniform")));
    if (parts.size() == 3 && parts[0] == "point")
      return Distribution::point_mass(
          static_cast<std::size_t>(detail_io::parse_long(parts[1], "point")),
          static_cast<std::size_t>(detail_io::parse_long(parts[2], "point")));
    throw ValidationError("unknown distribution name '" + spec +
                          "' (expected uniform:<k> or point:<k>:<i>)");
  }
  return parse_distribution_text(read_file(spec));
}

inline IDCode parse_idcode_text(const std::string& text) {
  Json j = Json::parse(text);
  detail::check(j.contains("encoders") && j.contains("acceptors"),
                "code JSON must contain \"encoders\" and \"acceptors\"");
  IDCode code;
  for (const auto& e : j.at("encoders")) code.encoders.emplace_back(e.get<std::vector<double>>());
  for (const auto& d : j.at("acceptors"))
    code.acceptors.push_back(d.get<std::vector<std::size_t>>());
  detail::check(code.encoders.size() == code.acceptors.size(),
                "code JSON: encoders and acceptors must have equal length");
  detail::check(!code.encoders.empty(), "code JSON: empty code");
  return code;
}

inline IDCode load_idcode(const std::string& path) { return parse_idcode_text(read_file(path)); }

inline Json channel_json(const LabeledChannel& lc) {
  Json j;
  if (!lc.input_labels.empty()) j["input_labels"] = lc.input_labels;
  if (!lc.output_labels.empty()) j["output_labels"] = lc.output_labels;
  std::vector<std::vector<double>> rows;
  for (std::size_t x = 0; x < lc.channel.input_size(); ++x)
    rows.push_back(lc.channel.row(x).probs());
  j["rows"] = rows;
  return j;
}

/// Flattens a JSON report into two CSV lines (dotted keys; nested arrays
/// rendered as JSON strings).
inline std::string to_csv(const Json& j) {
  std::vector<std::pair<std::string, std::string>> cells;
  std::function<void(const std::string&, const Json&)> walk = [&](const std::string& prefix,
                                                                  const Json& node) {
    if (node.is_object()) {
      for (auto it = node.begin(); it != node.end(); ++it)
        walk(prefix.empty() ? it.key() : prefix + "." + it.key(), it.value());
    } else if (node.is_array() || node.is_string()) {
      std::string s = node.is_string() ? node.get<std::string>() : node.dump();
      std::string quoted = "\"";
      for (char c : s) {
        if (c == '"') quoted += "\"\"";
        else quoted += c;
      }
      quoted += "\"";
      cells.emplace_back(prefix, quoted);
    } else {
      cells.emplace_back(prefix, node.dump());
    }
  };
  walk("", j);
  std::string header, values;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) {
      header += ",";
      values += ",";
    }
    header += cells[i].first;
    values += cells[i].second;
  }
  return header + "\n" + values + "\n";
}

}  // namespace io
}  // namespace idbounds

#endif  // IDBOUNDS_IO_HPP
