#include "siglift/io.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "siglift/errors.hpp"

namespace siglift {

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

static std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    out.push_back(cell);
  }
  return out;
}

static double parse_double(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw ValidationError("not a number in CSV: '" + s + "'");
}

void write_path_csv(std::ostream& os, const SamplePath& path) {
  for (std::size_t i = 0; i < path.dim; ++i) os << (i ? "," : "") << "xi_" << i;
  os << '\n';
  for (std::size_t k = 0; k < path.size(); ++k) {
    const auto r = path.row(k);
    for (std::size_t i = 0; i < path.dim; ++i) os << (i ? "," : "") << format_double(r[i]);
    os << '\n';
  }
}

SamplePath read_path_csv(std::istream& is) {
  std::string line;
  require(static_cast<bool>(std::getline(is, line)), "path CSV is empty");
  const auto header = split_csv(line);
  require(!header.empty(), "path CSV has no columns");
  for (std::size_t i = 0; i < header.size(); ++i)
    require(header[i] == "xi_" + std::to_string(i), "path CSV header must be xi_0,...,xi_{d-1}");
  SamplePath path;
  path.dim = header.size();
  while (std::getline(is, line)) {
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv(line);
    require(cells.size() == path.dim, "ragged row in path CSV");
    for (const auto& c : cells) path.values.push_back(parse_double(c));
  }
  return path;
}

nlohmann::json path_manifest(const SamplePath& path) {
  return {{"kind", to_string(path.kind)}, {"d", path.dim}, {"n", path.size()},
          {"delta", path.delta}, {"seed", path.seed}};
}

void apply_manifest(SamplePath& path, const nlohmann::json& m) {
  if (m.contains("kind")) path.kind = path_kind_from_string(m["kind"].get<std::string>());
  if (m.contains("delta")) path.delta = m["delta"].get<double>();
  if (m.contains("seed")) path.seed = m["seed"].get<std::uint64_t>();
  if (m.contains("d")) require(m["d"].get<std::size_t>() == path.dim, "manifest dimension differs from the CSV");
  if (m.contains("n")) require(m["n"].get<std::size_t>() == path.size(), "manifest length differs from the CSV");
}

void write_prefix_csv(std::ostream& os, const std::vector<GradedTensor>& prefixes,
                      const std::vector<double>& times) {
  require(prefixes.size() == times.size(), "prefix CSV: one time per state");
  if (prefixes.empty()) return;
  const std::size_t d = prefixes[0].dim(), depth = prefixes[0].depth();
  os << 't';
  for (std::size_t k = 1; k <= depth; ++k)
    for (std::size_t i = 0; i < prefixes[0].level_size(k); ++i) os << ",l" << k << '_' << i;
  os << '\n';
  for (std::size_t j = 0; j < prefixes.size(); ++j) {
    require(prefixes[j].dim() == d && prefixes[j].depth() == depth, "prefix CSV: mixed shapes");
    os << format_double(times[j]);
    for (std::size_t k = 1; k <= depth; ++k)
      for (double v : prefixes[j].level(k)) os << ',' << format_double(v);
    os << '\n';
  }
}

std::vector<GradedTensor> read_prefix_csv(std::istream& is, std::vector<double>* times) {
  std::string line;
  require(static_cast<bool>(std::getline(is, line)), "prefix CSV is empty");
  const auto header = split_csv(line);
  require(!header.empty() && header[0] == "t", "prefix CSV header must start with t");
  std::size_t d = 0, depth = 0;
  for (std::size_t c = 1; c < header.size(); ++c) {
    const auto& h = header[c];
    const auto us = h.find('_');
    require(h.size() > 1 && h[0] == 'l' && us != std::string::npos, "bad prefix CSV column '" + h + "'");
    const std::size_t k = std::stoul(h.substr(1, us - 1));
    if (k == 1) ++d;
    depth = std::max(depth, k);
  }
  require(d >= 1 && depth >= 1, "prefix CSV has no level columns");
  std::vector<GradedTensor> out;
  while (std::getline(is, line)) {
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv(line);
    require(cells.size() == header.size(), "ragged row in prefix CSV");
    GradedTensor g(d, depth);
    std::size_t c = 1;
    for (std::size_t k = 1; k <= depth; ++k)
      for (double& v : g.level(k)) v = parse_double(cells[c++]);
    if (times) times->push_back(parse_double(cells[0]));
    out.push_back(std::move(g));
  }
  return out;
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream f(path);
  require(static_cast<bool>(f), "cannot open " + path);
  try {
    return nlohmann::json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("malformed JSON in " + path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << text;
  if (!f) throw std::runtime_error("write failed for " + path);
}

}  // namespace siglift
