#include "clipfl/libsvm.hpp"

#include "clipfl/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <set>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace clipfl {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v'; }

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    const std::size_t start = i;
    while (i < line.size() && !is_space(line[i])) ++i;
    if (i > start) tokens.push_back(line.substr(start, i - start));
  }
  return tokens;
}

double parse_double(std::string_view tok, std::size_t line, const char* what) {
  // from_chars rejects a leading '+', which libsvm labels commonly carry.
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(value)) {
    throw ParseError(line, std::string("invalid ") + what + " '" + std::string(tok) + "'");
  }
  return value;
}

}  // namespace

LibsvmDataset read_libsvm(std::istream& in) {
  std::vector<double> raw_labels;
  std::vector<Eigen::Triplet<double>> entries;
  std::size_t max_index = 0;
  std::string line;
  std::size_t line_no = 0;
  std::unordered_set<std::size_t> seen;

  while (std::getline(in, line)) {
    ++line_no;
    const auto tokens = split_ws(line);
    if (tokens.empty()) continue;
    const auto row = static_cast<int>(raw_labels.size());
    raw_labels.push_back(parse_double(tokens[0], line_no, "label"));
    seen.clear();
    for (std::size_t t = 1; t < tokens.size(); ++t) {
      const auto tok = tokens[t];
      const auto colon = tok.find(':');
      if (colon == std::string_view::npos || colon == 0 || colon + 1 == tok.size()) {
        throw ParseError(line_no, "expected idx:value, got '" + std::string(tok) + "'");
      }
      std::size_t index = 0;
      const auto idx_tok = tok.substr(0, colon);
      const auto [ptr, ec] = std::from_chars(idx_tok.data(), idx_tok.data() + idx_tok.size(), index);
      if (ec != std::errc() || ptr != idx_tok.data() + idx_tok.size() || index == 0) {
        throw ParseError(line_no, "invalid feature index '" + std::string(idx_tok) + "'");
      }
      if (!seen.insert(index).second) {
        throw ParseError(line_no, "duplicate feature index " + std::to_string(index));
      }
      const double value = parse_double(tok.substr(colon + 1), line_no, "feature value");
      max_index = std::max(max_index, index);
      entries.emplace_back(row, static_cast<int>(index - 1), value);
    }
  }
  if (raw_labels.empty()) throw InputError("libsvm input contains no samples");

  const std::set<double> distinct(raw_labels.begin(), raw_labels.end());
  if (distinct.size() > 2) {
    throw ParseError(line_no, "expected binary labels, found " + std::to_string(distinct.size()) +
                                  " distinct values");
  }
  LibsvmDataset ds;
  ds.labels.resize(static_cast<Eigen::Index>(raw_labels.size()));
  const double positive = *distinct.rbegin();
  for (std::size_t i = 0; i < raw_labels.size(); ++i) {
    const bool is_pos = distinct.size() == 2 ? raw_labels[i] == positive : raw_labels[i] > 0.0;
    ds.labels[static_cast<Eigen::Index>(i)] = is_pos ? 1.0 : -1.0;
  }
  ds.features.resize(static_cast<Eigen::Index>(raw_labels.size()),
                     static_cast<Eigen::Index>(max_index));
  ds.features.setFromTriplets(entries.begin(), entries.end());
  ds.features.makeCompressed();
  return ds;
}

LibsvmDataset load_libsvm(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open libsvm file '" + path.string() + "'");
  return read_libsvm(in);
}

}  // namespace clipfl
