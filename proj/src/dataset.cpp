#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>
#include <string_view>

#include "bilevel/problems.hpp"

namespace bilevel {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

}  // namespace

Dataset load_dataset_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset '" + path.string() + "'");
  Dataset ds;
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError(1, "empty file '" + path.string() + "'");
  ++line_no;
  for (const auto& cell : split_csv(line)) ds.header.emplace_back(trim(cell));
  if (ds.header.size() < 2) throw ParseError(1, "need at least one feature and a label column");
  const std::size_t width = ds.header.size();

  std::vector<double> values;
  std::vector<double> labels;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != width) {
      throw ParseError(line_no, "expected " + std::to_string(width) + " fields, got " +
                                    std::to_string(cells.size()));
    }
    for (std::size_t j = 0; j + 1 < width; ++j) {
      double v = 0.0;
      if (!parse_double(cells[j], v)) {
        throw ParseError(line_no, "bad value '" + cells[j] + "' in column '" + ds.header[j] + "'");
      }
      values.push_back(v);
    }
    double y = 0.0;
    if (!parse_double(cells.back(), y)) throw ParseError(line_no, "bad label '" + cells.back() + "'");
    if (y != 0.0 && y != 1.0) {
      throw NonBinaryLabel(line_no, "label '" + std::string(trim(cells.back())) + "' is not 0 or 1");
    }
    labels.push_back(y);
  }
  const auto n = static_cast<Eigen::Index>(labels.size());
  const auto p = static_cast<Eigen::Index>(width - 1);
  ds.features.resize(n, p);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < p; ++j) ds.features(i, j) = values[static_cast<std::size_t>(i * p + j)];
  ds.labels = Eigen::Map<const Vector>(labels.data(), n);
  return ds;
}

Dataset take_rows(const Dataset& ds, Eigen::Index n) {
  if (n < 0 || n > ds.rows()) throw ValidationError("n_samples", "exceeds dataset rows");
  Dataset out;
  out.features = ds.features.topRows(n);
  out.labels = ds.labels.head(n);
  out.header = ds.header;
  return out;
}

Dataset synthetic_dataset(Eigen::Index n, Eigen::Index p, std::uint64_t seed) {
  if (n < 1 || p < 1) throw ValidationError("synthetic", "n and p must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vector w(p);
  for (Eigen::Index j = 0; j < p; ++j) w[j] = normal(rng);
  Dataset ds;
  ds.features.resize(n, p);
  ds.labels.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) ds.features(i, j) = normal(rng);
    const double z = ds.features.row(i).dot(w) / std::sqrt(static_cast<double>(p));
    ds.labels[i] = unif(rng) < 1.0 / (1.0 + std::exp(-z)) ? 1.0 : 0.0;
  }
  for (Eigen::Index j = 0; j < p; ++j) ds.header.push_back("x" + std::to_string(j + 1));
  ds.header.push_back("label");
  return ds;
}

std::filesystem::path data_dir() {
  if (const char* env = std::getenv("BILEVEL_DATA_DIR"); env && *env) return env;
#ifdef BILEVEL_DEFAULT_DATA_DIR
  return BILEVEL_DEFAULT_DATA_DIR;
#else
  return "data";
#endif
}

Dataset load_breast_cancer_train() {
  return take_rows(load_dataset_csv(data_dir() / "breast_cancer.csv"), kBreastCancerTrainRows);
}

}  // namespace bilevel
