#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace lazydual {

// Dense desk-scale dataset; labels already mapped to {0,1}.
struct Dataset {
  Eigen::MatrixXd features;  // samples x features
  Eigen::VectorXd labels;

  Eigen::Index num_samples() const { return features.rows(); }
  Eigen::Index num_features() const { return features.cols(); }
};

// LIBSVM sparse text format: "label idx:val idx:val ..." with 1-based
// feature indices. {-1,+1} labels are mapped to {0,1}. Out-of-order
// indices are tolerated; a duplicate index on one line is an error.
inline Dataset load_libsvm(const std::string& path, bool l2_normalize = false,
                           std::int64_t max_nonzeros = 1000000) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset: " + path);

  struct Row {
    double label;
    std::vector<std::pair<int, double>> entries;
  };
  std::vector<Row> rows;
  int max_index = 0;
  std::int64_t nonzeros = 0;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto at = [&] { return " at line " + std::to_string(lineno); };
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    Row row;
    if (!(ls >> row.label))
      throw std::runtime_error("libsvm parse error: bad label" + at());
    if (row.label == -1.0) row.label = 0.0;
    if (row.label != 0.0 && row.label != 1.0)
      throw std::runtime_error("libsvm parse error: label not in {-1,0,+1}" +
                               at());
    std::string tok;
    std::set<int> seen;
    while (ls >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos)
        throw std::runtime_error("libsvm parse error: missing ':'" + at());
      int idx;
      double val;
      try {
        idx = std::stoi(tok.substr(0, colon));
        val = std::stod(tok.substr(colon + 1));
      } catch (const std::exception&) {
        throw std::runtime_error("libsvm parse error: bad idx:val" + at());
      }
      if (idx < 1)
        throw std::runtime_error("libsvm parse error: index must be >= 1" +
                                 at());
      if (!seen.insert(idx).second)
        throw std::runtime_error("libsvm parse error: duplicate index" + at());
      row.entries.emplace_back(idx, val);
      max_index = std::max(max_index, idx);
      if (++nonzeros > max_nonzeros)
        throw std::runtime_error("dataset exceeds the nonzero cap");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("empty dataset: " + path);

  Dataset ds;
  ds.features = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()),
                                      max_index);
  ds.labels.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    ds.labels(static_cast<Eigen::Index>(r)) = rows[r].label;
    for (auto [idx, val] : rows[r].entries)
      ds.features(static_cast<Eigen::Index>(r), idx - 1) = val;
  }
  if (l2_normalize) {
    for (Eigen::Index r = 0; r < ds.features.rows(); ++r) {
      const double nrm = ds.features.row(r).norm();
      if (nrm > 0.0) ds.features.row(r) /= nrm;
    }
  }
  return ds;
}

}  // namespace lazydual
