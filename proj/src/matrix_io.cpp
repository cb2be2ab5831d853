#include <cstdio>
#include <sstream>

#include "bellsim/gaussian.hpp"

namespace bellsim {

std::string dump_matrix(const Matrix& m) {
  std::string out;
  char buf[32];
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
      if (j > 0) out += ' ';
      out += buf;
    }
    out += '\n';
  }
  return out;
}

Matrix parse_matrix(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    std::istringstream cells(line);
    std::vector<double> row;
    double v;
    while (cells >> v) row.push_back(v);
    if (!cells.eof()) throw std::invalid_argument("parse_matrix: malformed number");
    if (row.empty()) continue;
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw std::invalid_argument("parse_matrix: ragged rows");
    }
    rows.push_back(std::move(row));
  }
  Matrix m(rows.size(), rows.empty() ? 0 : rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

}  // namespace bellsim
