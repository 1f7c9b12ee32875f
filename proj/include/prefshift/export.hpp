#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

namespace prefshift {

void write_csv(const std::string& path, const std::string& header,
               const std::vector<std::string>& rows);

/// Matrix as CSV, one row per line, 17 significant digits.
void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m);

/// 8-bit ASCII portable graymap, entries scaled by the matrix maximum.
void write_pgm(const std::string& path, const Eigen::MatrixXd& m);

}  // namespace prefshift
