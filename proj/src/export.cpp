#include "prefshift/export.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <stdexcept>

namespace prefshift {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  return out;
}

}  // namespace

void write_csv(const std::string& path, const std::string& header,
               const std::vector<std::string>& rows) {
  auto out = open_out(path);
  out << header << "\n";
  for (const auto& r : rows) out << r << "\n";
}

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m) {
  auto out = open_out(path);
  out << std::setprecision(17);
  for (long i = 0; i < m.rows(); ++i) {
    for (long j = 0; j < m.cols(); ++j) out << (j ? "," : "") << m(i, j);
    out << "\n";
  }
}

void write_pgm(const std::string& path, const Eigen::MatrixXd& m) {
  auto out = open_out(path);
  const double peak = m.maxCoeff();
  out << "P2\n" << m.cols() << " " << m.rows() << "\n255\n";
  for (long i = 0; i < m.rows(); ++i) {
    for (long j = 0; j < m.cols(); ++j) {
      const int v = peak > 0 ? static_cast<int>(std::lround(255.0 * m(i, j) / peak)) : 0;
      out << (j ? " " : "") << v;
    }
    out << "\n";
  }
}

}  // namespace prefshift
