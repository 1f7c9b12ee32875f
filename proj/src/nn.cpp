#include "prefshift/nn.hpp"

#include <cmath>
#include <stdexcept>

namespace prefshift::nn {

int Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size()) - 1;
}

void Tape::ensure_grad(int id) {
  Node& n = nodes_[id];
  if (n.g.size() == 0) n.g = Mat::Zero(n.v.rows(), n.v.cols());
}

int Tape::leaf(Mat v) {
  Node n;
  n.op = Op::kLeaf;
  n.v = std::move(v);
  n.rg = true;
  return push(std::move(n));
}

int Tape::constant(Mat v) {
  Node n;
  n.op = Op::kConst;
  n.v = std::move(v);
  n.rg = false;
  return push(std::move(n));
}

int Tape::matmul(int a, int b) {
  Node n;
  n.op = Op::kMatmul;
  n.a = a;
  n.b = b;
  n.v.noalias() = nodes_[a].v * nodes_[b].v;
  n.rg = rg(a) || rg(b);
  return push(std::move(n));
}

int Tape::add(int a, int b) {
  Node n;
  n.a = a;
  n.b = b;
  const Mat& va = nodes_[a].v;
  const Mat& vb = nodes_[b].v;
  if (vb.rows() == 1 && va.rows() > 1) {
    if (vb.cols() != va.cols()) throw std::invalid_argument("Tape::add: bias width mismatch");
    n.op = Op::kAddRowBcast;
    n.v = va.rowwise() + vb.row(0);
  } else {
    if (va.rows() != vb.rows() || va.cols() != vb.cols())
      throw std::invalid_argument("Tape::add: shape mismatch");
    n.op = Op::kAdd;
    n.v = va + vb;
  }
  n.rg = rg(a) || rg(b);
  return push(std::move(n));
}

int Tape::sub(int a, int b) {
  Node n;
  n.op = Op::kSub;
  n.a = a;
  n.b = b;
  n.v = nodes_[a].v - nodes_[b].v;
  n.rg = rg(a) || rg(b);
  return push(std::move(n));
}

int Tape::mul(int a, int b) {
  Node n;
  n.op = Op::kMul;
  n.a = a;
  n.b = b;
  n.v = nodes_[a].v.cwiseProduct(nodes_[b].v);
  n.rg = rg(a) || rg(b);
  return push(std::move(n));
}

int Tape::mul_colbcast(int a, int col) {
  Node n;
  n.op = Op::kMulColBcast;
  n.a = a;
  n.b = col;
  n.v = nodes_[a].v.array().colwise() * nodes_[col].v.col(0).array();
  n.rg = rg(a) || rg(col);
  return push(std::move(n));
}

int Tape::div_colbcast(int a, int col) {
  Node n;
  n.op = Op::kDivColBcast;
  n.a = a;
  n.b = col;
  n.v = nodes_[a].v.array().colwise() / nodes_[col].v.col(0).array();
  n.rg = rg(a) || rg(col);
  return push(std::move(n));
}

int Tape::add_scalar(int a, double s) {
  Node n;
  n.op = Op::kAddScalar;
  n.a = a;
  n.s0 = s;
  n.v = nodes_[a].v.array() + s;
  n.rg = rg(a);
  return push(std::move(n));
}

int Tape::scale(int a, double s) {
  Node n;
  n.op = Op::kScale;
  n.a = a;
  n.s0 = s;
  n.v = nodes_[a].v * s;
  n.rg = rg(a);
  return push(std::move(n));
}

int Tape::sigmoid(int a) {
  Node n;
  n.op = Op::kSigmoid;
  n.a = a;
  n.v = 1.0 / (1.0 + (-nodes_[a].v.array()).exp());
  n.rg = rg(a);
  return push(std::move(n));
}

int Tape::tanh_(int a) {
  Node n;
  n.op = Op::kTanh;
  n.a = a;
  n.v = nodes_[a].v.array().tanh();
  n.rg = rg(a);
  return push(std::move(n));
}

int Tape::exp_(int a) {
  Node n;
  n.op = Op::kExp;
  n.a = a;
  n.v = nodes_[a].v.array().exp();
  n.rg = rg(a);
  return push(std::move(n));
}

int Tape::log_(int a) {
  Node n;
  n.op = Op::kLog;
  n.a = a;
  n.v = nodes_[a].v.array().log();
  n.rg = rg(a);
  return push(std::move(n));
}

int Tape::sqrt_(int a) {
  Node n;
  n.op = Op::kSqrt;
  n.a = a;
  n.v = nodes_[a].v.array().sqrt();
  n.rg = rg(a);
  return push(std::move(n));
}

int Tape::square(int a) {
  Node n;
  n.op = Op::kSquare;
  n.a = a;
  n.v = nodes_[a].v.array().square();
  n.rg = rg(a);
  return push(std::move(n));
}

int Tape::softmax_rows(int a) {
  Node n;
  n.op = Op::kSoftmaxRows;
  n.a = a;
  Mat e = (nodes_[a].v.colwise() - nodes_[a].v.rowwise().maxCoeff()).array().exp();
  n.v = e.array().colwise() / e.rowwise().sum().array();
  n.rg = rg(a);
  return push(std::move(n));
}

int Tape::sum_rows(int a) {
  Node n;
  n.op = Op::kSumRows;
  n.a = a;
  n.v = nodes_[a].v.rowwise().sum();
  n.rg = rg(a);
  return push(std::move(n));
}

int Tape::sum_all(int a) {
  Node n;
  n.op = Op::kSumAll;
  n.a = a;
  n.v = Mat::Constant(1, 1, nodes_[a].v.sum());
  n.rg = rg(a);
  return push(std::move(n));
}

int Tape::mean_all(int a) {
  Node n;
  n.op = Op::kMeanAll;
  n.a = a;
  n.v = Mat::Constant(1, 1, nodes_[a].v.mean());
  n.rg = rg(a);
  return push(std::move(n));
}

int Tape::concat_cols(const std::vector<int>& parts) {
  if (parts.empty()) throw std::invalid_argument("Tape::concat_cols: empty");
  Node n;
  n.op = Op::kConcatCols;
  n.multi = parts;
  long rows = nodes_[parts[0]].v.rows();
  long cols = 0;
  for (int p : parts) cols += nodes_[p].v.cols();
  n.v.resize(rows, cols);
  long at = 0;
  for (int p : parts) {
    n.v.middleCols(at, nodes_[p].v.cols()) = nodes_[p].v;
    at += nodes_[p].v.cols();
    n.rg = n.rg || rg(p);
  }
  return push(std::move(n));
}

int Tape::slice_cols(int a, int start, int len) {
  Node n;
  n.op = Op::kSliceCols;
  n.a = a;
  n.s0 = start;
  n.s1 = len;
  n.v = nodes_[a].v.middleCols(start, len);
  n.rg = rg(a);
  return push(std::move(n));
}

int Tape::min_(int a, int b) {
  Node n;
  n.op = Op::kMin;
  n.a = a;
  n.b = b;
  n.v = nodes_[a].v.cwiseMin(nodes_[b].v);
  n.rg = rg(a) || rg(b);
  return push(std::move(n));
}

int Tape::clamp_(int a, double lo, double hi) {
  Node n;
  n.op = Op::kClamp;
  n.a = a;
  n.s0 = lo;
  n.s1 = hi;
  n.v = nodes_[a].v.array().max(lo).min(hi);
  n.rg = rg(a);
  return push(std::move(n));
}

int Tape::one_minus(int a) {
  Node n;
  n.op = Op::kOneMinus;
  n.a = a;
  n.v = 1.0 - nodes_[a].v.array();
  n.rg = rg(a);
  return push(std::move(n));
}

void Tape::backward(int node) {
  if (nodes_[node].v.size() != 1)
    throw std::invalid_argument("Tape::backward: root must be scalar");
  ensure_grad(node);
  nodes_[node].g(0, 0) = 1.0;
  for (int i = node; i >= 0; --i) {
    Node& n = nodes_[i];
    if (!n.rg || n.g.size() == 0) continue;
    const Mat& g = n.g;
    auto acc = [&](int p, auto&& expr) {
      if (p < 0 || !nodes_[p].rg) return;
      ensure_grad(p);
      nodes_[p].g += expr;
    };
    switch (n.op) {
      case Op::kLeaf:
      case Op::kConst:
        break;
      case Op::kMatmul:
        acc(n.a, g * nodes_[n.b].v.transpose());
        acc(n.b, nodes_[n.a].v.transpose() * g);
        break;
      case Op::kAdd:
        acc(n.a, g);
        acc(n.b, g);
        break;
      case Op::kAddRowBcast:
        acc(n.a, g);
        acc(n.b, g.colwise().sum());
        break;
      case Op::kSub:
        acc(n.a, g);
        acc(n.b, -g);
        break;
      case Op::kMul:
        acc(n.a, g.cwiseProduct(nodes_[n.b].v));
        acc(n.b, g.cwiseProduct(nodes_[n.a].v));
        break;
      case Op::kMulColBcast:
        acc(n.a, Mat(g.array().colwise() * nodes_[n.b].v.col(0).array()));
        acc(n.b, g.cwiseProduct(nodes_[n.a].v).rowwise().sum());
        break;
      case Op::kDivColBcast:
        acc(n.a, Mat(g.array().colwise() / nodes_[n.b].v.col(0).array()));
        acc(n.b, Mat(-(g.cwiseProduct(n.v).rowwise().sum().array() /
                       nodes_[n.b].v.col(0).array())));
        break;
      case Op::kAddScalar:
        acc(n.a, g);
        break;
      case Op::kScale:
        acc(n.a, g * n.s0);
        break;
      case Op::kSigmoid:
        acc(n.a, Mat(g.array() * n.v.array() * (1.0 - n.v.array())));
        break;
      case Op::kTanh:
        acc(n.a, Mat(g.array() * (1.0 - n.v.array().square())));
        break;
      case Op::kExp:
        acc(n.a, g.cwiseProduct(n.v));
        break;
      case Op::kLog:
        acc(n.a, g.cwiseQuotient(nodes_[n.a].v));
        break;
      case Op::kSqrt:
        acc(n.a, Mat(g.array() * 0.5 / n.v.array()));
        break;
      case Op::kSquare:
        acc(n.a, Mat(g.array() * 2.0 * nodes_[n.a].v.array()));
        break;
      case Op::kSoftmaxRows: {
        const Mat dot = g.cwiseProduct(n.v).rowwise().sum();
        acc(n.a, n.v.cwiseProduct(Mat(g.colwise() - dot.col(0))));
        break;
      }
      case Op::kSumRows:
        acc(n.a, g.col(0).replicate(1, nodes_[n.a].v.cols()));
        break;
      case Op::kSumAll:
        acc(n.a, Mat::Constant(nodes_[n.a].v.rows(), nodes_[n.a].v.cols(), g(0, 0)));
        break;
      case Op::kMeanAll:
        acc(n.a, Mat::Constant(nodes_[n.a].v.rows(), nodes_[n.a].v.cols(),
                               g(0, 0) / nodes_[n.a].v.size()));
        break;
      case Op::kConcatCols: {
        long at = 0;
        for (int p : n.multi) {
          const long w = nodes_[p].v.cols();
          if (nodes_[p].rg) {
            ensure_grad(p);
            nodes_[p].g += g.middleCols(at, w);
          }
          at += w;
        }
        break;
      }
      case Op::kSliceCols: {
        if (nodes_[n.a].rg) {
          ensure_grad(n.a);
          nodes_[n.a].g.middleCols(static_cast<long>(n.s0), static_cast<long>(n.s1)) += g;
        }
        break;
      }
      case Op::kMin: {
        const Mat takes_a = (nodes_[n.a].v.array() <= nodes_[n.b].v.array()).cast<double>();
        acc(n.a, g.cwiseProduct(takes_a));
        acc(n.b, g.cwiseProduct(Mat(1.0 - takes_a.array())));
        break;
      }
      case Op::kClamp: {
        const Mat inside = ((nodes_[n.a].v.array() >= n.s0) && (nodes_[n.a].v.array() <= n.s1))
                               .cast<double>();
        acc(n.a, g.cwiseProduct(inside));
        break;
      }
      case Op::kOneMinus:
        acc(n.a, -g);
        break;
    }
  }
}

int ParamSet::add(const std::string& name, int rows, int cols) {
  names.push_back(name);
  values.emplace_back(Mat::Zero(rows, cols));
  return static_cast<int>(values.size()) - 1;
}

int ParamSet::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return static_cast<int>(i);
  throw std::invalid_argument("ParamSet: unknown parameter " + name);
}

std::size_t ParamSet::total_size() const {
  std::size_t n = 0;
  for (const auto& m : values) n += m.size();
  return n;
}

Eigen::VectorXd ParamSet::flatten() const {
  Eigen::VectorXd flat(total_size());
  long at = 0;
  for (const auto& m : values) {
    flat.segment(at, m.size()) = Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
    at += m.size();
  }
  return flat;
}

void ParamSet::unflatten(const Eigen::VectorXd& flat) {
  long at = 0;
  for (auto& m : values) {
    Eigen::Map<Eigen::VectorXd>(m.data(), m.size()) = flat.segment(at, m.size());
    at += m.size();
  }
}

void glorot_init(ParamSet& params, Rng& rng) {
  for (auto& m : params.values) {
    if (m.rows() == 1) {
      m.setZero();  // biases
      continue;
    }
    const double bound = std::sqrt(6.0 / (m.rows() + m.cols()));
    for (long i = 0; i < m.size(); ++i) m.data()[i] = (2.0 * rng.uniform01() - 1.0) * bound;
  }
}

AdamOptimizer::AdamOptimizer(double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

void AdamOptimizer::step(ParamSet& params, const std::vector<Mat>& grads) {
  if (m_.empty()) {
    for (const auto& p : params.values) {
      m_.push_back(Mat::Zero(p.rows(), p.cols()));
      v_.push_back(Mat::Zero(p.rows(), p.cols()));
    }
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, t_);
  const double bc2 = 1.0 - std::pow(beta2_, t_);
  for (std::size_t i = 0; i < params.values.size(); ++i) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grads[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grads[i].cwiseProduct(grads[i]);
    params.values[i].array() -=
        lr_ * (m_[i].array() / bc1) / ((v_[i].array() / bc2).sqrt() + eps_);
  }
}

}  // namespace prefshift::nn
