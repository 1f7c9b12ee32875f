#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "prefshift/rng.hpp"

namespace prefshift::nn {

using Mat = Eigen::MatrixXd;

/// Reverse-mode autodiff over dense matrices.
///
/// Nodes are appended in topological order by construction; backward() walks
/// the tape once in reverse. Values are row-major in the batch sense: the
/// first dimension is the batch, so a bias is a 1 x C row broadcast.
/// The tape is rebuilt per forward pass (define-by-run) and is intended for
/// small recurrent models; everything is double precision so analytic
/// gradients can be validated against central finite differences tightly.
class Tape {
 public:
  /// Leaf with gradient (parameters, probe inputs).
  int leaf(Mat v);
  /// Leaf without gradient (data).
  int constant(Mat v);

  int matmul(int a, int b);
  int add(int a, int b);         // same shape, or b a 1 x C row (bias broadcast)
  int sub(int a, int b);         // same shape
  int mul(int a, int b);         // elementwise, same shape
  int mul_colbcast(int a, int col);  // scale row i of a by col(i, 0)
  int div_colbcast(int a, int col);
  int add_scalar(int a, double s);
  int scale(int a, double s);
  int sigmoid(int a);
  int tanh_(int a);
  int exp_(int a);
  int log_(int a);
  int sqrt_(int a);
  int square(int a);
  int softmax_rows(int a);
  int sum_rows(int a);  // R x C -> R x 1
  int sum_all(int a);   // -> 1 x 1
  int mean_all(int a);  // -> 1 x 1
  int concat_cols(const std::vector<int>& parts);
  int slice_cols(int a, int start, int len);
  int min_(int a, int b);             // elementwise; ties route gradient to a
  int clamp_(int a, double lo, double hi);
  int one_minus(int a);  // 1 - a

  /// Backprop from a scalar (1 x 1) node.
  void backward(int node);

  const Mat& value(int id) const { return nodes_[id].v; }
  const Mat& grad(int id) const { return nodes_[id].g; }
  std::size_t size() const { return nodes_.size(); }

 private:
  enum class Op {
    kLeaf, kConst, kMatmul, kAdd, kAddRowBcast, kSub, kMul, kMulColBcast, kDivColBcast,
    kAddScalar, kScale, kSigmoid, kTanh, kExp, kLog, kSqrt, kSquare, kSoftmaxRows,
    kSumRows, kSumAll, kMeanAll, kConcatCols, kSliceCols, kMin, kClamp, kOneMinus,
  };
  struct Node {
    Op op;
    int a = -1, b = -1;
    double s0 = 0.0, s1 = 0.0;
    std::vector<int> multi;
    Mat v, g;
    bool rg = false;
  };

  int push(Node n);
  void ensure_grad(int id);
  bool rg(int id) const { return nodes_[id].rg; }

  std::vector<Node> nodes_;
};

/// Named flat parameter collection with matching gradient slots; the unit of
/// checkpointing and optimizer state.
struct ParamSet {
  std::vector<std::string> names;
  std::vector<Mat> values;

  int add(const std::string& name, int rows, int cols);
  int index_of(const std::string& name) const;
  Mat& operator[](int i) { return values[i]; }
  const Mat& operator[](int i) const { return values[i]; }
  std::size_t total_size() const;
  Eigen::VectorXd flatten() const;
  void unflatten(const Eigen::VectorXd& flat);
};

/// Uniform Xavier/Glorot initialization.
void glorot_init(ParamSet& params, Rng& rng);

/// Adam with bias correction; per-ParamSet state.
class AdamOptimizer {
 public:
  AdamOptimizer(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
  void step(ParamSet& params, const std::vector<Mat>& grads);
  void set_lr(double lr) { lr_ = lr; }

 private:
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<Mat> m_, v_;
};

}  // namespace prefshift::nn
