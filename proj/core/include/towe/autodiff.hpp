#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace towe::ad {

using Mat = Eigen::MatrixXd;

/// A named, trainable tensor with gradient and AdamW moment buffers.
struct Parameter {
  std::string name;
  Mat value;
  Mat grad;
  Mat m, v;  // AdamW first/second moments

  Parameter() = default;
  Parameter(std::string n, Mat val)
      : name(std::move(n)),
        value(std::move(val)),
        grad(Mat::Zero(value.rows(), value.cols())),
        m(Mat::Zero(value.rows(), value.cols())),
        v(Mat::Zero(value.rows(), value.cols())) {}

  void zero_grad() { grad.setZero(); }
};

/// Contiguous row range of a packed token matrix; one segment per sentence.
struct Segment {
  int offset = 0;
  int length = 0;
};

/// Handle into a Tape. Default-constructed handles are invalid.
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

/// Reverse-mode tape over Eigen matrices. Construction order is the
/// topological order; backward() walks it in reverse. With grad_enabled =
/// false the same code path runs forward-only (inference).
class Tape {
 public:
  explicit Tape(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}

  bool grad_enabled() const { return grad_enabled_; }
  const Mat& value(Var v) const { return vals_.at(static_cast<std::size_t>(v.id)); }
  double scalar(Var v) const;

  Var constant(Mat v);
  /// Leaf bound to an external Parameter; repeated calls for the same
  /// Parameter return the same leaf so gradients accumulate once.
  Var param(Parameter& p);
  /// Re-enters a value as a constant (no gradient flows through).
  Var detach(Var a);

  Var add(Var a, Var b);
  Var scale(Var a, double c);
  Var matmul(Var a, Var b);
  Var matmul_nt(Var a, Var b);  // A * B^T
  Var transpose(Var a);
  Var add_row_broadcast(Var a, Var row);     // row: 1 x d
  Var add_scalar_broadcast(Var a, Var s11);  // s11: 1 x 1
  Var concat_cols(Var a, Var b);
  Var concat_rows(const std::vector<Var>& parts);
  Var gather_rows(Var table, std::vector<int> idx);
  Var gelu(Var a);
  Var layer_norm(Var a, Var gain, Var bias, double eps = 1e-5);  // row-wise; gain/bias 1 x d
  Var multihead_attention(Var q, Var k, Var v, const std::vector<Segment>& segments,
                          int num_heads);
  Var row_log_softmax(Var a);
  Var col_softmax(Var a);  // a: n x 1
  Var mean_rows(Var a);    // 1 x d
  /// -sum_t weights[t] * logp(t, labels[t]);  logp: N x C, result 1 x 1.
  Var weighted_nll(Var logp, std::vector<int> labels, std::vector<double> weights);

  /// Backpropagates from a 1x1 root; accumulates into bound Parameters' grad.
  void backward(Var root);

  std::size_t size() const { return vals_.size(); }

 private:
  // The closure receives the tape and its own node id; it reads grad(id) and
  // accumulates into its inputs' grads.
  using BackFn = std::function<void(Tape&, int)>;

  Var push(Mat val, BackFn back);
  Mat& grad(int id) { return grads_[static_cast<std::size_t>(id)]; }

  bool grad_enabled_;
  std::vector<Mat> vals_;
  std::vector<Mat> grads_;
  std::vector<BackFn> backs_;
  std::map<const Parameter*, Var> param_leaves_;
};

/// Numerically stable row-wise softmax (value-level helper).
Mat softmax_rows(const Mat& x);

}  // namespace towe::ad
