#pragma once

#include <Eigen/Core>

#include <functional>
#include <vector>

namespace sacx::ad {

using Mat = Eigen::MatrixXd;

class Tape;

// Handle to a node owned by a Tape. Plain value, cheap to copy; valid for the
// lifetime of the tape it came from.
struct Var {
  Tape* tape = nullptr;
  int id = -1;
};

// Reverse-mode tape over dense matrices, define-by-run. Ops append nodes in
// evaluation order, so walking them in reverse creation order is already a
// valid topological sweep. A tape is built per loss evaluation and
// differentiated once; parameters enter as leaves and their gradients are
// read back after backward().
class Tape {
 public:
  Var leaf(Mat value);

  const Mat& value(Var v) const;

  // d(root)/d(v) after backward(). Zero matrix if v was not reached by the
  // sweep.
  const Mat& grad(Var v);

  // root must be 1x1 with a finite value; throws if the graph was already
  // differentiated (tapes are single-shot).
  void backward(Var root);

  bool consumed() const { return consumed_; }
  int size() const { return static_cast<int>(nodes_.size()); }

  // -- internals used by op implementations --
  using BackFn = std::function<void(Tape&, int)>;
  Var emplace(Mat value, BackFn back);
  const Mat& val(int id) const { return nodes_[id].value; }
  const Mat& grad_at(int id) const { return nodes_[id].grad; }
  // Accumulates into a node's gradient; assigns on first touch so gradients
  // never need an upfront zero pass.
  template <typename Expr>
  void accum(int id, const Expr& e) {
    Node& n = nodes_[id];
    if (n.has_grad) {
      n.grad += e;
    } else {
      n.grad = e;
      n.has_grad = true;
    }
  }

 private:
  struct Node {
    Mat value;
    Mat grad;
    bool has_grad = false;
    BackFn back;
  };
  std::vector<Node> nodes_;
  bool consumed_ = false;

  void check(Var v) const;
};

Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);      // elementwise
Var minimum(Var a, Var b);  // elementwise; ties route gradient to a
Var add_rowvec(Var a, Var row);
Var hcat(Var a, Var b);
Var cols(Var a, int start, int count);
Var neg(Var a);
Var scale(Var a, double s);
Var add_scalar(Var a, double c);
// a.row(i) * diag(scale) + shift, per row.
Var colwise_affine(Var a, Eigen::RowVectorXd scale, Eigen::RowVectorXd shift);
Var relu(Var a);
Var tanh(Var a);
Var exp(Var a);
Var log(Var a);
Var square(Var a);
Var softplus(Var a);
Var clamp(Var a, double lo, double hi);
Var sum(Var a);      // 1x1
Var mean(Var a);     // 1x1
Var row_sum(Var a);  // Nx1

}  // namespace sacx::ad
