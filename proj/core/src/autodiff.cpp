#include "sacx/autodiff.hpp"

#include <cmath>
#include <stdexcept>

namespace sacx::ad {

namespace {

Tape& same_tape(Var a, Var b) {
  if (a.tape == nullptr || b.tape == nullptr || a.tape != b.tape) {
    throw std::invalid_argument("ad: vars must live on the same tape");
  }
  return *a.tape;
}

Tape& tape_of(Var a) {
  if (a.tape == nullptr) {
    throw std::invalid_argument("ad: var is not bound to a tape");
  }
  return *a.tape;
}

void require_same_shape(const Mat& x, const Mat& y, const char* op) {
  if (x.rows() != y.rows() || x.cols() != y.cols()) {
    throw std::invalid_argument(std::string("ad: shape mismatch in ") + op);
  }
}

}  // namespace

Var Tape::leaf(Mat value) { return emplace(std::move(value), nullptr); }

Var Tape::emplace(Mat value, BackFn back) {
  Node n;
  n.value = std::move(value);
  n.back = std::move(back);
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<int>(nodes_.size()) - 1};
}

void Tape::check(Var v) const {
  if (v.tape != this || v.id < 0 || v.id >= size()) {
    throw std::invalid_argument("ad: var does not belong to this tape");
  }
}

const Mat& Tape::value(Var v) const {
  check(v);
  return nodes_[v.id].value;
}

const Mat& Tape::grad(Var v) {
  check(v);
  Node& n = nodes_[v.id];
  if (!n.has_grad) {
    n.grad = Mat::Zero(n.value.rows(), n.value.cols());
    n.has_grad = true;
  }
  return n.grad;
}

void Tape::backward(Var root) {
  check(root);
  if (consumed_) {
    throw std::logic_error("ad: tape already consumed by a previous backward()");
  }
  const Mat& r = nodes_[root.id].value;
  if (r.rows() != 1 || r.cols() != 1) {
    throw std::invalid_argument("ad: backward root must be a 1x1 scalar");
  }
  if (!r.allFinite()) {
    throw std::runtime_error("ad: non-finite loss value in backward()");
  }
  consumed_ = true;
  accum(root.id, Mat::Ones(1, 1));
  for (int i = root.id; i >= 0; --i) {
    Node& n = nodes_[i];
    if (n.has_grad && n.back) {
      n.back(*this, i);
    }
  }
}

Var matmul(Var a, Var b) {
  Tape& t = same_tape(a, b);
  const Mat& A = t.val(a.id);
  const Mat& B = t.val(b.id);
  if (A.cols() != B.rows()) {
    throw std::invalid_argument("ad: shape mismatch in matmul");
  }
  const int ai = a.id, bi = b.id;
  return t.emplace(A * B, [ai, bi](Tape& tp, int self) {
    const Mat& g = tp.grad_at(self);
    tp.accum(ai, g * tp.val(bi).transpose());
    tp.accum(bi, tp.val(ai).transpose() * g);
  });
}

Var add(Var a, Var b) {
  Tape& t = same_tape(a, b);
  require_same_shape(t.val(a.id), t.val(b.id), "add");
  const int ai = a.id, bi = b.id;
  return t.emplace(t.val(ai) + t.val(bi), [ai, bi](Tape& tp, int self) {
    tp.accum(ai, tp.grad_at(self));
    tp.accum(bi, tp.grad_at(self));
  });
}

Var sub(Var a, Var b) {
  Tape& t = same_tape(a, b);
  require_same_shape(t.val(a.id), t.val(b.id), "sub");
  const int ai = a.id, bi = b.id;
  return t.emplace(t.val(ai) - t.val(bi), [ai, bi](Tape& tp, int self) {
    tp.accum(ai, tp.grad_at(self));
    tp.accum(bi, -tp.grad_at(self));
  });
}

Var mul(Var a, Var b) {
  Tape& t = same_tape(a, b);
  require_same_shape(t.val(a.id), t.val(b.id), "mul");
  const int ai = a.id, bi = b.id;
  return t.emplace(t.val(ai).cwiseProduct(t.val(bi)), [ai, bi](Tape& tp, int self) {
    const Mat& g = tp.grad_at(self);
    tp.accum(ai, g.cwiseProduct(tp.val(bi)));
    tp.accum(bi, g.cwiseProduct(tp.val(ai)));
  });
}

Var minimum(Var a, Var b) {
  Tape& t = same_tape(a, b);
  require_same_shape(t.val(a.id), t.val(b.id), "minimum");
  const int ai = a.id, bi = b.id;
  return t.emplace(t.val(ai).cwiseMin(t.val(bi)), [ai, bi](Tape& tp, int self) {
    const Mat& g = tp.grad_at(self);
    Mat mask = (tp.val(ai).array() <= tp.val(bi).array()).cast<double>();
    tp.accum(ai, g.cwiseProduct(mask));
    tp.accum(bi, g.cwiseProduct(Mat(1.0 - mask.array())));
  });
}

Var add_rowvec(Var a, Var row) {
  Tape& t = same_tape(a, row);
  const Mat& A = t.val(a.id);
  const Mat& R = t.val(row.id);
  if (R.rows() != 1 || R.cols() != A.cols()) {
    throw std::invalid_argument("ad: shape mismatch in add_rowvec");
  }
  Mat out = A;
  out.rowwise() += R.row(0);
  const int ai = a.id, ri = row.id;
  return t.emplace(std::move(out), [ai, ri](Tape& tp, int self) {
    const Mat& g = tp.grad_at(self);
    tp.accum(ai, g);
    tp.accum(ri, g.colwise().sum());
  });
}

Var hcat(Var a, Var b) {
  Tape& t = same_tape(a, b);
  const Mat& A = t.val(a.id);
  const Mat& B = t.val(b.id);
  if (A.rows() != B.rows()) {
    throw std::invalid_argument("ad: shape mismatch in hcat");
  }
  Mat out(A.rows(), A.cols() + B.cols());
  out << A, B;
  const int ai = a.id, bi = b.id;
  const int ac = static_cast<int>(A.cols()), bc = static_cast<int>(B.cols());
  return t.emplace(std::move(out), [ai, bi, ac, bc](Tape& tp, int self) {
    const Mat& g = tp.grad_at(self);
    tp.accum(ai, g.leftCols(ac));
    tp.accum(bi, g.rightCols(bc));
  });
}

Var cols(Var a, int start, int count) {
  Tape& t = tape_of(a);
  const Mat& A = t.val(a.id);
  if (start < 0 || count < 0 || start + count > A.cols()) {
    throw std::invalid_argument("ad: column slice out of range");
  }
  const int ai = a.id;
  return t.emplace(A.middleCols(start, count), [ai, start, count](Tape& tp, int self) {
    const Mat& g = tp.grad_at(self);
    const Mat& A = tp.val(ai);
    Mat z = Mat::Zero(A.rows(), A.cols());
    z.middleCols(start, count) = g;
    tp.accum(ai, z);
  });
}

Var neg(Var a) {
  Tape& t = tape_of(a);
  const int ai = a.id;
  return t.emplace(-t.val(ai), [ai](Tape& tp, int self) { tp.accum(ai, -tp.grad_at(self)); });
}

Var scale(Var a, double s) {
  Tape& t = tape_of(a);
  const int ai = a.id;
  return t.emplace(t.val(ai) * s, [ai, s](Tape& tp, int self) { tp.accum(ai, tp.grad_at(self) * s); });
}

Var add_scalar(Var a, double c) {
  Tape& t = tape_of(a);
  const int ai = a.id;
  return t.emplace(Mat(t.val(ai).array() + c), [ai](Tape& tp, int self) { tp.accum(ai, tp.grad_at(self)); });
}

Var colwise_affine(Var a, Eigen::RowVectorXd s, Eigen::RowVectorXd shift) {
  Tape& t = tape_of(a);
  const Mat& A = t.val(a.id);
  if (s.cols() != A.cols() || shift.cols() != A.cols()) {
    throw std::invalid_argument("ad: shape mismatch in colwise_affine");
  }
  Mat out = A.array().rowwise() * s.array();
  out.rowwise() += shift;
  const int ai = a.id;
  return t.emplace(std::move(out), [ai, s](Tape& tp, int self) {
    Mat g = tp.grad_at(self).array().rowwise() * s.array();
    tp.accum(ai, g);
  });
}

Var relu(Var a) {
  Tape& t = tape_of(a);
  const int ai = a.id;
  return t.emplace(t.val(ai).cwiseMax(0.0), [ai](Tape& tp, int self) {
    Mat mask = (tp.val(ai).array() > 0.0).cast<double>();
    tp.accum(ai, tp.grad_at(self).cwiseProduct(mask));
  });
}

Var tanh(Var a) {
  Tape& t = tape_of(a);
  const int ai = a.id;
  return t.emplace(Mat(t.val(ai).array().tanh()), [ai](Tape& tp, int self) {
    const Mat& y = tp.val(self);
    Mat g = tp.grad_at(self).array() * (1.0 - y.array().square());
    tp.accum(ai, g);
  });
}

Var exp(Var a) {
  Tape& t = tape_of(a);
  const int ai = a.id;
  return t.emplace(Mat(t.val(ai).array().exp()), [ai](Tape& tp, int self) {
    tp.accum(ai, tp.grad_at(self).cwiseProduct(tp.val(self)));
  });
}

Var log(Var a) {
  Tape& t = tape_of(a);
  const int ai = a.id;
  return t.emplace(Mat(t.val(ai).array().log()), [ai](Tape& tp, int self) {
    tp.accum(ai, tp.grad_at(self).cwiseQuotient(tp.val(ai)));
  });
}

Var square(Var a) {
  Tape& t = tape_of(a);
  const int ai = a.id;
  return t.emplace(Mat(t.val(ai).array().square()), [ai](Tape& tp, int self) {
    tp.accum(ai, 2.0 * tp.grad_at(self).cwiseProduct(tp.val(ai)));
  });
}

Var softplus(Var a) {
  Tape& t = tape_of(a);
  const int ai = a.id;
  Mat out = t.val(ai).unaryExpr([](double x) {
    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
  });
  return t.emplace(std::move(out), [ai](Tape& tp, int self) {
    Mat sig = tp.val(ai).unaryExpr([](double x) {
      if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
      const double e = std::exp(x);
      return e / (1.0 + e);
    });
    tp.accum(ai, tp.grad_at(self).cwiseProduct(sig));
  });
}

Var clamp(Var a, double lo, double hi) {
  Tape& t = tape_of(a);
  const int ai = a.id;
  return t.emplace(t.val(ai).cwiseMax(lo).cwiseMin(hi), [ai, lo, hi](Tape& tp, int self) {
    const Mat& x = tp.val(ai);
    Mat mask = ((x.array() >= lo) && (x.array() <= hi)).cast<double>();
    tp.accum(ai, tp.grad_at(self).cwiseProduct(mask));
  });
}

Var sum(Var a) {
  Tape& t = tape_of(a);
  const int ai = a.id;
  Mat out(1, 1);
  out(0, 0) = t.val(ai).sum();
  return t.emplace(std::move(out), [ai](Tape& tp, int self) {
    const Mat& A = tp.val(ai);
    tp.accum(ai, Mat::Constant(A.rows(), A.cols(), tp.grad_at(self)(0, 0)));
  });
}

Var mean(Var a) {
  Tape& t = tape_of(a);
  const int ai = a.id;
  const double n = static_cast<double>(t.val(ai).size());
  Mat out(1, 1);
  out(0, 0) = t.val(ai).sum() / n;
  return t.emplace(std::move(out), [ai, n](Tape& tp, int self) {
    const Mat& A = tp.val(ai);
    tp.accum(ai, Mat::Constant(A.rows(), A.cols(), tp.grad_at(self)(0, 0) / n));
  });
}

Var row_sum(Var a) {
  Tape& t = tape_of(a);
  const int ai = a.id;
  return t.emplace(t.val(ai).rowwise().sum(), [ai](Tape& tp, int self) {
    const Mat& g = tp.grad_at(self);
    tp.accum(ai, g.replicate(1, tp.val(ai).cols()));
  });
}

}  // namespace sacx::ad
