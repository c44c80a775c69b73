#include "towe/autodiff.hpp"

#include <cmath>

#include "towe/errors.hpp"

namespace towe::ad {

namespace {
constexpr double kInvSqrt2 = 0.7071067811865475244;
constexpr double kInvSqrt2Pi = 0.3989422804014326779;
}  // namespace

Mat softmax_rows(const Mat& x) {
  Mat y(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    double m = x.row(r).maxCoeff();
    Eigen::ArrayXd e = (x.row(r).transpose().array() - m).exp();
    y.row(r) = (e / e.sum()).matrix().transpose();
  }
  return y;
}

double Tape::scalar(Var v) const {
  const Mat& m = value(v);
  if (m.rows() != 1 || m.cols() != 1) throw ValidationError("expected 1x1 value");
  return m(0, 0);
}

Var Tape::push(Mat val, BackFn back) {
  vals_.push_back(std::move(val));
  backs_.push_back(grad_enabled_ ? std::move(back) : BackFn());
  return Var{static_cast<int>(vals_.size()) - 1};
}

Var Tape::constant(Mat v) { return push(std::move(v), {}); }

Var Tape::param(Parameter& p) {
  auto it = param_leaves_.find(&p);
  if (it != param_leaves_.end()) return it->second;
  Parameter* pp = &p;
  Var leaf = push(p.value, [pp](Tape& t, int self) { pp->grad += t.grad(self); });
  param_leaves_.emplace(&p, leaf);
  return leaf;
}

Var Tape::detach(Var a) { return constant(value(a)); }

Var Tape::add(Var a, Var b) {
  int ia = a.id, ib = b.id;
  return push(value(a) + value(b), [ia, ib](Tape& t, int self) {
    t.grad(ia) += t.grad(self);
    t.grad(ib) += t.grad(self);
  });
}

Var Tape::scale(Var a, double c) {
  int ia = a.id;
  return push(value(a) * c, [ia, c](Tape& t, int self) { t.grad(ia) += c * t.grad(self); });
}

Var Tape::matmul(Var a, Var b) {
  int ia = a.id, ib = b.id;
  return push(value(a) * value(b), [ia, ib](Tape& t, int self) {
    const Mat& g = t.grad(self);
    t.grad(ia) += g * t.vals_[static_cast<std::size_t>(ib)].transpose();
    t.grad(ib) += t.vals_[static_cast<std::size_t>(ia)].transpose() * g;
  });
}

Var Tape::matmul_nt(Var a, Var b) {
  int ia = a.id, ib = b.id;
  return push(value(a) * value(b).transpose(), [ia, ib](Tape& t, int self) {
    const Mat& g = t.grad(self);
    t.grad(ia) += g * t.vals_[static_cast<std::size_t>(ib)];
    t.grad(ib) += g.transpose() * t.vals_[static_cast<std::size_t>(ia)];
  });
}

Var Tape::transpose(Var a) {
  int ia = a.id;
  return push(value(a).transpose(),
              [ia](Tape& t, int self) { t.grad(ia) += t.grad(self).transpose(); });
}

Var Tape::add_row_broadcast(Var a, Var row) {
  const Mat& r = value(row);
  if (r.rows() != 1 || r.cols() != value(a).cols()) {
    throw ValidationError("add_row_broadcast: bias must be 1 x cols(a)");
  }
  Mat out = value(a);
  out.rowwise() += r.row(0);
  int ia = a.id, ir = row.id;
  return push(std::move(out), [ia, ir](Tape& t, int self) {
    const Mat& g = t.grad(self);
    t.grad(ia) += g;
    t.grad(ir) += g.colwise().sum();
  });
}

Var Tape::add_scalar_broadcast(Var a, Var s11) {
  const Mat& s = value(s11);
  if (s.rows() != 1 || s.cols() != 1) throw ValidationError("add_scalar_broadcast: want 1x1");
  Mat out = value(a).array() + s(0, 0);
  int ia = a.id, is = s11.id;
  return push(std::move(out), [ia, is](Tape& t, int self) {
    const Mat& g = t.grad(self);
    t.grad(ia) += g;
    t.grad(is)(0, 0) += g.sum();
  });
}

Var Tape::concat_cols(Var a, Var b) {
  const Mat& va = value(a);
  const Mat& vb = value(b);
  if (va.rows() != vb.rows()) throw ValidationError("concat_cols: row mismatch");
  Mat out(va.rows(), va.cols() + vb.cols());
  out << va, vb;
  int ia = a.id, ib = b.id;
  Eigen::Index ca = va.cols(), cb = vb.cols();
  return push(std::move(out), [ia, ib, ca, cb](Tape& t, int self) {
    const Mat& g = t.grad(self);
    t.grad(ia) += g.leftCols(ca);
    t.grad(ib) += g.rightCols(cb);
  });
}

Var Tape::concat_rows(const std::vector<Var>& parts) {
  if (parts.empty()) throw ValidationError("concat_rows: no parts");
  Eigen::Index rows = 0;
  Eigen::Index cols = value(parts[0]).cols();
  for (Var p : parts) {
    if (value(p).cols() != cols) throw ValidationError("concat_rows: col mismatch");
    rows += value(p).rows();
  }
  Mat out(rows, cols);
  std::vector<int> ids;
  std::vector<Eigen::Index> offsets;
  Eigen::Index at = 0;
  for (Var p : parts) {
    const Mat& v = value(p);
    out.middleRows(at, v.rows()) = v;
    ids.push_back(p.id);
    offsets.push_back(at);
    at += v.rows();
  }
  return push(std::move(out), [ids, offsets](Tape& t, int self) {
    const Mat& g = t.grad(self);
    for (std::size_t k = 0; k < ids.size(); ++k) {
      Mat& gi = t.grad(ids[k]);
      gi += g.middleRows(offsets[k], gi.rows());
    }
  });
}

Var Tape::gather_rows(Var table, std::vector<int> idx) {
  const Mat& tab = value(table);
  Mat out(static_cast<Eigen::Index>(idx.size()), tab.cols());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    if (idx[r] < 0 || idx[r] >= tab.rows()) throw ValidationError("gather_rows: index out of range");
    out.row(static_cast<Eigen::Index>(r)) = tab.row(idx[r]);
  }
  int it = table.id;
  return push(std::move(out), [it, idx = std::move(idx)](Tape& t, int self) {
    const Mat& g = t.grad(self);
    Mat& gt = t.grad(it);
    for (std::size_t r = 0; r < idx.size(); ++r) {
      gt.row(idx[r]) += g.row(static_cast<Eigen::Index>(r));
    }
  });
}

Var Tape::gelu(Var a) {
  const Mat& x = value(a);
  Mat out = x.unaryExpr([](double v) { return 0.5 * v * (1.0 + std::erf(v * kInvSqrt2)); });
  int ia = a.id;
  return push(std::move(out), [ia](Tape& t, int self) {
    const Mat& x = t.vals_[static_cast<std::size_t>(ia)];
    const Mat& g = t.grad(self);
    Mat d = x.unaryExpr([](double v) {
      double cdf = 0.5 * (1.0 + std::erf(v * kInvSqrt2));
      double pdf = kInvSqrt2Pi * std::exp(-0.5 * v * v);
      return cdf + v * pdf;
    });
    t.grad(ia) += g.cwiseProduct(d);
  });
}

Var Tape::layer_norm(Var a, Var gain, Var bias, double eps) {
  const Mat& x = value(a);
  const Mat& g = value(gain);
  const Mat& b = value(bias);
  if (g.rows() != 1 || b.rows() != 1 || g.cols() != x.cols() || b.cols() != x.cols()) {
    throw ValidationError("layer_norm: gain/bias must be 1 x cols(a)");
  }
  const double n = static_cast<double>(x.cols());
  Mat xhat(x.rows(), x.cols());
  Eigen::VectorXd inv_std(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    double mu = x.row(r).mean();
    double var = (x.row(r).array() - mu).square().sum() / n;
    double is = 1.0 / std::sqrt(var + eps);
    inv_std(r) = is;
    xhat.row(r) = ((x.row(r).array() - mu) * is).matrix();
  }
  Mat out = xhat * g.row(0).asDiagonal();
  out.rowwise() += b.row(0);
  int ia = a.id, ig = gain.id, ib = bias.id;
  return push(std::move(out),
              [ia, ig, ib, xhat = std::move(xhat), inv_std = std::move(inv_std), n](
                  Tape& t, int self) {
                const Mat& go = t.grad(self);
                const Mat& gv = t.vals_[static_cast<std::size_t>(ig)];
                // d gain, d bias
                t.grad(ig) += (go.array() * xhat.array()).colwise().sum().matrix();
                t.grad(ib) += go.colwise().sum();
                // d x, row by row
                Mat dxhat = go * gv.row(0).asDiagonal();
                Mat& gx = t.grad(ia);
                for (Eigen::Index r = 0; r < go.rows(); ++r) {
                  double m1 = dxhat.row(r).mean();
                  double m2 = (dxhat.row(r).array() * xhat.row(r).array()).mean();
                  gx.row(r) += (inv_std(r) *
                                (dxhat.row(r).array() - m1 - xhat.row(r).array() * m2))
                                   .matrix();
                }
              });
}

Var Tape::multihead_attention(Var q, Var k, Var v, const std::vector<Segment>& segments,
                              int num_heads) {
  const Mat& Q = value(q);
  const Mat& K = value(k);
  const Mat& V = value(v);
  const Eigen::Index d = Q.cols();
  if (K.cols() != d || V.cols() != d) throw ValidationError("attention: dim mismatch");
  if (num_heads <= 0 || d % num_heads != 0) {
    throw ValidationError("attention: dim must be divisible by num_heads");
  }
  const Eigen::Index dh = d / num_heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  Mat out = Mat::Zero(Q.rows(), d);
  // Attention matrices saved for backward, indexed [segment * num_heads + head].
  auto attn = std::make_shared<std::vector<Mat>>();
  attn->reserve(segments.size() * static_cast<std::size_t>(num_heads));
  for (const Segment& seg : segments) {
    for (int h = 0; h < num_heads; ++h) {
      auto Qh = Q.block(seg.offset, h * dh, seg.length, dh);
      auto Kh = K.block(seg.offset, h * dh, seg.length, dh);
      auto Vh = V.block(seg.offset, h * dh, seg.length, dh);
      Mat S = (Qh * Kh.transpose()) * scale;
      Mat A = softmax_rows(S);
      out.block(seg.offset, h * dh, seg.length, dh) = A * Vh;
      attn->push_back(std::move(A));
    }
  }
  int iq = q.id, ik = k.id, iv = v.id;
  return push(std::move(out),
              [iq, ik, iv, segments, num_heads, dh, scale, attn](Tape& t, int self) {
                const Mat& go = t.grad(self);
                const Mat& Q = t.vals_[static_cast<std::size_t>(iq)];
                const Mat& K = t.vals_[static_cast<std::size_t>(ik)];
                const Mat& V = t.vals_[static_cast<std::size_t>(iv)];
                Mat& gq = t.grad(iq);
                Mat& gk = t.grad(ik);
                Mat& gv = t.grad(iv);
                std::size_t idx = 0;
                for (const Segment& seg : segments) {
                  for (int h = 0; h < num_heads; ++h, ++idx) {
                    const Mat& A = (*attn)[idx];
                    auto Qh = Q.block(seg.offset, h * dh, seg.length, dh);
                    auto Kh = K.block(seg.offset, h * dh, seg.length, dh);
                    auto Vh = V.block(seg.offset, h * dh, seg.length, dh);
                    auto gOh = go.block(seg.offset, h * dh, seg.length, dh);
                    Mat dA = gOh * Vh.transpose();
                    gv.block(seg.offset, h * dh, seg.length, dh) += A.transpose() * gOh;
                    Mat dS(A.rows(), A.cols());
                    for (Eigen::Index r = 0; r < A.rows(); ++r) {
                      double dot = A.row(r).dot(dA.row(r));
                      dS.row(r) = (A.row(r).array() * (dA.row(r).array() - dot)).matrix();
                    }
                    gq.block(seg.offset, h * dh, seg.length, dh) += (dS * Kh) * scale;
                    gk.block(seg.offset, h * dh, seg.length, dh) +=
                        (dS.transpose() * Qh) * scale;
                  }
                }
              });
}

Var Tape::row_log_softmax(Var a) {
  const Mat& x = value(a);
  Mat out(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    double m = x.row(r).maxCoeff();
    double lse = m + std::log((x.row(r).array() - m).exp().sum());
    out.row(r) = (x.row(r).array() - lse).matrix();
  }
  int ia = a.id;
  return push(std::move(out), [ia](Tape& t, int self) {
    const Mat& y = t.vals_[static_cast<std::size_t>(self)];
    const Mat& g = t.grad(self);
    Mat& gx = t.grad(ia);
    for (Eigen::Index r = 0; r < y.rows(); ++r) {
      double gsum = g.row(r).sum();
      gx.row(r) += (g.row(r).array() - y.row(r).array().exp() * gsum).matrix();
    }
  });
}

Var Tape::col_softmax(Var a) {
  const Mat& x = value(a);
  if (x.cols() != 1) throw ValidationError("col_softmax: want n x 1");
  double m = x.col(0).maxCoeff();
  Eigen::ArrayXd e = (x.col(0).array() - m).exp();
  Mat out = (e / e.sum()).matrix();
  int ia = a.id;
  return push(std::move(out), [ia](Tape& t, int self) {
    const Mat& y = t.vals_[static_cast<std::size_t>(self)];
    const Mat& g = t.grad(self);
    double dot = (y.col(0).array() * g.col(0).array()).sum();
    t.grad(ia).col(0) += (y.col(0).array() * (g.col(0).array() - dot)).matrix();
  });
}

Var Tape::mean_rows(Var a) {
  const Mat& x = value(a);
  Mat out = x.colwise().mean();
  int ia = a.id;
  double inv = 1.0 / static_cast<double>(x.rows());
  return push(std::move(out), [ia, inv](Tape& t, int self) {
    const Mat& g = t.grad(self);
    Mat& gx = t.grad(ia);
    gx.rowwise() += (g.row(0) * inv);
  });
}

Var Tape::weighted_nll(Var logp, std::vector<int> labels, std::vector<double> weights) {
  const Mat& lp = value(logp);
  if (static_cast<Eigen::Index>(labels.size()) != lp.rows() || labels.size() != weights.size()) {
    throw ValidationError("weighted_nll: labels/weights size mismatch");
  }
  double loss = 0.0;
  for (std::size_t t = 0; t < labels.size(); ++t) {
    if (labels[t] < 0 || labels[t] >= lp.cols()) throw ValidationError("weighted_nll: bad label");
    loss -= weights[t] * lp(static_cast<Eigen::Index>(t), labels[t]);
  }
  Mat out(1, 1);
  out(0, 0) = loss;
  int il = logp.id;
  return push(std::move(out), [il, labels = std::move(labels), weights = std::move(weights)](
                                  Tape& t, int self) {
    double g = t.grad(self)(0, 0);
    Mat& gl = t.grad(il);
    for (std::size_t r = 0; r < labels.size(); ++r) {
      gl(static_cast<Eigen::Index>(r), labels[r]) -= g * weights[r];
    }
  });
}

void Tape::backward(Var root) {
  if (!grad_enabled_) throw ValidationError("backward on a no-grad tape");
  const Mat& rv = value(root);
  if (rv.rows() != 1 || rv.cols() != 1) throw ValidationError("backward root must be 1x1");
  grads_.assign(vals_.size(), Mat());
  for (std::size_t i = 0; i < vals_.size(); ++i) {
    grads_[i] = Mat::Zero(vals_[i].rows(), vals_[i].cols());
  }
  grads_[static_cast<std::size_t>(root.id)](0, 0) = 1.0;
  for (int i = root.id; i >= 0; --i) {
    auto& fn = backs_[static_cast<std::size_t>(i)];
    if (fn) fn(*this, i);
  }
}

}  // namespace towe::ad
