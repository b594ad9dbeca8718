#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gres/tensor.hpp"

namespace gres {

// Handle into a Tape. Cheap to copy; only valid for the tape that created it.
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

// Reverse-mode autodiff over rank-2 tensors. Nodes are appended in forward
// order, so parents always precede children and the backward pass is a single
// reverse sweep with no explicit topological sort. Construct with
// grad_enabled=false for value-only evaluation (finite differences, scoring).
class Tape {
 public:
  explicit Tape(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}

  bool grad_enabled() const { return grad_enabled_; }

  Var leaf(Tensor value) {
    nodes_.push_back(Node{std::move(value), Tensor{}, nullptr});
    return Var{static_cast<int>(nodes_.size() - 1)};
  }

  const Tensor& value(Var v) const { return nodes_[v.id].value; }
  const Tensor& grad(Var v) const { return nodes_[v.id].grad; }

  std::size_t node_count() const { return nodes_.size(); }

  // ---- arithmetic ----

  Var add(Var a, Var b) {
    const Tensor& x = val(a);
    const Tensor& y = val(b);
    require(x.same_shape(y), "add", x, y);
    Tensor out = x;
    out.add_inplace(y);
    return unit(std::move(out), [this, a, b](const Tensor& g) {
      acc(a, g);
      acc(b, g);
    });
  }

  Var sub(Var a, Var b) {
    const Tensor& x = val(a);
    const Tensor& y = val(b);
    require(x.same_shape(y), "sub", x, y);
    Tensor out = x;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= y[i];
    return unit(std::move(out), [this, a, b](const Tensor& g) {
      acc(a, g);
      Tensor ng = g;
      for (std::size_t i = 0; i < ng.size(); ++i) ng[i] = -ng[i];
      acc(b, ng);
    });
  }

  Var mul(Var a, Var b) {  // elementwise
    const Tensor& x = val(a);
    const Tensor& y = val(b);
    require(x.same_shape(y), "mul", x, y);
    Tensor out = x;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= y[i];
    return unit(std::move(out), [this, a, b](const Tensor& g) {
      const Tensor& xv = val(a);
      const Tensor& yv = val(b);
      Tensor ga = g, gb = g;
      for (std::size_t i = 0; i < g.size(); ++i) {
        ga[i] *= yv[i];
        gb[i] *= xv[i];
      }
      acc(a, ga);
      acc(b, gb);
    });
  }

  Var scale(Var a, double c) {
    Tensor out = val(a);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= c;
    return unit(std::move(out), [this, a, c](const Tensor& g) {
      Tensor ga = g;
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] *= c;
      acc(a, ga);
    });
  }

  // [m,n] + [1,n] broadcast over rows (bias add)
  Var add_rowvec(Var a, Var b) {
    const Tensor& x = val(a);
    const Tensor& y = val(b);
    if (y.rows() != 1 || y.cols() != x.cols())
      fail("add_rowvec", x, y);
    Tensor out = x;
    for (std::size_t i = 0; i < x.rows(); ++i)
      for (std::size_t j = 0; j < x.cols(); ++j) out.at(i, j) += y[j];
    return unit(std::move(out), [this, a, b](const Tensor& g) {
      acc(a, g);
      Tensor gb({1, g.cols()});
      for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = 0; j < g.cols(); ++j) gb[j] += g.at(i, j);
      acc(b, gb);
    });
  }

  Var matmul(Var a, Var b) {
    const Tensor& x = val(a);
    const Tensor& y = val(b);
    if (x.cols() != y.rows()) fail("matmul", x, y);
    Tensor out({x.rows(), y.cols()});
    matmul_nn_acc(x.data(), y.data(), out.data(), x.rows(), x.cols(), y.cols());
    return unit(std::move(out), [this, a, b](const Tensor& g) {
      const Tensor& xv = val(a);
      const Tensor& yv = val(b);
      Tensor ga({xv.rows(), xv.cols()});
      matmul_nt_acc(g.data(), yv.data(), ga.data(), g.rows(), yv.cols(), xv.cols());
      Tensor gb({yv.rows(), yv.cols()});
      matmul_tn_acc(xv.data(), g.data(), gb.data(), yv.rows(), xv.rows(), yv.cols());
      acc(a, ga);
      acc(b, gb);
    });
  }

  // ---- nonlinearities ----

  Var relu(Var a) {
    Tensor out = val(a);
    for (std::size_t i = 0; i < out.size(); ++i)
      if (out[i] < 0.0) out[i] = 0.0;
    return unit(std::move(out), [this, a](const Tensor& g) {
      const Tensor& xv = val(a);
      Tensor ga = g;
      // subgradient 0 at the kink
      for (std::size_t i = 0; i < ga.size(); ++i)
        if (xv[i] <= 0.0) ga[i] = 0.0;
      acc(a, ga);
    });
  }

  Var sigmoid(Var a) {
    Tensor out = val(a);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = stable_sigmoid(out[i]);
    Tensor saved = out;
    return unit(std::move(out), [this, a, saved](const Tensor& g) {
      Tensor ga = g;
      for (std::size_t i = 0; i < ga.size(); ++i)
        ga[i] *= saved[i] * (1.0 - saved[i]);
      acc(a, ga);
    });
  }

  Var softmax_rows(Var a) {
    const Tensor& x = val(a);
    Tensor out = x;
    for (std::size_t i = 0; i < x.rows(); ++i) softmax_row(out.row_ptr(i), x.cols());
    Tensor saved = out;
    return unit(std::move(out), [this, a, saved](const Tensor& g) {
      Tensor ga({saved.rows(), saved.cols()});
      for (std::size_t i = 0; i < saved.rows(); ++i) {
        const double* y = saved.row_ptr(i);
        const double* gy = g.row_ptr(i);
        double dotv = 0.0;
        for (std::size_t j = 0; j < saved.cols(); ++j) dotv += gy[j] * y[j];
        double* gx = ga.row_ptr(i);
        for (std::size_t j = 0; j < saved.cols(); ++j) gx[j] = y[j] * (gy[j] - dotv);
      }
      acc(a, ga);
    });
  }

  // ---- structure ----

  Var concat_cols(Var a, Var b) {
    const Tensor& x = val(a);
    const Tensor& y = val(b);
    if (x.rows() != y.rows()) fail("concat_cols", x, y);
    Tensor out({x.rows(), x.cols() + y.cols()});
    for (std::size_t i = 0; i < x.rows(); ++i) {
      double* o = out.row_ptr(i);
      const double* xr = x.row_ptr(i);
      const double* yr = y.row_ptr(i);
      for (std::size_t j = 0; j < x.cols(); ++j) o[j] = xr[j];
      for (std::size_t j = 0; j < y.cols(); ++j) o[x.cols() + j] = yr[j];
    }
    std::size_t xc = x.cols(), yc = y.cols();
    return unit(std::move(out), [this, a, b, xc, yc](const Tensor& g) {
      Tensor ga({g.rows(), xc}), gb({g.rows(), yc});
      for (std::size_t i = 0; i < g.rows(); ++i) {
        const double* gr = g.row_ptr(i);
        for (std::size_t j = 0; j < xc; ++j) ga.at(i, j) = gr[j];
        for (std::size_t j = 0; j < yc; ++j) gb.at(i, j) = gr[xc + j];
      }
      acc(a, ga);
      acc(b, gb);
    });
  }

  Var concat_rows(const std::vector<Var>& parts) {
    if (parts.empty()) throw std::invalid_argument("concat_rows: empty input");
    std::size_t c = val(parts[0]).cols(), r = 0;
    for (Var p : parts) {
      if (val(p).cols() != c) fail("concat_rows", val(parts[0]), val(p));
      r += val(p).rows();
    }
    Tensor out({r, c});
    std::size_t off = 0;
    for (Var p : parts) {
      const Tensor& x = val(p);
      for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < c; ++j) out.at(off + i, j) = x.at(i, j);
      off += x.rows();
    }
    std::vector<Var> ps = parts;
    return unit(std::move(out), [this, ps, c](const Tensor& g) {
      std::size_t off = 0;
      for (Var p : ps) {
        const Tensor& x = val(p);
        Tensor gp({x.rows(), c});
        for (std::size_t i = 0; i < x.rows(); ++i)
          for (std::size_t j = 0; j < c; ++j) gp.at(i, j) = g.at(off + i, j);
        acc(p, gp);
        off += x.rows();
      }
    });
  }

  Var slice_rows(Var a, std::size_t r0, std::size_t r1) {
    const Tensor& x = val(a);
    if (r1 > x.rows() || r0 > r1)
      throw std::invalid_argument("slice_rows: range [" + std::to_string(r0) + "," +
                                  std::to_string(r1) + ") out of " + x.shape_str());
    Tensor out({r1 - r0, x.cols()});
    for (std::size_t i = r0; i < r1; ++i)
      for (std::size_t j = 0; j < x.cols(); ++j) out.at(i - r0, j) = x.at(i, j);
    return unit(std::move(out), [this, a, r0](const Tensor& g) {
      const Tensor& x = val(a);
      Tensor ga({x.rows(), x.cols()});
      for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = 0; j < g.cols(); ++j) ga.at(r0 + i, j) = g.at(i, j);
      acc(a, ga);
    });
  }

  // embedding lookup; backward scatter-adds into the table gradient
  Var gather_rows(Var table, std::vector<std::size_t> idx) {
    const Tensor& t = val(table);
    for (std::size_t i : idx)
      if (i >= t.rows())
        throw std::invalid_argument("gather_rows: index " + std::to_string(i) +
                                    " out of " + t.shape_str());
    Tensor out({idx.size(), t.cols()});
    for (std::size_t i = 0; i < idx.size(); ++i)
      for (std::size_t j = 0; j < t.cols(); ++j) out.at(i, j) = t.at(idx[i], j);
    return unit(std::move(out), [this, table, idx](const Tensor& g) {
      const Tensor& t = val(table);
      Tensor gt({t.rows(), t.cols()});
      for (std::size_t i = 0; i < idx.size(); ++i)
        for (std::size_t j = 0; j < t.cols(); ++j) gt.at(idx[i], j) += g.at(i, j);
      acc(table, gt);
    });
  }

  // ---- reductions ----

  Var sum_rows(Var a) {  // sum over axis 0 -> [1, n]
    const Tensor& x = val(a);
    Tensor out({1, x.cols()});
    for (std::size_t i = 0; i < x.rows(); ++i)
      for (std::size_t j = 0; j < x.cols(); ++j) out[j] += x.at(i, j);
    return unit(std::move(out), [this, a](const Tensor& g) {
      const Tensor& x = val(a);
      Tensor ga({x.rows(), x.cols()});
      for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < x.cols(); ++j) ga.at(i, j) = g[j];
      acc(a, ga);
    });
  }

  Var weighted_sum_rows(Var a, std::vector<double> w) {  // -> [1, n]
    const Tensor& x = val(a);
    if (w.size() != x.rows())
      throw std::invalid_argument("weighted_sum_rows: " + std::to_string(w.size()) +
                                  " weights for " + x.shape_str());
    Tensor out({1, x.cols()});
    for (std::size_t i = 0; i < x.rows(); ++i)
      for (std::size_t j = 0; j < x.cols(); ++j) out[j] += w[i] * x.at(i, j);
    return unit(std::move(out), [this, a, w](const Tensor& g) {
      const Tensor& x = val(a);
      Tensor ga({x.rows(), x.cols()});
      for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < x.cols(); ++j) ga.at(i, j) = w[i] * g[j];
      acc(a, ga);
    });
  }

  Var sum_all(Var a) {
    const Tensor& x = val(a);
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i];
    return unit(Tensor::scalar(s), [this, a](const Tensor& g) {
      const Tensor& x = val(a);
      Tensor ga = x;
      ga.fill(g[0]);
      acc(a, ga);
    });
  }

  Var mean_all(Var a) {
    const Tensor& x = val(a);
    double inv = 1.0 / static_cast<double>(x.size());
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i];
    return unit(Tensor::scalar(s * inv), [this, a, inv](const Tensor& g) {
      const Tensor& x = val(a);
      Tensor ga = x;
      ga.fill(g[0] * inv);
      acc(a, ga);
    });
  }

  // ---- composite neural ops ----

  Var layer_norm_rows(Var x_, Var gain, Var bias, double eps = 1e-5) {
    const Tensor& x = val(x_);
    const Tensor& g_ = val(gain);
    const Tensor& b_ = val(bias);
    if (g_.rows() != 1 || g_.cols() != x.cols() || b_.rows() != 1 || b_.cols() != x.cols())
      fail("layer_norm_rows", x, g_);
    std::size_t n = x.cols();
    Tensor out({x.rows(), n});
    Tensor xhat({x.rows(), n});
    std::vector<double> inv_std(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) {
      const double* xr = x.row_ptr(i);
      double mu = 0.0;
      for (std::size_t j = 0; j < n; ++j) mu += xr[j];
      mu /= n;
      double var = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        double d = xr[j] - mu;
        var += d * d;
      }
      var /= n;
      double is = 1.0 / std::sqrt(var + eps);
      inv_std[i] = is;
      for (std::size_t j = 0; j < n; ++j) {
        double xh = (xr[j] - mu) * is;
        xhat.at(i, j) = xh;
        out.at(i, j) = xh * g_[j] + b_[j];
      }
    }
    return unit(std::move(out), [this, x_, gain, bias, xhat, inv_std](const Tensor& g) {
      const Tensor& gv = val(gain);
      std::size_t n = xhat.cols();
      Tensor gx({xhat.rows(), n});
      Tensor gg({1, n}), gb({1, n});
      for (std::size_t i = 0; i < xhat.rows(); ++i) {
        const double* go = g.row_ptr(i);
        const double* xh = xhat.row_ptr(i);
        double m1 = 0.0, m2 = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          double dxh = go[j] * gv[j];
          m1 += dxh;
          m2 += dxh * xh[j];
          gg[j] += go[j] * xh[j];
          gb[j] += go[j];
        }
        m1 /= n;
        m2 /= n;
        for (std::size_t j = 0; j < n; ++j) {
          double dxh = go[j] * gv[j];
          gx.at(i, j) = inv_std[i] * (dxh - m1 - xh[j] * m2);
        }
      }
      acc(x_, gx);
      acc(gain, gg);
      acc(bias, gb);
    });
  }

  // Multi-head self-attention core on one sequence: q, k, v are [T, d] and
  // d = heads * d_head. Fused into one node to keep the tape small when many
  // short sequences are processed per batch.
  Var attention(Var q, Var k, Var v, std::size_t heads) {
    const Tensor& qv = val(q);
    const Tensor& kv = val(k);
    const Tensor& vv = val(v);
    if (!qv.same_shape(kv) || !qv.same_shape(vv)) fail("attention", qv, kv);
    std::size_t t = qv.rows(), d = qv.cols();
    if (heads == 0 || d % heads != 0)
      throw std::invalid_argument("attention: dim " + std::to_string(d) +
                                  " not divisible by heads " + std::to_string(heads));
    std::size_t dh = d / heads;
    double sc = 1.0 / std::sqrt(static_cast<double>(dh));
    Tensor out({t, d});
    // per-head probability matrices, saved for backward
    std::vector<Tensor> probs(heads, Tensor({t, t}));
    for (std::size_t h = 0; h < heads; ++h) {
      Tensor& p = probs[h];
      std::size_t c0 = h * dh;
      for (std::size_t i = 0; i < t; ++i) {
        double* prow = p.row_ptr(i);
        const double* qi = qv.row_ptr(i) + c0;
        for (std::size_t j = 0; j < t; ++j) {
          const double* kj = kv.row_ptr(j) + c0;
          double s = 0.0;
          for (std::size_t e = 0; e < dh; ++e) s += qi[e] * kj[e];
          prow[j] = s * sc;
        }
        softmax_row(prow, t);
        double* oi = out.row_ptr(i) + c0;
        for (std::size_t j = 0; j < t; ++j) {
          const double* vj = vv.row_ptr(j) + c0;
          double pj = prow[j];
          for (std::size_t e = 0; e < dh; ++e) oi[e] += pj * vj[e];
        }
      }
    }
    return unit(std::move(out), [this, q, k, v, heads, dh, sc, probs](const Tensor& g) {
      const Tensor& qv = val(q);
      const Tensor& kv = val(k);
      const Tensor& vv = val(v);
      std::size_t t = qv.rows(), d = qv.cols();
      Tensor gq({t, d}), gk({t, d}), gv_({t, d});
      std::vector<double> dp(t), ds(t);
      for (std::size_t h = 0; h < heads; ++h) {
        const Tensor& p = probs[h];
        std::size_t c0 = h * dh;
        for (std::size_t i = 0; i < t; ++i) {
          const double* gi = g.row_ptr(i) + c0;
          const double* prow = p.row_ptr(i);
          // dP = dOut Vh^T, dV += P^T dOut
          for (std::size_t j = 0; j < t; ++j) {
            const double* vj = vv.row_ptr(j) + c0;
            double* gvj = gv_.row_ptr(j) + c0;
            double s = 0.0;
            double pj = prow[j];
            for (std::size_t e = 0; e < dh; ++e) {
              s += gi[e] * vj[e];
              gvj[e] += pj * gi[e];
            }
            dp[j] = s;
          }
          // softmax backward
          double dotv = 0.0;
          for (std::size_t j = 0; j < t; ++j) dotv += dp[j] * prow[j];
          for (std::size_t j = 0; j < t; ++j) ds[j] = prow[j] * (dp[j] - dotv) * sc;
          // dQ += dS Kh, dK += dS^T Qh
          double* gqi = gq.row_ptr(i) + c0;
          const double* qi = qv.row_ptr(i) + c0;
          for (std::size_t j = 0; j < t; ++j) {
            const double* kj = kv.row_ptr(j) + c0;
            double* gkj = gk.row_ptr(j) + c0;
            double dsj = ds[j];
            for (std::size_t e = 0; e < dh; ++e) {
              gqi[e] += dsj * kj[e];
              gkj[e] += dsj * qi[e];
            }
          }
        }
      }
      acc(q, gq);
      acc(k, gk);
      acc(v, gv_);
    });
  }

  // mean binary cross-entropy straight from logits; targets are constants
  Var bce_with_logits_mean(Var logits, Tensor targets) {
    const Tensor& z = val(logits);
    if (!z.same_shape(targets)) fail("bce_with_logits_mean", z, targets);
    if (z.size() == 0) throw std::invalid_argument("bce_with_logits_mean: empty batch");
    double inv = 1.0 / static_cast<double>(z.size());
    double loss = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      double zi = z[i], yi = targets[i];
      loss += std::max(zi, 0.0) - zi * yi + std::log1p(std::exp(-std::fabs(zi)));
    }
    return unit(Tensor::scalar(loss * inv), [this, logits, targets, inv](const Tensor& g) {
      const Tensor& z = val(logits);
      Tensor gz = z;
      for (std::size_t i = 0; i < z.size(); ++i)
        gz[i] = (stable_sigmoid(z[i]) - targets[i]) * inv * g[0];
      acc(logits, gz);
    });
  }

  // ---- backward ----

  void backward(Var loss) {
    if (!grad_enabled_)
      throw std::logic_error("backward called on a value-only tape");
    const Tensor& lv = val(loss);
    if (lv.size() != 1)
      throw std::invalid_argument("backward: loss must be scalar, got " + lv.shape_str());
    for (auto& n : nodes_)
      if (n.grad.size() != n.value.size()) n.grad = Tensor(n.value.shape());
    for (auto& n : nodes_) n.grad.fill(0.0);
    nodes_[loss.id].grad.fill(1.0);
    for (std::size_t i = nodes_.size(); i-- > 0;) {
      if (nodes_[i].back && nodes_[i].grad.size() > 0) nodes_[i].back(nodes_[i].grad);
    }
  }

  static double stable_sigmoid(double x) {
    if (x >= 0.0) {
      double e = std::exp(-x);
      return 1.0 / (1.0 + e);
    }
    double e = std::exp(x);
    return e / (1.0 + e);
  }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    std::function<void(const Tensor&)> back;
  };

  const Tensor& val(Var v) const { return nodes_[v.id].value; }

  void acc(Var v, const Tensor& g) { nodes_[v.id].grad.add_inplace(g); }

  Var unit(Tensor value, std::function<void(const Tensor&)> back) {
    nodes_.push_back(Node{std::move(value), Tensor{},
                          grad_enabled_ ? std::move(back) : nullptr});
    return Var{static_cast<int>(nodes_.size() - 1)};
  }

  static void softmax_row(double* x, std::size_t n) {
    double mx = x[0];
    for (std::size_t j = 1; j < n; ++j) mx = std::max(mx, x[j]);
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      x[j] = std::exp(x[j] - mx);
      sum += x[j];
    }
    double inv = 1.0 / sum;
    for (std::size_t j = 0; j < n; ++j) x[j] *= inv;
  }

  [[noreturn]] static void fail(const std::string& op, const Tensor& a, const Tensor& b) {
    throw std::invalid_argument(op + ": incompatible shapes " + a.shape_str() + " and " +
                                b.shape_str());
  }

  static void require(bool ok, const std::string& op, const Tensor& a, const Tensor& b) {
    if (!ok) fail(op, a, b);
  }

  bool grad_enabled_;
  std::vector<Node> nodes_;
};

}  // namespace gres
