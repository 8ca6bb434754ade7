#include "bhs/ad/ops.hpp"

#include <algorithm>
#include <cmath>

#include "bhs/error.hpp"

namespace bhs::ad {

namespace {

using Eigen::Index;
using StridedMap = Eigen::Map<const RowMatrix, 0, Eigen::OuterStride<>>;

[[noreturn]] void shape_error(const char* op, const std::string& detail) {
  throw Error(Errc::kShapeMismatch, std::string(op) + ": " + detail);
}

void require_same(const char* op, const Var& a, const Var& b) {
  if (a.shape() != b.shape()) {
    shape_error(op, shape_string(a.shape()) + " vs " + shape_string(b.shape()));
  }
}

Shape with_last(Shape s, std::size_t last) {
  s.back() = last;
  return s;
}

std::size_t last_dim(const Var& v, const char* op) {
  if (v.value().rank() == 0) {
    shape_error(op, "rank-0 operand");
  }
  return v.shape().back();
}

Index idx(std::size_t v) { return static_cast<Index>(v); }

}  // namespace

Var add(const Var& a, const Var& b) {
  require_same("add", a, b);
  Graph& g = a.graph();
  Tensor out(a.shape());
  as_rows(out).array() = as_rows(a.value()).array() + as_rows(b.value()).array();
  return g.record("add", std::move(out), {a, b}, [&g, a, b](const Tensor&, const Tensor& dy) {
    if (Tensor* ga = g.grad_sink(a)) {
      as_rows(*ga) += as_rows(dy);
    }
    if (Tensor* gb = g.grad_sink(b)) {
      as_rows(*gb) += as_rows(dy);
    }
  });
}

Var sub(const Var& a, const Var& b) {
  require_same("sub", a, b);
  Graph& g = a.graph();
  Tensor out(a.shape());
  as_rows(out).array() = as_rows(a.value()).array() - as_rows(b.value()).array();
  return g.record("sub", std::move(out), {a, b}, [&g, a, b](const Tensor&, const Tensor& dy) {
    if (Tensor* ga = g.grad_sink(a)) {
      as_rows(*ga) += as_rows(dy);
    }
    if (Tensor* gb = g.grad_sink(b)) {
      as_rows(*gb) -= as_rows(dy);
    }
  });
}

Var mul(const Var& a, const Var& b) {
  require_same("mul", a, b);
  Graph& g = a.graph();
  Tensor out(a.shape());
  as_rows(out).array() = as_rows(a.value()).array() * as_rows(b.value()).array();
  return g.record("mul", std::move(out), {a, b}, [&g, a, b](const Tensor&, const Tensor& dy) {
    if (Tensor* ga = g.grad_sink(a)) {
      as_rows(*ga).array() += as_rows(dy).array() * as_rows(b.value()).array();
    }
    if (Tensor* gb = g.grad_sink(b)) {
      as_rows(*gb).array() += as_rows(dy).array() * as_rows(a.value()).array();
    }
  });
}

Var scale(const Var& a, double k) {
  Graph& g = a.graph();
  Tensor out(a.shape());
  as_rows(out) = as_rows(a.value()) * k;
  return g.record("scale", std::move(out), {a}, [&g, a, k](const Tensor&, const Tensor& dy) {
    if (Tensor* ga = g.grad_sink(a)) {
      as_rows(*ga) += as_rows(dy) * k;
    }
  });
}

Var tanh(const Var& x) {
  Graph& g = x.graph();
  Tensor out(x.shape());
  as_rows(out).array() = as_rows(x.value()).array().tanh();
  return g.record("tanh", std::move(out), {x}, [&g, x](const Tensor& y, const Tensor& dy) {
    if (Tensor* gx = g.grad_sink(x)) {
      auto yv = as_rows(y).array();
      as_rows(*gx).array() += as_rows(dy).array() * (1.0 - yv * yv);
    }
  });
}

Var sigmoid(const Var& x) {
  Graph& g = x.graph();
  Tensor out(x.shape());
  const Tensor& xv = x.value();
  for (std::size_t i = 0; i < xv.size(); ++i) {
    const double v = xv[i];
    if (v >= 0.0) {
      out[i] = 1.0 / (1.0 + std::exp(-v));
    } else {
      const double e = std::exp(v);
      out[i] = e / (1.0 + e);
    }
  }
  return g.record("sigmoid", std::move(out), {x}, [&g, x](const Tensor& y, const Tensor& dy) {
    if (Tensor* gx = g.grad_sink(x)) {
      auto yv = as_rows(y).array();
      as_rows(*gx).array() += as_rows(dy).array() * yv * (1.0 - yv);
    }
  });
}

Var sum(const Var& x) {
  Graph& g = x.graph();
  Tensor out({1}, as_rows(x.value()).sum());
  return g.record("sum", std::move(out), {x}, [&g, x](const Tensor&, const Tensor& dy) {
    if (Tensor* gx = g.grad_sink(x)) {
      as_rows(*gx).array() += dy[0];
    }
  });
}

Var add_bias(const Var& x, const Var& b) {
  const std::size_t k = last_dim(x, "add_bias");
  if (b.value().rank() != 1 || b.dim(0) != k) {
    shape_error("add_bias", shape_string(x.shape()) + " + " + shape_string(b.shape()));
  }
  Graph& g = x.graph();
  Tensor out(x.shape());
  as_rows(out) = as_rows(x.value()).rowwise() + as_rows(b.value()).row(0);
  return g.record("add_bias", std::move(out), {x, b}, [&g, x, b](const Tensor&, const Tensor& dy) {
    if (Tensor* gx = g.grad_sink(x)) {
      as_rows(*gx) += as_rows(dy);
    }
    if (Tensor* gb = g.grad_sink(b)) {
      as_rows(*gb) += as_rows(dy).colwise().sum();
    }
  });
}

Var add_broadcast(const Var& x, const Var& y) {
  if (x.value().rank() != 3 || y.value().rank() != 2 || x.dim(0) != y.dim(0) ||
      x.dim(2) != y.dim(1)) {
    shape_error("add_broadcast", shape_string(x.shape()) + " + " + shape_string(y.shape()));
  }
  const std::size_t batch = x.dim(0), n = x.dim(1), k = x.dim(2);
  Graph& g = x.graph();
  Tensor out(x.shape());
  const Tensor& xv = x.value();
  const Tensor& yv = y.value();
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t t = 0; t < n; ++t) {
      const double* xr = xv.data() + (b * n + t) * k;
      const double* yr = yv.data() + b * k;
      double* o = out.data() + (b * n + t) * k;
      for (std::size_t j = 0; j < k; ++j) {
        o[j] = xr[j] + yr[j];
      }
    }
  }
  return g.record("add_broadcast", std::move(out), {x, y},
                  [&g, x, y, batch, n, k](const Tensor&, const Tensor& dy) {
                    if (Tensor* gx = g.grad_sink(x)) {
                      as_rows(*gx) += as_rows(dy);
                    }
                    if (Tensor* gy = g.grad_sink(y)) {
                      for (std::size_t b = 0; b < batch; ++b) {
                        for (std::size_t t = 0; t < n; ++t) {
                          const double* d = dy.data() + (b * n + t) * k;
                          double* o = gy->data() + b * k;
                          for (std::size_t j = 0; j < k; ++j) {
                            o[j] += d[j];
                          }
                        }
                      }
                    }
                  });
}

namespace {

Var matmul_impl(const char* op, const Var& a, const Var& w, const Var* bias) {
  const std::size_t k = last_dim(a, op);
  if (w.value().rank() != 2 || w.dim(0) != k) {
    shape_error(op, shape_string(a.shape()) + " · " + shape_string(w.shape()));
  }
  const std::size_t m = w.dim(1);
  if (bias != nullptr && (bias->value().rank() != 1 || bias->dim(0) != m)) {
    shape_error(op, "bias " + shape_string(bias->shape()) + " for " + std::to_string(m) +
                        " outputs");
  }
  Graph& g = a.graph();
  Tensor out(with_last(a.shape(), m));
  auto o = as_rows(out);
  o.noalias() = as_rows(a.value()) * as_matrix(w.value(), k);
  if (bias != nullptr) {
    o.rowwise() += as_rows(bias->value()).row(0);
  }
  std::vector<Var> parents{a, w};
  if (bias != nullptr) {
    parents.push_back(*bias);
  }
  const Var b = bias != nullptr ? *bias : Var();
  return g.record(op, std::move(out), parents, [&g, a, w, b, k](const Tensor&, const Tensor& dy) {
    auto d = as_rows(dy);
    if (Tensor* ga = g.grad_sink(a)) {
      as_rows(*ga).noalias() += d * as_matrix(w.value(), k).transpose();
    }
    if (Tensor* gw = g.grad_sink(w)) {
      as_matrix(*gw, k).noalias() += as_rows(a.value()).transpose() * d;
    }
    if (b.valid()) {
      if (Tensor* gb = g.grad_sink(b)) {
        as_rows(*gb) += d.colwise().sum();
      }
    }
  });
}

}  // namespace

Var matmul(const Var& a, const Var& b) { return matmul_impl("matmul", a, b, nullptr); }

Var linear(const Var& x, const Var& w, const Var& b) { return matmul_impl("linear", x, w, &b); }

Var slice_last(const Var& x, std::size_t start, std::size_t count) {
  const std::size_t k = last_dim(x, "slice_last");
  if (count == 0 || start + count > k) {
    shape_error("slice_last", "columns [" + std::to_string(start) + ", " +
                                  std::to_string(start + count) + ") of " +
                                  shape_string(x.shape()));
  }
  Graph& g = x.graph();
  Tensor out(with_last(x.shape(), count));
  as_rows(out) = as_rows(x.value()).middleCols(idx(start), idx(count));
  return g.record("slice_last", std::move(out), {x}, [&g, x, start, count](const Tensor&, const Tensor& dy) {
    if (Tensor* gx = g.grad_sink(x)) {
      as_rows(*gx).middleCols(idx(start), idx(count)) += as_rows(dy);
    }
  });
}

Var slice_first(const Var& x, std::size_t start, std::size_t count) {
  const Tensor& xv = x.value();
  if (xv.rank() == 0 || count == 0 || start + count > xv.dim(0)) {
    shape_error("slice_first", "rows [" + std::to_string(start) + ", " +
                                   std::to_string(start + count) + ") of " +
                                   shape_string(x.shape()));
  }
  const std::size_t inner = xv.size() / xv.dim(0);
  Shape shape = xv.shape();
  shape[0] = count;
  Graph& g = x.graph();
  Tensor out(shape);
  std::copy_n(xv.data() + start * inner, count * inner, out.data());
  return g.record("slice_first", std::move(out), {x},
                  [&g, x, start, inner](const Tensor&, const Tensor& dy) {
                    if (Tensor* gx = g.grad_sink(x)) {
                      double* o = gx->data() + start * inner;
                      for (std::size_t i = 0; i < dy.size(); ++i) {
                        o[i] += dy[i];
                      }
                    }
                  });
}

Var concat_last(const std::vector<Var>& parts) {
  if (parts.empty()) {
    shape_error("concat_last", "no inputs");
  }
  Shape lead = parts[0].shape();
  lead.pop_back();
  std::size_t total = 0;
  for (const Var& p : parts) {
    Shape s = p.shape();
    s.pop_back();
    if (s != lead) {
      shape_error("concat_last", shape_string(parts[0].shape()) + " vs " + shape_string(p.shape()));
    }
    total += p.shape().back();
  }
  Graph& g = parts[0].graph();
  Shape out_shape = lead;
  out_shape.push_back(total);
  Tensor out(out_shape);
  std::vector<std::size_t> offsets;
  std::size_t off = 0;
  for (const Var& p : parts) {
    const std::size_t c = p.shape().back();
    as_rows(out).middleCols(idx(off), idx(c)) = as_rows(p.value());
    offsets.push_back(off);
    off += c;
  }
  return g.record("concat_last", std::move(out), parts, [&g, parts, offsets](const Tensor&, const Tensor& dy) {
    for (std::size_t i = 0; i < parts.size(); ++i) {
      if (Tensor* gp = g.grad_sink(parts[i])) {
        const std::size_t c = parts[i].shape().back();
        as_rows(*gp) += as_rows(dy).middleCols(idx(offsets[i]), idx(c));
      }
    }
  });
}

Var reshape(const Var& x, Shape shape) {
  Graph& g = x.graph();
  Tensor out = x.value().reshaped(std::move(shape));
  return g.record("reshape", std::move(out), {x}, [&g, x](const Tensor&, const Tensor& dy) {
    if (Tensor* gx = g.grad_sink(x)) {
      for (std::size_t i = 0; i < dy.size(); ++i) {
        (*gx)[i] += dy[i];
      }
    }
  });
}

Var embedding(const Var& table, std::span<const std::int32_t> ids, const Shape& ids_shape) {
  if (table.value().rank() != 2) {
    shape_error("embedding", "table must be [V, d], got " + shape_string(table.shape()));
  }
  if (shape_size(ids_shape) != ids.size()) {
    shape_error("embedding", std::to_string(ids.size()) + " ids for shape " +
                                 shape_string(ids_shape));
  }
  const std::size_t vocab = table.dim(0), d = table.dim(1);
  for (std::int32_t id : ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= vocab) {
      throw Error(Errc::kIndexOutOfRange, "embedding id " + std::to_string(id) +
                                              " outside vocabulary of " + std::to_string(vocab));
    }
  }
  Graph& g = table.graph();
  Shape out_shape = ids_shape;
  out_shape.push_back(d);
  Tensor out(out_shape);
  const double* src = table.value().data();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    std::copy_n(src + static_cast<std::size_t>(ids[i]) * d, d, out.data() + i * d);
  }
  std::vector<std::int32_t> kept(ids.begin(), ids.end());
  return g.record("embedding", std::move(out), {table},
                  [&g, table, kept = std::move(kept), d](const Tensor&, const Tensor& dy) {
                    if (Tensor* gt = g.grad_sink(table)) {
                      for (std::size_t i = 0; i < kept.size(); ++i) {
                        double* row = gt->data() + static_cast<std::size_t>(kept[i]) * d;
                        const double* src_row = dy.data() + i * d;
                        for (std::size_t j = 0; j < d; ++j) {
                          row[j] += src_row[j];
                        }
                      }
                    }
                  });
}

Var conv1d(const Var& x, const Var& kernels, const Var& bias) {
  const Tensor& xv = x.value();
  const bool batched = xv.rank() == 3;
  if (!batched && xv.rank() != 2) {
    shape_error("conv1d", "input must be [B, n, d_in] or [n, d_in], got " +
                              shape_string(x.shape()));
  }
  const std::size_t batch = batched ? xv.dim(0) : 1;
  const std::size_t n = xv.dim(batched ? 1 : 0);
  const std::size_t d_in = xv.dim(batched ? 2 : 1);
  const Tensor& kv = kernels.value();
  if (kv.rank() != 3 || kv.dim(1) != d_in) {
    shape_error("conv1d", "kernels " + shape_string(kernels.shape()) + " for input " +
                              shape_string(x.shape()));
  }
  const std::size_t w = kv.dim(0), d_out = kv.dim(2);
  if (bias.value().rank() != 1 || bias.dim(0) != d_out) {
    shape_error("conv1d", "bias " + shape_string(bias.shape()));
  }
  if (w == 0 || n < w) {
    shape_error("conv1d", "sequence length " + std::to_string(n) + " shorter than kernel width " +
                              std::to_string(w));
  }
  const std::size_t steps = n - w + 1;
  const std::size_t span = w * d_in;
  Graph& g = x.graph();
  Tensor out(batched ? Shape{batch, steps, d_out} : Shape{steps, d_out});
  const ConstMatMap kmat(kv.data(), idx(span), idx(d_out));
  const auto brow = as_rows(bias.value()).row(0);
  for (std::size_t b = 0; b < batch; ++b) {
    StridedMap windows(xv.data() + b * n * d_in, idx(steps), idx(span),
                       Eigen::OuterStride<>(idx(d_in)));
    MatMap o(out.data() + b * steps * d_out, idx(steps), idx(d_out));
    o.noalias() = windows * kmat;
    o.rowwise() += brow;
  }
  return g.record(
      "conv1d", std::move(out), {x, kernels, bias},
      [&g, x, kernels, bias, batch, n, d_in, steps, span, d_out](const Tensor&, const Tensor& dy) {
        const Tensor& xv = x.value();
        const ConstMatMap kmat(kernels.value().data(), idx(span), idx(d_out));
        Tensor* gx = g.grad_sink(x);
        Tensor* gk = g.grad_sink(kernels);
        Tensor* gb = g.grad_sink(bias);
        RowMatrix dwin;
        for (std::size_t b = 0; b < batch; ++b) {
          const ConstMatMap d(dy.data() + b * steps * d_out, idx(steps), idx(d_out));
          if (gk != nullptr) {
            StridedMap windows(xv.data() + b * n * d_in, idx(steps), idx(span),
                               Eigen::OuterStride<>(idx(d_in)));
            MatMap(gk->data(), idx(span), idx(d_out)).noalias() += windows.transpose() * d;
          }
          if (gb != nullptr) {
            as_rows(*gb) += d.colwise().sum();
          }
          if (gx != nullptr) {
            dwin.noalias() = d * kmat.transpose();
            double* base = gx->data() + b * n * d_in;
            for (std::size_t t = 0; t < steps; ++t) {
              Eigen::Map<Eigen::RowVectorXd>(base + t * d_in, idx(span)) += dwin.row(idx(t));
            }
          }
        }
      });
}

Var time_step(const Var& x, std::size_t t) {
  if (x.value().rank() != 3 || t >= x.dim(1)) {
    shape_error("time_step", "step " + std::to_string(t) + " of " + shape_string(x.shape()));
  }
  const std::size_t batch = x.dim(0), n = x.dim(1), d = x.dim(2);
  Graph& g = x.graph();
  Tensor out({batch, d});
  for (std::size_t b = 0; b < batch; ++b) {
    std::copy_n(x.value().data() + (b * n + t) * d, d, out.data() + b * d);
  }
  return g.record("time_step", std::move(out), {x}, [&g, x, t, batch, n, d](const Tensor&, const Tensor& dy) {
    if (Tensor* gx = g.grad_sink(x)) {
      for (std::size_t b = 0; b < batch; ++b) {
        double* o = gx->data() + (b * n + t) * d;
        const double* s = dy.data() + b * d;
        for (std::size_t j = 0; j < d; ++j) {
          o[j] += s[j];
        }
      }
    }
  });
}

Var stack_steps(const std::vector<Var>& steps) {
  if (steps.empty()) {
    shape_error("stack_steps", "no inputs");
  }
  const Shape s0 = steps[0].shape();
  if (s0.size() != 2) {
    shape_error("stack_steps", "steps must be [B, d], got " + shape_string(s0));
  }
  for (const Var& s : steps) {
    if (s.shape() != s0) {
      shape_error("stack_steps", shape_string(s0) + " vs " + shape_string(s.shape()));
    }
  }
  const std::size_t batch = s0[0], d = s0[1], n = steps.size();
  Graph& g = steps[0].graph();
  Tensor out({batch, n, d});
  for (std::size_t t = 0; t < n; ++t) {
    const double* src = steps[t].value().data();
    for (std::size_t b = 0; b < batch; ++b) {
      std::copy_n(src + b * d, d, out.data() + (b * n + t) * d);
    }
  }
  return g.record("stack_steps", std::move(out), steps,
                  [&g, steps, batch, n, d](const Tensor&, const Tensor& dy) {
                    for (std::size_t t = 0; t < n; ++t) {
                      Tensor* gs = g.grad_sink(steps[t]);
                      if (gs == nullptr) {
                        continue;
                      }
                      for (std::size_t b = 0; b < batch; ++b) {
                        const double* s = dy.data() + (b * n + t) * d;
                        double* o = gs->data() + b * d;
                        for (std::size_t j = 0; j < d; ++j) {
                          o[j] += s[j];
                        }
                      }
                    }
                  });
}

Var softmax_rows(const Var& x) {
  last_dim(x, "softmax_rows");
  Graph& g = x.graph();
  Tensor out(x.shape());
  auto o = as_rows(out);
  const auto in = as_rows(x.value());
  for (Index r = 0; r < in.rows(); ++r) {
    const double m = in.row(r).maxCoeff();
    o.row(r) = (in.row(r).array() - m).exp().matrix();
    o.row(r) /= o.row(r).sum();
  }
  return g.record("softmax_rows", std::move(out), {x}, [&g, x](const Tensor& y, const Tensor& dy) {
    if (Tensor* gx = g.grad_sink(x)) {
      const auto yv = as_rows(y);
      const auto d = as_rows(dy);
      Eigen::VectorXd dot = (d.array() * yv.array()).rowwise().sum();
      as_rows(*gx).array() += yv.array() * (d.array().colwise() - dot.array());
    }
  });
}

Var weighted_sum(const Var& alpha, const Var& h) {
  if (alpha.value().rank() != 2 || h.value().rank() != 3 || alpha.dim(0) != h.dim(0) ||
      alpha.dim(1) != h.dim(1)) {
    shape_error("weighted_sum", shape_string(alpha.shape()) + " over " + shape_string(h.shape()));
  }
  const std::size_t batch = h.dim(0), n = h.dim(1), d = h.dim(2);
  Graph& g = h.graph();
  Tensor out({batch, d});
  for (std::size_t b = 0; b < batch; ++b) {
    const ConstMatMap hb(h.value().data() + b * n * d, idx(n), idx(d));
    const ConstMatMap ab(alpha.value().data() + b * n, 1, idx(n));
    MatMap(out.data() + b * d, 1, idx(d)).noalias() = ab * hb;
  }
  return g.record("weighted_sum", std::move(out), {alpha, h},
                  [&g, alpha, h, batch, n, d](const Tensor&, const Tensor& dy) {
                    Tensor* ga = g.grad_sink(alpha);
                    Tensor* gh = g.grad_sink(h);
                    for (std::size_t b = 0; b < batch; ++b) {
                      const ConstMatMap db(dy.data() + b * d, 1, idx(d));
                      if (ga != nullptr) {
                        const ConstMatMap hb(h.value().data() + b * n * d, idx(n), idx(d));
                        MatMap(ga->data() + b * n, 1, idx(n)).noalias() += db * hb.transpose();
                      }
                      if (gh != nullptr) {
                        const ConstMatMap ab(alpha.value().data() + b * n, 1, idx(n));
                        MatMap(gh->data() + b * n * d, idx(n), idx(d)).noalias() +=
                            ab.transpose() * db;
                      }
                    }
                  });
}

Var apply_mask(const Var& x, const Tensor& mask) {
  if (mask.shape() != x.shape()) {
    shape_error("apply_mask", shape_string(mask.shape()) + " on " + shape_string(x.shape()));
  }
  Graph& g = x.graph();
  Tensor out(x.shape());
  as_rows(out).array() = as_rows(x.value()).array() * as_rows(mask).array();
  return g.record("apply_mask", std::move(out), {x}, [&g, x, mask](const Tensor&, const Tensor& dy) {
    if (Tensor* gx = g.grad_sink(x)) {
      as_rows(*gx).array() += as_rows(dy).array() * as_rows(mask).array();
    }
  });
}

Var dropout(const Var& x, double rate) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw Error(Errc::kInvalidArgument, "dropout rate must be in [0, 1)");
  }
  Graph& g = x.graph();
  if (!g.training() || rate == 0.0) {
    return x;
  }
  return apply_mask(x, dropout_mask(x.shape(), rate, g.rng()));
}

Var softmax_cross_entropy(const Var& logits, std::span<const std::size_t> targets) {
  const Tensor& lv = logits.value();
  if (lv.rank() != 2 || lv.dim(0) != targets.size() || lv.dim(0) == 0) {
    shape_error("softmax_cross_entropy", shape_string(logits.shape()) + " with " +
                                             std::to_string(targets.size()) + " targets");
  }
  const std::size_t batch = lv.dim(0), classes = lv.dim(1);
  for (std::size_t t : targets) {
    if (t >= classes) {
      throw Error(Errc::kIndexOutOfRange, "target " + std::to_string(t) + " with " +
                                              std::to_string(classes) + " classes");
    }
  }
  Tensor probs({batch, classes});
  double loss = 0.0;
  for (std::size_t b = 0; b < batch; ++b) {
    std::vector<double> p = softmax(std::span<const double>(lv.data() + b * classes, classes));
    std::copy(p.begin(), p.end(), probs.data() + b * classes);
    loss += cross_entropy(p, targets[b]);
  }
  loss /= static_cast<double>(batch);
  Graph& g = logits.graph();
  std::vector<std::size_t> kept(targets.begin(), targets.end());
  return g.record("softmax_cross_entropy", Tensor({1}, loss), {logits},
                  [&g, logits, probs = std::move(probs), kept = std::move(kept), batch,
                   classes](const Tensor&, const Tensor& dy) {
                    if (Tensor* gl = g.grad_sink(logits)) {
                      const double k = dy[0] / static_cast<double>(batch);
                      for (std::size_t b = 0; b < batch; ++b) {
                        for (std::size_t c = 0; c < classes; ++c) {
                          const double target = c == kept[b] ? 1.0 : 0.0;
                          (*gl)[b * classes + c] += k * (probs[b * classes + c] - target);
                        }
                      }
                    }
                  });
}

std::vector<double> softmax(std::span<const double> z) {
  std::vector<double> out(z.size());
  if (z.empty()) {
    return out;
  }
  const double m = *std::max_element(z.begin(), z.end());
  double total = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    out[i] = std::exp(z[i] - m);
    total += out[i];
  }
  for (double& v : out) {
    v /= total;
  }
  return out;
}

double cross_entropy(std::span<const double> probs, std::size_t target) {
  if (target >= probs.size()) {
    throw Error(Errc::kIndexOutOfRange, "target " + std::to_string(target) + " with " +
                                            std::to_string(probs.size()) + " classes");
  }
  return -std::log(std::max(probs[target], kProbabilityFloor));
}

Tensor dropout_mask(const Shape& shape, double rate, std::mt19937_64& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw Error(Errc::kInvalidArgument, "dropout rate must be in [0, 1)");
  }
  Tensor mask(shape, 1.0);
  if (rate == 0.0) {
    return mask;
  }
  const double keep_scale = 1.0 / (1.0 - rate);
  for (std::size_t i = 0; i < mask.size(); ++i) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    mask[i] = u < rate ? 0.0 : keep_scale;
  }
  return mask;
}

Tensor dropout(const Tensor& x, double rate, Mode mode, std::uint64_t seed) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw Error(Errc::kInvalidArgument, "dropout rate must be in [0, 1)");
  }
  if (mode == Mode::kEval || rate == 0.0) {
    return x;
  }
  std::mt19937_64 rng(seed);
  Tensor mask = dropout_mask(x.shape(), rate, rng);
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = x[i] * mask[i];
  }
  return out;
}

}  // namespace bhs::ad
