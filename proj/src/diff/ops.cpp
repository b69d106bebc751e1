#include "igb/diff/ops.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "igb/errors.hpp"

namespace igb::diff {
namespace {

Tape& same_tape(Var a, Var b, const char* op) {
  if (!a.valid() || !b.valid()) throw ContractError(std::string(op) + ": unbound operand");
  if (&a.tape() != &b.tape()) throw ContractError(std::string(op) + ": operands live on different tapes");
  return a.tape();
}

void require_same_shape(Var a, Var b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_to_string(a.shape()) + " vs " +
                     shape_to_string(b.shape()));
  }
}

void require_matrix_like(const Tensor& t, const char* op) {
  if (t.rank() != 1 && t.rank() != 2) {
    throw ShapeError(std::string(op) + ": expected rank 1 or 2, got " + shape_to_string(t.shape()));
  }
}

// Elementwise unary op whose local derivative depends on the input x and output y.
template <typename Fwd, typename Deriv>
Var unary(Var a, Fwd fwd, Deriv deriv) {
  Tape& tape = a.tape();
  const Tensor& x = a.value();
  std::vector<double> out(x.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fwd(x[i]);
  const auto pid = a.id();
  return tape.record(Tensor(x.shape(), std::move(out)), {pid}, [pid, deriv](Tape& t, std::size_t self) {
    const auto g = t.grad(self);
    const Tensor& xin = t.value(pid);
    const Tensor& yout = t.value(self);
    auto gp = t.grad_accum(pid);
    for (std::size_t i = 0; i < g.size(); ++i) gp[i] += g[i] * deriv(xin[i], yout[i]);
  });
}

}  // namespace

Var matmul(Var a, Var b) {
  Tape& tape = same_tape(a, b, "matmul");
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  if (A.rank() != 2 || B.rank() != 2 || A.cols() != B.rows()) {
    throw ShapeError("matmul: incompatible shapes " + shape_to_string(A.shape()) + " x " +
                     shape_to_string(B.shape()));
  }
  const std::size_t m = A.rows(), k = A.cols(), n = B.cols();
  std::vector<double> out(m * n, 0.0);
  const auto a_data = A.data();
  const auto b_data = B.data();
  for (std::size_t i = 0; i < m; ++i) {
    double* row = out.data() + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a_data[i * k + p];
      if (av == 0.0) continue;
      const double* brow = b_data.data() + p * n;
      for (std::size_t j = 0; j < n; ++j) row[j] += av * brow[j];
    }
  }
  const auto ia = a.id(), ib = b.id();
  return tape.record(Tensor({m, n}, std::move(out)), {ia, ib}, [ia, ib, m, k, n](Tape& t, std::size_t self) {
    const auto g = t.grad(self);
    if (t.needs_grad(ia)) {
      const auto bv = t.value(ib).data();
      auto ga = t.grad_accum(ia);
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
          double acc = 0.0;
          const double* brow = bv.data() + p * n;
          const double* grow = g.data() + i * n;
          for (std::size_t j = 0; j < n; ++j) acc += grow[j] * brow[j];
          ga[i * k + p] += acc;
        }
      }
    }
    if (t.needs_grad(ib)) {
      const auto av = t.value(ia).data();
      auto gb = t.grad_accum(ib);
      for (std::size_t i = 0; i < m; ++i) {
        const double* grow = g.data() + i * n;
        for (std::size_t p = 0; p < k; ++p) {
          const double x = av[i * k + p];
          if (x == 0.0) continue;
          double* gbrow = gb.data() + p * n;
          for (std::size_t j = 0; j < n; ++j) gbrow[j] += x * grow[j];
        }
      }
    }
  });
}

Var add(Var a, Var b) {
  Tape& tape = same_tape(a, b, "add");
  require_same_shape(a, b, "add");
  const auto x = a.value().data(), y = b.value().data();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] + y[i];
  const auto ia = a.id(), ib = b.id();
  return tape.record(Tensor(a.shape(), std::move(out)), {ia, ib}, [ia, ib](Tape& t, std::size_t self) {
    const auto g = t.grad(self);
    for (auto id : {ia, ib}) {
      if (!t.needs_grad(id)) continue;
      auto gp = t.grad_accum(id);
      for (std::size_t i = 0; i < g.size(); ++i) gp[i] += g[i];
    }
  });
}

Var sub(Var a, Var b) {
  Tape& tape = same_tape(a, b, "sub");
  require_same_shape(a, b, "sub");
  const auto x = a.value().data(), y = b.value().data();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] - y[i];
  const auto ia = a.id(), ib = b.id();
  return tape.record(Tensor(a.shape(), std::move(out)), {ia, ib}, [ia, ib](Tape& t, std::size_t self) {
    const auto g = t.grad(self);
    if (t.needs_grad(ia)) {
      auto gp = t.grad_accum(ia);
      for (std::size_t i = 0; i < g.size(); ++i) gp[i] += g[i];
    }
    if (t.needs_grad(ib)) {
      auto gp = t.grad_accum(ib);
      for (std::size_t i = 0; i < g.size(); ++i) gp[i] -= g[i];
    }
  });
}

Var mul(Var a, Var b) {
  Tape& tape = same_tape(a, b, "mul");
  require_same_shape(a, b, "mul");
  const auto x = a.value().data(), y = b.value().data();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] * y[i];
  const auto ia = a.id(), ib = b.id();
  return tape.record(Tensor(a.shape(), std::move(out)), {ia, ib}, [ia, ib](Tape& t, std::size_t self) {
    const auto g = t.grad(self);
    const auto xv = t.value(ia).data(), yv = t.value(ib).data();
    if (t.needs_grad(ia)) {
      auto gp = t.grad_accum(ia);
      for (std::size_t i = 0; i < g.size(); ++i) gp[i] += g[i] * yv[i];
    }
    if (t.needs_grad(ib)) {
      auto gp = t.grad_accum(ib);
      for (std::size_t i = 0; i < g.size(); ++i) gp[i] += g[i] * xv[i];
    }
  });
}

Var add_bias(Var x, Var bias) {
  Tape& tape = same_tape(x, bias, "add_bias");
  const Tensor& X = x.value();
  const Tensor& B = bias.value();
  require_matrix_like(X, "add_bias");
  const std::size_t m = X.rows(), n = X.cols();
  if (B.numel() != n || B.rows() != 1) {
    throw ShapeError("add_bias: bias " + shape_to_string(B.shape()) + " does not fit rows of " +
                     shape_to_string(X.shape()));
  }
  std::vector<double> out(X.data().begin(), X.data().end());
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] += B[j];
  const auto ix = x.id(), ib = bias.id();
  return tape.record(Tensor(X.shape(), std::move(out)), {ix, ib}, [ix, ib, m, n](Tape& t, std::size_t self) {
    const auto g = t.grad(self);
    if (t.needs_grad(ix)) {
      auto gp = t.grad_accum(ix);
      for (std::size_t i = 0; i < g.size(); ++i) gp[i] += g[i];
    }
    if (t.needs_grad(ib)) {
      auto gp = t.grad_accum(ib);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) gp[j] += g[i * n + j];
    }
  });
}

Var scale(Var a, double factor) {
  return unary(a, [factor](double x) { return factor * x; }, [factor](double, double) { return factor; });
}

Var shift(Var a, double offset) {
  return unary(a, [offset](double x) { return x + offset; }, [](double, double) { return 1.0; });
}

Var relu(Var a) {
  return unary(
      a, [](double x) { return x > 0.0 ? x : 0.0; }, [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var tanh(Var a) {
  return unary(a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Var log(Var a) {
  const Tensor& x = a.value();
  for (std::size_t i = 0; i < x.numel(); ++i) {
    if (!(x[i] > 0.0)) {
      std::ostringstream msg;
      msg << "log: non-positive value " << x[i] << " at index " << i;
      throw DomainError(msg.str());
    }
  }
  return unary(a, [](double v) { return std::log(v); }, [](double v, double) { return 1.0 / v; });
}

Var exp(Var a) {
  return unary(a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Var square(Var a) {
  return unary(a, [](double x) { return x * x; }, [](double x, double) { return 2.0 * x; });
}

Var clamp(Var a, double lo, double hi) {
  if (lo > hi) throw ContractError("clamp: lo > hi");
  return unary(
      a, [lo, hi](double x) { return std::clamp(x, lo, hi); },
      [lo, hi](double x, double) { return (x >= lo && x <= hi) ? 1.0 : 0.0; });
}

Var minimum(Var a, Var b) {
  Tape& tape = same_tape(a, b, "minimum");
  require_same_shape(a, b, "minimum");
  const auto x = a.value().data(), y = b.value().data();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::min(x[i], y[i]);
  const auto ia = a.id(), ib = b.id();
  return tape.record(Tensor(a.shape(), std::move(out)), {ia, ib}, [ia, ib](Tape& t, std::size_t self) {
    const auto g = t.grad(self);
    const auto xv = t.value(ia).data(), yv = t.value(ib).data();
    // Ties route the gradient to the first operand.
    if (t.needs_grad(ia)) {
      auto gp = t.grad_accum(ia);
      for (std::size_t i = 0; i < g.size(); ++i)
        if (xv[i] <= yv[i]) gp[i] += g[i];
    }
    if (t.needs_grad(ib)) {
      auto gp = t.grad_accum(ib);
      for (std::size_t i = 0; i < g.size(); ++i)
        if (xv[i] > yv[i]) gp[i] += g[i];
    }
  });
}

Var softmax(Var a) {
  Tape& tape = a.tape();
  const Tensor& X = a.value();
  require_matrix_like(X, "softmax");
  const std::size_t m = X.rows(), n = X.cols();
  std::vector<double> out(X.numel());
  for (std::size_t i = 0; i < m; ++i) {
    const double* row = X.data().data() + i * n;
    const double mx = *std::max_element(row, row + n);
    double z = 0.0;
    for (std::size_t j = 0; j < n; ++j) z += (out[i * n + j] = std::exp(row[j] - mx));
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] /= z;
  }
  const auto ia = a.id();
  return tape.record(Tensor(X.shape(), std::move(out)), {ia}, [ia, m, n](Tape& t, std::size_t self) {
    const auto g = t.grad(self);
    const auto y = t.value(self).data();
    auto gp = t.grad_accum(ia);
    for (std::size_t i = 0; i < m; ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < n; ++j) dot += g[i * n + j] * y[i * n + j];
      for (std::size_t j = 0; j < n; ++j) gp[i * n + j] += y[i * n + j] * (g[i * n + j] - dot);
    }
  });
}

Var sum(Var a) {
  Tape& tape = a.tape();
  double total = 0.0;
  for (double v : a.value().data()) total += v;
  const auto ia = a.id();
  return tape.record(Tensor::scalar(total), {ia}, [ia](Tape& t, std::size_t self) {
    const double g = t.grad(self)[0];
    for (auto& v : t.grad_accum(ia)) v += g;
  });
}

Var mean(Var a) { return scale(sum(a), 1.0 / static_cast<double>(a.numel())); }

Var row_sum(Var a) {
  Tape& tape = a.tape();
  const Tensor& X = a.value();
  require_matrix_like(X, "row_sum");
  const std::size_t m = X.rows(), n = X.cols();
  std::vector<double> out(m, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i] += X[i * n + j];
  const auto ia = a.id();
  return tape.record(Tensor({m, 1}, std::move(out)), {ia}, [ia, m, n](Tape& t, std::size_t self) {
    const auto g = t.grad(self);
    auto gp = t.grad_accum(ia);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) gp[i * n + j] += g[i];
  });
}

Var concat_cols(Var a, Var b) {
  Tape& tape = same_tape(a, b, "concat_cols");
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  require_matrix_like(A, "concat_cols");
  require_matrix_like(B, "concat_cols");
  if (A.rows() != B.rows()) {
    throw ShapeError("concat_cols: row mismatch " + shape_to_string(A.shape()) + " vs " +
                     shape_to_string(B.shape()));
  }
  const std::size_t m = A.rows(), na = A.cols(), nb = B.cols(), n = na + nb;
  std::vector<double> out(m * n);
  for (std::size_t i = 0; i < m; ++i) {
    std::copy_n(A.data().data() + i * na, na, out.data() + i * n);
    std::copy_n(B.data().data() + i * nb, nb, out.data() + i * n + na);
  }
  const auto ia = a.id(), ib = b.id();
  return tape.record(Tensor({m, n}, std::move(out)), {ia, ib}, [ia, ib, m, na, nb, n](Tape& t, std::size_t self) {
    const auto g = t.grad(self);
    if (t.needs_grad(ia)) {
      auto gp = t.grad_accum(ia);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < na; ++j) gp[i * na + j] += g[i * n + j];
    }
    if (t.needs_grad(ib)) {
      auto gp = t.grad_accum(ib);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < nb; ++j) gp[i * nb + j] += g[i * n + na + j];
    }
  });
}

Var slice_cols(Var a, std::size_t begin, std::size_t end) {
  Tape& tape = a.tape();
  const Tensor& A = a.value();
  require_matrix_like(A, "slice_cols");
  const std::size_t m = A.rows(), n = A.cols();
  if (begin >= end || end > n) {
    throw ShapeError("slice_cols: range [" + std::to_string(begin) + "," + std::to_string(end) +
                     ") outside " + shape_to_string(A.shape()));
  }
  const std::size_t w = end - begin;
  std::vector<double> out(m * w);
  for (std::size_t i = 0; i < m; ++i) std::copy_n(A.data().data() + i * n + begin, w, out.data() + i * w);
  const auto ia = a.id();
  return tape.record(Tensor({m, w}, std::move(out)), {ia}, [ia, m, n, w, begin](Tape& t, std::size_t self) {
    const auto g = t.grad(self);
    auto gp = t.grad_accum(ia);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < w; ++j) gp[i * n + begin + j] += g[i * w + j];
  });
}

Var element(Var a, std::size_t index) {
  Tape& tape = a.tape();
  if (index >= a.numel()) {
    throw ShapeError("element: index " + std::to_string(index) + " outside " + shape_to_string(a.shape()));
  }
  const auto ia = a.id();
  return tape.record(Tensor::scalar(a.value()[index]), {ia}, [ia, index](Tape& t, std::size_t self) {
    t.grad_accum(ia)[index] += t.grad(self)[0];
  });
}

Var stack(std::span<const Var> scalars) {
  if (scalars.empty()) throw ShapeError("stack: no operands");
  Tape& tape = scalars.front().tape();
  std::vector<double> out;
  std::vector<std::size_t> ids;
  for (const auto& s : scalars) {
    if (&s.tape() != &tape) throw ContractError("stack: operands live on different tapes");
    if (s.numel() != 1) throw ShapeError("stack: operand of shape " + shape_to_string(s.shape()));
    out.push_back(s.item());
    ids.push_back(s.id());
  }
  auto parents = ids;
  return tape.record(Tensor::vector(std::move(out)), std::move(parents), [ids](Tape& t, std::size_t self) {
    const auto g = t.grad(self);
    for (std::size_t i = 0; i < ids.size(); ++i)
      if (t.needs_grad(ids[i])) t.grad_accum(ids[i])[0] += g[i];
  });
}

Var weighted_sum(std::span<const Var> scalars, std::span<const double> weights) {
  if (scalars.size() != weights.size()) {
    throw ShapeError("weighted_sum: " + std::to_string(scalars.size()) + " terms but " +
                     std::to_string(weights.size()) + " weights");
  }
  Var stacked = stack(scalars);
  Var w = stacked.tape().constant(Tensor::vector(std::vector<double>(weights.begin(), weights.end())));
  return sum(mul(stacked, w));
}

Var mse(Var prediction, Var target) {
  require_same_shape(prediction, target, "mse");
  return mean(square(sub(prediction, target)));
}

Var cross_entropy(Var logits, std::span<const std::size_t> labels) {
  Tape& tape = logits.tape();
  const Tensor& X = logits.value();
  require_matrix_like(X, "cross_entropy");
  const std::size_t m = X.rows(), n = X.cols();
  if (labels.size() != m) {
    throw ShapeError("cross_entropy: " + std::to_string(labels.size()) + " labels for " + std::to_string(m) +
                     " rows");
  }
  std::vector<double> probs(m * n);
  double loss = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    if (labels[i] >= n) throw ContractError("cross_entropy: label " + std::to_string(labels[i]) + " out of range");
    const double* row = X.data().data() + i * n;
    const double mx = *std::max_element(row, row + n);
    double z = 0.0;
    for (std::size_t j = 0; j < n; ++j) z += (probs[i * n + j] = std::exp(row[j] - mx));
    for (std::size_t j = 0; j < n; ++j) probs[i * n + j] /= z;
    loss -= (row[labels[i]] - mx) - std::log(z);
  }
  loss /= static_cast<double>(m);
  std::vector<std::size_t> lab(labels.begin(), labels.end());
  const auto ia = logits.id();
  return tape.record(Tensor::scalar(loss), {ia},
                     [ia, m, n, probs = std::move(probs), lab = std::move(lab)](Tape& t, std::size_t self) {
                       const double g = t.grad(self)[0] / static_cast<double>(m);
                       auto gp = t.grad_accum(ia);
                       for (std::size_t i = 0; i < m; ++i) {
                         for (std::size_t j = 0; j < n; ++j) {
                           gp[i * n + j] += g * (probs[i * n + j] - (j == lab[i] ? 1.0 : 0.0));
                         }
                       }
                     });
}

Var gaussian_log_prob(Var x, Var mean_, Var log_std) {
  require_same_shape(x, mean_, "gaussian_log_prob");
  require_same_shape(x, log_std, "gaussian_log_prob");
  // log N = -(x-mu)^2 / (2 sigma^2) - log sigma - log(2 pi)/2, built from primitive ops.
  Var z = mul(sub(x, mean_), exp(scale(log_std, -1.0)));
  Var per_entry = shift(sub(scale(square(z), -0.5), log_std), -0.5 * std::log(2.0 * std::numbers::pi));
  return row_sum(per_entry);
}

}  // namespace igb::diff
