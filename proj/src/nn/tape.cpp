#include "evnet/nn/tape.hpp"

#include "evnet/transforms.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace evnet::nn {

namespace {

void require_same_tape(Var a, Var b) {
  if (a.tape() != b.tape() || !a.valid()) throw std::invalid_argument("vars belong to different tapes");
}

void require_shape(bool ok, const char* op) {
  if (!ok) throw std::invalid_argument(std::string(op) + ": shape mismatch");
}

}  // namespace

const Matrix& Var::value() const { return tape_->value(*this); }

void ParamStore::set(const std::string& name, Matrix value) { tensors_[name] = std::move(value); }

const Matrix& ParamStore::get(const std::string& name) const {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) throw std::out_of_range("unknown parameter '" + name + "'");
  return it->second;
}

Matrix& ParamStore::get(const std::string& name) {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) throw std::out_of_range("unknown parameter '" + name + "'");
  return it->second;
}

std::size_t ParamStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [name, t] : tensors_) n += static_cast<std::size_t>(t.size());
  return n;
}

Var Tape::constant(Matrix value) {
  nodes_.push_back({std::move(value), {}, false, false, {}});
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

Var Tape::variable(Matrix value) {
  nodes_.push_back({std::move(value), {}, true, false, {}});
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

Var Tape::param(const ParamStore& store, const std::string& name) {
  auto it = param_nodes_.find(name);
  if (it != param_nodes_.end()) return Var(this, it->second);
  Var v = grad_enabled_ ? variable(store.get(name)) : constant(store.get(name));
  param_nodes_.emplace(name, v.id());
  return v;
}

Var Tape::record(Matrix value, const std::vector<Var>& inputs, Backward backward) {
  bool needs = false;
  for (Var in : inputs) {
    if (in.tape() != this) throw std::invalid_argument("input var belongs to another tape");
    needs = needs || nodes_[in.id()].requires_grad;
  }
  nodes_.push_back({std::move(value), {}, needs, false, needs ? std::move(backward) : Backward{}});
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

void Tape::accumulate(Var v, const Matrix& delta) {
  Node& node = nodes_[v.id()];
  if (!node.requires_grad) return;
  if (!node.has_grad) {
    node.grad = delta;
    node.has_grad = true;
  } else {
    node.grad += delta;
  }
}

void Tape::backward(Var output) {
  if (output.tape() != this) throw std::invalid_argument("backward: var from another tape");
  if (value(output).size() != 1) throw std::invalid_argument("backward: output must be a scalar");
  for (Node& node : nodes_) {
    node.has_grad = false;
    node.grad.resize(0, 0);
  }
  accumulate(output, Matrix::Ones(1, 1));
  for (int i = output.id(); i >= 0; --i) {
    Node& node = nodes_[i];
    if (!node.has_grad || !node.backward) continue;
    // Inputs always precede their consumer, so accumulate() never touches
    // this node again; the copy keeps the upstream stable regardless.
    const Matrix upstream = node.grad;
    node.backward(*this, upstream);
  }
}

Matrix Tape::grad(Var v) const {
  const Node& node = nodes_[v.id()];
  if (!node.has_grad) return Matrix::Zero(node.value.rows(), node.value.cols());
  return node.grad;
}

Gradients Tape::param_grads() const {
  Gradients out;
  for (const auto& [name, id] : param_nodes_) out.emplace(name, grad(Var(const_cast<Tape*>(this), id)));
  return out;
}

Var matmul(Var a, Var b) {
  require_same_tape(a, b);
  require_shape(a.cols() == b.rows(), "matmul");
  Matrix out = a.value() * b.value();
  return a.tape()->record(std::move(out), {a, b}, [a, b](Tape& t, const Matrix& g) {
    if (t.requires_grad(a)) t.accumulate(a, g * t.value(b).transpose());
    if (t.requires_grad(b)) t.accumulate(b, t.value(a).transpose() * g);
  });
}

Var add(Var a, Var b) {
  require_same_tape(a, b);
  require_shape(a.rows() == b.rows() && a.cols() == b.cols(), "add");
  Matrix out = a.value() + b.value();
  return a.tape()->record(std::move(out), {a, b}, [a, b](Tape& t, const Matrix& g) {
    t.accumulate(a, g);
    t.accumulate(b, g);
  });
}

Var sub(Var a, Var b) {
  require_same_tape(a, b);
  require_shape(a.rows() == b.rows() && a.cols() == b.cols(), "sub");
  Matrix out = a.value() - b.value();
  return a.tape()->record(std::move(out), {a, b}, [a, b](Tape& t, const Matrix& g) {
    t.accumulate(a, g);
    t.accumulate(b, -g);
  });
}

Var hadamard(Var a, Var b) {
  require_same_tape(a, b);
  require_shape(a.rows() == b.rows() && a.cols() == b.cols(), "hadamard");
  Matrix out = a.value().cwiseProduct(b.value());
  return a.tape()->record(std::move(out), {a, b}, [a, b](Tape& t, const Matrix& g) {
    if (t.requires_grad(a)) t.accumulate(a, g.cwiseProduct(t.value(b)));
    if (t.requires_grad(b)) t.accumulate(b, g.cwiseProduct(t.value(a)));
  });
}

Var scale(Var a, double s) {
  Matrix out = a.value() * s;
  return a.tape()->record(std::move(out), {a}, [a, s](Tape& t, const Matrix& g) { t.accumulate(a, g * s); });
}

Var add_row(Var a, Var row) {
  require_same_tape(a, row);
  require_shape(row.rows() == 1 && row.cols() == a.cols(), "add_row");
  Matrix out = a.value().rowwise() + row.value().row(0);
  return a.tape()->record(std::move(out), {a, row}, [a, row](Tape& t, const Matrix& g) {
    t.accumulate(a, g);
    if (t.requires_grad(row)) t.accumulate(row, g.colwise().sum());
  });
}

Var relu(Var a) {
  Matrix out = a.value().cwiseMax(0.0);
  return a.tape()->record(std::move(out), {a}, [a](Tape& t, const Matrix& g) {
    t.accumulate(a, (t.value(a).array() > 0.0).select(g, 0.0));
  });
}

Var sum(Var a) {
  Matrix out(1, 1);
  out(0, 0) = a.value().sum();
  return a.tape()->record(std::move(out), {a}, [a](Tape& t, const Matrix& g) {
    const Matrix& v = t.value(a);
    t.accumulate(a, Matrix::Constant(v.rows(), v.cols(), g(0, 0)));
  });
}

Var mean(Var a) {
  const double n = static_cast<double>(a.value().size());
  if (n == 0) throw std::invalid_argument("mean: empty input");
  return scale(sum(a), 1.0 / n);
}

Var transpose(Var a) {
  Matrix out = a.value().transpose();
  return a.tape()->record(std::move(out), {a}, [a](Tape& t, const Matrix& g) { t.accumulate(a, g.transpose()); });
}

Var concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_cols: no inputs");
  Tape* tape = parts.front().tape();
  const Eigen::Index rows = parts.front().rows();
  Eigen::Index cols = 0;
  for (Var p : parts) {
    require_same_tape(parts.front(), p);
    require_shape(p.rows() == rows, "concat_cols");
    cols += p.cols();
  }
  Matrix out(rows, cols);
  Eigen::Index offset = 0;
  for (Var p : parts) {
    out.middleCols(offset, p.cols()) = p.value();
    offset += p.cols();
  }
  std::vector<Eigen::Index> widths;
  for (Var p : parts) widths.push_back(p.cols());
  return tape->record(std::move(out), parts, [parts, widths](Tape& t, const Matrix& g) {
    Eigen::Index off = 0;
    for (std::size_t i = 0; i < parts.size(); ++i) {
      if (t.requires_grad(parts[i])) t.accumulate(parts[i], g.middleCols(off, widths[i]));
      off += widths[i];
    }
  });
}

Var slice_rows(Var a, Eigen::Index start, Eigen::Index count) {
  require_shape(start >= 0 && count >= 0 && start + count <= a.rows(), "slice_rows");
  Matrix out = a.value().middleRows(start, count);
  return a.tape()->record(std::move(out), {a}, [a, start, count](Tape& t, const Matrix& g) {
    Matrix full = Matrix::Zero(t.value(a).rows(), t.value(a).cols());
    full.middleRows(start, count) = g;
    t.accumulate(a, full);
  });
}

Var slice_cols(Var a, Eigen::Index start, Eigen::Index count) {
  require_shape(start >= 0 && count >= 0 && start + count <= a.cols(), "slice_cols");
  Matrix out = a.value().middleCols(start, count);
  return a.tape()->record(std::move(out), {a}, [a, start, count](Tape& t, const Matrix& g) {
    Matrix full = Matrix::Zero(t.value(a).rows(), t.value(a).cols());
    full.middleCols(start, count) = g;
    t.accumulate(a, full);
  });
}

Var gather_rows(Var a, const std::vector<int>& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), a.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    require_shape(rows[i] >= 0 && rows[i] < a.rows(), "gather_rows");
    out.row(static_cast<Eigen::Index>(i)) = a.value().row(rows[i]);
  }
  return a.tape()->record(std::move(out), {a}, [a, rows](Tape& t, const Matrix& g) {
    Matrix full = Matrix::Zero(t.value(a).rows(), t.value(a).cols());
    for (std::size_t i = 0; i < rows.size(); ++i) full.row(rows[i]) += g.row(static_cast<Eigen::Index>(i));
    t.accumulate(a, full);
  });
}

Var flatten(Var a) { return reshape(a, 1, a.value().size()); }

Var reshape(Var a, Eigen::Index rows, Eigen::Index cols) {
  require_shape(rows * cols == a.value().size(), "reshape");
  const Eigen::Index in_rows = a.rows();
  const Eigen::Index in_cols = a.cols();
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const RowMajor src = a.value();
  Matrix out = Eigen::Map<const RowMajor>(src.data(), rows, cols);
  return a.tape()->record(std::move(out), {a}, [a, in_rows, in_cols](Tape& t, const Matrix& g) {
    const RowMajor grad_rm = g;
    t.accumulate(a, Eigen::Map<const RowMajor>(grad_rm.data(), in_rows, in_cols));
  });
}

Var tile_rows(Var row, Eigen::Index count) {
  require_shape(row.rows() == 1, "tile_rows");
  Matrix out = row.value().replicate(count, 1);
  return row.tape()->record(std::move(out), {row}, [row](Tape& t, const Matrix& g) {
    t.accumulate(row, g.colwise().sum());
  });
}

Var left_multiply(const Matrix& weights, Var a) {
  require_shape(weights.cols() == a.rows(), "left_multiply");
  Matrix out = weights * a.value();
  return a.tape()->record(std::move(out), {a}, [a, weights](Tape& t, const Matrix& g) {
    t.accumulate(a, weights.transpose() * g);
  });
}

Var detach(Var a) { return a.tape()->constant(a.value()); }

Var softmax_rows(Var a) {
  Matrix out = a.value();
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    const double peak = out.row(r).maxCoeff();
    out.row(r) = (out.row(r).array() - peak).exp();
    out.row(r) /= out.row(r).sum();
  }
  Matrix y = out;
  return a.tape()->record(std::move(out), {a}, [a, y](Tape& t, const Matrix& g) {
    const Eigen::VectorXd dots = g.cwiseProduct(y).rowwise().sum();
    t.accumulate(a, y.cwiseProduct(g - dots.replicate(1, g.cols())));
  });
}

Var layer_norm(Var a, Var gain, Var bias, double eps) {
  require_same_tape(a, gain);
  require_same_tape(a, bias);
  const Eigen::Index c = a.cols();
  require_shape(gain.rows() == 1 && gain.cols() == c && bias.rows() == 1 && bias.cols() == c, "layer_norm");
  const Matrix& x = a.value();
  Matrix xhat(x.rows(), c);
  Eigen::VectorXd inv_std(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double mu = x.row(r).mean();
    const double var = (x.row(r).array() - mu).square().mean();
    inv_std(r) = 1.0 / std::sqrt(var + eps);
    xhat.row(r) = (x.row(r).array() - mu) * inv_std(r);
  }
  Matrix out = (xhat.array().rowwise() * gain.value().row(0).array()).matrix();
  out.rowwise() += bias.value().row(0);
  return a.tape()->record(std::move(out), {a, gain, bias},
                          [a, gain, bias, xhat, inv_std](Tape& t, const Matrix& g) {
    if (t.requires_grad(gain)) t.accumulate(gain, g.cwiseProduct(xhat).colwise().sum());
    if (t.requires_grad(bias)) t.accumulate(bias, g.colwise().sum());
    if (!t.requires_grad(a)) return;
    const Matrix dxhat = (g.array().rowwise() * t.value(gain).row(0).array()).matrix();
    Matrix dx(dxhat.rows(), dxhat.cols());
    for (Eigen::Index r = 0; r < dx.rows(); ++r) {
      const double m1 = dxhat.row(r).mean();
      const double m2 = dxhat.row(r).cwiseProduct(xhat.row(r)).mean();
      dx.row(r) = inv_std(r) * (dxhat.row(r).array() - m1 - xhat.row(r).array() * m2);
    }
    t.accumulate(a, dx);
  });
}

Var row_norms(Var a) {
  Matrix out = a.value().rowwise().norm();
  return a.tape()->record(std::move(out), {a}, [a](Tape& t, const Matrix& g) {
    const Matrix& x = t.value(a);
    Matrix dx = Matrix::Zero(x.rows(), x.cols());
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      const double n = x.row(r).norm();
      if (n > 0.0) dx.row(r) = g(r, 0) * x.row(r) / n;
    }
    t.accumulate(a, dx);
  });
}

Var idft_amp_phase(Var spectrum) {
  Matrix out = evnet::dft_inverse(spectrum.value());
  return spectrum.tape()->record(std::move(out), {spectrum}, [spectrum](Tape& t, const Matrix& g) {
    const Matrix& s = t.value(spectrum);
    const Eigen::Index n = s.rows();
    const Eigen::Index m = s.cols() / 2;
    const double norm = 1.0 / std::sqrt(double(n));
    const double two_pi = 2.0 * std::numbers::pi;
    Matrix ds = Matrix::Zero(n, 2 * m);
    for (Eigen::Index c = 0; c < m; ++c) {
      for (Eigen::Index k = 0; k < n; ++k) {
        double d_amp = 0.0, d_phase = 0.0;
        for (Eigen::Index tt = 0; tt < n; ++tt) {
          const double angle = s(k, m + c) + two_pi * double((k * tt) % n) / double(n);
          d_amp += g(tt, c) * std::cos(angle);
          d_phase -= g(tt, c) * std::sin(angle);
        }
        ds(k, c) = norm * d_amp;
        ds(k, m + c) = norm * s(k, c) * d_phase;
      }
    }
    t.accumulate(spectrum, ds);
  });
}

Var haar_inverse(Var spectrum) {
  Matrix out = evnet::haar_inverse(spectrum.value());
  return spectrum.tape()->record(std::move(out), {spectrum}, [spectrum](Tape& t, const Matrix& g) {
    const Eigen::Index half = t.value(spectrum).rows();
    const Eigen::Index m = t.value(spectrum).cols() / 2;
    const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
    Matrix ds(half, 2 * m);
    for (Eigen::Index k = 0; k < half; ++k) {
      ds.row(k).head(m) = (g.row(2 * k) + g.row(2 * k + 1)) * inv_sqrt2;
      ds.row(k).tail(m) = (g.row(2 * k) - g.row(2 * k + 1)) * inv_sqrt2;
    }
    t.accumulate(spectrum, ds);
  });
}

Var bilinear_pool(Var a) {
  const Eigen::Index e = a.cols();
  require_shape(e % 2 == 0 && e > 0, "bilinear_pool");
  const Eigen::Index p = e / 2;
  const Matrix& x = a.value();
  Matrix out(x.rows(), p * p);
  // Winning (i, j) of every pooled cell, needed for the backward pass.
  std::vector<std::pair<int, int>> winners(static_cast<std::size_t>(x.rows() * p * p));
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    for (Eigen::Index pa = 0; pa < p; ++pa) {
      for (Eigen::Index pb = 0; pb < p; ++pb) {
        double best = -std::numeric_limits<double>::infinity();
        std::pair<int, int> arg{0, 0};
        for (int di = 0; di < 2; ++di) {
          for (int dj = 0; dj < 2; ++dj) {
            const int i = int(2 * pa + di), j = int(2 * pb + dj);
            const double v = x(r, i) * x(r, j);
            if (v > best) {
              best = v;
              arg = {i, j};
            }
          }
        }
        out(r, pa * p + pb) = best;
        winners[static_cast<std::size_t>((r * p + pa) * p + pb)] = arg;
      }
    }
  }
  return a.tape()->record(std::move(out), {a}, [a, winners, p](Tape& t, const Matrix& g) {
    const Matrix& x = t.value(a);
    Matrix dx = Matrix::Zero(x.rows(), x.cols());
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      for (Eigen::Index cell = 0; cell < p * p; ++cell) {
        const auto [i, j] = winners[static_cast<std::size_t>(r * p * p + cell)];
        dx(r, i) += g(r, cell) * x(r, j);
        dx(r, j) += g(r, cell) * x(r, i);
      }
    }
    t.accumulate(a, dx);
  });
}

}  // namespace evnet::nn
