#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <unordered_set>
#include <vector>

#include "gmod/errors.hpp"

namespace gmod {

// Dense row-major matrix node in a dynamically built computation graph.
// Scalar is float for training and double for finite-difference checks.
// Nodes are created through the free-function primitives below; each
// primitive registers a backward closure that adds into its parents' grads.
template <class Scalar>
struct TensorNode {
  int rows = 0, cols = 0;
  std::vector<Scalar> v;     // values, rows*cols
  std::vector<Scalar> grad;  // same shape, zero until backward
  std::vector<std::shared_ptr<TensorNode>> parents;
  std::function<void()> backward_fn;

  Scalar& at(int r, int c) { return v[static_cast<size_t>(r) * cols + c]; }
  Scalar at(int r, int c) const { return v[static_cast<size_t>(r) * cols + c]; }
  Scalar& gat(int r, int c) { return grad[static_cast<size_t>(r) * cols + c]; }
  size_t size() const { return v.size(); }
};

template <class Scalar>
using Tensor = std::shared_ptr<TensorNode<Scalar>>;

// Boolean mask with matrix addressing; not part of the gradient graph.
struct Mask {
  int rows = 0, cols = 0;
  std::vector<uint8_t> v;

  Mask() = default;
  Mask(int r, int c, bool fill = false)
      : rows(r), cols(c), v(static_cast<size_t>(r) * c, fill ? 1 : 0) {}
  uint8_t& at(int r, int c) { return v[static_cast<size_t>(r) * cols + c]; }
  bool at(int r, int c) const {
    return v[static_cast<size_t>(r) * cols + c] != 0;
  }
};

template <class Scalar>
Tensor<Scalar> make_tensor(int rows, int cols) {
  if (rows <= 0 || cols <= 0) throw ShapeError("tensor dims must be positive");
  auto t = std::make_shared<TensorNode<Scalar>>();
  t->rows = rows;
  t->cols = cols;
  t->v.assign(static_cast<size_t>(rows) * cols, Scalar(0));
  t->grad.assign(t->v.size(), Scalar(0));
  return t;
}

template <class Scalar>
Tensor<Scalar> make_tensor(int rows, int cols, std::vector<Scalar> values) {
  auto t = make_tensor<Scalar>(rows, cols);
  if (values.size() != t->v.size()) throw ShapeError("value count != rows*cols");
  t->v = std::move(values);
  return t;
}

namespace detail {

template <class Scalar>
Tensor<Scalar> child_of(int rows, int cols,
                        std::vector<Tensor<Scalar>> parents) {
  auto t = make_tensor<Scalar>(rows, cols);
  t->parents = std::move(parents);
  return t;
}

template <class Scalar>
void require_same_shape(const Tensor<Scalar>& a, const Tensor<Scalar>& b,
                        const char* op) {
  if (a->rows != b->rows || a->cols != b->cols)
    throw ShapeError(std::string(op) + ": shape mismatch");
}

}  // namespace detail

// ---- primitives ----

template <class Scalar>
Tensor<Scalar> matmul(const Tensor<Scalar>& a, const Tensor<Scalar>& b) {
  if (a->cols != b->rows) throw ShapeError("matmul: inner dims differ");
  auto c = detail::child_of<Scalar>(a->rows, b->cols, {a, b});
  auto* A = a.get();
  auto* B = b.get();
  auto* C = c.get();
  for (int i = 0; i < A->rows; ++i)
    for (int k = 0; k < A->cols; ++k) {
      const Scalar aik = A->at(i, k);
      if (aik == Scalar(0)) continue;
      for (int j = 0; j < B->cols; ++j) C->at(i, j) += aik * B->at(k, j);
    }
  c->backward_fn = [A, B, C]() {
    for (int i = 0; i < A->rows; ++i)
      for (int j = 0; j < C->cols; ++j) {
        const Scalar g = C->gat(i, j);
        if (g == Scalar(0)) continue;
        for (int k = 0; k < A->cols; ++k) {
          A->gat(i, k) += g * B->at(k, j);
          B->gat(k, j) += g * A->at(i, k);
        }
      }
  };
  return c;
}

// a * transpose(b); b is [n, k] with k matching a's cols.
template <class Scalar>
Tensor<Scalar> matmul_nt(const Tensor<Scalar>& a, const Tensor<Scalar>& b) {
  if (a->cols != b->cols) throw ShapeError("matmul_nt: inner dims differ");
  auto c = detail::child_of<Scalar>(a->rows, b->rows, {a, b});
  auto* A = a.get();
  auto* B = b.get();
  auto* C = c.get();
  for (int i = 0; i < A->rows; ++i)
    for (int j = 0; j < B->rows; ++j) {
      Scalar s = 0;
      for (int k = 0; k < A->cols; ++k) s += A->at(i, k) * B->at(j, k);
      C->at(i, j) = s;
    }
  c->backward_fn = [A, B, C]() {
    for (int i = 0; i < A->rows; ++i)
      for (int j = 0; j < B->rows; ++j) {
        const Scalar g = C->gat(i, j);
        if (g == Scalar(0)) continue;
        for (int k = 0; k < A->cols; ++k) {
          A->gat(i, k) += g * B->at(j, k);
          B->gat(j, k) += g * A->at(i, k);
        }
      }
  };
  return c;
}

template <class Scalar>
Tensor<Scalar> add(const Tensor<Scalar>& a, const Tensor<Scalar>& b) {
  detail::require_same_shape(a, b, "add");
  auto c = detail::child_of<Scalar>(a->rows, a->cols, {a, b});
  for (size_t i = 0; i < c->size(); ++i) c->v[i] = a->v[i] + b->v[i];
  auto* A = a.get();
  auto* B = b.get();
  auto* C = c.get();
  c->backward_fn = [A, B, C]() {
    for (size_t i = 0; i < C->size(); ++i) {
      A->grad[i] += C->grad[i];
      B->grad[i] += C->grad[i];
    }
  };
  return c;
}

// Adds row vector v [1, cols] to every row of a.
template <class Scalar>
Tensor<Scalar> add_rowvec(const Tensor<Scalar>& a, const Tensor<Scalar>& vrow) {
  if (vrow->rows != 1 || vrow->cols != a->cols)
    throw ShapeError("add_rowvec: vector must be [1, cols]");
  auto c = detail::child_of<Scalar>(a->rows, a->cols, {a, vrow});
  for (int i = 0; i < a->rows; ++i)
    for (int j = 0; j < a->cols; ++j) c->at(i, j) = a->at(i, j) + vrow->at(0, j);
  auto* A = a.get();
  auto* V = vrow.get();
  auto* C = c.get();
  c->backward_fn = [A, V, C]() {
    for (int i = 0; i < C->rows; ++i)
      for (int j = 0; j < C->cols; ++j) {
        A->gat(i, j) += C->gat(i, j);
        V->gat(0, j) += C->gat(i, j);
      }
  };
  return c;
}

template <class Scalar>
Tensor<Scalar> mul(const Tensor<Scalar>& a, const Tensor<Scalar>& b) {
  detail::require_same_shape(a, b, "mul");
  auto c = detail::child_of<Scalar>(a->rows, a->cols, {a, b});
  for (size_t i = 0; i < c->size(); ++i) c->v[i] = a->v[i] * b->v[i];
  auto* A = a.get();
  auto* B = b.get();
  auto* C = c.get();
  c->backward_fn = [A, B, C]() {
    for (size_t i = 0; i < C->size(); ++i) {
      A->grad[i] += C->grad[i] * B->v[i];
      B->grad[i] += C->grad[i] * A->v[i];
    }
  };
  return c;
}

template <class Scalar>
Tensor<Scalar> scale(const Tensor<Scalar>& a, double k) {
  auto c = detail::child_of<Scalar>(a->rows, a->cols, {a});
  for (size_t i = 0; i < c->size(); ++i) c->v[i] = a->v[i] * Scalar(k);
  auto* A = a.get();
  auto* C = c.get();
  c->backward_fn = [A, C, k]() {
    for (size_t i = 0; i < C->size(); ++i) A->grad[i] += C->grad[i] * Scalar(k);
  };
  return c;
}

template <class Scalar>
Tensor<Scalar> add_scalar(const Tensor<Scalar>& a, double k) {
  auto c = detail::child_of<Scalar>(a->rows, a->cols, {a});
  for (size_t i = 0; i < c->size(); ++i) c->v[i] = a->v[i] + Scalar(k);
  auto* A = a.get();
  auto* C = c.get();
  c->backward_fn = [A, C]() {
    for (size_t i = 0; i < C->size(); ++i) A->grad[i] += C->grad[i];
  };
  return c;
}

template <class Scalar>
Tensor<Scalar> sigmoid(const Tensor<Scalar>& a) {
  auto c = detail::child_of<Scalar>(a->rows, a->cols, {a});
  for (size_t i = 0; i < c->size(); ++i)
    c->v[i] = Scalar(1) / (Scalar(1) + std::exp(-a->v[i]));
  auto* A = a.get();
  auto* C = c.get();
  c->backward_fn = [A, C]() {
    for (size_t i = 0; i < C->size(); ++i)
      A->grad[i] += C->grad[i] * C->v[i] * (Scalar(1) - C->v[i]);
  };
  return c;
}

template <class Scalar>
Tensor<Scalar> tanh_t(const Tensor<Scalar>& a) {
  auto c = detail::child_of<Scalar>(a->rows, a->cols, {a});
  for (size_t i = 0; i < c->size(); ++i) c->v[i] = std::tanh(a->v[i]);
  auto* A = a.get();
  auto* C = c.get();
  c->backward_fn = [A, C]() {
    for (size_t i = 0; i < C->size(); ++i)
      A->grad[i] += C->grad[i] * (Scalar(1) - C->v[i] * C->v[i]);
  };
  return c;
}

template <class Scalar>
Tensor<Scalar> relu(const Tensor<Scalar>& a) {
  auto c = detail::child_of<Scalar>(a->rows, a->cols, {a});
  for (size_t i = 0; i < c->size(); ++i)
    c->v[i] = a->v[i] > Scalar(0) ? a->v[i] : Scalar(0);
  auto* A = a.get();
  auto* C = c.get();
  c->backward_fn = [A, C]() {
    for (size_t i = 0; i < C->size(); ++i)
      if (A->v[i] > Scalar(0)) A->grad[i] += C->grad[i];
  };
  return c;
}

// Per-row layer normalization with learned gain/bias, both [1, cols].
template <class Scalar>
Tensor<Scalar> layer_norm(const Tensor<Scalar>& x, const Tensor<Scalar>& gain,
                          const Tensor<Scalar>& bias, double eps = 1e-5) {
  if (gain->rows != 1 || gain->cols != x->cols || bias->rows != 1 ||
      bias->cols != x->cols)
    throw ShapeError("layer_norm: gain/bias must be [1, cols]");
  auto c = detail::child_of<Scalar>(x->rows, x->cols, {x, gain, bias});
  const int n = x->cols;
  // Cache per-row mean and inverse stddev for the backward pass.
  auto stats = std::make_shared<std::vector<Scalar>>(2 * x->rows);
  for (int i = 0; i < x->rows; ++i) {
    Scalar mu = 0;
    for (int j = 0; j < n; ++j) mu += x->at(i, j);
    mu /= Scalar(n);
    Scalar var = 0;
    for (int j = 0; j < n; ++j) {
      const Scalar d = x->at(i, j) - mu;
      var += d * d;
    }
    var /= Scalar(n);
    const Scalar rstd = Scalar(1) / std::sqrt(var + Scalar(eps));
    (*stats)[2 * i] = mu;
    (*stats)[2 * i + 1] = rstd;
    for (int j = 0; j < n; ++j)
      c->at(i, j) = (x->at(i, j) - mu) * rstd * gain->at(0, j) + bias->at(0, j);
  }
  auto* X = x.get();
  auto* G = gain.get();
  auto* B = bias.get();
  auto* C = c.get();
  c->backward_fn = [X, G, B, C, stats, n]() {
    for (int i = 0; i < X->rows; ++i) {
      const Scalar mu = (*stats)[2 * i];
      const Scalar rstd = (*stats)[2 * i + 1];
      Scalar sum_dxhat = 0, sum_dxhat_xhat = 0;
      for (int j = 0; j < n; ++j) {
        const Scalar xhat = (X->at(i, j) - mu) * rstd;
        const Scalar dy = C->gat(i, j);
        const Scalar dxhat = dy * G->v[j];
        sum_dxhat += dxhat;
        sum_dxhat_xhat += dxhat * xhat;
        G->gat(0, j) += dy * xhat;
        B->gat(0, j) += dy;
      }
      for (int j = 0; j < n; ++j) {
        const Scalar xhat = (X->at(i, j) - mu) * rstd;
        const Scalar dxhat = C->gat(i, j) * G->v[j];
        X->gat(i, j) += rstd * (dxhat - (sum_dxhat + xhat * sum_dxhat_xhat) /
                                            Scalar(n));
      }
    }
  };
  return c;
}

// Row softmax with masked positions forced to exactly zero. Every row must
// keep at least one visible entry.
template <class Scalar>
Tensor<Scalar> masked_softmax(const Tensor<Scalar>& logits, const Mask& mask) {
  if (mask.rows != logits->rows || mask.cols != logits->cols)
    throw ShapeError("masked_softmax: mask shape mismatch");
  auto c = detail::child_of<Scalar>(logits->rows, logits->cols, {logits});
  auto keep = std::make_shared<Mask>(mask);
  for (int i = 0; i < logits->rows; ++i) {
    Scalar mx = -std::numeric_limits<Scalar>::infinity();
    bool any_visible = false;
    for (int j = 0; j < logits->cols; ++j)
      if (mask.at(i, j)) {
        any_visible = true;
        mx = std::max(mx, logits->at(i, j));
      }
    if (!any_visible)
      throw AllMaskedRowError("masked_softmax: row " + std::to_string(i) +
                              " has no visible entry");
    Scalar z = 0;
    for (int j = 0; j < logits->cols; ++j)
      if (mask.at(i, j)) z += std::exp(logits->at(i, j) - mx);
    for (int j = 0; j < logits->cols; ++j)
      c->at(i, j) = mask.at(i, j) ? std::exp(logits->at(i, j) - mx) / z
                                  : Scalar(0);
  }
  auto* L = logits.get();
  auto* C = c.get();
  c->backward_fn = [L, C, keep]() {
    for (int i = 0; i < C->rows; ++i) {
      Scalar dot = 0;
      for (int j = 0; j < C->cols; ++j) dot += C->gat(i, j) * C->at(i, j);
      for (int j = 0; j < C->cols; ++j)
        if (keep->at(i, j))
          L->gat(i, j) += C->at(i, j) * (C->gat(i, j) - dot);
    }
  };
  return c;
}

// Gathers rows of `table` by index; backward scatter-adds.
template <class Scalar>
Tensor<Scalar> embedding_rows(const Tensor<Scalar>& table,
                              const std::vector<int>& ids) {
  if (ids.empty()) throw ShapeError("embedding_rows: empty index list");
  for (int id : ids)
    if (id < 0 || id >= table->rows)
      throw ShapeError("embedding_rows: index out of range");
  auto c = detail::child_of<Scalar>(static_cast<int>(ids.size()), table->cols,
                                    {table});
  for (size_t i = 0; i < ids.size(); ++i)
    for (int j = 0; j < table->cols; ++j)
      c->at(static_cast<int>(i), j) = table->at(ids[i], j);
  auto* T = table.get();
  auto* C = c.get();
  auto idx = std::make_shared<std::vector<int>>(ids);
  c->backward_fn = [T, C, idx]() {
    for (size_t i = 0; i < idx->size(); ++i)
      for (int j = 0; j < C->cols; ++j)
        T->gat((*idx)[i], j) += C->gat(static_cast<int>(i), j);
  };
  return c;
}

template <class Scalar>
Tensor<Scalar> concat_rows(const std::vector<Tensor<Scalar>>& parts) {
  if (parts.empty()) throw ShapeError("concat_rows: no parts");
  int rows = 0;
  for (const auto& p : parts) {
    if (p->cols != parts[0]->cols)
      throw ShapeError("concat_rows: column mismatch");
    rows += p->rows;
  }
  auto c = detail::child_of<Scalar>(rows, parts[0]->cols, parts);
  int at = 0;
  for (const auto& p : parts) {
    std::copy(p->v.begin(), p->v.end(),
              c->v.begin() + static_cast<size_t>(at) * c->cols);
    at += p->rows;
  }
  auto* C = c.get();
  std::vector<TensorNode<Scalar>*> raw;
  for (const auto& p : parts) raw.push_back(p.get());
  c->backward_fn = [C, raw]() {
    int at = 0;
    for (auto* p : raw) {
      for (size_t i = 0; i < p->grad.size(); ++i)
        p->grad[i] += C->grad[static_cast<size_t>(at) * C->cols + i];
      at += p->rows;
    }
  };
  return c;
}

template <class Scalar>
Tensor<Scalar> concat_cols(const std::vector<Tensor<Scalar>>& parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no parts");
  int cols = 0;
  for (const auto& p : parts) {
    if (p->rows != parts[0]->rows) throw ShapeError("concat_cols: row mismatch");
    cols += p->cols;
  }
  auto c = detail::child_of<Scalar>(parts[0]->rows, cols, parts);
  int at = 0;
  for (const auto& p : parts) {
    for (int i = 0; i < p->rows; ++i)
      for (int j = 0; j < p->cols; ++j) c->at(i, at + j) = p->at(i, j);
    at += p->cols;
  }
  auto* C = c.get();
  std::vector<TensorNode<Scalar>*> raw;
  for (const auto& p : parts) raw.push_back(p.get());
  c->backward_fn = [C, raw]() {
    int at = 0;
    for (auto* p : raw) {
      for (int i = 0; i < p->rows; ++i)
        for (int j = 0; j < p->cols; ++j) p->gat(i, j) += C->gat(i, at + j);
      at += p->cols;
    }
  };
  return c;
}

// Copies rows [r0, r1); backward adds into that range.
template <class Scalar>
Tensor<Scalar> slice_rows(const Tensor<Scalar>& a, int r0, int r1) {
  if (r0 < 0 || r1 <= r0 || r1 > a->rows) throw ShapeError("slice_rows: range");
  auto c = detail::child_of<Scalar>(r1 - r0, a->cols, {a});
  std::copy(a->v.begin() + static_cast<size_t>(r0) * a->cols,
            a->v.begin() + static_cast<size_t>(r1) * a->cols, c->v.begin());
  auto* A = a.get();
  auto* C = c.get();
  c->backward_fn = [A, C, r0]() {
    for (size_t i = 0; i < C->grad.size(); ++i)
      A->grad[static_cast<size_t>(r0) * A->cols + i] += C->grad[i];
  };
  return c;
}

template <class Scalar>
Tensor<Scalar> sum_all(const Tensor<Scalar>& a) {
  auto c = detail::child_of<Scalar>(1, 1, {a});
  Scalar s = 0;
  for (Scalar x : a->v) s += x;
  c->v[0] = s;
  auto* A = a.get();
  auto* C = c.get();
  c->backward_fn = [A, C]() {
    for (size_t i = 0; i < A->grad.size(); ++i) A->grad[i] += C->grad[0];
  };
  return c;
}

// Total negative log-likelihood of `targets` under row-wise softmax(logits).
// Summed over rows; callers average over instances.
template <class Scalar>
Tensor<Scalar> cross_entropy_with_logits(const Tensor<Scalar>& logits,
                                         const std::vector<int>& targets) {
  if (static_cast<int>(targets.size()) != logits->rows)
    throw ShapeError("cross_entropy: one target per row");
  for (int t : targets)
    if (t < 0 || t >= logits->cols)
      throw ShapeError("cross_entropy: target out of range");
  auto c = detail::child_of<Scalar>(1, 1, {logits});
  // Cache softmax rows for the backward pass.
  auto probs = std::make_shared<std::vector<Scalar>>(logits->size());
  Scalar total = 0;
  for (int i = 0; i < logits->rows; ++i) {
    Scalar mx = logits->at(i, 0);
    for (int j = 1; j < logits->cols; ++j) mx = std::max(mx, logits->at(i, j));
    Scalar z = 0;
    for (int j = 0; j < logits->cols; ++j) z += std::exp(logits->at(i, j) - mx);
    const Scalar logz = std::log(z) + mx;
    total += logz - logits->at(i, targets[i]);
    for (int j = 0; j < logits->cols; ++j)
      (*probs)[static_cast<size_t>(i) * logits->cols + j] =
          std::exp(logits->at(i, j) - logz);
  }
  c->v[0] = total;
  auto* L = logits.get();
  auto* C = c.get();
  auto tgt = std::make_shared<std::vector<int>>(targets);
  c->backward_fn = [L, C, probs, tgt]() {
    const Scalar g = C->grad[0];
    for (int i = 0; i < L->rows; ++i)
      for (int j = 0; j < L->cols; ++j) {
        Scalar d = (*probs)[static_cast<size_t>(i) * L->cols + j];
        if (j == (*tgt)[static_cast<size_t>(i)]) d -= Scalar(1);
        L->gat(i, j) += g * d;
      }
  };
  return c;
}

// ---- graph traversal ----

namespace detail {

template <class Scalar>
std::vector<TensorNode<Scalar>*> topo_from(TensorNode<Scalar>* root) {
  std::vector<TensorNode<Scalar>*> order;
  std::unordered_set<TensorNode<Scalar>*> seen;
  // Iterative post-order DFS; graphs can be thousands of nodes deep.
  std::vector<std::pair<TensorNode<Scalar>*, size_t>> stack{{root, 0}};
  seen.insert(root);
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      TensorNode<Scalar>* p = node->parents[next++].get();
      if (seen.insert(p).second) stack.push_back({p, 0});
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  return order;  // parents before children
}

}  // namespace detail

// Reverse-mode sweep from a scalar loss. Gradients accumulate additively, so
// leaf (parameter) grads must be zeroed between optimization steps.
template <class Scalar>
void backward(const Tensor<Scalar>& loss) {
  if (loss->rows != 1 || loss->cols != 1)
    throw NonScalarLossError("backward: loss must be 1x1");
  auto order = detail::topo_from(loss.get());
  loss->grad[0] += Scalar(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it)
    if ((*it)->backward_fn) (*it)->backward_fn();
}

// Severs parent links so deep graphs are freed iteratively rather than by
// recursive shared_ptr destruction.
template <class Scalar>
void detach_graph(const Tensor<Scalar>& root) {
  auto order = detail::topo_from(root.get());
  for (auto* n : order) {
    n->parents.clear();
    n->backward_fn = nullptr;
  }
}

template <class Scalar>
void zero_grad(const std::vector<Tensor<Scalar>>& leaves) {
  for (const auto& t : leaves) std::fill(t->grad.begin(), t->grad.end(), Scalar(0));
}

// Central finite-difference check: rebuilds the graph via `f` (which must
// read the current leaf values), compares analytic gradients against
// (f(x+eps) - f(x-eps)) / 2eps, and returns the max relative error
// |a - n| / max(|a|, |n|, 1e-8). Run with Scalar = double.
template <class Scalar>
double grad_check(const std::function<Tensor<Scalar>()>& f,
                  const std::vector<Tensor<Scalar>>& leaves,
                  double eps = 1e-5) {
  zero_grad(leaves);
  Tensor<Scalar> y = f();
  backward(y);
  std::vector<std::vector<Scalar>> analytic;
  for (const auto& leaf : leaves) analytic.push_back(leaf->grad);

  double worst = 0;
  for (size_t li = 0; li < leaves.size(); ++li) {
    auto& x = leaves[li]->v;
    for (size_t i = 0; i < x.size(); ++i) {
      const Scalar keep = x[i];
      x[i] = keep + Scalar(eps);
      const double fp = static_cast<double>(f()->v[0]);
      x[i] = keep - Scalar(eps);
      const double fm = static_cast<double>(f()->v[0]);
      x[i] = keep;
      const double numeric = (fp - fm) / (2 * eps);
      const double a = static_cast<double>(analytic[li][i]);
      const double err =
          std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-8});
      worst = std::max(worst, err);
    }
  }
  return worst;
}

}  // namespace gmod
