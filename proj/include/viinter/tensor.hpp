#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "viinter/detail/kernels.hpp"
#include "viinter/errors.hpp"

// Dense tensors with reverse-mode automatic differentiation over a closed op
// set. Tensors are cheap handles onto shared graph nodes; ops allocate fresh
// nodes and never mutate their inputs. Gradient accumulation order is fixed,
// so repeated backward passes over one graph are bit-identical.

namespace viinter {

using Shape = std::vector<std::size_t>;

inline std::size_t shape_numel(const Shape& s) {
    std::size_t n = 1;
    for (std::size_t d : s) n *= d;
    return n;
}

inline std::string shape_str(const Shape& s) {
    std::string out = "[";
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) out += "x";
        out += std::to_string(s[i]);
    }
    return out + "]";
}

namespace detail {

enum class Op : std::uint8_t {
    leaf,
    linear,
    sine,
    sigmoid,
    concat_rows,
    repeat_rows,
    add,
    sub,
    mul,
    scaled,
    square,
    abs_val,
    sum_all,
    mean_all,
    pnorm,
    mse,
    conv2d,
    avg_pool2,
    crop,
    reshape,
    spatial_mean,
};

template <class T>
struct Node {
    Op op = Op::leaf;
    Shape shape;
    std::vector<T> data;
    std::vector<T> grad;
    bool requires_grad = false;
    std::vector<std::shared_ptr<Node>> inputs;

    // op attributes
    T freq{};          // sine w0
    T factor{};        // scaled constant
    double power = 0;  // pnorm p
    std::size_t a0 = 0, a1 = 0, a2 = 0, a3 = 0;  // crop offsets / extents

    std::size_t numel() const { return data.size(); }
    void ensure_grad() {
        if (grad.size() != data.size()) grad.assign(data.size(), T(0));
    }
};

} // namespace detail

template <class T>
class Tensor {
public:
    using Node = detail::Node<T>;

    Tensor() = default;

    static Tensor from(Shape shape, std::vector<T> data, bool requires_grad = false) {
        if (shape_numel(shape) != data.size())
            throw shape_error("tensor data length " + std::to_string(data.size()) +
                              " does not match shape " + shape_str(shape));
        auto n = std::make_shared<Node>();
        n->shape = std::move(shape);
        n->data = std::move(data);
        n->requires_grad = requires_grad;
        return Tensor(std::move(n));
    }

    static Tensor zeros(Shape shape, bool requires_grad = false) {
        std::vector<T> d(shape_numel(shape), T(0));
        return from(std::move(shape), std::move(d), requires_grad);
    }

    static Tensor full(Shape shape, T value, bool requires_grad = false) {
        std::vector<T> d(shape_numel(shape), value);
        return from(std::move(shape), std::move(d), requires_grad);
    }

    static Tensor scalar(T value, bool requires_grad = false) {
        return from({1}, {value}, requires_grad);
    }

    bool valid() const { return node_ != nullptr; }
    const Shape& shape() const { return node_->shape; }
    std::size_t numel() const { return node_->data.size(); }
    bool requires_grad() const { return node_->requires_grad; }

    const std::vector<T>& values() const { return node_->data; }
    /// Direct mutable access to the stored values; reserved for the optimizer
    /// and table maintenance, which own their leaves.
    std::vector<T>& mutable_values() { return node_->data; }

    const std::vector<T>& grad() const {
        node_->ensure_grad();
        return node_->grad;
    }
    void zero_grad() { node_->grad.assign(node_->data.size(), T(0)); }

    T item() const {
        if (numel() != 1)
            throw shape_error("item() on non-scalar tensor " + shape_str(shape()));
        return node_->data[0];
    }

    std::shared_ptr<Node> node() const { return node_; }

private:
    explicit Tensor(std::shared_ptr<Node> n) : node_(std::move(n)) {}

    template <class U>
    friend Tensor<U> make_op(detail::Op, Shape, std::vector<U>,
                             std::vector<std::shared_ptr<detail::Node<U>>>);

    std::shared_ptr<Node> node_;
};

template <class T>
Tensor<T> make_op(detail::Op op, Shape shape, std::vector<T> data,
                  std::vector<std::shared_ptr<detail::Node<T>>> inputs) {
    auto n = std::make_shared<detail::Node<T>>();
    n->op = op;
    n->shape = std::move(shape);
    n->data = std::move(data);
    n->inputs = std::move(inputs);
    for (const auto& in : n->inputs)
        if (in->requires_grad) n->requires_grad = true;
    return Tensor<T>(std::move(n));
}

namespace detail {

template <class T>
void require_rank(const Tensor<T>& t, std::size_t rank, const char* what) {
    if (t.shape().size() != rank)
        throw shape_error(std::string(what) + ": expected rank " + std::to_string(rank) +
                          ", got " + shape_str(t.shape()));
}

template <class T>
void require_same_shape(const Tensor<T>& a, const Tensor<T>& b, const char* what) {
    if (a.shape() != b.shape())
        throw shape_error(std::string(what) + ": shapes " + shape_str(a.shape()) +
                          " and " + shape_str(b.shape()) + " differ");
}

} // namespace detail

// ---------------------------------------------------------------------------
// ops
// ---------------------------------------------------------------------------

template <class T>
Tensor<T> linear(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b) {
    detail::require_rank(x, 2, "linear input");
    detail::require_rank(w, 2, "linear weight");
    detail::require_rank(b, 1, "linear bias");
    const std::size_t batch = x.shape()[0], in = x.shape()[1];
    const std::size_t out = w.shape()[1];
    if (w.shape()[0] != in || b.shape()[0] != out)
        throw shape_error("linear: x " + shape_str(x.shape()) + " w " +
                          shape_str(w.shape()) + " b " + shape_str(b.shape()) +
                          " do not conform");
    std::vector<T> y(batch * out);
    detail::linear_fwd(x.values().data(), w.values().data(), b.values().data(),
                       y.data(), batch, in, out);
    return make_op<T>(detail::Op::linear, {batch, out}, std::move(y),
                      {x.node(), w.node(), b.node()});
}

template <class T>
Tensor<T> sine(const Tensor<T>& x, T w0) {
    if (!(w0 > T(0))) throw value_error("sine: w0 must be positive");
    std::vector<T> y(x.numel());
    detail::sine_fwd(x.values().data(), y.data(), y.size(), w0);
    auto t = make_op<T>(detail::Op::sine, x.shape(), std::move(y), {x.node()});
    t.node()->freq = w0;
    return t;
}

template <class T>
Tensor<T> sigmoid(const Tensor<T>& x) {
    std::vector<T> y(x.numel());
    detail::sigmoid_fwd(x.values().data(), y.data(), y.size());
    return make_op<T>(detail::Op::sigmoid, x.shape(), std::move(y), {x.node()});
}

template <class T>
Tensor<T> concat_rows(const Tensor<T>& a, const Tensor<T>& b) {
    detail::require_rank(a, 2, "concat_rows lhs");
    detail::require_rank(b, 2, "concat_rows rhs");
    if (a.shape()[0] != b.shape()[0])
        throw shape_error("concat_rows: batch dims of " + shape_str(a.shape()) +
                          " and " + shape_str(b.shape()) + " differ");
    const std::size_t batch = a.shape()[0], wa = a.shape()[1], wb = b.shape()[1];
    std::vector<T> y(batch * (wa + wb));
    for (std::size_t r = 0; r < batch; ++r) {
        std::copy_n(a.values().data() + r * wa, wa, y.data() + r * (wa + wb));
        std::copy_n(b.values().data() + r * wb, wb, y.data() + r * (wa + wb) + wa);
    }
    return make_op<T>(detail::Op::concat_rows, {batch, wa + wb}, std::move(y),
                      {a.node(), b.node()});
}

/// Repeats a single row n times; backward sums the upstream gradient over rows.
template <class T>
Tensor<T> repeat_rows(const Tensor<T>& v, std::size_t n) {
    detail::require_rank(v, 2, "repeat_rows input");
    if (v.shape()[0] != 1)
        throw shape_error("repeat_rows: expected a 1-row tensor, got " +
                          shape_str(v.shape()));
    const std::size_t m = v.shape()[1];
    std::vector<T> y(n * m);
    for (std::size_t r = 0; r < n; ++r)
        std::copy_n(v.values().data(), m, y.data() + r * m);
    return make_op<T>(detail::Op::repeat_rows, {n, m}, std::move(y), {v.node()});
}

template <class T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
    detail::require_same_shape(a, b, "add");
    std::vector<T> y(a.numel());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = a.values()[i] + b.values()[i];
    return make_op<T>(detail::Op::add, a.shape(), std::move(y), {a.node(), b.node()});
}

template <class T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
    detail::require_same_shape(a, b, "sub");
    std::vector<T> y(a.numel());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = a.values()[i] - b.values()[i];
    return make_op<T>(detail::Op::sub, a.shape(), std::move(y), {a.node(), b.node()});
}

template <class T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
    detail::require_same_shape(a, b, "mul");
    std::vector<T> y(a.numel());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = a.values()[i] * b.values()[i];
    return make_op<T>(detail::Op::mul, a.shape(), std::move(y), {a.node(), b.node()});
}

template <class T>
Tensor<T> scaled(const Tensor<T>& x, T factor) {
    std::vector<T> y(x.numel());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = factor * x.values()[i];
    auto t = make_op<T>(detail::Op::scaled, x.shape(), std::move(y), {x.node()});
    t.node()->factor = factor;
    return t;
}

template <class T>
Tensor<T> square(const Tensor<T>& x) {
    std::vector<T> y(x.numel());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = x.values()[i] * x.values()[i];
    return make_op<T>(detail::Op::square, x.shape(), std::move(y), {x.node()});
}

template <class T>
Tensor<T> abs_val(const Tensor<T>& x) {
    std::vector<T> y(x.numel());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::abs(x.values()[i]);
    return make_op<T>(detail::Op::abs_val, x.shape(), std::move(y), {x.node()});
}

template <class T>
Tensor<T> sum_all(const Tensor<T>& x) {
    T acc = T(0);
    for (T v : x.values()) acc += v;
    return make_op<T>(detail::Op::sum_all, {1}, {acc}, {x.node()});
}

template <class T>
Tensor<T> mean_all(const Tensor<T>& x) {
    if (x.numel() == 0) throw value_error("mean_all of an empty tensor");
    T acc = T(0);
    for (T v : x.values()) acc += v;
    return make_op<T>(detail::Op::mean_all, {1}, {acc / T(x.numel())}, {x.node()});
}

/// p-norm over all elements, finite p >= 1. The gradient at the origin is
/// taken as zero (subgradient choice).
template <class T>
Tensor<T> pnorm(const Tensor<T>& x, double p) {
    if (!(p >= 1.0) || !std::isfinite(p))
        throw value_error("pnorm: p must be finite and >= 1");
    double acc = 0;
    for (T v : x.values()) acc += std::pow(std::abs(static_cast<double>(v)), p);
    auto t = make_op<T>(detail::Op::pnorm, {1}, {static_cast<T>(std::pow(acc, 1.0 / p))},
                        {x.node()});
    t.node()->power = p;
    return t;
}

/// Mean over all elements of the squared difference. The target is treated as
/// a constant and must not require gradients.
template <class T>
Tensor<T> mse(const Tensor<T>& pred, const Tensor<T>& target) {
    detail::require_same_shape(pred, target, "mse");
    if (target.requires_grad())
        throw value_error("mse: target must not require gradients");
    if (pred.numel() == 0) throw value_error("mse of empty tensors");
    T acc = T(0);
    for (std::size_t i = 0; i < pred.numel(); ++i) {
        const T d = pred.values()[i] - target.values()[i];
        acc += d * d;
    }
    return make_op<T>(detail::Op::mse, {1}, {acc / T(pred.numel())},
                      {pred.node(), target.node()});
}

/// Valid 2-D cross-correlation of an [H,W,Cin] input with a [kh,kw,Cin,Cout]
/// kernel stack.
template <class T>
Tensor<T> conv2d_valid(const Tensor<T>& x, const Tensor<T>& k) {
    detail::require_rank(x, 3, "conv2d input");
    detail::require_rank(k, 4, "conv2d kernel");
    const std::size_t h = x.shape()[0], w = x.shape()[1], cin = x.shape()[2];
    const std::size_t kh = k.shape()[0], kw = k.shape()[1], cout = k.shape()[3];
    if (k.shape()[2] != cin)
        throw shape_error("conv2d: input " + shape_str(x.shape()) + " and kernel " +
                          shape_str(k.shape()) + " channel counts differ");
    if (h < kh || w < kw)
        throw shape_error("conv2d: input " + shape_str(x.shape()) +
                          " smaller than kernel " + shape_str(k.shape()));
    const std::size_t oh = h - kh + 1, ow = w - kw + 1;
    std::vector<T> y(oh * ow * cout);
    detail::conv2d_fwd(x.values().data(), k.values().data(), y.data(), h, w, cin,
                       cout, kh, kw);
    return make_op<T>(detail::Op::conv2d, {oh, ow, cout}, std::move(y),
                      {x.node(), k.node()});
}

template <class T>
Tensor<T> avg_pool2(const Tensor<T>& x) {
    detail::require_rank(x, 3, "avg_pool2 input");
    const std::size_t h = x.shape()[0], w = x.shape()[1], ch = x.shape()[2];
    if (h < 2 || w < 2)
        throw shape_error("avg_pool2: input " + shape_str(x.shape()) + " too small");
    std::vector<T> y((h / 2) * (w / 2) * ch);
    detail::avgpool2_fwd(x.values().data(), y.data(), h, w, ch);
    return make_op<T>(detail::Op::avg_pool2, {h / 2, w / 2, ch}, std::move(y),
                      {x.node()});
}

template <class T>
Tensor<T> crop(const Tensor<T>& x, std::size_t r0, std::size_t c0, std::size_t h,
               std::size_t w) {
    detail::require_rank(x, 3, "crop input");
    const std::size_t H = x.shape()[0], W = x.shape()[1], ch = x.shape()[2];
    if (r0 + h > H || c0 + w > W)
        throw shape_error("crop: region exceeds input " + shape_str(x.shape()));
    std::vector<T> y(h * w * ch);
    for (std::size_t r = 0; r < h; ++r)
        std::copy_n(x.values().data() + ((r0 + r) * W + c0) * ch, w * ch,
                    y.data() + r * w * ch);
    auto t = make_op<T>(detail::Op::crop, {h, w, ch}, std::move(y), {x.node()});
    t.node()->a0 = r0;
    t.node()->a1 = c0;
    t.node()->a2 = h;
    t.node()->a3 = w;
    return t;
}

template <class T>
Tensor<T> reshape(const Tensor<T>& x, Shape shape) {
    if (shape_numel(shape) != x.numel())
        throw shape_error("reshape: " + shape_str(x.shape()) + " to " +
                          shape_str(shape) + " changes element count");
    return make_op<T>(detail::Op::reshape, std::move(shape),
                      std::vector<T>(x.values()), {x.node()});
}

/// Mean over the spatial extent of an [H,W,C] tensor, yielding [1,C].
template <class T>
Tensor<T> spatial_mean(const Tensor<T>& x) {
    detail::require_rank(x, 3, "spatial_mean input");
    const std::size_t h = x.shape()[0], w = x.shape()[1], ch = x.shape()[2];
    if (h * w == 0) throw value_error("spatial_mean of an empty tensor");
    std::vector<T> y(ch, T(0));
    for (std::size_t i = 0; i < h * w; ++i)
        for (std::size_t k = 0; k < ch; ++k) y[k] += x.values()[i * ch + k];
    for (std::size_t k = 0; k < ch; ++k) y[k] /= T(h * w);
    return make_op<T>(detail::Op::spatial_mean, {1, ch}, std::move(y), {x.node()});
}

// ---------------------------------------------------------------------------
// backward
// ---------------------------------------------------------------------------

/// The reverse pass over one traced computation. Node order is the creation
/// (topological) order restricted to nodes reachable from the loss.
template <class T>
class GradGraph {
public:
    using Node = detail::Node<T>;

    static GradGraph trace(const Tensor<T>& loss) {
        if (loss.numel() != 1)
            throw value_error("backward: loss must be scalar, got " +
                              shape_str(loss.shape()));
        GradGraph g;
        g.root_ = loss.node();
        // Iterative post-order DFS with a fixed input order keeps the node
        // ordering, and therefore float accumulation, deterministic.
        std::unordered_set<const Node*> seen;
        std::vector<std::pair<Node*, std::size_t>> stack;
        if (g.root_->requires_grad) {
            stack.push_back({g.root_.get(), 0});
            seen.insert(g.root_.get());
        }
        while (!stack.empty()) {
            auto& [node, next] = stack.back();
            if (next < node->inputs.size()) {
                Node* in = node->inputs[next++].get();
                if (in->requires_grad && !seen.count(in)) {
                    seen.insert(in);
                    stack.push_back({in, 0});
                }
            } else {
                g.order_.push_back(node);
                stack.pop_back();
            }
        }
        return g;
    }

    std::size_t size() const { return order_.size(); }

    void zero_grads() {
        for (Node* n : order_) n->grad.assign(n->data.size(), T(0));
    }

    /// Accumulates d(loss)/d(node) into every reachable requires_grad node,
    /// visiting each node exactly once in reverse topological order.
    void run() {
        if (order_.empty()) return;
        for (Node* n : order_) n->ensure_grad();
        root_->grad[0] += T(1);
        for (auto it = order_.rbegin(); it != order_.rend(); ++it) backprop(**it);
    }

private:
    static void accumulate(Node& in, std::span<const T> g) {
        if (!in.requires_grad) return;
        in.ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) in.grad[i] += g[i];
    }

    static void backprop(Node& n) {
        using detail::Op;
        switch (n.op) {
        case Op::leaf:
            break;
        case Op::linear: {
            Node& x = *n.inputs[0];
            Node& w = *n.inputs[1];
            Node& b = *n.inputs[2];
            const std::size_t batch = x.shape[0], in = x.shape[1], out = w.shape[1];
            if (x.requires_grad) {
                x.ensure_grad();
                std::vector<T> wt(in * out);
                detail::transpose(w.data.data(), wt.data(), in, out);
                detail::linear_bwd_x(n.grad.data(), wt.data(), x.grad.data(), batch,
                                     in, out);
            }
            if (w.requires_grad) {
                w.ensure_grad();
                detail::linear_bwd_w(x.data.data(), n.grad.data(), w.grad.data(),
                                     batch, in, out);
            }
            if (b.requires_grad) {
                b.ensure_grad();
                detail::linear_bwd_b(n.grad.data(), b.grad.data(), batch, out);
            }
            break;
        }
        case Op::sine: {
            Node& x = *n.inputs[0];
            if (!x.requires_grad) break;
            x.ensure_grad();
            detail::sine_bwd(x.data.data(), n.grad.data(), x.grad.data(), n.numel(),
                             n.freq);
            break;
        }
        case Op::sigmoid: {
            Node& x = *n.inputs[0];
            if (!x.requires_grad) break;
            x.ensure_grad();
            detail::sigmoid_bwd(n.data.data(), n.grad.data(), x.grad.data(),
                                n.numel());
            break;
        }
        case Op::concat_rows: {
            Node& a = *n.inputs[0];
            Node& b = *n.inputs[1];
            const std::size_t batch = n.shape[0], wa = a.shape[1], wb = b.shape[1];
            if (a.requires_grad) {
                a.ensure_grad();
                for (std::size_t r = 0; r < batch; ++r)
                    for (std::size_t c = 0; c < wa; ++c)
                        a.grad[r * wa + c] += n.grad[r * (wa + wb) + c];
            }
            if (b.requires_grad) {
                b.ensure_grad();
                for (std::size_t r = 0; r < batch; ++r)
                    for (std::size_t c = 0; c < wb; ++c)
                        b.grad[r * wb + c] += n.grad[r * (wa + wb) + wa + c];
            }
            break;
        }
        case Op::repeat_rows: {
            Node& v = *n.inputs[0];
            if (!v.requires_grad) break;
            v.ensure_grad();
            const std::size_t rows = n.shape[0], m = n.shape[1];
            for (std::size_t r = 0; r < rows; ++r)
                for (std::size_t c = 0; c < m; ++c) v.grad[c] += n.grad[r * m + c];
            break;
        }
        case Op::add:
            accumulate(*n.inputs[0], n.grad);
            accumulate(*n.inputs[1], n.grad);
            break;
        case Op::sub: {
            accumulate(*n.inputs[0], n.grad);
            Node& b = *n.inputs[1];
            if (b.requires_grad) {
                b.ensure_grad();
                for (std::size_t i = 0; i < n.numel(); ++i) b.grad[i] -= n.grad[i];
            }
            break;
        }
        case Op::mul: {
            Node& a = *n.inputs[0];
            Node& b = *n.inputs[1];
            if (a.requires_grad) {
                a.ensure_grad();
                for (std::size_t i = 0; i < n.numel(); ++i)
                    a.grad[i] += b.data[i] * n.grad[i];
            }
            if (b.requires_grad) {
                b.ensure_grad();
                for (std::size_t i = 0; i < n.numel(); ++i)
                    b.grad[i] += a.data[i] * n.grad[i];
            }
            break;
        }
        case Op::scaled: {
            Node& x = *n.inputs[0];
            if (!x.requires_grad) break;
            x.ensure_grad();
            for (std::size_t i = 0; i < n.numel(); ++i)
                x.grad[i] += n.factor * n.grad[i];
            break;
        }
        case Op::square: {
            Node& x = *n.inputs[0];
            if (!x.requires_grad) break;
            x.ensure_grad();
            for (std::size_t i = 0; i < n.numel(); ++i)
                x.grad[i] += T(2) * x.data[i] * n.grad[i];
            break;
        }
        case Op::abs_val: {
            Node& x = *n.inputs[0];
            if (!x.requires_grad) break;
            x.ensure_grad();
            for (std::size_t i = 0; i < n.numel(); ++i) {
                const T s = x.data[i] > T(0) ? T(1) : (x.data[i] < T(0) ? T(-1) : T(0));
                x.grad[i] += s * n.grad[i];
            }
            break;
        }
        case Op::sum_all: {
            Node& x = *n.inputs[0];
            if (!x.requires_grad) break;
            x.ensure_grad();
            for (std::size_t i = 0; i < x.numel(); ++i) x.grad[i] += n.grad[0];
            break;
        }
        case Op::mean_all: {
            Node& x = *n.inputs[0];
            if (!x.requires_grad) break;
            x.ensure_grad();
            const T g = n.grad[0] / T(x.numel());
            for (std::size_t i = 0; i < x.numel(); ++i) x.grad[i] += g;
            break;
        }
        case Op::pnorm: {
            Node& x = *n.inputs[0];
            if (!x.requires_grad) break;
            x.ensure_grad();
            const double norm = static_cast<double>(n.data[0]);
            if (norm > 0) {
                const double p = n.power;
                for (std::size_t i = 0; i < x.numel(); ++i) {
                    const double v = static_cast<double>(x.data[i]);
                    const double s = v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0);
                    x.grad[i] += static_cast<T>(
                        s * std::pow(std::abs(v) / norm, p - 1.0) *
                        static_cast<double>(n.grad[0]));
                }
            }
            break;
        }
        case Op::mse: {
            Node& pred = *n.inputs[0];
            Node& target = *n.inputs[1];
            if (!pred.requires_grad) break;
            pred.ensure_grad();
            const T g = n.grad[0] * T(2) / T(pred.numel());
            for (std::size_t i = 0; i < pred.numel(); ++i)
                pred.grad[i] += g * (pred.data[i] - target.data[i]);
            break;
        }
        case Op::conv2d: {
            Node& x = *n.inputs[0];
            Node& k = *n.inputs[1];
            const std::size_t h = x.shape[0], w = x.shape[1], cin = x.shape[2];
            const std::size_t kh = k.shape[0], kw = k.shape[1], cout = k.shape[3];
            if (x.requires_grad) {
                x.ensure_grad();
                detail::conv2d_bwd_in(n.grad.data(), k.data.data(), x.grad.data(), h,
                                      w, cin, cout, kh, kw);
            }
            if (k.requires_grad) {
                k.ensure_grad();
                detail::conv2d_bwd_k(x.data.data(), n.grad.data(), k.grad.data(), h,
                                     w, cin, cout, kh, kw);
            }
            break;
        }
        case Op::avg_pool2: {
            Node& x = *n.inputs[0];
            if (!x.requires_grad) break;
            x.ensure_grad();
            detail::avgpool2_bwd(n.grad.data(), x.grad.data(), x.shape[0],
                                 x.shape[1], x.shape[2]);
            break;
        }
        case Op::crop: {
            Node& x = *n.inputs[0];
            if (!x.requires_grad) break;
            x.ensure_grad();
            const std::size_t W = x.shape[1], ch = x.shape[2];
            const std::size_t r0 = n.a0, c0 = n.a1, h = n.a2, w = n.a3;
            for (std::size_t r = 0; r < h; ++r)
                for (std::size_t i = 0; i < w * ch; ++i)
                    x.grad[((r0 + r) * W + c0) * ch + i] += n.grad[r * w * ch + i];
            break;
        }
        case Op::reshape:
            accumulate(*n.inputs[0], n.grad);
            break;
        case Op::spatial_mean: {
            Node& x = *n.inputs[0];
            if (!x.requires_grad) break;
            x.ensure_grad();
            const std::size_t hw = x.shape[0] * x.shape[1], ch = x.shape[2];
            for (std::size_t i = 0; i < hw; ++i)
                for (std::size_t k = 0; k < ch; ++k)
                    x.grad[i * ch + k] += n.grad[k] / T(hw);
            break;
        }
        }
    }

    std::shared_ptr<Node> root_;
    std::vector<Node*> order_;
};

/// Populates gradients of every requires_grad leaf reachable from a scalar loss.
template <class T>
void backward(const Tensor<T>& loss) {
    GradGraph<T>::trace(loss).run();
}

} // namespace viinter
