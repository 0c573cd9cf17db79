#pragma once

#include <cstdint>
#include <span>
#include <thread>
#include <vector>

#include "viinter/detail/kernels.hpp"
#include "viinter/errors.hpp"
#include "viinter/image.hpp"
#include "viinter/rng.hpp"
#include "viinter/tensor.hpp"

// The code-conditioned implicit network: rows of [x, y, z...] pass through a
// chain of sine-activated dense layers and an affine head squashed by a
// sigmoid, producing RGB in (0,1). Offers a traced path for training and a
// graph-free path (bit-identical, shared kernels) for rendering.

namespace viinter {

template <class T>
struct DenseLayer {
    Tensor<T> weight;  // [in,out]
    Tensor<T> bias;    // [out]
};

template <class T>
struct InrNetwork {
    std::vector<DenseLayer<T>> layers;  // depth sine layers, then the output head
    std::size_t depth = 0;
    std::size_t hidden_dim = 0;
    std::size_t in_dim = 0;
    std::size_t out_dim = 0;
    T w0_first{};
    T w0_hidden{};

    std::size_t code_len() const { return in_dim - 2; }

    std::vector<Tensor<T>> parameters() const {
        std::vector<Tensor<T>> ps;
        ps.reserve(layers.size() * 2);
        for (const auto& l : layers) {
            ps.push_back(l.weight);
            ps.push_back(l.bias);
        }
        return ps;
    }
};

/// Sine-network initialization: first layer U(-1/in, 1/in), later layers
/// U(-sqrt(6/fan_in)/w0, +sqrt(6/fan_in)/w0), zero biases.
template <class T>
InrNetwork<T> init_siren(std::size_t depth, std::size_t hidden_dim, std::size_t in_dim,
                         std::size_t out_dim, T w0, std::uint64_t seed) {
    if (depth < 1 || hidden_dim < 1 || in_dim < 1 || out_dim < 1)
        throw value_error("init_siren: all dimensions must be >= 1");
    InrNetwork<T> net;
    net.depth = depth;
    net.hidden_dim = hidden_dim;
    net.in_dim = in_dim;
    net.out_dim = out_dim;
    net.w0_first = w0;
    net.w0_hidden = w0;

    Rng rng(derive_seed(seed, rng_stream::net_init));
    auto make_layer = [&](std::size_t fan_in, std::size_t fan_out, bool first) {
        const double bound = first
                                 ? 1.0 / static_cast<double>(fan_in)
                                 : std::sqrt(6.0 / static_cast<double>(fan_in)) /
                                       static_cast<double>(w0);
        std::vector<T> w(fan_in * fan_out);
        for (auto& v : w) v = static_cast<T>(rng.uniform(-bound, bound));
        DenseLayer<T> layer;
        layer.weight = Tensor<T>::from({fan_in, fan_out}, std::move(w), true);
        layer.bias = Tensor<T>::zeros({fan_out}, true);
        return layer;
    };

    net.layers.push_back(make_layer(in_dim, hidden_dim, true));
    for (std::size_t i = 1; i < depth; ++i)
        net.layers.push_back(make_layer(hidden_dim, hidden_dim, false));
    net.layers.push_back(make_layer(hidden_dim, out_dim, false));
    return net;
}

/// Normalized pixel-center coordinates: x = col/(W-1), y = row/(H-1), row-major;
/// a dimension of extent 1 maps to 0.5.
template <class T>
struct CoordGrid {
    std::size_t height = 0;
    std::size_t width = 0;
    Tensor<T> coords;  // [(H*W), 2]
};

template <class T>
CoordGrid<T> make_coord_grid(std::size_t height, std::size_t width) {
    if (height < 1 || width < 1)
        throw value_error("make_coord_grid: dimensions must be >= 1");
    std::vector<T> c(height * width * 2);
    for (std::size_t r = 0; r < height; ++r) {
        const T y = height > 1 ? T(r) / T(height - 1) : T(0.5);
        for (std::size_t col = 0; col < width; ++col) {
            const T x = width > 1 ? T(col) / T(width - 1) : T(0.5);
            c[(r * width + col) * 2 + 0] = x;
            c[(r * width + col) * 2 + 1] = y;
        }
    }
    return CoordGrid<T>{height, width,
                        Tensor<T>::from({height * width, 2}, std::move(c))};
}

/// Traced forward pass: rows of [coords | z] through the network. Gradients
/// flow into the weights and the code.
template <class T>
Tensor<T> eval_pixels(const InrNetwork<T>& net, const Tensor<T>& coords,
                      const Tensor<T>& z) {
    detail::require_rank(coords, 2, "eval_pixels coords");
    if (coords.shape()[1] != 2)
        throw shape_error("eval_pixels: coords must be [B x 2], got " +
                          shape_str(coords.shape()));
    if (z.numel() != net.code_len())
        throw shape_error("eval_pixels: code length " + std::to_string(z.numel()) +
                          " does not match network code length " +
                          std::to_string(net.code_len()));
    const std::size_t batch = coords.shape()[0];
    Tensor<T> zrow = z.shape().size() == 2 && z.shape()[0] == 1
                         ? z
                         : reshape(z, {std::size_t(1), z.numel()});
    Tensor<T> h = concat_rows(coords, repeat_rows(zrow, batch));
    for (std::size_t i = 0; i + 1 < net.layers.size(); ++i) {
        h = linear(h, net.layers[i].weight, net.layers[i].bias);
        h = sine(h, i == 0 ? net.w0_first : net.w0_hidden);
    }
    h = linear(h, net.layers.back().weight, net.layers.back().bias);
    return sigmoid(h);
}

/// Graph-free forward over raw arrays; bit-identical to the traced path.
template <class T>
void eval_pixels_raw(const InrNetwork<T>& net, std::span<const T> coords,
                     std::span<const T> z, std::span<T> out) {
    const std::size_t batch = coords.size() / 2;
    const std::size_t m = net.code_len();
    std::vector<T> cur(batch * net.in_dim);
    for (std::size_t r = 0; r < batch; ++r) {
        cur[r * net.in_dim + 0] = coords[r * 2 + 0];
        cur[r * net.in_dim + 1] = coords[r * 2 + 1];
        for (std::size_t k = 0; k < m; ++k) cur[r * net.in_dim + 2 + k] = z[k];
    }
    std::vector<T> next;
    std::size_t width = net.in_dim;
    for (std::size_t i = 0; i + 1 < net.layers.size(); ++i) {
        const auto& l = net.layers[i];
        const std::size_t out_w = l.weight.shape()[1];
        next.assign(batch * out_w, T(0));
        detail::linear_fwd(cur.data(), l.weight.values().data(),
                           l.bias.values().data(), next.data(), batch, width, out_w);
        detail::sine_fwd(next.data(), next.data(), next.size(),
                         i == 0 ? net.w0_first : net.w0_hidden);
        cur.swap(next);
        width = out_w;
    }
    const auto& head = net.layers.back();
    detail::linear_fwd(cur.data(), head.weight.values().data(),
                       head.bias.values().data(), out.data(), batch, width,
                       net.out_dim);
    detail::sigmoid_fwd(out.data(), out.data(), out.size());
}

/// Renders a full frame in coordinate chunks. Results are independent of the
/// chunk size and of the worker count (rows are independent).
template <class T>
Image<T> render_full(const InrNetwork<T>& net, std::span<const T> z,
                     std::size_t height, std::size_t width, std::size_t chunk = 4096,
                     unsigned threads = 1) {
    if (chunk < 1) throw value_error("render_full: chunk must be >= 1");
    CoordGrid<T> grid = make_coord_grid<T>(height, width);
    const auto& coords = grid.coords.values();
    Image<T> img(height, width);
    const std::size_t total = height * width;

    auto render_range = [&](std::size_t begin, std::size_t end) {
        for (std::size_t start = begin; start < end; start += chunk) {
            const std::size_t n = std::min(chunk, end - start);
            eval_pixels_raw(net, std::span<const T>(coords.data() + start * 2, n * 2),
                            z, std::span<T>(img.data.data() + start * 3, n * 3));
        }
    };

    if (threads <= 1 || total < 2 * chunk) {
        render_range(0, total);
    } else {
        const std::size_t slice = (total + threads - 1) / threads;
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) {
            const std::size_t begin = std::min<std::size_t>(t * slice, total);
            const std::size_t end = std::min<std::size_t>(begin + slice, total);
            if (begin < end) pool.emplace_back(render_range, begin, end);
        }
        for (auto& th : pool) th.join();
    }
    return img;
}

template <class T>
Image<T> render_full(const InrNetwork<T>& net, const std::vector<T>& z,
                     std::size_t height, std::size_t width, std::size_t chunk = 4096,
                     unsigned threads = 1) {
    return render_full(net, std::span<const T>(z.data(), z.size()), height, width,
                       chunk, threads);
}

} // namespace viinter
