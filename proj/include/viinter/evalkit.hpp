#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "viinter/checkpoint.hpp"
#include "viinter/errors.hpp"
#include "viinter/image.hpp"
#include "viinter/latent.hpp"
#include "viinter/metrics.hpp"
#include "viinter/model.hpp"
#include "viinter/optim.hpp"
#include "viinter/tensor.hpp"

// Evaluation protocol: render at a blend of two learned codes and score the
// frame against a held-out ground-truth view; optionally fine-tune the blended
// code against that view with the network weights frozen.

namespace viinter {

/// Renders interpolate_codes(z_i, z_j, t) and scores it against gt.
inline EvalEntry interp_eval(const InrNetwork<float>& net, const CodeTable<float>& codes,
                             std::size_t i, std::size_t j, double t,
                             const Image<float>& gt, unsigned threads = 1) {
    if (gt.height == 0 || gt.width == 0)
        throw value_error("interp_eval: empty ground-truth image");
    const auto z = interpolate_codes<float>(codes.values(i), codes.values(j), t);
    const Image<float> frame = render_full(net, z, gt.height, gt.width, 4096, threads);
    EvalEntry e;
    e.view_id = std::to_string(i) + "-" + std::to_string(j);
    e.t = t;
    e.psnr_db = psnr(frame, gt);
    e.ssim = ssim(frame, gt);
    return e;
}

/// The paper's quantitative protocol: t = 0.5 between two known views.
inline EvalEntry midpoint_eval(const InrNetwork<float>& net, const CodeTable<float>& codes,
                               std::size_t i, std::size_t j, const Image<float>& gt,
                               unsigned threads = 1) {
    return interp_eval(net, codes, i, j, 0.5, gt, threads);
}

inline EvalEntry midpoint_eval(const Checkpoint& ckpt, std::size_t i, std::size_t j,
                               const Image<float>& gt, unsigned threads = 1) {
    return midpoint_eval(build_network(ckpt), build_codes(ckpt), i, j, gt, threads);
}

/// Reconstruction quality at a known view n.
inline EvalEntry known_view_eval(const InrNetwork<float>& net,
                                 const CodeTable<float>& codes, std::size_t n,
                                 const Image<float>& gt, unsigned threads = 1) {
    const Image<float> frame =
        render_full(net, std::vector<float>(codes.values(n).begin(),
                                            codes.values(n).end()),
                    gt.height, gt.width, 4096, threads);
    EvalEntry e;
    e.view_id = "view_" + std::to_string(n);
    e.t = 0.0;
    e.psnr_db = psnr(frame, gt);
    e.ssim = ssim(frame, gt);
    return e;
}

namespace detail {

inline InrNetwork<float> clone_frozen(const InrNetwork<float>& net) {
    InrNetwork<float> frozen = net;
    frozen.layers.clear();
    for (const auto& l : net.layers) {
        DenseLayer<float> layer;
        layer.weight = Tensor<float>::from(l.weight.shape(),
                                           std::vector<float>(l.weight.values()), false);
        layer.bias = Tensor<float>::from(l.bias.shape(),
                                         std::vector<float>(l.bias.values()), false);
        frozen.layers.push_back(std::move(layer));
    }
    return frozen;
}

} // namespace detail

/// Optimizes a latent code against a ground-truth view with the network
/// weights frozen. The code starts at the t = 0.5 blend of the two declared
/// endpoints; Adam runs on the code only. Returns the improved code and its
/// evaluation entry.
inline std::pair<std::vector<float>, EvalEntry> finetune_code(
    const InrNetwork<float>& net, const CodeTable<float>& codes, std::size_t i,
    std::size_t j, const Image<float>& gt, std::uint64_t steps, double lr,
    unsigned threads = 1) {
    if (gt.height == 0 || gt.width == 0)
        throw value_error("finetune_code: empty ground-truth image");

    const InrNetwork<float> frozen = detail::clone_frozen(net);
    auto z0 = interpolate_codes<float>(codes.values(i), codes.values(j), 0.5);
    Tensor<float> z = Tensor<float>::from({1, codes.code_len}, std::move(z0), true);
    Tensor<float> coords = make_coord_grid<float>(gt.height, gt.width).coords;
    Tensor<float> target =
        Tensor<float>::from({gt.pixel_count(), 3}, std::vector<float>(gt.data));

    AdamSlot<float> slot;
    for (std::uint64_t s = 0; s < steps; ++s) {
        z.zero_grad();
        Tensor<float> loss = mse(eval_pixels(frozen, coords, z), target);
        if (!std::isfinite(loss.item()))
            throw divergence_error("non-finite fine-tuning loss", s);
        backward(loss);
        auto& zd = z.mutable_values();
        const auto& zg = z.grad();
        adam_step<float>({zd.data(), zd.size()}, {zg.data(), zg.size()}, slot, lr);
    }

    const Image<float> frame =
        render_full(frozen, z.values(), gt.height, gt.width, 4096, threads);
    EvalEntry e;
    e.view_id = std::to_string(i) + "-" + std::to_string(j) + "-ft";
    e.t = 0.5;
    e.psnr_db = psnr(frame, gt);
    e.ssim = ssim(frame, gt);
    return {z.values(), e};
}

inline std::pair<std::vector<float>, EvalEntry> finetune_code(
    const Checkpoint& ckpt, std::size_t i, std::size_t j, const Image<float>& gt,
    std::uint64_t steps, double lr, unsigned threads = 1) {
    return finetune_code(build_network(ckpt), build_codes(ckpt), i, j, gt, steps, lr,
                         threads);
}

} // namespace viinter
