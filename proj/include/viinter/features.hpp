#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "viinter/errors.hpp"
#include "viinter/image.hpp"
#include "viinter/rng.hpp"
#include "viinter/tensor.hpp"

// Loss terms and the frozen feature extractor. The extractor is a fixed
// random convolutional stack standing in for an external pretrained network:
// per non-overlapping patch, three valid 3x3 cross-correlation stages
// (channels 3 -> 16 -> 16 -> 16) with a sine nonlinearity and 2x average
// pooling after each stage, then the spatial mean per channel. Patch vectors
// are concatenated in row-major tile order.

namespace viinter {

inline constexpr std::size_t kFeatureChannels = 16;

template <class T>
struct FeatureExtractor {
    enum class Kind { random_conv, external };

    Kind kind = Kind::random_conv;
    std::size_t patch_size = 32;  // stride equals patch size
    std::uint64_t seed = 0;
    T nonlinearity_w0 = T(1);
    std::vector<Tensor<T>> kernels;  // [3,3,cin,cout] per stage, frozen

    std::size_t tiles(std::size_t height, std::size_t width) const {
        return (height / patch_size) * (width / patch_size);
    }
    std::size_t feature_length(std::size_t height, std::size_t width) const {
        return tiles(height, width) * kFeatureChannels;
    }
};

/// Builds the fixed random extractor. Kernel entries are drawn from
/// U(-s, s) with s = sqrt(2 / fan_in); the weights are frozen leaves and
/// never receive gradient updates.
template <class T>
FeatureExtractor<T> make_feature_extractor(std::size_t patch_size, std::uint64_t seed) {
    // Three rounds of (size-2)/2 followed by a final 2x pool: 22 is the
    // smallest patch that survives.
    if (patch_size < 22)
        throw config_error("feature extractor: patch size must be >= 22 to survive "
                           "three conv/pool stages");
    FeatureExtractor<T> e;
    e.patch_size = patch_size;
    e.seed = seed;
    Rng rng(derive_seed(seed, rng_stream::extractor));
    const std::size_t widths[4] = {3, kFeatureChannels, kFeatureChannels,
                                   kFeatureChannels};
    for (int stage = 0; stage < 3; ++stage) {
        const std::size_t cin = widths[stage], cout = widths[stage + 1];
        const double bound = std::sqrt(2.0 / static_cast<double>(9 * cin));
        std::vector<T> k(3 * 3 * cin * cout);
        for (auto& v : k) v = static_cast<T>(rng.uniform(-bound, bound));
        e.kernels.push_back(Tensor<T>::from({3, 3, cin, cout}, std::move(k), false));
    }
    return e;
}

template <class T>
FeatureExtractor<T> make_external_extractor() {
    throw config_error("external feature extractors are not bundled; use random_conv");
}

/// Non-overlapping row-major patches with stride equal to the patch size;
/// trailing partial patches are dropped.
template <class T>
std::vector<Image<T>> tile_image(const Image<T>& img, std::size_t patch) {
    if (patch < 1) throw value_error("tile_image: patch must be >= 1");
    if (patch > img.height || patch > img.width)
        throw value_error("tile_image: patch " + std::to_string(patch) +
                          " exceeds image " + std::to_string(img.width) + "x" +
                          std::to_string(img.height) + ", tiling is empty");
    std::vector<Image<T>> tiles;
    for (std::size_t tr = 0; tr + patch <= img.height; tr += patch) {
        for (std::size_t tc = 0; tc + patch <= img.width; tc += patch) {
            Image<T> tile(patch, patch);
            for (std::size_t r = 0; r < patch; ++r)
                std::copy_n(img.data.data() + ((tr + r) * img.width + tc) * 3,
                            patch * 3, tile.data.data() + r * patch * 3);
            tiles.push_back(std::move(tile));
        }
    }
    return tiles;
}

namespace detail {

template <class T>
Tensor<T> extractor_stages(const FeatureExtractor<T>& e, const Tensor<T>& patch) {
    Tensor<T> h = patch;
    for (const auto& k : e.kernels) {
        h = conv2d_valid(h, k);
        h = sine(h, e.nonlinearity_w0);
        h = avg_pool2(h);
    }
    return spatial_mean(h);  // [1, channels]
}

} // namespace detail

/// Traced feature extraction of an [H,W,3] tensor; differentiable with
/// respect to the image. Output is a [1 x F] feature row.
template <class T>
Tensor<T> extract_features(const FeatureExtractor<T>& e, const Tensor<T>& img) {
    detail::require_rank(img, 3, "extract_features input");
    const std::size_t h = img.shape()[0], w = img.shape()[1];
    if (e.patch_size > h || e.patch_size > w)
        throw value_error("extract_features: image " + std::to_string(w) + "x" +
                          std::to_string(h) + " smaller than patch " +
                          std::to_string(e.patch_size));
    Tensor<T> out;
    for (std::size_t tr = 0; tr + e.patch_size <= h; tr += e.patch_size) {
        for (std::size_t tc = 0; tc + e.patch_size <= w; tc += e.patch_size) {
            Tensor<T> vec = detail::extractor_stages(
                e, crop(img, tr, tc, e.patch_size, e.patch_size));
            out = out.valid() ? concat_rows(out, vec) : vec;
        }
    }
    return out;
}

/// Feature extraction of a plain image (no gradient tracking).
template <class T>
std::vector<T> extract_features(const FeatureExtractor<T>& e, const Image<T>& img) {
    Tensor<T> t = Tensor<T>::from({img.height, img.width, 3},
                                  std::vector<T>(img.data), false);
    return extract_features(e, t).values();
}

/// Pixel reconstruction loss: mean squared error, differentiable wrt pred.
template <class T>
Tensor<T> recon_loss(const Tensor<T>& pred, const Tensor<T>& gt) {
    return mse(pred, gt);
}

/// Feature-space interpolation loss: mean squared deviation between the
/// features of the interpolated frame and the t-blend of the (precomputed,
/// constant) endpoint features. Differentiable wrt the frame only.
template <class T>
Tensor<T> inter_loss(const FeatureExtractor<T>& e, const Tensor<T>& inter_img,
                     std::span<const T> feat_i, std::span<const T> feat_j, double t) {
    Tensor<T> f = extract_features(e, inter_img);
    if (feat_i.size() != f.numel() || feat_j.size() != f.numel())
        throw shape_error("inter_loss: endpoint feature lengths " +
                          std::to_string(feat_i.size()) + "/" +
                          std::to_string(feat_j.size()) +
                          " do not match extractor output length " +
                          std::to_string(f.numel()));
    const T a = static_cast<T>(1.0 - t), b = static_cast<T>(t);
    std::vector<T> blend(f.numel());
    for (std::size_t i = 0; i < blend.size(); ++i)
        blend[i] = viinter::detail::mul_rounded(a, feat_i[i]) +
                   viinter::detail::mul_rounded(b, feat_j[i]);
    return mse(f, Tensor<T>::from(f.shape(), std::move(blend), false));
}

/// Weighting of the interpolation regularizer. alpha_inter = 0 disables the
/// entire interpolation path.
struct LossWeights {
    double alpha_inter = 0.0;
    int inter_every = 2;
};

} // namespace viinter
