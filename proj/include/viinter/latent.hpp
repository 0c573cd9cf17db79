#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "viinter/errors.hpp"
#include "viinter/rng.hpp"
#include "viinter/tensor.hpp"

// Per-view latent codes, the unit p-norm constraint, and linear code blending.

namespace viinter {

/// Norm constraint applied to stored codes: either none, or rescaling to the
/// unit p-norm sphere with p in {1, 1.5, 2, inf}.
struct NormMode {
    bool enabled = false;
    double p = 1.0;

    static NormMode none() { return {false, 0.0}; }
    static NormMode unit(double p) {
        if (!(p >= 1.0)) throw value_error("norm mode: p must be >= 1");
        return {true, p};
    }
    static NormMode unit_inf() {
        return {true, std::numeric_limits<double>::infinity()};
    }

    bool operator==(const NormMode&) const = default;

    std::string str() const {
        if (!enabled) return "none";
        if (std::isinf(p)) return "inf";
        // trim trailing zeros of e.g. "1.5"
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%g", p);
        return buf;
    }

    static NormMode parse(const std::string& s) {
        if (s == "none") return none();
        if (s == "inf") return unit_inf();
        try {
            return unit(std::stod(s));
        } catch (const std::exception&) {
            throw config_error("norm mode: expected none, inf, or a number >= 1, got \"" +
                               s + "\"");
        }
    }
};

/// p-norm of a raw vector, accumulated in double regardless of storage type.
template <class T>
double vector_pnorm(std::span<const T> z, double p) {
    if (std::isinf(p)) {
        double m = 0;
        for (T v : z) m = std::max(m, std::abs(static_cast<double>(v)));
        return m;
    }
    double acc = 0;
    for (T v : z) acc += std::pow(std::abs(static_cast<double>(v)), p);
    return std::pow(acc, 1.0 / p);
}

/// Rescales z onto the unit p-norm sphere. A near-zero norm signals a
/// collapsed code and is an error.
template <class T>
std::vector<T> project_unit_pnorm(std::span<const T> z, double p) {
    const double norm = vector_pnorm(z, p);
    if (norm < 1e-12)
        throw value_error("degenerate code: p-norm " + std::to_string(norm) +
                          " is below 1e-12");
    std::vector<T> out(z.size());
    for (std::size_t i = 0; i < z.size(); ++i)
        out[i] = static_cast<T>(static_cast<double>(z[i]) / norm);
    return out;
}

template <class T>
std::vector<T> project_unit_pnorm(const std::vector<T>& z, double p) {
    return project_unit_pnorm(std::span<const T>(z.data(), z.size()), p);
}

/// Convex blend (1-t)*z_i + t*z_j. The paper restricts to pairwise
/// interpolation, so t outside [0,1] is rejected. Blending with swapped
/// endpoints at weight 1-t is bitwise identical whenever 1-t is exact.
template <class T>
std::vector<T> interpolate_codes(std::span<const T> zi, std::span<const T> zj,
                                 double t) {
    if (zi.size() != zj.size())
        throw shape_error("interpolate_codes: lengths " + std::to_string(zi.size()) +
                          " and " + std::to_string(zj.size()) + " differ");
    if (!(t >= 0.0 && t <= 1.0))
        throw value_error("interpolate_codes: t = " + std::to_string(t) +
                          " outside [0,1]");
    const T a = static_cast<T>(1.0 - t), b = static_cast<T>(t);
    std::vector<T> out(zi.size());
    for (std::size_t i = 0; i < zi.size(); ++i)
        out[i] = detail::mul_rounded(a, zi[i]) + detail::mul_rounded(b, zj[i]);
    return out;
}

template <class T>
std::vector<T> interpolate_codes(const std::vector<T>& zi, const std::vector<T>& zj,
                                 double t) {
    return interpolate_codes(std::span<const T>(zi.data(), zi.size()),
                             std::span<const T>(zj.data(), zj.size()), t);
}

/// The learnable code table Z_N. Codes are stored as [1 x M] gradient leaves;
/// whenever a constraint is set, the stored values satisfy it.
template <class T>
struct CodeTable {
    std::vector<Tensor<T>> codes;
    std::size_t code_len = 0;
    NormMode norm_mode;
    std::uint64_t seed = 0;

    std::size_t size() const { return codes.size(); }

    std::span<const T> values(std::size_t n) const {
        return {codes[n].values().data(), code_len};
    }

    /// Projects code n in place per the table's norm mode.
    void project(std::size_t n) {
        if (!norm_mode.enabled) return;
        auto& data = codes[n].mutable_values();
        data = project_unit_pnorm(std::span<const T>(data.data(), data.size()),
                                  norm_mode.p);
    }

    void project_all() {
        for (std::size_t n = 0; n < codes.size(); ++n) project(n);
    }
};

/// Codes initialized elementwise from N(0, 1), deterministically per seed,
/// then projected if a constraint is set. Unit-variance init matches the
/// stock initializer for free embedding vectors; under any p-norm constraint
/// the projected codes are distributionally identical for every init scale,
/// so the scale only shapes the unconstrained mode.
template <class T>
CodeTable<T> init_codes(std::size_t n_images, std::size_t code_len, std::uint64_t seed,
                        NormMode mode = NormMode::none()) {
    if (n_images < 1 || code_len < 1)
        throw value_error("init_codes: n_images and code_len must be >= 1");
    CodeTable<T> table;
    table.code_len = code_len;
    table.norm_mode = mode;
    table.seed = seed;
    Rng rng(derive_seed(seed, rng_stream::code_init));
    for (std::size_t n = 0; n < n_images; ++n) {
        std::vector<T> z(code_len);
        for (auto& v : z) v = static_cast<T>(rng.normal(0.0, 1.0));
        table.codes.push_back(Tensor<T>::from({1, code_len}, std::move(z), true));
    }
    table.project_all();
    return table;
}

} // namespace viinter
