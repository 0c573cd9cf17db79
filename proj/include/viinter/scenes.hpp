#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "viinter/errors.hpp"
#include "viinter/image.hpp"
#include "viinter/rng.hpp"

// Deterministic synthetic multi-view scenes. A scene is a stack of layers
// whose positions are linear in a scalar camera parameter u in [0,1]; views
// sit at u = k/(n_views-1), and ground_truth_at(u) renders any intermediate
// camera exactly, so held-out views for interpolation tests are exact by
// construction rather than approximated.

namespace viinter {

enum class SceneKind { translate_sprite, two_layer_parallax };

inline std::string scene_kind_str(SceneKind k) {
    return k == SceneKind::translate_sprite ? "translate_sprite" : "two_layer_parallax";
}

inline SceneKind parse_scene_kind(const std::string& s) {
    if (s == "translate_sprite") return SceneKind::translate_sprite;
    if (s == "two_layer_parallax") return SceneKind::two_layer_parallax;
    throw config_error("unknown scene kind \"" + s + "\"");
}

struct SceneSpec {
    SceneKind kind = SceneKind::translate_sprite;
    std::size_t height = 48;
    std::size_t width = 48;
    std::size_t n_views = 5;
    double disparity = 5.0;      // per-view foreground shift, pixels
    double bg_disparity = 1.0;   // per-view background-layer shift (parallax scenes)
    double sprite_scale = 1.0;   // shrinks sprites for large-disparity presets
    std::uint64_t seed = 1;

    static SceneSpec translate_sprite_default() { return {}; }

    static SceneSpec two_layer_parallax_default() {
        SceneSpec s;
        s.kind = SceneKind::two_layer_parallax;
        s.disparity = 7.0;
        s.bg_disparity = 2.0;
        return s;
    }

    /// The documented failure regime: adjacent views ten pixels apart.
    static SceneSpec large_disparity() {
        SceneSpec s;
        s.disparity = 10.0;
        s.sprite_scale = 0.4;
        return s;
    }
};

namespace detail {

struct SceneLayer {
    std::size_t ph = 0, pw = 0;
    std::vector<double> alpha;              // ph*pw coverage in [0,1]
    std::array<double, 3> color{};
    double x0 = 0, y0 = 0;                  // top-left at u = 0 (pixels)
    double dx = 0, dy = 0;                  // displacement across u in [0,1]
    std::vector<double> texture;            // optional ph*pw*3 override of color

    double sample_alpha(double r, double c) const {
        const double fr = std::floor(r), fc = std::floor(c);
        const long r0 = static_cast<long>(fr), c0 = static_cast<long>(fc);
        const double wr = r - fr, wc = c - fc;
        auto tap = [&](long rr, long cc) -> double {
            if (rr < 0 || cc < 0 || rr >= static_cast<long>(ph) ||
                cc >= static_cast<long>(pw))
                return 0.0;
            return alpha[static_cast<std::size_t>(rr) * pw + static_cast<std::size_t>(cc)];
        };
        return (1 - wr) * ((1 - wc) * tap(r0, c0) + wc * tap(r0, c0 + 1)) +
               wr * ((1 - wc) * tap(r0 + 1, c0) + wc * tap(r0 + 1, c0 + 1));
    }

    std::array<double, 3> sample_color(double r, double c) const {
        if (texture.empty()) return color;
        const double fr = std::floor(r), fc = std::floor(c);
        const long r0 = static_cast<long>(fr), c0 = static_cast<long>(fc);
        const double wr = r - fr, wc = c - fc;
        std::array<double, 3> out{};
        for (int ch = 0; ch < 3; ++ch) {
            auto tap = [&](long rr, long cc) -> double {
                if (rr < 0 || cc < 0 || rr >= static_cast<long>(ph) ||
                    cc >= static_cast<long>(pw))
                    return 0.0;
                return texture[(static_cast<std::size_t>(rr) * pw +
                                static_cast<std::size_t>(cc)) * 3 + ch];
            };
            out[ch] = (1 - wr) * ((1 - wc) * tap(r0, c0) + wc * tap(r0, c0 + 1)) +
                      wr * ((1 - wc) * tap(r0 + 1, c0) + wc * tap(r0 + 1, c0 + 1));
        }
        return out;
    }
};

// Raised-cosine blob: smooth, exactly zero at the patch border.
inline SceneLayer make_blob(std::size_t size, std::array<double, 3> color) {
    SceneLayer l;
    l.ph = l.pw = size;
    l.alpha.assign(size * size, 0.0);
    l.color = color;
    const double center = (static_cast<double>(size) - 1.0) / 2.0;
    const double radius = center;
    for (std::size_t r = 0; r < size; ++r)
        for (std::size_t c = 0; c < size; ++c) {
            const double rho = std::hypot(r - center, c - center) / radius;
            if (rho < 1.0)
                l.alpha[r * size + c] = 0.5 * (1.0 + std::cos(3.141592653589793 * rho));
        }
    return l;
}

// Soft-edged square: full coverage inside, linear ramp to zero at the border.
inline SceneLayer make_soft_square(std::size_t size, std::array<double, 3> color) {
    SceneLayer l;
    l.ph = l.pw = size;
    l.alpha.assign(size * size, 0.0);
    l.color = color;
    const double ramp = std::max(1.2, static_cast<double>(size) * 0.14);
    for (std::size_t r = 0; r < size; ++r)
        for (std::size_t c = 0; c < size; ++c) {
            const double d = std::min(std::min<double>(r, size - 1 - r),
                                      std::min<double>(c, size - 1 - c));
            l.alpha[r * size + c] = std::clamp(d / ramp, 0.0, 1.0);
        }
    return l;
}

} // namespace detail

class Scene {
public:
    explicit Scene(SceneSpec spec) : spec_(spec) { build(); }

    const SceneSpec& spec() const { return spec_; }

    double view_param(std::size_t k) const {
        if (spec_.n_views == 1) return 0.0;
        return static_cast<double>(k) / static_cast<double>(spec_.n_views - 1);
    }

    /// Renders the continuous camera parameter u in [0,1].
    Image<double> ground_truth_at(double u) const {
        if (!(u >= 0.0 && u <= 1.0))
            throw value_error("ground_truth_at: u = " + std::to_string(u) +
                              " outside [0,1]");
        Image<double> img(spec_.height, spec_.width);
        for (std::size_t r = 0; r < spec_.height; ++r)
            for (std::size_t c = 0; c < spec_.width; ++c) {
                std::array<double, 3> px = background(r, c);
                for (const auto& layer : layers_) {
                    const double lr = r - (layer.y0 + u * layer.dy);
                    const double lc = c - (layer.x0 + u * layer.dx);
                    const double a = layer.sample_alpha(lr, lc);
                    if (a <= 0.0) continue;
                    const auto col = layer.sample_color(lr, lc);
                    for (int ch = 0; ch < 3; ++ch)
                        px[ch] = px[ch] * (1.0 - a) + col[ch] * a;
                }
                for (int ch = 0; ch < 3; ++ch)
                    img.at(r, c, ch) = std::clamp(px[ch], 0.0, 1.0);
            }
        return img;
    }

    ImageSet<double> views() const {
        ImageSet<double> set;
        for (std::size_t k = 0; k < spec_.n_views; ++k)
            set.push(ground_truth_at(view_param(k)), "view_" + std::to_string(k));
        return set;
    }

private:
    std::array<double, 3> background(std::size_t r, std::size_t c) const {
        const double v = spec_.height > 1
                             ? static_cast<double>(r) / static_cast<double>(spec_.height - 1)
                             : 0.5;
        const double hgrad = spec_.width > 1
                                 ? static_cast<double>(c) / static_cast<double>(spec_.width - 1)
                                 : 0.5;
        return {bg_base_[0] + 0.18 * v, bg_base_[1] + 0.14 * v + 0.05 * hgrad,
                bg_base_[2] + 0.10 * v};
    }

    void build() {
        if (spec_.height < 8 || spec_.width < 8 || spec_.n_views < 1)
            throw value_error("scene spec: canvas must be at least 8x8 with >= 1 view");
        Rng rng(derive_seed(spec_.seed, rng_stream::scene));
        auto jitter = [&](double base) { return base + rng.uniform(-0.04, 0.04); };
        bg_base_ = {jitter(0.16), jitter(0.20), jitter(0.30)};

        const double total_dx =
            spec_.disparity * static_cast<double>(spec_.n_views > 1 ? spec_.n_views - 1 : 0);
        const double s = spec_.sprite_scale;

        if (spec_.kind == SceneKind::two_layer_parallax) {
            // Oversized smooth texture layer drifting slower than the sprites.
            const double bg_dx = spec_.bg_disparity *
                                 static_cast<double>(spec_.n_views > 1 ? spec_.n_views - 1 : 0);
            detail::SceneLayer bg;
            bg.ph = spec_.height + 8;
            bg.pw = spec_.width + static_cast<std::size_t>(std::ceil(bg_dx)) + 8;
            bg.alpha.assign(bg.ph * bg.pw, 1.0);
            bg.texture.assign(bg.ph * bg.pw * 3, 0.0);
            const double p1 = rng.uniform(0.0, 6.283), p2 = rng.uniform(0.0, 6.283);
            for (std::size_t r = 0; r < bg.ph; ++r)
                for (std::size_t c = 0; c < bg.pw; ++c) {
                    const double tr = static_cast<double>(r) / 4.5;
                    const double tc = static_cast<double>(c) / 3.8;
                    const double wave = 0.5 + 0.20 * std::cos(tc + p1) * std::cos(tr + p2) +
                                        0.12 * std::sin(0.7 * tc - 1.3 * tr + p1);
                    bg.texture[(r * bg.pw + c) * 3 + 0] = 0.55 * wave + 0.08;
                    bg.texture[(r * bg.pw + c) * 3 + 1] = 0.48 * wave + 0.12;
                    bg.texture[(r * bg.pw + c) * 3 + 2] = 0.62 * wave + 0.05;
                }
            bg.x0 = -bg_dx - 4.0;
            bg.y0 = -4.0;
            bg.dx = bg_dx;
            layers_.push_back(std::move(bg));
        }

        auto color = [&](double r, double g, double b) {
            return std::array<double, 3>{jitter(r), jitter(g), jitter(b)};
        };
        const auto blob_sz = [&](double px) {
            return std::max<std::size_t>(7, static_cast<std::size_t>(px * s));
        };
        auto place = [&](detail::SceneLayer l, double xfrac, double yfrac) {
            const double avail = static_cast<double>(spec_.width) - total_dx -
                                 static_cast<double>(l.pw);
            if (avail < 0)
                throw value_error("scene spec: sprite of width " +
                                  std::to_string(l.pw) +
                                  " cannot stay inside the canvas under a total "
                                  "displacement of " + std::to_string(total_dx) + " px");
            l.x0 = xfrac * avail;
            l.y0 = yfrac * static_cast<double>(spec_.height);
            l.dx = total_dx;
            layers_.push_back(std::move(l));
        };

        // Parallax scenes carry fine texture on the sprites as well, so
        // mid-path ghosting is visible rather than hidden by flat colors.
        auto texturize = [&](detail::SceneLayer& l, double freq) {
            const double ph = rng.uniform(0.0, 6.283);
            l.texture.assign(l.ph * l.pw * 3, 0.0);
            for (std::size_t r = 0; r < l.ph; ++r)
                for (std::size_t c = 0; c < l.pw; ++c) {
                    const double mod =
                        0.72 + 0.28 * std::cos(freq * (r + 0.6 * c) + ph) *
                                   std::cos(freq * (c - 0.4 * r) - ph);
                    for (int ch = 0; ch < 3; ++ch)
                        l.texture[(r * l.pw + c) * 3 + ch] = l.color[ch] * mod;
                }
        };

        auto blob1 = detail::make_blob(blob_sz(17), color(0.88, 0.42, 0.18));
        auto blob2 = detail::make_blob(blob_sz(11), color(0.30, 0.78, 0.46));
        auto square = detail::make_soft_square(blob_sz(12), color(0.85, 0.80, 0.25));
        if (spec_.kind == SceneKind::two_layer_parallax) {
            texturize(blob1, 1.15);
            texturize(square, 1.4);
        }
        place(std::move(blob1), 0.25, 0.12);
        place(std::move(blob2), 0.55, 0.55);
        place(std::move(square), 0.10, 0.72);

        validate();
    }

    void validate() const {
        // Every sprite must stay fully inside the canvas across the camera range;
        // oversized texture layers must instead keep the canvas fully covered.
        for (const auto& l : layers_) {
            const bool oversized = l.ph >= spec_.height && l.pw >= spec_.width &&
                                   !l.texture.empty();
            for (double u : {0.0, 1.0}) {
                const double x = l.x0 + u * l.dx, y = l.y0 + u * l.dy;
                if (oversized) {
                    if (x > 0 || y > 0 ||
                        x + static_cast<double>(l.pw) < static_cast<double>(spec_.width) ||
                        y + static_cast<double>(l.ph) < static_cast<double>(spec_.height))
                        throw value_error("scene spec: background layer exposes the "
                                          "canvas edge at u=" + std::to_string(u));
                } else {
                    if (x < 0 || y < 0 ||
                        x + static_cast<double>(l.pw) > static_cast<double>(spec_.width) ||
                        y + static_cast<double>(l.ph) > static_cast<double>(spec_.height))
                        throw value_error(
                            "scene spec: sprite leaves the canvas at u=" +
                            std::to_string(u) + " (displacement too large)");
                }
            }
        }
    }

    SceneSpec spec_;
    std::array<double, 3> bg_base_{};
    std::vector<detail::SceneLayer> layers_;
};

inline Scene generate(const SceneSpec& spec) { return Scene(spec); }

} // namespace viinter
