#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "viinter/detail/kernels.hpp"
#include "viinter/errors.hpp"
#include "viinter/image.hpp"

// Image quality metrics and evaluation records. All metric arithmetic runs in
// double regardless of the image storage type.

namespace viinter {

inline constexpr double kPsnrCap = 99.0;

/// 10*log10(1/MSE) over all pixels and channels, capped at 99 dB when the MSE
/// drops below 1e-10 so identical-image comparisons stay finite.
template <class T>
double psnr(const Image<T>& a, const Image<T>& b) {
    require_same_dims(a, b, "psnr");
    double acc = 0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const double d = static_cast<double>(a.data[i]) - static_cast<double>(b.data[i]);
        acc += d * d;
    }
    const double mse = acc / static_cast<double>(a.data.size());
    if (mse < 1e-10) return kPsnrCap;
    return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

namespace detail {

inline std::vector<double> ssim_gaussian_taps() {
    // 11-tap Gaussian, sigma 1.5, normalized to sum 1.
    std::vector<double> g(11);
    double sum = 0;
    for (int i = 0; i < 11; ++i) {
        const double d = i - 5;
        g[i] = std::exp(-d * d / (2.0 * 1.5 * 1.5));
        sum += g[i];
    }
    for (auto& v : g) v /= sum;
    return g;
}

// Separable Gaussian filter producing values at valid window centers only.
inline std::vector<double> ssim_filter_valid(const std::vector<double>& plane,
                                             std::size_t h, std::size_t w,
                                             const std::vector<double>& taps) {
    const std::size_t k = taps.size();
    const std::size_t ow = w - k + 1, oh = h - k + 1;
    std::vector<double> rows(h * ow, 0.0);
    for (std::size_t r = 0; r < h; ++r)
        for (std::size_t c = 0; c < ow; ++c) {
            double acc = 0;
            for (std::size_t i = 0; i < k; ++i) acc += taps[i] * plane[r * w + c + i];
            rows[r * ow + c] = acc;
        }
    std::vector<double> out(oh * ow, 0.0);
    for (std::size_t r = 0; r < oh; ++r)
        for (std::size_t c = 0; c < ow; ++c) {
            double acc = 0;
            for (std::size_t i = 0; i < k; ++i) acc += taps[i] * rows[(r + i) * ow + c];
            out[r * ow + c] = acc;
        }
    return out;
}

} // namespace detail

/// Standard single-scale SSIM: 11x11 Gaussian window (sigma 1.5),
/// C1 = 0.01^2 and C2 = 0.03^2 for a unit dynamic range, evaluated per
/// channel over valid windows, then averaged over channels.
template <class T>
double ssim(const Image<T>& a, const Image<T>& b) {
    require_same_dims(a, b, "ssim");
    if (a.height < 11 || a.width < 11)
        throw value_error("ssim: image " + std::to_string(a.width) + "x" +
                          std::to_string(a.height) + " smaller than the 11x11 window");
    static const std::vector<double> taps = detail::ssim_gaussian_taps();
    constexpr double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
    const std::size_t h = a.height, w = a.width;

    double channel_sum = 0;
    for (std::size_t ch = 0; ch < 3; ++ch) {
        std::vector<double> pa(h * w), pb(h * w), paa(h * w), pbb(h * w), pab(h * w);
        for (std::size_t i = 0; i < h * w; ++i) {
            const double x = static_cast<double>(a.data[i * 3 + ch]);
            const double y = static_cast<double>(b.data[i * 3 + ch]);
            pa[i] = x;
            pb[i] = y;
            paa[i] = x * x;
            pbb[i] = y * y;
            pab[i] = x * y;
        }
        const auto mu_a = detail::ssim_filter_valid(pa, h, w, taps);
        const auto mu_b = detail::ssim_filter_valid(pb, h, w, taps);
        const auto m_aa = detail::ssim_filter_valid(paa, h, w, taps);
        const auto m_bb = detail::ssim_filter_valid(pbb, h, w, taps);
        const auto m_ab = detail::ssim_filter_valid(pab, h, w, taps);
        double acc = 0;
        for (std::size_t i = 0; i < mu_a.size(); ++i) {
            // rounded products keep the expression bitwise symmetric in (a,b)
            const double sa = detail::mul_rounded(mu_a[i], mu_a[i]);
            const double sb = detail::mul_rounded(mu_b[i], mu_b[i]);
            const double sab = detail::mul_rounded(mu_a[i], mu_b[i]);
            const double va = m_aa[i] - sa;
            const double vb = m_bb[i] - sb;
            const double cov = m_ab[i] - sab;
            acc += ((2 * sab + c1) * (2 * cov + c2)) /
                   ((sa + sb + c1) * (va + vb + c2));
        }
        channel_sum += acc / static_cast<double>(mu_a.size());
    }
    return channel_sum / 3.0;
}

/// Pixel-space linear blend of two views, the trivial competitor any code
/// interpolation has to beat.
template <class T>
Image<T> crossfade_baseline(const Image<T>& a, const Image<T>& b, double t) {
    require_same_dims(a, b, "crossfade_baseline");
    if (!(t >= 0.0 && t <= 1.0))
        throw value_error("crossfade_baseline: t = " + std::to_string(t) +
                          " outside [0,1]");
    Image<T> out(a.height, a.width);
    const T wa = static_cast<T>(1.0 - t), wb = static_cast<T>(t);
    for (std::size_t i = 0; i < out.data.size(); ++i)
        out.data[i] = wa * a.data[i] + wb * b.data[i];
    return out;
}

struct EvalEntry {
    std::string view_id;
    double t = 0;
    double psnr_db = 0;
    double ssim = 0;
};

struct EvalReport {
    std::vector<EvalEntry> entries;

    double mean_psnr() const {
        double s = 0;
        for (const auto& e : entries) s += e.psnr_db;
        return entries.empty() ? 0 : s / static_cast<double>(entries.size());
    }
    double mean_ssim() const {
        double s = 0;
        for (const auto& e : entries) s += e.ssim;
        return entries.empty() ? 0 : s / static_cast<double>(entries.size());
    }

    void write_csv(std::ostream& os) const {
        os << "view_id,t,psnr_db,ssim\n";
        char buf[128];
        for (const auto& e : entries) {
            std::snprintf(buf, sizeof(buf), "%s,%.9g,%.9g,%.9g\n", e.view_id.c_str(),
                          e.t, e.psnr_db, e.ssim);
            os << buf;
        }
    }

    void write_summary(std::ostream& os) const {
        char buf[128];
        for (const auto& e : entries) {
            std::snprintf(buf, sizeof(buf), "  %-12s t=%-6.3f psnr=%7.3f dB  ssim=%.4f\n",
                          e.view_id.c_str(), e.t, e.psnr_db, e.ssim);
            os << buf;
        }
        std::snprintf(buf, sizeof(buf), "  mean: psnr=%.3f dB ssim=%.4f\n", mean_psnr(),
                      mean_ssim());
        os << buf;
    }
};

} // namespace viinter
