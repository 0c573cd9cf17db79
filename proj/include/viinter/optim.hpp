#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "viinter/errors.hpp"
#include "viinter/tensor.hpp"

namespace viinter {

/// Cosine annealing from lr_start down to lr_end over `total` iterations.
inline double lr_schedule(std::uint64_t iter, std::uint64_t total, double lr_start,
                          double lr_end) {
    if (iter > total) throw value_error("lr_schedule: iter exceeds total");
    const double x = 3.141592653589793238462643383279502884 *
                     (total ? static_cast<double>(iter) / static_cast<double>(total) : 0.0);
    return lr_end + 0.5 * (lr_start - lr_end) * (1.0 + std::cos(x));
}

struct AdamHyper {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Moment estimates for one parameter array. The step count is per parameter,
/// so parameters that sit out an iteration keep their bias correction honest.
template <class T>
struct AdamSlot {
    std::vector<T> m;
    std::vector<T> v;
    std::uint64_t step = 0;
};

/// One bias-corrected Adam update. Intermediate arithmetic runs in double;
/// the stored state stays in T so checkpoints round-trip exactly.
template <class T>
void adam_step(std::span<T> param, std::span<const T> grad, AdamSlot<T>& slot,
               double lr, const AdamHyper& hp = {}) {
    if (param.size() != grad.size())
        throw shape_error("adam_step: param length " + std::to_string(param.size()) +
                          " and grad length " + std::to_string(grad.size()) +
                          " differ");
    if (slot.m.size() != param.size()) slot.m.assign(param.size(), T(0));
    if (slot.v.size() != param.size()) slot.v.assign(param.size(), T(0));
    slot.step += 1;
    const double bc1 = 1.0 - std::pow(hp.beta1, static_cast<double>(slot.step));
    const double bc2 = 1.0 - std::pow(hp.beta2, static_cast<double>(slot.step));
    for (std::size_t i = 0; i < param.size(); ++i) {
        const double g = static_cast<double>(grad[i]);
        const double m = hp.beta1 * static_cast<double>(slot.m[i]) + (1.0 - hp.beta1) * g;
        const double v = hp.beta2 * static_cast<double>(slot.v[i]) + (1.0 - hp.beta2) * g * g;
        slot.m[i] = static_cast<T>(m);
        slot.v[i] = static_cast<T>(v);
        const double mh = m / bc1;
        const double vh = v / bc2;
        param[i] = static_cast<T>(static_cast<double>(param[i]) -
                                  lr * mh / (std::sqrt(vh) + hp.eps));
    }
}

/// Adam over a fixed set of tensor parameters, updating a chosen subset each
/// iteration (the network every step, only the sampled codes).
template <class T>
class AdamOptimizer {
public:
    AdamOptimizer() = default;
    explicit AdamOptimizer(std::vector<Tensor<T>> params, AdamHyper hp = {})
        : params_(std::move(params)), slots_(params_.size()), hyper_(hp) {}

    std::size_t size() const { return params_.size(); }
    const AdamHyper& hyper() const { return hyper_; }
    AdamSlot<T>& slot(std::size_t i) { return slots_[i]; }
    const AdamSlot<T>& slot(std::size_t i) const { return slots_[i]; }

    void update(std::span<const std::size_t> indices, double lr) {
        for (std::size_t i : indices) {
            auto& p = params_[i].mutable_values();
            const auto& g = params_[i].grad();
            adam_step<T>({p.data(), p.size()}, {g.data(), g.size()}, slots_[i], lr,
                         hyper_);
        }
    }

private:
    std::vector<Tensor<T>> params_;
    std::vector<AdamSlot<T>> slots_;
    AdamHyper hyper_;
};

} // namespace viinter
