#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "viinter/checkpoint.hpp"
#include "viinter/config.hpp"
#include "viinter/errors.hpp"
#include "viinter/features.hpp"
#include "viinter/image.hpp"
#include "viinter/latent.hpp"
#include "viinter/model.hpp"
#include "viinter/optim.hpp"
#include "viinter/rng.hpp"
#include "viinter/tensor.hpp"

// The training loop. Each iteration: sample interpolation endpoints, project
// the selected codes onto the constraint sphere, fit a pixel batch from image
// i, every inter_every-th iteration render the full frame at a random code
// blend and add the feature-space interpolation loss, then take one Adam step
// on the network and the sampled codes. Per-iteration randomness is derived
// from (seed, iteration), so a resumed run replays the exact draw sequence.

namespace viinter {

struct StepMetrics {
    std::uint64_t iter = 0;
    double lr = 0;
    double l_recon = 0;
    std::optional<double> l_inter;
};

/// Uniform endpoint pair with i != j.
inline std::pair<std::size_t, std::size_t> sample_endpoints(std::size_t n_images,
                                                            Rng& rng) {
    if (n_images < 2)
        throw config_error("sample_endpoints: need at least 2 images, got " +
                           std::to_string(n_images));
    const std::size_t i = rng.index(n_images);
    std::size_t j = rng.index(n_images - 1);
    if (j >= i) ++j;
    return {i, j};
}

class Trainer {
public:
    Trainer(const ImageSet<float>& data, TrainConfig cfg)
        : cfg_(std::move(cfg)), data_(data) {
        cfg_.height = data.height();
        cfg_.width = data.width();
        cfg_.validate();
        check_dataset();
        net_ = init_siren<float>(cfg_.depth, cfg_.hidden_dim, 2 + cfg_.code_len, 3,
                                 static_cast<float>(cfg_.w0), cfg_.seed);
        codes_ = init_codes<float>(data_.size(), cfg_.code_len, cfg_.seed,
                                   cfg_.norm_mode);
        init_common();
        opt_ = AdamOptimizer<float>(all_params());
    }

    Trainer(const Checkpoint& ckpt, const ImageSet<float>& data)
        : cfg_(ckpt.config), data_(data) {
        cfg_.validate();
        check_dataset();
        if (data_.size() != ckpt.n_codes)
            throw data_error("resume: dataset has " + std::to_string(data_.size()) +
                             " views but checkpoint has " + std::to_string(ckpt.n_codes) +
                             " codes");
        if (data_.height() != cfg_.height || data_.width() != cfg_.width)
            throw data_error("resume: dataset dimensions do not match checkpoint");
        net_ = build_network(ckpt);
        codes_ = build_codes(ckpt);
        init_common();
        opt_ = AdamOptimizer<float>(all_params());
        if (ckpt.adam.size() != opt_.size())
            throw format_error("resume: checkpoint has " +
                               std::to_string(ckpt.adam.size()) +
                               " optimizer slots, expected " +
                               std::to_string(opt_.size()));
        for (std::size_t p = 0; p < opt_.size(); ++p) {
            opt_.slot(p).step = ckpt.adam[p].step;
            opt_.slot(p).m = ckpt.adam[p].m;
            opt_.slot(p).v = ckpt.adam[p].v;
        }
        iter_ = ckpt.iteration;
    }

    const TrainConfig& config() const { return cfg_; }
    std::uint64_t iteration() const { return iter_; }
    bool done() const { return iter_ >= cfg_.iterations; }
    const InrNetwork<float>& network() const { return net_; }
    const CodeTable<float>& codes() const { return codes_; }
    const FeatureExtractor<float>* extractor() const {
        return extractor_ ? &*extractor_ : nullptr;
    }

    StepMetrics step() {
        const std::uint64_t it = iter_;
        Rng rng(derive_seed(cfg_.seed, rng_stream::train_base + it));
        const bool inter_path = cfg_.alpha_inter > 0.0;

        std::size_t i = 0, j = 0;
        bool drew_j = false;
        if (inter_path) {
            std::tie(i, j) = sample_endpoints(data_.size(), rng);
            drew_j = true;
        } else {
            i = rng.index(data_.size());
        }

        codes_.project(i);
        if (drew_j) codes_.project(j);

        // Pixel batch from image i (sampled with replacement).
        const std::size_t npix = cfg_.height * cfg_.width;
        const std::size_t batch = cfg_.batch_pixels;
        std::vector<float> bc(batch * 2), bg(batch * 3);
        const auto& grid = full_coords_.values();
        const auto& img = data_.images[i].data;
        for (std::size_t b = 0; b < batch; ++b) {
            const std::size_t k = rng.index(npix);
            bc[b * 2 + 0] = grid[k * 2 + 0];
            bc[b * 2 + 1] = grid[k * 2 + 1];
            bg[b * 3 + 0] = img[k * 3 + 0];
            bg[b * 3 + 1] = img[k * 3 + 1];
            bg[b * 3 + 2] = img[k * 3 + 2];
        }

        zero_grads(i, j, drew_j);

        Tensor<float> coords = Tensor<float>::from({batch, 2}, std::move(bc));
        Tensor<float> target = Tensor<float>::from({batch, 3}, std::move(bg));
        Tensor<float> l_recon = recon_loss(eval_pixels(net_, coords, codes_.codes[i]),
                                           target);
        Tensor<float> total = l_recon;

        std::optional<double> l_inter_val;
        bool inter_step = false;
        if (inter_path && it % static_cast<std::uint64_t>(cfg_.inter_every) == 0) {
            inter_step = true;
            const double t = rng.uniform();
            Tensor<float> z_inter =
                viinter::add(scaled(codes_.codes[i], static_cast<float>(1.0 - t)),
                             scaled(codes_.codes[j], static_cast<float>(t)));
            Tensor<float> frame = eval_pixels(net_, full_coords_, z_inter);
            Tensor<float> frame3 = reshape(frame, {cfg_.height, cfg_.width, 3});
            Tensor<float> l_inter =
                inter_loss(*extractor_, frame3,
                           {endpoint_feats_[i].data(), endpoint_feats_[i].size()},
                           {endpoint_feats_[j].data(), endpoint_feats_[j].size()}, t);
            l_inter_val = static_cast<double>(l_inter.item());
            total = viinter::add(l_recon,
                                 scaled(l_inter, static_cast<float>(cfg_.alpha_inter)));
        }

        backward(total);

        const double l_recon_val = static_cast<double>(l_recon.item());
        if (!std::isfinite(l_recon_val) ||
            (l_inter_val && !std::isfinite(*l_inter_val)))
            throw divergence_error("non-finite loss", it);
        check_grads(i, j, drew_j && inter_step, it);

        const double lr = lr_schedule(it, cfg_.iterations, cfg_.lr_start, cfg_.lr_end);
        std::vector<std::size_t> updated = net_param_ids_;
        updated.push_back(n_net_params_ + i);
        if (inter_step) updated.push_back(n_net_params_ + j);
        opt_.update(updated, lr);

        codes_.project(i);
        if (inter_step) codes_.project(j);

        iter_ = it + 1;
        return {it, lr, l_recon_val, l_inter_val};
    }

    Checkpoint checkpoint() const {
        Checkpoint ckpt;
        ckpt.config = cfg_;
        ckpt.iteration = iter_;
        for (const auto& layer : net_.layers) {
            ckpt.net_arrays.emplace_back(layer.weight.shape(), layer.weight.values());
            ckpt.net_arrays.emplace_back(layer.bias.shape(), layer.bias.values());
        }
        ckpt.n_codes = codes_.size();
        ckpt.codes.reserve(codes_.size() * cfg_.code_len);
        for (std::size_t n = 0; n < codes_.size(); ++n)
            ckpt.codes.insert(ckpt.codes.end(), codes_.codes[n].values().begin(),
                              codes_.codes[n].values().end());
        for (std::size_t p = 0; p < opt_.size(); ++p) {
            const auto& slot = opt_.slot(p);
            ckpt.adam.push_back({slot.step, slot.m, slot.v});
        }
        return ckpt;
    }

private:
    void check_dataset() const {
        if (data_.size() < 1) throw data_error("training requires at least one view");
        if (cfg_.alpha_inter > 0.0 && data_.size() < 2)
            throw config_error("alpha_inter > 0 requires at least two views");
        if (cfg_.height < 1 || cfg_.width < 1)
            throw data_error("training images are empty");
    }

    void init_common() {
        full_coords_ = make_coord_grid<float>(cfg_.height, cfg_.width).coords;
        if (cfg_.alpha_inter > 0.0) {
            if (cfg_.extractor_kind != "random_conv")
                extractor_ = make_external_extractor<float>();
            else
                extractor_ = make_feature_extractor<float>(cfg_.extractor_patch,
                                                           cfg_.seed);
            if (cfg_.extractor_patch > cfg_.height || cfg_.extractor_patch > cfg_.width)
                throw config_error("extractor patch " +
                                   std::to_string(cfg_.extractor_patch) +
                                   " exceeds image dimensions");
            // Alg. "Prepare": endpoint features of the known images, extracted
            // once and never refreshed.
            endpoint_feats_.reserve(data_.size());
            for (const auto& im : data_.images)
                endpoint_feats_.push_back(extract_features(*extractor_, im));
        }
        n_net_params_ = net_.layers.size() * 2;
        net_param_ids_.resize(n_net_params_);
        for (std::size_t p = 0; p < n_net_params_; ++p) net_param_ids_[p] = p;
    }

    std::vector<Tensor<float>> all_params() const {
        std::vector<Tensor<float>> ps = net_.parameters();
        for (const auto& c : codes_.codes) ps.push_back(c);
        return ps;
    }

    void zero_grads(std::size_t i, std::size_t j, bool drew_j) {
        for (auto& layer : net_.layers) {
            layer.weight.zero_grad();
            layer.bias.zero_grad();
        }
        codes_.codes[i].zero_grad();
        if (drew_j) codes_.codes[j].zero_grad();
    }

    void check_grads(std::size_t i, std::size_t j, bool j_updated,
                     std::uint64_t it) const {
        auto finite = [](const std::vector<float>& g) {
            for (float v : g)
                if (!std::isfinite(v)) return false;
            return true;
        };
        for (const auto& layer : net_.layers)
            if (!finite(layer.weight.grad()) || !finite(layer.bias.grad()))
                throw divergence_error("non-finite gradient in network weights", it);
        if (!finite(codes_.codes[i].grad()))
            throw divergence_error("non-finite gradient in code " + std::to_string(i),
                                   it);
        if (j_updated && !finite(codes_.codes[j].grad()))
            throw divergence_error("non-finite gradient in code " + std::to_string(j),
                                   it);
    }

    TrainConfig cfg_;
    ImageSet<float> data_;
    InrNetwork<float> net_;
    CodeTable<float> codes_;
    std::optional<FeatureExtractor<float>> extractor_;
    std::vector<std::vector<float>> endpoint_feats_;
    AdamOptimizer<float> opt_;
    Tensor<float> full_coords_;
    std::vector<std::size_t> net_param_ids_;
    std::size_t n_net_params_ = 0;
    std::uint64_t iter_ = 0;
};

inline void write_metrics_header(std::ostream& os) { os << "iter,lr,l_recon,l_inter\n"; }

inline void write_metrics_row(std::ostream& os, const StepMetrics& m) {
    char buf[160];
    if (m.l_inter)
        std::snprintf(buf, sizeof(buf), "%llu,%.9g,%.9g,%.9g\n",
                      static_cast<unsigned long long>(m.iter), m.lr, m.l_recon,
                      *m.l_inter);
    else
        std::snprintf(buf, sizeof(buf), "%llu,%.9g,%.9g,\n",
                      static_cast<unsigned long long>(m.iter), m.lr, m.l_recon);
    os << buf;
}

/// Runs a trainer forward, streaming metrics and optionally writing a rolling
/// checkpoint every checkpoint_every iterations. stop_after > 0 bounds the
/// number of iterations executed in this call (an interrupted run); the
/// returned checkpoint resumes exactly where it stopped.
inline Checkpoint run_training(Trainer& trainer, std::ostream* metrics = nullptr,
                               const std::string& checkpoint_path = {},
                               std::uint64_t stop_after = 0) {
    if (metrics && trainer.iteration() == 0) write_metrics_header(*metrics);
    std::uint64_t executed = 0;
    while (!trainer.done() && (stop_after == 0 || executed < stop_after)) {
        const StepMetrics m = trainer.step();
        ++executed;
        if (metrics) write_metrics_row(*metrics, m);
        if (!checkpoint_path.empty() && trainer.config().checkpoint_every &&
            trainer.iteration() % trainer.config().checkpoint_every == 0 &&
            !trainer.done())
            save_checkpoint(trainer.checkpoint(), checkpoint_path);
    }
    Checkpoint final = trainer.checkpoint();
    if (!checkpoint_path.empty()) save_checkpoint(final, checkpoint_path);
    return final;
}

/// Fits a fresh model on the dataset.
inline Checkpoint fit(const ImageSet<float>& data, const TrainConfig& cfg,
                      std::ostream* metrics = nullptr,
                      const std::string& checkpoint_path = {},
                      std::uint64_t stop_after = 0) {
    Trainer trainer(data, cfg);
    return run_training(trainer, metrics, checkpoint_path, stop_after);
}

/// Continues a checkpointed run toward its configured iteration count.
inline Checkpoint resume_fit(const Checkpoint& ckpt, const ImageSet<float>& data,
                             std::ostream* metrics = nullptr,
                             const std::string& checkpoint_path = {},
                             std::uint64_t stop_after = 0) {
    Trainer trainer(ckpt, data);
    return run_training(trainer, metrics, checkpoint_path, stop_after);
}

} // namespace viinter
