// Acceptance suite: one pass/fail line per criterion, ordering- and
// property-based on the synthetic scenes. Fits are cached and shared across
// criteria that specify identical configurations.

#include <chrono>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "viinter/viinter.hpp"

using namespace viinter;
namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------------------
// tiny check harness
// ---------------------------------------------------------------------------

struct Checker {
    std::vector<std::string> failures;
    std::vector<std::string> notes;

    void expect(bool ok, const std::string& what) {
        if (!ok) failures.push_back(what);
    }
    void note(const std::string& line) { notes.push_back(line); }
    void notef(const char* fmt, ...) {
        char buf[512];
        va_list ap;
        va_start(ap, fmt);
        std::vsnprintf(buf, sizeof(buf), fmt, ap);
        va_end(ap);
        notes.push_back(buf);
    }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------
// shared artifacts
// ---------------------------------------------------------------------------

TrainConfig acceptance_config() {
    TrainConfig cfg;  // desk defaults: 3000 iterations, batch 1024, lr 2e-4
    cfg.code_len = 32;
    cfg.hidden_dim = 128;
    cfg.depth = 8;
    cfg.norm_mode = NormMode::unit(1.0);
    cfg.alpha_inter = 0.0;
    cfg.extractor_patch = 32;
    cfg.seed = 7;
    return cfg;
}

TrainConfig parallax_config(double alpha) {
    TrainConfig cfg = acceptance_config();
    cfg.alpha_inter = alpha;
    cfg.inter_every = 2;
    cfg.extractor_patch = 24;  // 48 = 2x24: patches tile the frame exactly
    return cfg;
}

struct SceneData {
    Scene scene;
    ImageSet<float> train;       // loaded back through the dataset pipeline
    std::string manifest_path;
};

struct FitResult {
    Checkpoint ckpt;
    std::string metrics_csv;
    double fit_seconds = 0;
};

struct Lab {
    fs::path workdir;
    std::map<std::string, SceneData> scenes;
    std::map<std::string, FitResult> fits;

    explicit Lab(fs::path dir) : workdir(std::move(dir)) {
        fs::create_directories(workdir);
    }

    SceneData& scene(const std::string& key, const SceneSpec& spec) {
        auto it = scenes.find(key);
        if (it != scenes.end()) return it->second;
        SceneData sd{generate(spec), {}, {}};
        const fs::path dir = workdir / key;
        ImageSet<float> rendered;
        const auto views = sd.scene.views();
        for (std::size_t k = 0; k < views.size(); ++k)
            rendered.push(views.images[k].cast<float>(), views.tags[k]);
        write_dataset(rendered, dir.string());
        sd.manifest_path = (dir / "manifest.json").string();
        sd.train = load_dataset<float>(sd.manifest_path);
        return scenes.emplace(key, std::move(sd)).first->second;
    }

    FitResult& fit_cached(const std::string& key, const SceneData& sd,
                          const TrainConfig& cfg) {
        auto it = fits.find(key);
        if (it != fits.end()) return it->second;
        FitResult r;
        const auto t0 = std::chrono::steady_clock::now();
        std::ostringstream csv;
        r.ckpt = fit(sd.train, cfg, &csv);
        r.fit_seconds = seconds_since(t0);
        r.metrics_csv = csv.str();
        std::printf("    [fit %-22s %5.0f s]\n", key.c_str(), r.fit_seconds);
        std::fflush(stdout);
        return fits.emplace(key, std::move(r)).first->second;
    }
};

// Mean midpoint metrics over adjacent view pairs: t = 0.5 between views k and
// k+1, scored against the exact intermediate camera rendering. None of these
// camera parameters appear in the training set.
struct NovelViewScores {
    double psnr = 0;
    double ssim = 0;
    double xfade_psnr = 0;
    double xfade_ssim = 0;
};

NovelViewScores midpoint_scores(const Checkpoint& ckpt, const SceneData& sd) {
    const auto net = build_network(ckpt);
    const auto codes = build_codes(ckpt);
    NovelViewScores s;
    const std::size_t pairs = sd.train.size() - 1;
    for (std::size_t k = 0; k + 1 < sd.train.size(); ++k) {
        const double u = (sd.scene.view_param(k) + sd.scene.view_param(k + 1)) / 2;
        const auto gt = sd.scene.ground_truth_at(u).cast<float>();
        const EvalEntry e = midpoint_eval(net, codes, k, k + 1, gt);
        s.psnr += e.psnr_db / static_cast<double>(pairs);
        s.ssim += e.ssim / static_cast<double>(pairs);
        const auto xf = crossfade_baseline(sd.train.images[k], sd.train.images[k + 1], 0.5);
        s.xfade_psnr += psnr(xf, gt) / static_cast<double>(pairs);
        s.xfade_ssim += ssim(xf, gt) / static_cast<double>(pairs);
    }
    return s;
}

struct KnownViewScores {
    double psnr = 0;
    double ssim = 0;
};

KnownViewScores known_scores(const Checkpoint& ckpt, const SceneData& sd) {
    const auto net = build_network(ckpt);
    const auto codes = build_codes(ckpt);
    KnownViewScores s;
    for (std::size_t k = 0; k < sd.train.size(); ++k) {
        const EvalEntry e = known_view_eval(net, codes, k, sd.train.images[k]);
        s.psnr += e.psnr_db / static_cast<double>(sd.train.size());
        s.ssim += e.ssim / static_cast<double>(sd.train.size());
    }
    return s;
}

// ---------------------------------------------------------------------------
// criteria
// ---------------------------------------------------------------------------

void criterion1_gradients(Checker& c, Lab&) {
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(101);
    int probes = 0;
    double worst = 0;

    auto check = [&](const std::function<Tensor<double>(const Tensor<double>&)>& f,
                     const Shape& shape) {
        std::vector<double> x(shape_numel(shape));
        for (auto& v : x) v = rng.uniform(-1.0, 1.0);
        Tensor<double> leaf = Tensor<double>::from(shape, x, true);
        backward(f(leaf));
        const auto an = leaf.grad();
        const auto fd = oracle::fd_gradient(
            [&](const std::vector<double>& p) {
                return f(Tensor<double>::from(shape, p, false)).item();
            },
            x, 1e-5);
        worst = std::max(worst, oracle::max_rel_err(fd, an));
        ++probes;
    };

    auto w = Tensor<double>::from({3, 4}, [] {
        Rng r(7);
        std::vector<double> v(12);
        for (auto& x : v) x = r.uniform(-1, 1);
        return v;
    }());
    auto b = Tensor<double>::from({4}, {0.1, -0.2, 0.3, 0.05});
    auto kern = Tensor<double>::from({3, 3, 2, 2}, [] {
        Rng r(8);
        std::vector<double> v(36);
        for (auto& x : v) x = r.uniform(-1, 1);
        return v;
    }());

    for (int rep = 0; rep < 2; ++rep) {
        check([&](const Tensor<double>& x) { return mean_all(linear(x, w, b)); }, {5, 3});
        check([](const Tensor<double>& x) { return mean_all(sine(x, 30.0)); }, {3, 4});
        check([](const Tensor<double>& x) { return mean_all(sigmoid(x)); }, {6});
        check([](const Tensor<double>& x) {
            return mean_all(square(concat_rows(x, scaled(x, 0.5))));
        }, {2, 3});
        check([](const Tensor<double>& x) { return mean_all(square(repeat_rows(x, 5))); },
              {1, 4});
        check([](const Tensor<double>& x) {
            return mse(mul(x, x), Tensor<double>::full({2, 4}, 0.3));
        }, {2, 4});
        check([](const Tensor<double>& x) { return pnorm(x, 1.5); }, {6});
        check([](const Tensor<double>& x) { return sum_all(abs_val(x)); }, {5});
        check([](const Tensor<double>& x) {
            return mean_all(square(sub(x, scaled(x, 0.25))));
        }, {2, 3});
        check([](const Tensor<double>& x) {
            return mean_all(square(reshape(x, {4, 2, 1})));
        }, {8});
        check([&](const Tensor<double>& x) {
            return mean_all(square(avg_pool2(conv2d_valid(x, kern))));
        }, {6, 6, 2});
        check([](const Tensor<double>& x) {
            return mean_all(square(spatial_mean(crop(x, 1, 1, 3, 3))));
        }, {5, 5, 2});
    }

    // full 3-layer code-conditioned network, random probes on codes & weights
    const std::size_t m = 6;
    auto net = init_siren<double>(3, 16, 2 + m, 3, 30.0, 55);
    Rng drng(66);
    std::vector<double> cv(8 * 2), tv(8 * 3);
    for (auto& v : cv) v = drng.uniform();
    for (auto& v : tv) v = drng.uniform();
    auto coords = Tensor<double>::from({8, 2}, cv);
    auto target = Tensor<double>::from({8, 3}, tv);

    for (int probe = 0; probe < 6; ++probe) {
        std::vector<double> zv(m);
        for (auto& v : zv) v = drng.uniform(-1, 1);
        Tensor<double> z = Tensor<double>::from({1, m}, zv, true);
        for (auto& layer : net.layers) {
            layer.weight.zero_grad();
            layer.bias.zero_grad();
        }
        backward(mse(eval_pixels(net, coords, z), target));

        const auto fd_z = oracle::fd_gradient(
            [&](const std::vector<double>& p) {
                return mse(eval_pixels(net, coords, Tensor<double>::from({1, m}, p)),
                           target)
                    .item();
            },
            zv, 1e-5);
        worst = std::max(worst, oracle::max_rel_err(fd_z, z.grad()));
        ++probes;

        auto wl = net.layers[probe % net.layers.size()].weight;
        const std::vector<double> wv = wl.values();
        const std::vector<double> an_w = wl.grad();
        const auto fd_w = oracle::fd_gradient(
            [&](const std::vector<double>& p) {
                wl.mutable_values() = p;
                const double v =
                    mse(eval_pixels(net, coords, Tensor<double>::from({1, m}, zv)),
                        target)
                        .item();
                return v;
            },
            wv, 1e-5);
        wl.mutable_values() = wv;
        worst = std::max(worst, oracle::max_rel_err(fd_w, an_w));
        ++probes;
    }

    const double secs = seconds_since(t0);
    c.notef("%d probes, worst relative error %.3g, %.1f s", probes, worst, secs);
    c.expect(probes >= 20, "need at least 20 probes");
    c.expect(worst < 1e-4, "gradient relative error must stay below 1e-4");
    c.expect(secs < 30.0, "gradient checks must finish within 30 s");
}

void criterion2_metric_oracles(Checker& c, Lab&) {
    Rng rng(202);
    double worst_ssim = 0, worst_psnr = 0;
    for (int trial = 0; trial < 10; ++trial) {
        const auto a = oracle::random_image(16, 16, rng);
        const auto b = oracle::random_image(16, 16, rng);
        worst_ssim = std::max(worst_ssim,
                              std::abs(ssim(a, b) - oracle::ssim_bruteforce(a, b)));
        double mse_direct = 0;
        for (std::size_t i = 0; i < a.data.size(); ++i)
            mse_direct += (a.data[i] - b.data[i]) * (a.data[i] - b.data[i]) /
                          static_cast<double>(a.data.size());
        worst_psnr = std::max(
            worst_psnr, std::abs(psnr(a, b) - 10.0 * std::log10(1.0 / mse_direct)));
    }
    c.notef("ssim vs brute force: %.3g; psnr vs formula: %.3g", worst_ssim, worst_psnr);
    c.expect(worst_ssim < 1e-6, "ssim must match the brute-force windows to 1e-6");
    c.expect(worst_psnr < 1e-9, "psnr must match the direct formula to 1e-9");

    // Adam: three hand-computed scalar steps.
    std::vector<double> p = {0.5};
    AdamSlot<double> slot;
    const double grads[3] = {1.0, -0.5, 0.25};
    const double frozen[3] = {0.400000001, 0.37336629737090316, 0.3393233830648465};
    oracle::ScalarAdam ref;
    double pr = 0.5, worst_adam = 0;
    for (int s = 0; s < 3; ++s) {
        std::vector<double> g = {grads[s]};
        adam_step<double>(p, g, slot, 0.1);
        pr = ref.step(pr, grads[s], 0.1);
        worst_adam = std::max(worst_adam,
                              std::max(std::abs(p[0] - frozen[s]), std::abs(p[0] - pr)));
    }
    c.notef("adam trace deviation: %.3g", worst_adam);
    c.expect(worst_adam < 1e-12, "adam must match the hand trace to 1e-12");
}

void criterion3_fit_quality(Checker& c, Lab& lab) {
    auto& sd = lab.scene("translate", SceneSpec::translate_sprite_default());
    auto& fr = lab.fit_cached("translate/p1/M32", sd, acceptance_config());
    const auto k = known_scores(fr.ckpt, sd);
    c.notef("known views: %.2f dB / ssim %.4f (fit %.0f s)", k.psnr, k.ssim,
            fr.fit_seconds);
    c.expect(k.psnr >= 30.0, "mean known-view PSNR must reach 30 dB");
    c.expect(k.ssim >= 0.90, "mean known-view SSIM must reach 0.90");
    c.expect(fr.fit_seconds <= 300.0, "fit must run within 5 minutes");
}

void criterion4_norm_ablation(Checker& c, Lab& lab) {
    auto& sd = lab.scene("translate", SceneSpec::translate_sprite_default());
    const auto t0 = std::chrono::steady_clock::now();
    std::map<std::string, NovelViewScores> novel;
    double shared_fit_seconds = lab.fits.count("translate/p1/M32")
                                    ? lab.fits["translate/p1/M32"].fit_seconds
                                    : 0.0;
    for (const auto& [label, mode] :
         std::vector<std::pair<std::string, NormMode>>{{"none", NormMode::none()},
                                                       {"inf", NormMode::unit_inf()},
                                                       {"p2", NormMode::unit(2)},
                                                       {"p1.5", NormMode::unit(1.5)},
                                                       {"p1", NormMode::unit(1)}}) {
        TrainConfig cfg = acceptance_config();
        cfg.norm_mode = mode;
        const std::string key =
            label == "p1" ? "translate/p1/M32" : "translate/" + label + "/M32";
        auto& fr = lab.fit_cached(key, sd, cfg);
        novel[label] = midpoint_scores(fr.ckpt, sd);
        c.notef("%-5s novel %.2f dB / ssim %.4f", label.c_str(), novel[label].psnr,
                novel[label].ssim);
    }
    const double sweep_secs = seconds_since(t0) + shared_fit_seconds;
    c.notef("crossfade baseline %.2f dB; sweep %.0f s", novel["p1"].xfade_psnr,
            sweep_secs);
    c.expect(novel["p1"].psnr >= novel["p2"].psnr - 0.5,
             "p=1 must be within 0.5 dB of (or above) p=2");
    c.expect(novel["p1"].psnr >= novel["none"].psnr + 5.0,
             "p=1 must exceed norm_mode=none by 5 dB");
    c.expect(novel["none"].psnr < novel["none"].xfade_psnr,
             "norm_mode=none must fall below the cross-fade baseline");
    c.expect(sweep_secs <= 1500.0, "5-condition sweep must run within 25 minutes");
}

void criterion5_code_length(Checker& c, Lab& lab) {
    auto& sd = lab.scene("translate", SceneSpec::translate_sprite_default());
    std::map<std::size_t, double> mid;
    for (std::size_t m : {std::size_t(4), std::size_t(32), std::size_t(64)}) {
        TrainConfig cfg = acceptance_config();
        cfg.code_len = m;
        const std::string key = "translate/p1/M" + std::to_string(m);
        auto& fr = lab.fit_cached(key, sd, cfg);
        mid[m] = midpoint_scores(fr.ckpt, sd).psnr;
        c.notef("M=%-3zu novel %.2f dB", m, mid[m]);
    }
    c.expect(mid[4] <= mid[32] - 2.0, "M=4 must trail M=32 by at least 2 dB");
    c.expect(std::abs(mid[32] - mid[64]) < 1.0,
             "M=32 and M=64 must agree within 1 dB (plateau)");
}

void criterion6_inter_loss(Checker& c, Lab& lab) {
    auto& sd = lab.scene("parallax", SceneSpec::two_layer_parallax_default());
    std::map<std::string, NovelViewScores> novel;
    std::map<std::string, double> path_ssim;
    for (const double alpha : {0.0, 0.05}) {
        const TrainConfig cfg = parallax_config(alpha);
        const std::string key = alpha > 0 ? "parallax/a0.05" : "parallax/a0";
        auto& fr = lab.fit_cached(key, sd, cfg);
        novel[key] = midpoint_scores(fr.ckpt, sd);

        // mean SSIM along the interpolation path, t in {0.25, 0.5, 0.75} per
        // adjacent pair, ground truth at the exact intermediate camera
        const auto net = build_network(fr.ckpt);
        const auto codes = build_codes(fr.ckpt);
        double acc = 0;
        int count = 0;
        for (std::size_t k = 0; k + 1 < sd.train.size(); ++k) {
            for (const double t : {0.25, 0.5, 0.75}) {
                const double u = sd.scene.view_param(k) +
                                 t * (sd.scene.view_param(k + 1) - sd.scene.view_param(k));
                const auto gt = sd.scene.ground_truth_at(u).cast<float>();
                acc += interp_eval(net, codes, k, k + 1, t, gt).ssim;
                ++count;
            }
        }
        path_ssim[key] = acc / count;
        c.notef("alpha=%.2f novel %.2f dB, path ssim %.5f", alpha, novel[key].psnr,
                path_ssim[key]);
    }
    const auto& with = novel["parallax/a0.05"];
    const auto& without = novel["parallax/a0"];
    c.notef("crossfade %.2f dB", with.xfade_psnr);
    c.expect(with.psnr >= without.psnr - 0.1,
             "interpolation loss must not cost more than 0.1 dB of midpoint PSNR");
    c.expect(path_ssim["parallax/a0.05"] > path_ssim["parallax/a0"],
             "interpolation loss must strictly raise mean SSIM along the path");
    c.expect(with.psnr >= with.xfade_psnr + 1.0,
             "alpha=0.05 must beat cross-fade at t=0.5 by 1 dB");
    c.expect(without.psnr >= without.xfade_psnr + 1.0,
             "alpha=0 must beat cross-fade at t=0.5 by 1 dB");
}

void criterion7_finetune(Checker& c, Lab& lab) {
    // Ensure every acceptance scene has its fit (shared with 3/6/9).
    lab.fit_cached("translate/p1/M32",
                   lab.scene("translate", SceneSpec::translate_sprite_default()),
                   acceptance_config());
    lab.fit_cached("parallax/a0.05",
                   lab.scene("parallax", SceneSpec::two_layer_parallax_default()),
                   parallax_config(0.05));
    lab.fit_cached("large", lab.scene("large", SceneSpec::large_disparity()),
                   acceptance_config());

    for (const auto& [fit_key, scene_key] :
         std::vector<std::pair<std::string, std::string>>{
             {"translate/p1/M32", "translate"},
             {"parallax/a0.05", "parallax"},
             {"large", "large"}}) {
        auto& sd = lab.scenes.at(scene_key);
        auto& fr = lab.fits.at(fit_key);
        const auto net = build_network(fr.ckpt);
        const auto codes = build_codes(fr.ckpt);
        const std::size_t i = 1, j = 2;
        const double u = (sd.scene.view_param(i) + sd.scene.view_param(j)) / 2;
        const auto gt = sd.scene.ground_truth_at(u).cast<float>();
        const EvalEntry before = midpoint_eval(net, codes, i, j, gt);
        const auto [code, after] = finetune_code(net, codes, i, j, gt, 200, 1e-2);
        c.notef("%-18s %.2f -> %.2f dB (gain %.2f)", fit_key.c_str(), before.psnr_db,
                after.psnr_db, after.psnr_db - before.psnr_db);
        c.expect(after.psnr_db >= before.psnr_db + 1.0,
                 fit_key + ": fine-tuning must gain at least 1 dB");

        // network weights byte-identical before/after
        bool same = true;
        const auto params = net.parameters();
        for (std::size_t p = 0; p < params.size(); ++p)
            if (params[p].values() != fr.ckpt.net_arrays[p].second) same = false;
        c.expect(same, fit_key + ": network weights must stay byte-identical");
    }
}

void criterion8_determinism(Checker& c, Lab& lab) {
    auto& sd = lab.scene("translate", SceneSpec::translate_sprite_default());
    auto& first = lab.fit_cached("translate/p1/M32", sd, acceptance_config());

    // fixed-seed refit: metrics stream and checkpoint bytes identical
    std::ostringstream csv;
    const Checkpoint refit = fit(sd.train, acceptance_config(), &csv);
    c.expect(csv.str() == first.metrics_csv,
             "fixed-seed refit must reproduce the metrics CSV byte for byte");
    c.expect(serialize_checkpoint(refit) == serialize_checkpoint(first.ckpt),
             "fixed-seed refit must reproduce the checkpoint byte for byte");

    // interrupted at half, resumed; every produced checkpoint obeys the
    // code-norm invariant
    auto norm_ok = [&](const Checkpoint& ck) {
        for (std::size_t n = 0; n < ck.n_codes; ++n) {
            std::span<const float> z(ck.codes.data() + n * ck.config.code_len,
                                     ck.config.code_len);
            if (std::abs(vector_pnorm(z, 1.0) - 1.0) >= 1e-5) return false;
        }
        return true;
    };
    const Checkpoint half = fit(sd.train, acceptance_config(), nullptr, {}, 1500);
    c.expect(half.iteration == 1500, "interrupted run must stop at 1500");
    c.expect(norm_ok(half), "code-norm invariant must hold at the half checkpoint");
    const Checkpoint reloaded = parse_checkpoint(serialize_checkpoint(half), "mem");
    Trainer resumed(reloaded, sd.train);
    while (!resumed.done()) {
        resumed.step();
        if (resumed.iteration() % 500 == 0)
            c.expect(norm_ok(resumed.checkpoint()),
                     "code-norm invariant must hold at every checkpoint");
    }
    c.expect(serialize_checkpoint(resumed.checkpoint()) ==
                 serialize_checkpoint(first.ckpt),
             "resume at half-run must match the uninterrupted run byte for byte");
    c.expect(norm_ok(first.ckpt), "code-norm invariant must hold at the final checkpoint");
    c.note("refit, half-resume, and norm invariants verified");
}

void criterion9_large_disparity(Checker& c, Lab& lab) {
    auto& small_sd = lab.scene("translate", SceneSpec::translate_sprite_default());
    auto& small_fit = lab.fit_cached("translate/p1/M32", small_sd, acceptance_config());
    auto& large_sd = lab.scene("large", SceneSpec::large_disparity());
    auto& large_fit = lab.fit_cached("large", large_sd, acceptance_config());

    const double small_mid = midpoint_scores(small_fit.ckpt, small_sd).psnr;
    const double large_mid = midpoint_scores(large_fit.ckpt, large_sd).psnr;
    c.notef("small disparity %.2f dB, large disparity %.2f dB (drop %.2f)", small_mid,
            large_mid, small_mid - large_mid);
    c.expect(small_mid - large_mid >= 5.0,
             "large disparity must cost at least 5 dB of midpoint PSNR");
}

} // namespace

int main() {
    const fs::path workdir =
        fs::temp_directory_path() / ("viinter_acceptance_" + std::to_string(::getpid()));
    Lab lab(workdir);

    struct Criterion {
        int id;
        std::string name;
        std::function<void(Checker&, Lab&)> body;
    };
    const std::vector<Criterion> criteria = {
        {1, "gradient correctness", criterion1_gradients},
        {2, "metric oracles", criterion2_metric_oracles},
        {3, "fit quality", criterion3_fit_quality},
        {4, "norm ablation ordering", criterion4_norm_ablation},
        {5, "code-length ablation ordering", criterion5_code_length},
        {6, "interpolation-loss benefit", criterion6_inter_loss},
        {7, "fine-tuning improvement", criterion7_finetune},
        {8, "determinism and persistence", criterion8_determinism},
        {9, "limitation reproduction", criterion9_large_disparity},
    };

    int failed = 0;
    for (const auto& crit : criteria) {
        Checker c;
        std::printf("criterion %d: %s\n", crit.id, crit.name.c_str());
        std::fflush(stdout);
        try {
            crit.body(c, lab);
        } catch (const std::exception& e) {
            c.failures.push_back(std::string("exception: ") + e.what());
        }
        for (const auto& n : c.notes) std::printf("    %s\n", n.c_str());
        for (const auto& f : c.failures) std::printf("    FAILED: %s\n", f.c_str());
        std::printf("[%s] criterion %d: %s\n\n", c.failures.empty() ? "PASS" : "FAIL",
                    crit.id, crit.name.c_str());
        std::fflush(stdout);
        if (!c.failures.empty()) ++failed;
    }

    std::error_code ec;
    fs::remove_all(workdir, ec);

    if (failed) {
        std::printf("%d of %zu criteria failed\n", failed, criteria.size());
        return 1;
    }
    std::printf("all %zu criteria passed\n", criteria.size());
    return 0;
}
