// Command-line surface: scene generation, fitting, rendering, evaluation,
// latent fine-tuning, and the two ablation sweeps.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "viinter/viinter.hpp"

namespace fs = std::filesystem;
using namespace viinter;

namespace {

unsigned env_threads() {
    const char* v = std::getenv("VIINTER_THREADS");
    if (!v) return 1;
    const long n = std::strtol(v, nullptr, 10);
    return n > 1 ? static_cast<unsigned>(n) : 1;
}

ImageSet<float> to_float(const ImageSet<double>& v) {
    ImageSet<float> out;
    for (std::size_t k = 0; k < v.size(); ++k)
        out.push(v.images[k].cast<float>(), v.tags[k]);
    return out;
}

// Holdout tags have the form "i-j@t": interpolate codes i and j at weight t.
struct HoldoutTag {
    std::size_t i = 0, j = 0;
    double t = 0.5;
};

std::string make_holdout_tag(std::size_t i, std::size_t j, double t) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%zu-%zu@%.9g", i, j, t);
    return buf;
}

HoldoutTag parse_holdout_tag(const std::string& tag) {
    HoldoutTag h;
    const auto dash = tag.find('-');
    const auto at = tag.find('@');
    if (dash == std::string::npos || at == std::string::npos || at < dash)
        throw data_error("holdout tag \"" + tag + "\" is not of the form i-j@t");
    try {
        h.i = std::stoul(tag.substr(0, dash));
        h.j = std::stoul(tag.substr(dash + 1, at - dash - 1));
        h.t = std::stod(tag.substr(at + 1));
    } catch (const std::exception&) {
        throw data_error("holdout tag \"" + tag + "\" is not of the form i-j@t");
    }
    return h;
}

struct FitFlags {
    std::string config_file;
    std::optional<std::uint64_t> iters;
    std::optional<std::size_t> batch;
    std::optional<double> lr_start, lr_end, alpha, w0;
    std::optional<int> inter_every;
    std::optional<std::string> norm;
    std::optional<std::size_t> code_len, hidden, depth, patch;
    std::optional<std::uint64_t> seed, checkpoint_every;

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", config_file, "key=value config file");
        cmd->add_option("--iters", iters, "training iterations");
        cmd->add_option("--batch", batch, "pixel batch size");
        cmd->add_option("--lr-start", lr_start, "initial learning rate");
        cmd->add_option("--lr-end", lr_end, "final learning rate");
        cmd->add_option("--alpha", alpha, "interpolation loss weight");
        cmd->add_option("--inter-every", inter_every,
                        "apply the interpolation loss every k iterations");
        cmd->add_option("--norm", norm, "code norm constraint: none, inf, 2, 1.5, 1");
        cmd->add_option("--code-len", code_len, "latent code length M");
        cmd->add_option("--hidden", hidden, "hidden layer width");
        cmd->add_option("--depth", depth, "number of sine layers");
        cmd->add_option("--w0", w0, "sine frequency scale");
        cmd->add_option("--seed", seed, "run seed");
        cmd->add_option("--checkpoint-every", checkpoint_every,
                        "write a rolling checkpoint every k iterations");
        cmd->add_option("--patch", patch, "feature extractor patch size");
    }

    // Precedence: CLI flag > config file > built-in default.
    TrainConfig resolve() const {
        TrainConfig cfg;
        if (!config_file.empty()) cfg = load_config_file(config_file, cfg);
        if (iters) cfg.iterations = *iters;
        if (batch) cfg.batch_pixels = *batch;
        if (lr_start) cfg.lr_start = *lr_start;
        if (lr_end) cfg.lr_end = *lr_end;
        if (alpha) cfg.alpha_inter = *alpha;
        if (inter_every) cfg.inter_every = *inter_every;
        if (norm) cfg.norm_mode = NormMode::parse(*norm);
        if (code_len) cfg.code_len = *code_len;
        if (hidden) cfg.hidden_dim = *hidden;
        if (depth) cfg.depth = *depth;
        if (w0) cfg.w0 = *w0;
        if (seed) cfg.seed = *seed;
        if (checkpoint_every) cfg.checkpoint_every = *checkpoint_every;
        if (patch) cfg.extractor_patch = *patch;
        return cfg;
    }
};

int cmd_gen(const std::string& scene_name, const std::string& out_dir,
            std::size_t views, std::size_t height, std::size_t width,
            double disparity, double bg_disparity, double sprite_scale,
            std::uint64_t seed, bool holdout, std::size_t holdout_i,
            std::size_t holdout_j, const std::vector<double>& holdout_ts) {
    SceneSpec spec;
    if (scene_name == "translate_sprite")
        spec = SceneSpec::translate_sprite_default();
    else if (scene_name == "two_layer_parallax")
        spec = SceneSpec::two_layer_parallax_default();
    else if (scene_name == "large_disparity")
        spec = SceneSpec::large_disparity();
    else
        throw config_error("unknown scene \"" + scene_name +
                           "\" (translate_sprite, two_layer_parallax, large_disparity)");
    spec.n_views = views;
    spec.height = height;
    spec.width = width;
    spec.seed = seed;
    if (disparity >= 0) spec.disparity = disparity;
    if (bg_disparity >= 0) spec.bg_disparity = bg_disparity;
    if (sprite_scale > 0) spec.sprite_scale = sprite_scale;

    const Scene scene = generate(spec);
    write_dataset(to_float(scene.views()), out_dir);

    if (holdout) {
        const fs::path hdir = fs::path(out_dir) / "holdout";
        fs::create_directories(hdir);
        DatasetManifest hm;
        hm.width = spec.width;
        hm.height = spec.height;
        auto emit = [&](std::size_t i, std::size_t j, double t, const std::string& name) {
            const double u = scene.view_param(i) +
                             t * (scene.view_param(j) - scene.view_param(i));
            save_image((hdir / name).string(),
                       scene.ground_truth_at(u).cast<float>());
            hm.images.push_back({name, make_holdout_tag(i, j, t)});
        };
        if (holdout_ts.empty()) {
            // Default protocol: the midpoint between every adjacent view pair.
            for (std::size_t k = 0; k + 1 < spec.n_views; ++k) {
                char name[32];
                std::snprintf(name, sizeof(name), "mid_%03zu.png", k);
                emit(k, k + 1, 0.5, name);
            }
        } else {
            for (std::size_t idx = 0; idx < holdout_ts.size(); ++idx) {
                char name[32];
                std::snprintf(name, sizeof(name), "t_%03zu.png", idx);
                emit(holdout_i, holdout_j, holdout_ts[idx], name);
            }
        }
        save_manifest(hm, (hdir / "manifest.json").string());
    }
    std::cout << "wrote " << spec.n_views << " views to " << out_dir << "\n";
    return 0;
}

int cmd_fit(const std::string& data_path, const std::string& out_path,
            const std::string& metrics_path, const std::string& resume_path,
            std::uint64_t stop_after, const FitFlags& flags) {
    ImageSet<float> data = load_dataset<float>(data_path);
    std::ofstream metrics;
    std::ostream* metrics_os = nullptr;

    Checkpoint final;
    if (!resume_path.empty()) {
        Checkpoint ckpt = load_checkpoint(resume_path);
        if (!metrics_path.empty()) {
            metrics.open(metrics_path, std::ios::app);
            if (!metrics) throw data_error("cannot write metrics \"" + metrics_path + "\"");
            metrics_os = &metrics;
        }
        final = resume_fit(ckpt, data, metrics_os, out_path, stop_after);
    } else {
        TrainConfig cfg = flags.resolve();
        if (!metrics_path.empty()) {
            metrics.open(metrics_path, std::ios::trunc);
            if (!metrics) throw data_error("cannot write metrics \"" + metrics_path + "\"");
            metrics_os = &metrics;
        }
        final = fit(data, cfg, metrics_os, out_path, stop_after);
    }
    std::cout << "checkpoint at iteration " << final.iteration << " -> " << out_path
              << "\n";
    return 0;
}

int cmd_render(const std::string& ckpt_path, std::size_t i, std::size_t j, double t,
               const std::string& out_path, std::size_t sweep,
               const std::string& out_dir) {
    const Checkpoint ckpt = load_checkpoint(ckpt_path);
    const InrNetwork<float> net = build_network(ckpt);
    const CodeTable<float> codes = build_codes(ckpt);
    if (i >= codes.size() || j >= codes.size())
        throw data_error("render: view index out of range (checkpoint has " +
                         std::to_string(codes.size()) + " codes)");
    const unsigned threads = env_threads();
    auto render_at = [&](double tt) {
        const auto z = interpolate_codes<float>(codes.values(i), codes.values(j), tt);
        return render_full(net, z, ckpt.config.height, ckpt.config.width, 4096,
                           threads);
    };
    if (sweep > 0) {
        if (out_dir.empty()) throw config_error("render --sweep requires --out-dir");
        fs::create_directories(out_dir);
        for (std::size_t k = 0; k < sweep; ++k) {
            const double tt = sweep == 1 ? 0.0
                                         : static_cast<double>(k) /
                                               static_cast<double>(sweep - 1);
            char name[32];
            std::snprintf(name, sizeof(name), "frame_%03zu.png", k);
            save_image((fs::path(out_dir) / name).string(), render_at(tt));
        }
        std::cout << "wrote " << sweep << " frames to " << out_dir << "\n";
    } else {
        if (out_path.empty()) throw config_error("render requires --out");
        save_image(out_path, render_at(t));
        std::cout << "wrote " << out_path << "\n";
    }
    return 0;
}

int cmd_eval(const std::string& ckpt_path, const std::string& holdout_path,
             const std::string& out_csv) {
    const Checkpoint ckpt = load_checkpoint(ckpt_path);
    const InrNetwork<float> net = build_network(ckpt);
    const CodeTable<float> codes = build_codes(ckpt);
    const ImageSet<float> holdout = load_dataset<float>(holdout_path);
    const unsigned threads = env_threads();

    EvalReport report;
    for (std::size_t k = 0; k < holdout.size(); ++k) {
        const HoldoutTag tag = parse_holdout_tag(holdout.tags[k]);
        if (tag.i >= codes.size() || tag.j >= codes.size())
            throw data_error("eval: holdout tag \"" + holdout.tags[k] +
                             "\" names a view outside the checkpoint");
        EvalEntry e = interp_eval(net, codes, tag.i, tag.j, tag.t, holdout.images[k],
                                  threads);
        e.view_id = holdout.tags[k];
        report.entries.push_back(e);
    }
    if (!out_csv.empty()) {
        std::ofstream os(out_csv);
        if (!os) throw data_error("cannot write report \"" + out_csv + "\"");
        report.write_csv(os);
    }
    report.write_summary(std::cout);
    return 0;
}

int cmd_finetune(const std::string& ckpt_path, const std::string& gt_path,
                 std::size_t i, std::size_t j, std::uint64_t steps, double lr,
                 const std::string& out_csv) {
    const Checkpoint ckpt = load_checkpoint(ckpt_path);
    const InrNetwork<float> net = build_network(ckpt);
    const CodeTable<float> codes = build_codes(ckpt);
    const Image<float> gt = load_image<float>(gt_path);
    const unsigned threads = env_threads();

    EvalReport report;
    report.entries.push_back(midpoint_eval(net, codes, i, j, gt, threads));
    auto [code, after] = finetune_code(net, codes, i, j, gt, steps, lr, threads);
    report.entries.push_back(after);
    if (!out_csv.empty()) {
        std::ofstream os(out_csv);
        if (!os) throw data_error("cannot write report \"" + out_csv + "\"");
        report.write_csv(os);
    }
    report.write_summary(std::cout);
    std::printf("finetune gain: %.3f dB over %llu steps\n",
                report.entries[1].psnr_db - report.entries[0].psnr_db,
                static_cast<unsigned long long>(steps));
    return 0;
}

struct AblationRow {
    std::string label;
    double known_psnr = 0, known_ssim = 0;
    double novel_psnr = 0, novel_ssim = 0;
    double xfade_psnr = 0;
};

AblationRow run_condition(const std::string& label, const ImageSet<float>& data,
                          const ImageSet<float>& holdout, const TrainConfig& cfg) {
    Trainer trainer(data, cfg);
    while (!trainer.done()) trainer.step();
    const auto& net = trainer.network();
    const auto& codes = trainer.codes();
    const unsigned threads = env_threads();

    AblationRow row;
    row.label = label;
    for (std::size_t n = 0; n < data.size(); ++n) {
        const EvalEntry e = known_view_eval(net, codes, n, data.images[n], threads);
        row.known_psnr += e.psnr_db / static_cast<double>(data.size());
        row.known_ssim += e.ssim / static_cast<double>(data.size());
    }
    for (std::size_t k = 0; k < holdout.size(); ++k) {
        const HoldoutTag tag = parse_holdout_tag(holdout.tags[k]);
        const EvalEntry e =
            interp_eval(net, codes, tag.i, tag.j, tag.t, holdout.images[k], threads);
        row.novel_psnr += e.psnr_db / static_cast<double>(holdout.size());
        row.novel_ssim += e.ssim / static_cast<double>(holdout.size());
        const Image<float> xf =
            crossfade_baseline(data.images[tag.i], data.images[tag.j], tag.t);
        row.xfade_psnr += psnr(xf, holdout.images[k]) / static_cast<double>(holdout.size());
    }
    std::printf("%-10s known %6.2f dB / %.4f   novel %6.2f dB / %.4f   xfade %6.2f dB\n",
                row.label.c_str(), row.known_psnr, row.known_ssim, row.novel_psnr,
                row.novel_ssim, row.xfade_psnr);
    std::fflush(stdout);
    return row;
}

void write_ablation_csv(const std::string& path, const std::string& key,
                        const std::vector<AblationRow>& rows) {
    std::ofstream os(path);
    if (!os) throw data_error("cannot write \"" + path + "\"");
    os << key << ",known_psnr,known_ssim,novel_psnr,novel_ssim,crossfade_psnr\n";
    char buf[192];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%s,%.9g,%.9g,%.9g,%.9g,%.9g\n",
                      r.label.c_str(), r.known_psnr, r.known_ssim, r.novel_psnr,
                      r.novel_ssim, r.xfade_psnr);
        os << buf;
    }
}

int cmd_ablate_norm(const std::string& data_path, const std::string& holdout_path,
                    const std::string& out_csv, const FitFlags& flags) {
    const ImageSet<float> data = load_dataset<float>(data_path);
    const ImageSet<float> holdout = load_dataset<float>(holdout_path);
    std::vector<AblationRow> rows;
    for (const auto& [label, mode] :
         std::vector<std::pair<std::string, NormMode>>{{"none", NormMode::none()},
                                                       {"inf", NormMode::unit_inf()},
                                                       {"2", NormMode::unit(2)},
                                                       {"1.5", NormMode::unit(1.5)},
                                                       {"1", NormMode::unit(1)}}) {
        TrainConfig cfg = flags.resolve();
        cfg.norm_mode = mode;
        rows.push_back(run_condition(label, data, holdout, cfg));
    }
    if (!out_csv.empty()) write_ablation_csv(out_csv, "norm_mode", rows);
    return 0;
}

int cmd_ablate_codelen(const std::string& data_path, const std::string& holdout_path,
                       const std::string& out_csv, std::vector<std::size_t> lengths,
                       const FitFlags& flags) {
    const ImageSet<float> data = load_dataset<float>(data_path);
    const ImageSet<float> holdout = load_dataset<float>(holdout_path);
    if (lengths.empty()) lengths = {4, 16, 32, 64};
    std::vector<AblationRow> rows;
    for (std::size_t m : lengths) {
        TrainConfig cfg = flags.resolve();
        cfg.code_len = m;
        rows.push_back(run_condition(std::to_string(m), data, holdout, cfg));
    }
    if (!out_csv.empty()) write_ablation_csv(out_csv, "code_len", rows);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"VIINTER: view interpolation with implicit neural representations"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "generate a synthetic multi-view dataset");
    std::string gen_scene = "translate_sprite", gen_out;
    std::size_t gen_views = 5, gen_h = 48, gen_w = 48;
    double gen_disp = -1, gen_bg_disp = -1, gen_scale = -1;
    std::uint64_t gen_seed = 1;
    bool gen_no_holdout = false;
    std::size_t gen_hi = 0, gen_hj = 0;
    std::vector<double> gen_hts;
    gen->add_option("--scene", gen_scene,
                    "translate_sprite | two_layer_parallax | large_disparity");
    gen->add_option("--out", gen_out, "output directory")->required();
    gen->add_option("--views", gen_views, "number of views");
    gen->add_option("--height", gen_h, "canvas height");
    gen->add_option("--width", gen_w, "canvas width");
    gen->add_option("--disparity", gen_disp, "per-view sprite shift in pixels");
    gen->add_option("--bg-disparity", gen_bg_disp, "per-view background shift");
    gen->add_option("--sprite-scale", gen_scale, "sprite size multiplier");
    gen->add_option("--seed", gen_seed, "scene seed");
    gen->add_flag("--no-holdout", gen_no_holdout, "skip held-out ground-truth views");
    gen->add_option("--holdout-i", gen_hi, "holdout endpoint i");
    gen->add_option("--holdout-j", gen_hj, "holdout endpoint j");
    gen->add_option("--holdout-ts", gen_hts, "holdout t values for endpoints i,j");

    // fit
    auto* fit_cmd = app.add_subcommand("fit", "train on a dataset manifest");
    std::string fit_data, fit_out = "model.viin", fit_metrics, fit_resume;
    std::uint64_t fit_stop_after = 0;
    FitFlags fit_flags;
    fit_cmd->add_option("--data", fit_data, "dataset manifest")->required();
    fit_cmd->add_option("--out", fit_out, "checkpoint output path");
    fit_cmd->add_option("--metrics", fit_metrics, "per-step metrics CSV path");
    fit_cmd->add_option("--resume", fit_resume, "resume from this checkpoint");
    fit_cmd->add_option("--stop-after", fit_stop_after,
                        "run at most this many iterations, then checkpoint");
    fit_flags.attach(fit_cmd);

    // render
    auto* render = app.add_subcommand("render", "render at an interpolated code");
    std::string r_ckpt, r_out, r_dir;
    std::size_t r_i = 0, r_j = 0, r_sweep = 0;
    double r_t = 0.0;
    render->add_option("--ckpt", r_ckpt, "checkpoint")->required();
    render->add_option("--i", r_i, "endpoint view i");
    render->add_option("--j", r_j, "endpoint view j");
    render->add_option("--t", r_t, "interpolation weight in [0,1]");
    render->add_option("--out", r_out, "output image (PNG, or .ppm)");
    render->add_option("--sweep", r_sweep, "emit K frames covering t = 0..1");
    render->add_option("--out-dir", r_dir, "directory for sweep frames");

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "score held-out views");
    std::string e_ckpt, e_data, e_out;
    eval_cmd->add_option("--ckpt", e_ckpt, "checkpoint")->required();
    eval_cmd->add_option("--data", e_data, "holdout manifest (tags i-j@t)")->required();
    eval_cmd->add_option("--out", e_out, "report CSV path");

    // finetune
    auto* ft = app.add_subcommand("finetune", "optimize a latent code against a view");
    std::string f_ckpt, f_gt, f_out;
    std::size_t f_i = 0, f_j = 0;
    std::uint64_t f_steps = 200;
    double f_lr = 1e-2;
    ft->add_option("--ckpt", f_ckpt, "checkpoint")->required();
    ft->add_option("--gt", f_gt, "ground-truth image")->required();
    ft->add_option("--i", f_i, "endpoint view i");
    ft->add_option("--j", f_j, "endpoint view j");
    ft->add_option("--steps", f_steps, "optimization steps");
    ft->add_option("--lr", f_lr, "learning rate for the code");
    ft->add_option("--out", f_out, "report CSV path");

    // ablate-norm
    auto* an = app.add_subcommand("ablate-norm", "norm-constraint ablation sweep");
    std::string an_data, an_holdout, an_out;
    FitFlags an_flags;
    an->add_option("--data", an_data, "training manifest")->required();
    an->add_option("--holdout", an_holdout, "holdout manifest")->required();
    an->add_option("--out", an_out, "summary CSV path");
    an_flags.attach(an);

    // ablate-codelen
    auto* ac = app.add_subcommand("ablate-codelen", "code-length ablation sweep");
    std::string ac_data, ac_holdout, ac_out;
    std::vector<std::size_t> ac_lengths;
    FitFlags ac_flags;
    ac->add_option("--data", ac_data, "training manifest")->required();
    ac->add_option("--holdout", ac_holdout, "holdout manifest")->required();
    ac->add_option("--out", ac_out, "summary CSV path");
    ac->add_option("--Ms", ac_lengths, "code lengths to sweep");
    ac_flags.attach(ac);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (gen->parsed())
            return cmd_gen(gen_scene, gen_out, gen_views, gen_h, gen_w, gen_disp,
                           gen_bg_disp, gen_scale, gen_seed, !gen_no_holdout, gen_hi,
                           gen_hj, gen_hts);
        if (fit_cmd->parsed())
            return cmd_fit(fit_data, fit_out, fit_metrics, fit_resume,
                           fit_stop_after, fit_flags);
        if (render->parsed())
            return cmd_render(r_ckpt, r_i, r_j, r_t, r_out, r_sweep, r_dir);
        if (eval_cmd->parsed()) return cmd_eval(e_ckpt, e_data, e_out);
        if (ft->parsed())
            return cmd_finetune(f_ckpt, f_gt, f_i, f_j, f_steps, f_lr, f_out);
        if (an->parsed()) return cmd_ablate_norm(an_data, an_holdout, an_out, an_flags);
        if (ac->parsed())
            return cmd_ablate_codelen(ac_data, ac_holdout, ac_out, ac_lengths, ac_flags);
    } catch (const divergence_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const config_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
