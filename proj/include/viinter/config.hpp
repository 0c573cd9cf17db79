#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "viinter/errors.hpp"
#include "viinter/latent.hpp"

namespace viinter {

/// Everything a training run needs beyond the dataset itself. Serialized as
/// flat key=value text (canonical order, full float precision) inside
/// checkpoints and accepted as a config file by the CLI.
struct TrainConfig {
    std::uint64_t iterations = 3000;   // paper scale: 200k-300k
    std::size_t batch_pixels = 1024;   // paper scale: 8192
    double lr_start = 1e-5;
    double lr_end = 1e-6;
    double alpha_inter = 0.05;
    int inter_every = 2;
    NormMode norm_mode = NormMode::unit(1.0);
    std::size_t code_len = 128;
    std::size_t hidden_dim = 128;      // paper scale: 512
    std::size_t depth = 8;
    double w0 = 30.0;
    std::uint64_t seed = 1;
    std::uint64_t checkpoint_every = 0;  // 0 disables periodic checkpoints
    std::string extractor_kind = "random_conv";
    std::size_t extractor_patch = 32;  // paper scale: 224
    // Filled from the dataset when training starts.
    std::size_t height = 0;
    std::size_t width = 0;

    void validate() const {
        if (iterations < 1) throw config_error("config: iterations must be >= 1");
        if (batch_pixels < 1) throw config_error("config: batch_pixels must be >= 1");
        if (!(lr_end > 0.0) || !(lr_end <= lr_start))
            throw config_error("config: need 0 < lr_end <= lr_start");
        if (alpha_inter < 0.0) throw config_error("config: alpha_inter must be >= 0");
        if (inter_every < 1) throw config_error("config: inter_every must be >= 1");
        if (code_len < 1 || hidden_dim < 1 || depth < 1)
            throw config_error("config: code_len, hidden_dim, depth must be >= 1");
        if (!(w0 > 0.0)) throw config_error("config: w0 must be positive");
        if (extractor_kind != "random_conv" && extractor_kind != "external")
            throw config_error("config: unknown extractor kind \"" + extractor_kind +
                               "\"");
    }
};

namespace detail {

inline std::string fmt_f64(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace detail

/// Canonical key=value rendering; the checkpoint config hash is taken over
/// exactly this text.
inline std::string config_text(const TrainConfig& c) {
    std::ostringstream os;
    os << "alpha_inter=" << detail::fmt_f64(c.alpha_inter) << "\n"
       << "batch_pixels=" << c.batch_pixels << "\n"
       << "checkpoint_every=" << c.checkpoint_every << "\n"
       << "code_len=" << c.code_len << "\n"
       << "depth=" << c.depth << "\n"
       << "extractor_kind=" << c.extractor_kind << "\n"
       << "extractor_patch=" << c.extractor_patch << "\n"
       << "extractor_seed=" << c.seed << "\n"
       << "height=" << c.height << "\n"
       << "hidden_dim=" << c.hidden_dim << "\n"
       << "inter_every=" << c.inter_every << "\n"
       << "iterations=" << c.iterations << "\n"
       << "lr_end=" << detail::fmt_f64(c.lr_end) << "\n"
       << "lr_start=" << detail::fmt_f64(c.lr_start) << "\n"
       << "norm_mode=" << c.norm_mode.str() << "\n"
       << "seed=" << c.seed << "\n"
       << "w0=" << detail::fmt_f64(c.w0) << "\n"
       << "width=" << c.width << "\n";
    return os.str();
}

/// Applies one key=value assignment. Unknown keys are config errors.
inline void config_set(TrainConfig& c, const std::string& key, const std::string& value) {
    try {
        if (key == "alpha_inter") c.alpha_inter = std::stod(value);
        else if (key == "batch_pixels") c.batch_pixels = std::stoul(value);
        else if (key == "checkpoint_every") c.checkpoint_every = std::stoull(value);
        else if (key == "code_len") c.code_len = std::stoul(value);
        else if (key == "depth") c.depth = std::stoul(value);
        else if (key == "extractor_kind") c.extractor_kind = value;
        else if (key == "extractor_patch") c.extractor_patch = std::stoul(value);
        else if (key == "extractor_seed") { /* derived from seed; accepted for round-trips */ }
        else if (key == "height") c.height = std::stoul(value);
        else if (key == "hidden_dim") c.hidden_dim = std::stoul(value);
        else if (key == "inter_every") c.inter_every = std::stoi(value);
        else if (key == "iterations") c.iterations = std::stoull(value);
        else if (key == "lr_end") c.lr_end = std::stod(value);
        else if (key == "lr_start") c.lr_start = std::stod(value);
        else if (key == "norm_mode") c.norm_mode = NormMode::parse(value);
        else if (key == "seed") c.seed = std::stoull(value);
        else if (key == "w0") c.w0 = std::stod(value);
        else if (key == "width") c.width = std::stoul(value);
        else throw config_error("config: unknown key \"" + key + "\"");
    } catch (const config_error&) {
        throw;
    } catch (const std::exception&) {
        throw config_error("config: bad value \"" + value + "\" for key \"" + key + "\"");
    }
}

/// Parses key=value text (blank lines and # comments allowed) on top of the
/// given defaults.
inline TrainConfig parse_config_text(const std::string& text,
                                     TrainConfig base = TrainConfig{}) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error("config line " + std::to_string(lineno) +
                               ": expected key=value, got \"" + line + "\"");
        std::string key = line.substr(first, eq - first);
        std::string value = line.substr(eq + 1);
        while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
        while (!value.empty() && (value.back() == ' ' || value.back() == '\t' ||
                                  value.back() == '\r'))
            value.pop_back();
        const auto vstart = value.find_first_not_of(" \t");
        value = vstart == std::string::npos ? std::string{} : value.substr(vstart);
        config_set(base, key, value);
    }
    return base;
}

inline TrainConfig load_config_file(const std::string& path,
                                    TrainConfig base = TrainConfig{}) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file \"" + path + "\"");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), base);
}

/// FNV-1a over the canonical config text.
inline std::uint64_t config_hash(const TrainConfig& c) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : config_text(c)) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    return h;
}

} // namespace viinter
