#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "viinter/config.hpp"
#include "viinter/errors.hpp"
#include "viinter/features.hpp"
#include "viinter/latent.hpp"
#include "viinter/model.hpp"
#include "viinter/optim.hpp"

// Serialized training state: magic "VIIN", format version, the canonical
// config snapshot (hash-checked on resume), network weights, the code table,
// per-parameter Adam state, and the iteration count. All arrays are
// little-endian 32-bit floats with explicit shape headers, so a save/load
// round trip is bit-exact.

namespace viinter {

struct Checkpoint {
    static constexpr std::uint32_t kVersion = 1;
    static constexpr char kMagic[4] = {'V', 'I', 'I', 'N'};

    TrainConfig config;
    std::uint64_t iteration = 0;
    std::vector<std::pair<Shape, std::vector<float>>> net_arrays;  // W0,b0,W1,b1,...
    std::size_t n_codes = 0;
    std::vector<float> codes;  // n_codes * code_len
    struct AdamArrays {
        std::uint64_t step = 0;
        std::vector<float> m;
        std::vector<float> v;
    };
    std::vector<AdamArrays> adam;  // net params first, then one per code
};

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_f32_array(std::string& out, const Shape& shape,
                          const std::vector<float>& data) {
    put_u32(out, static_cast<std::uint32_t>(shape.size()));
    for (std::size_t d : shape) put_u32(out, static_cast<std::uint32_t>(d));
    for (float f : data) {
        std::uint32_t bits;
        std::memcpy(&bits, &f, 4);
        put_u32(out, bits);
    }
}

class ByteReader {
public:
    ByteReader(const std::string& bytes, std::string source)
        : bytes_(bytes), source_(std::move(source)) {}

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<std::uint32_t>(
                     static_cast<unsigned char>(bytes_[pos_ + i]))
                 << (8 * i);
        pos_ += 4;
        return v;
    }

    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<std::uint64_t>(
                     static_cast<unsigned char>(bytes_[pos_ + i]))
                 << (8 * i);
        pos_ += 8;
        return v;
    }

    std::string raw(std::size_t n) {
        need(n);
        std::string s = bytes_.substr(pos_, n);
        pos_ += n;
        return s;
    }

    std::pair<Shape, std::vector<float>> f32_array() {
        const std::uint32_t ndim = u32();
        if (ndim > 8) throw format_error(source_ + ": implausible array rank");
        Shape shape(ndim);
        std::size_t n = 1;
        for (auto& d : shape) {
            d = u32();
            n *= d;
        }
        std::vector<float> data(n);
        for (auto& f : data) {
            const std::uint32_t bits = u32();
            std::memcpy(&f, &bits, 4);
        }
        return {std::move(shape), std::move(data)};
    }

    bool exhausted() const { return pos_ == bytes_.size(); }

private:
    void need(std::size_t n) {
        if (pos_ + n > bytes_.size())
            throw format_error(source_ + ": truncated checkpoint");
    }

    const std::string& bytes_;
    std::string source_;
    std::size_t pos_ = 0;
};

} // namespace detail

inline std::string serialize_checkpoint(const Checkpoint& ckpt) {
    std::string out;
    out.append(Checkpoint::kMagic, 4);
    detail::put_u32(out, Checkpoint::kVersion);
    detail::put_u64(out, config_hash(ckpt.config));
    const std::string cfg = config_text(ckpt.config);
    detail::put_u32(out, static_cast<std::uint32_t>(cfg.size()));
    out += cfg;
    detail::put_u64(out, ckpt.iteration);
    detail::put_u32(out, static_cast<std::uint32_t>(ckpt.net_arrays.size()));
    for (const auto& [shape, data] : ckpt.net_arrays)
        detail::put_f32_array(out, shape, data);
    detail::put_f32_array(out, {ckpt.n_codes, ckpt.config.code_len}, ckpt.codes);
    detail::put_u32(out, static_cast<std::uint32_t>(ckpt.adam.size()));
    for (const auto& a : ckpt.adam) {
        detail::put_u64(out, a.step);
        detail::put_f32_array(out, {a.m.size()}, a.m);
        detail::put_f32_array(out, {a.v.size()}, a.v);
    }
    return out;
}

inline void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot write checkpoint \"" + path + "\"");
    const std::string bytes = serialize_checkpoint(ckpt);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw data_error("short write on checkpoint \"" + path + "\"");
}

inline Checkpoint parse_checkpoint(const std::string& bytes, const std::string& source) {
    detail::ByteReader r(bytes, source);
    if (r.raw(4) != std::string(Checkpoint::kMagic, 4))
        throw format_error(source + ": bad magic, not a checkpoint");
    const std::uint32_t version = r.u32();
    if (version != Checkpoint::kVersion)
        throw format_error(source + ": unsupported checkpoint version " +
                           std::to_string(version));
    Checkpoint ckpt;
    const std::uint64_t stored_hash = r.u64();
    const std::uint32_t cfg_len = r.u32();
    const std::string cfg = r.raw(cfg_len);
    ckpt.config = parse_config_text(cfg);
    if (config_hash(ckpt.config) != stored_hash)
        throw format_error(source + ": config hash mismatch");
    ckpt.iteration = r.u64();
    const std::uint32_t n_net = r.u32();
    for (std::uint32_t i = 0; i < n_net; ++i) ckpt.net_arrays.push_back(r.f32_array());
    auto [code_shape, code_data] = r.f32_array();
    if (code_shape.size() != 2 || code_shape[1] != ckpt.config.code_len)
        throw format_error(source + ": code table shape mismatch");
    ckpt.n_codes = code_shape[0];
    ckpt.codes = std::move(code_data);
    const std::uint32_t n_adam = r.u32();
    for (std::uint32_t i = 0; i < n_adam; ++i) {
        Checkpoint::AdamArrays a;
        a.step = r.u64();
        a.m = r.f32_array().second;
        a.v = r.f32_array().second;
        ckpt.adam.push_back(std::move(a));
    }
    if (!r.exhausted()) throw format_error(source + ": trailing bytes");
    return ckpt;
}

inline Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open checkpoint \"" + path + "\"");
    std::string bytes((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
    return parse_checkpoint(bytes, "\"" + path + "\"");
}

/// Rebuilds the network with the checkpointed weights.
inline InrNetwork<float> build_network(const Checkpoint& ckpt) {
    const auto& c = ckpt.config;
    InrNetwork<float> net = init_siren<float>(c.depth, c.hidden_dim, 2 + c.code_len, 3,
                                              static_cast<float>(c.w0), c.seed);
    auto params = net.parameters();
    if (params.size() != ckpt.net_arrays.size())
        throw format_error("checkpoint: expected " + std::to_string(params.size()) +
                           " network arrays, found " +
                           std::to_string(ckpt.net_arrays.size()));
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (params[i].shape() != ckpt.net_arrays[i].first)
            throw format_error("checkpoint: network array " + std::to_string(i) +
                               " has shape " + shape_str(ckpt.net_arrays[i].first) +
                               ", expected " + shape_str(params[i].shape()));
        params[i].mutable_values() = ckpt.net_arrays[i].second;
    }
    return net;
}

/// Rebuilds the code table with the checkpointed codes.
inline CodeTable<float> build_codes(const Checkpoint& ckpt) {
    const auto& c = ckpt.config;
    CodeTable<float> table = init_codes<float>(ckpt.n_codes, c.code_len, c.seed,
                                               c.norm_mode);
    for (std::size_t n = 0; n < ckpt.n_codes; ++n)
        table.codes[n].mutable_values().assign(
            ckpt.codes.begin() + static_cast<std::ptrdiff_t>(n * c.code_len),
            ckpt.codes.begin() + static_cast<std::ptrdiff_t>((n + 1) * c.code_len));
    return table;
}

inline FeatureExtractor<float> build_extractor(const Checkpoint& ckpt) {
    if (ckpt.config.extractor_kind != "random_conv")
        return make_external_extractor<float>();
    return make_feature_extractor<float>(ckpt.config.extractor_patch,
                                         ckpt.config.seed);
}

} // namespace viinter
