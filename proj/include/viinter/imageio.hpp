#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include <png.h>

#include "viinter/errors.hpp"
#include "viinter/image.hpp"

// 8-bit image I/O: PNG (via libpng) and binary PPM (P6). Loading maps byte v
// to v/255; saving quantizes with round(v*255) clamped to [0,255], the exact
// inverse up to half a quantization step.

namespace viinter {

namespace detail {

struct PngReadCtx {
    std::FILE* fp = nullptr;
    png_structp png = nullptr;
    png_infop info = nullptr;
    std::vector<std::uint8_t> pixels;
    std::vector<png_bytep> rows;

    ~PngReadCtx() {
        if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
        if (fp) std::fclose(fp);
    }
};

struct PngWriteCtx {
    std::FILE* fp = nullptr;
    png_structp png = nullptr;
    png_infop info = nullptr;
    std::vector<png_bytep> rows;

    ~PngWriteCtx() {
        if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
        if (fp) std::fclose(fp);
    }
};

inline bool has_suffix(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() &&
           std::equal(suffix.rbegin(), suffix.rend(), s.rbegin());
}

} // namespace detail

inline std::uint8_t quantize_unit(double v) {
    const double q = std::round(v * 255.0);
    return static_cast<std::uint8_t>(std::clamp(q, 0.0, 255.0));
}

template <class T>
Image<T> decode_rgb8(const std::uint8_t* bytes, std::size_t h, std::size_t w) {
    Image<T> img(h, w);
    for (std::size_t i = 0; i < h * w * 3; ++i)
        img.data[i] = static_cast<T>(bytes[i]) / T(255);
    return img;
}

template <class T>
Image<T> load_png(const std::string& path) {
    auto ctx = std::make_unique<detail::PngReadCtx>();
    ctx->fp = std::fopen(path.c_str(), "rb");
    if (!ctx->fp) throw data_error("cannot open image \"" + path + "\"");

    std::uint8_t sig[8];
    if (std::fread(sig, 1, 8, ctx->fp) != 8 || png_sig_cmp(sig, 0, 8))
        throw format_error("\"" + path + "\" is not a PNG file");

    ctx->png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!ctx->png) throw format_error("libpng init failed");
    ctx->info = png_create_info_struct(ctx->png);
    if (!ctx->info) throw format_error("libpng init failed");

    detail::PngReadCtx* c = ctx.get();
    if (setjmp(png_jmpbuf(c->png)))
        throw format_error("PNG decode error in \"" + path + "\"");

    png_init_io(c->png, c->fp);
    png_set_sig_bytes(c->png, 8);
    png_read_info(c->png, c->info);

    const png_byte color = png_get_color_type(c->png, c->info);
    if (png_get_bit_depth(c->png, c->info) == 16)
        throw format_error("\"" + path + "\": unsupported bit depth 16 (expected 8)");
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(c->png);
    if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) {
        if (png_get_bit_depth(c->png, c->info) < 8)
            png_set_expand_gray_1_2_4_to_8(c->png);
        png_set_gray_to_rgb(c->png);
    }
    if (png_get_valid(c->png, c->info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(c->png);
    png_set_strip_alpha(c->png);
    png_read_update_info(c->png, c->info);

    if (png_get_bit_depth(c->png, c->info) != 8 ||
        png_get_channels(c->png, c->info) != 3)
        throw format_error("\"" + path + "\": unsupported PNG layout");

    const std::size_t w = png_get_image_width(c->png, c->info);
    const std::size_t h = png_get_image_height(c->png, c->info);
    c->pixels.resize(h * w * 3);
    c->rows.resize(h);
    for (std::size_t r = 0; r < h; ++r) c->rows[r] = c->pixels.data() + r * w * 3;
    png_read_image(c->png, c->rows.data());
    png_read_end(c->png, nullptr);

    return decode_rgb8<T>(c->pixels.data(), h, w);
}

template <class T>
Image<T> load_ppm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open image \"" + path + "\"");
    auto next_token = [&]() -> std::string {
        std::string tok;
        int ch;
        while ((ch = in.get()) != EOF) {
            if (ch == '#') {
                while ((ch = in.get()) != EOF && ch != '\n') {}
                continue;
            }
            if (std::isspace(ch)) {
                if (!tok.empty()) break;
                continue;
            }
            tok.push_back(static_cast<char>(ch));
        }
        return tok;
    };
    if (next_token() != "P6")
        throw format_error("\"" + path + "\" is not a binary PPM (P6) file");
    std::size_t w = 0, h = 0;
    long maxval = 0;
    try {
        w = std::stoul(next_token());
        h = std::stoul(next_token());
        maxval = std::stol(next_token());
    } catch (const std::exception&) {
        throw format_error("\"" + path + "\": malformed PPM header");
    }
    if (maxval != 255)
        throw format_error("\"" + path + "\": unsupported bit depth (maxval " +
                           std::to_string(maxval) + ", expected 255)");
    std::vector<std::uint8_t> bytes(h * w * 3);
    in.read(reinterpret_cast<char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
    if (static_cast<std::size_t>(in.gcount()) != bytes.size())
        throw format_error("\"" + path + "\": truncated PPM payload");
    return decode_rgb8<T>(bytes.data(), h, w);
}

/// Loads a PNG or binary PPM image, decided by content.
template <class T>
Image<T> load_image(const std::string& path) {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) throw data_error("cannot open image \"" + path + "\"");
    char magic[2] = {0, 0};
    probe.read(magic, 2);
    probe.close();
    if (magic[0] == 'P' && magic[1] == '6') return load_ppm<T>(path);
    return load_png<T>(path);
}

template <class T>
std::vector<std::uint8_t> quantize_image(const Image<T>& img) {
    std::vector<std::uint8_t> bytes(img.data.size());
    for (std::size_t i = 0; i < bytes.size(); ++i)
        bytes[i] = quantize_unit(static_cast<double>(img.data[i]));
    return bytes;
}

template <class T>
void save_png(const std::string& path, const Image<T>& img) {
    auto bytes = quantize_image(img);
    auto ctx = std::make_unique<detail::PngWriteCtx>();
    ctx->fp = std::fopen(path.c_str(), "wb");
    if (!ctx->fp) throw data_error("cannot write image \"" + path + "\"");
    ctx->png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!ctx->png) throw format_error("libpng init failed");
    ctx->info = png_create_info_struct(ctx->png);
    if (!ctx->info) throw format_error("libpng init failed");

    detail::PngWriteCtx* c = ctx.get();
    if (setjmp(png_jmpbuf(c->png)))
        throw data_error("PNG encode error for \"" + path + "\"");

    png_init_io(c->png, c->fp);
    png_set_IHDR(c->png, c->info, static_cast<png_uint_32>(img.width),
                 static_cast<png_uint_32>(img.height), 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(c->png, c->info);
    c->rows.resize(img.height);
    for (std::size_t r = 0; r < img.height; ++r)
        c->rows[r] = bytes.data() + r * img.width * 3;
    png_write_image(c->png, c->rows.data());
    png_write_end(c->png, nullptr);
}

template <class T>
void save_ppm(const std::string& path, const Image<T>& img) {
    auto bytes = quantize_image(img);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot write image \"" + path + "\"");
    out << "P6\n" << img.width << " " << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
}

/// Saves as binary PPM when the path ends in .ppm, PNG otherwise.
template <class T>
void save_image(const std::string& path, const Image<T>& img) {
    if (detail::has_suffix(path, ".ppm"))
        save_ppm(path, img);
    else
        save_png(path, img);
}

} // namespace viinter
