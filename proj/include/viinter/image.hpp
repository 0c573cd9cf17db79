#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "viinter/errors.hpp"

namespace viinter {

/// Dense H x W RGB image, row-major interleaved, values expected in [0,1].
template <class T>
struct Image {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<T> data;  // height*width*3

    Image() = default;
    Image(std::size_t h, std::size_t w) : height(h), width(w), data(h * w * 3, T(0)) {}

    T& at(std::size_t r, std::size_t c, std::size_t ch) {
        return data[(r * width + c) * 3 + ch];
    }
    T at(std::size_t r, std::size_t c, std::size_t ch) const {
        return data[(r * width + c) * 3 + ch];
    }

    std::size_t pixel_count() const { return height * width; }

    template <class U>
    Image<U> cast() const {
        Image<U> out(height, width);
        for (std::size_t i = 0; i < data.size(); ++i)
            out.data[i] = static_cast<U>(data[i]);
        return out;
    }
};

/// A multi-view collection with identical dimensions; the list order defines
/// the latent code index of each view.
template <class T>
struct ImageSet {
    std::vector<Image<T>> images;
    std::vector<std::string> tags;

    std::size_t size() const { return images.size(); }
    std::size_t height() const { return images.empty() ? 0 : images[0].height; }
    std::size_t width() const { return images.empty() ? 0 : images[0].width; }

    void push(Image<T> img, std::string tag = {}) {
        if (!images.empty() &&
            (img.height != height() || img.width != width()))
            throw data_error("image set: view \"" + tag + "\" has dimensions " +
                             std::to_string(img.width) + "x" + std::to_string(img.height) +
                             ", expected " + std::to_string(width()) + "x" +
                             std::to_string(height()));
        images.push_back(std::move(img));
        tags.push_back(std::move(tag));
    }
};

template <class T>
void require_same_dims(const Image<T>& a, const Image<T>& b, const char* what) {
    if (a.height != b.height || a.width != b.width)
        throw shape_error(std::string(what) + ": image dimensions " +
                          std::to_string(a.width) + "x" + std::to_string(a.height) +
                          " and " + std::to_string(b.width) + "x" +
                          std::to_string(b.height) + " differ");
}

} // namespace viinter
