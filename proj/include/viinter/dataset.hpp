#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "viinter/errors.hpp"
#include "viinter/image.hpp"
#include "viinter/imageio.hpp"

// Dataset manifests: a JSON file listing the view images in code-index order.

namespace viinter {

struct ManifestEntry {
    std::string path;      // relative to the manifest location, or absolute
    std::string view_tag;  // free-form label (view name, or a t value for holdouts)
};

struct DatasetManifest {
    int version = 1;
    std::size_t width = 0;   // 0 means unchecked
    std::size_t height = 0;
    std::vector<ManifestEntry> images;
};

inline DatasetManifest load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open manifest \"" + path + "\"");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw format_error("manifest \"" + path + "\": " + e.what());
    }
    DatasetManifest m;
    try {
        m.version = j.at("version").get<int>();
        if (m.version != 1)
            throw format_error("manifest \"" + path + "\": unsupported version " +
                               std::to_string(m.version));
        m.width = j.value("width", 0u);
        m.height = j.value("height", 0u);
        for (const auto& e : j.at("images")) {
            ManifestEntry entry;
            entry.path = e.at("path").get<std::string>();
            entry.view_tag = e.value("view_tag", "");
            m.images.push_back(std::move(entry));
        }
    } catch (const nlohmann::json::exception& e) {
        throw format_error("manifest \"" + path + "\": " + e.what());
    }
    if (m.images.empty())
        throw data_error("manifest \"" + path + "\" lists no images");
    return m;
}

inline void save_manifest(const DatasetManifest& m, const std::string& path) {
    nlohmann::json j;
    j["version"] = m.version;
    if (m.width) j["width"] = m.width;
    if (m.height) j["height"] = m.height;
    j["images"] = nlohmann::json::array();
    for (const auto& e : m.images)
        j["images"].push_back({{"path", e.path}, {"view_tag", e.view_tag}});
    std::ofstream out(path);
    if (!out) throw data_error("cannot write manifest \"" + path + "\"");
    out << j.dump(2) << "\n";
}

/// Loads every view named by a manifest, checking that all images decode to
/// identical dimensions. The list order defines the latent code index.
template <class T>
ImageSet<T> load_dataset(const std::string& manifest_path) {
    const DatasetManifest m = load_manifest(manifest_path);
    const auto base = std::filesystem::path(manifest_path).parent_path();
    ImageSet<T> set;
    for (const auto& entry : m.images) {
        std::filesystem::path p(entry.path);
        if (p.is_relative()) p = base / p;
        if (!std::filesystem::exists(p))
            throw data_error("manifest entry \"" + entry.path + "\": file not found");
        Image<T> img = load_image<T>(p.string());
        if (m.width && (img.width != m.width || img.height != m.height))
            throw data_error("manifest entry \"" + entry.path + "\": dimensions " +
                             std::to_string(img.width) + "x" + std::to_string(img.height) +
                             " differ from declared " + std::to_string(m.width) + "x" +
                             std::to_string(m.height));
        set.push(std::move(img), entry.view_tag);
    }
    return set;
}

/// Writes an image set as PNGs plus a manifest into a directory.
template <class T>
DatasetManifest write_dataset(const ImageSet<T>& set, const std::string& dir,
                              const std::string& manifest_name = "manifest.json") {
    std::filesystem::create_directories(dir);
    DatasetManifest m;
    m.width = set.width();
    m.height = set.height();
    for (std::size_t i = 0; i < set.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "view_%03zu.png", i);
        save_image((std::filesystem::path(dir) / name).string(), set.images[i]);
        m.images.push_back({name, set.tags[i]});
    }
    save_manifest(m, (std::filesystem::path(dir) / manifest_name).string());
    return m;
}

} // namespace viinter
