#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "viinter/checkpoint.hpp"
#include "viinter/config.hpp"
#include "viinter/dataset.hpp"
#include "viinter/imageio.hpp"
#include "viinter/scenes.hpp"
#include "viinter/train.hpp"

using namespace viinter;
using Catch::Approx;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("viinter_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    static int& counter() {
        static int c = 0;
        return c;
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace

TEST_CASE("byte to unit mapping", "[dataio]") {
    TempDir tmp;
    Image<float> img(2, 2);
    img.data = {1.0f, 0.0f, 128.0f / 255.0f, 0.25f, 0.5f, 0.75f,
                0.1f, 0.9f, 0.3f, 0.6f, 0.2f, 0.8f};
    for (const char* name : {"t.png", "t.ppm"}) {
        save_image(tmp.file(name), img);
        const auto back = load_image<float>(tmp.file(name));
        REQUIRE(back.at(0, 0, 0) == 1.0f);          // byte 255
        REQUIRE(back.at(0, 0, 1) == 0.0f);          // byte 0
        REQUIRE(back.at(0, 0, 2) == Approx(128.0 / 255.0).epsilon(1e-7));
    }
}

TEST_CASE("save then load stays within half a quantization step", "[dataio]") {
    TempDir tmp;
    const Scene scene = generate(SceneSpec::translate_sprite_default());
    const auto img = scene.ground_truth_at(0.3).cast<float>();
    for (const char* name : {"s.png", "s.ppm"}) {
        save_image(tmp.file(name), img);
        const auto back = load_image<float>(tmp.file(name));
        REQUIRE(back.height == img.height);
        REQUIRE(back.width == img.width);
        double worst = 0;
        for (std::size_t i = 0; i < img.data.size(); ++i)
            worst = std::max(worst, std::abs(double(back.data[i]) - double(img.data[i])));
        REQUIRE(worst <= 0.5 / 255.0 + 1e-7);
    }
}

TEST_CASE("ppm rejects bad headers and truncation", "[dataio]") {
    TempDir tmp;
    {
        std::ofstream f(tmp.file("bad.ppm"), std::ios::binary);
        f << "P6\n2 2\n65535\n";
    }
    REQUIRE_THROWS_AS(load_image<float>(tmp.file("bad.ppm")), format_error);
    {
        std::ofstream f(tmp.file("short.ppm"), std::ios::binary);
        f << "P6\n4 4\n255\nxx";
    }
    REQUIRE_THROWS_AS(load_image<float>(tmp.file("short.ppm")), format_error);
    REQUIRE_THROWS_AS(load_image<float>(tmp.file("missing.png")), data_error);
}

TEST_CASE("manifest loading and its error modes", "[dataio]") {
    TempDir tmp;
    const Scene scene = generate(SceneSpec::translate_sprite_default());
    ImageSet<float> set;
    for (std::size_t k = 0; k < 3; ++k)
        set.push(scene.ground_truth_at(scene.view_param(k)).cast<float>(),
                 "view_" + std::to_string(k));
    write_dataset(set, tmp.path.string());

    const auto loaded = load_dataset<float>(tmp.file("manifest.json"));
    REQUIRE(loaded.size() == 3);
    REQUIRE(loaded.tags[1] == "view_1");
    REQUIRE(loaded.width() == 48);

    // missing file
    {
        DatasetManifest m = load_manifest(tmp.file("manifest.json"));
        m.images[1].path = "nope.png";
        save_manifest(m, tmp.file("broken.json"));
        REQUIRE_THROWS_WITH(load_dataset<float>(tmp.file("broken.json")),
                            Catch::Matchers::ContainsSubstring("nope.png"));
    }
    // dimension mismatch against declared dims
    {
        Image<float> small(8, 8);
        save_image(tmp.file("small.png"), small);
        DatasetManifest m = load_manifest(tmp.file("manifest.json"));
        m.images[2].path = "small.png";
        save_manifest(m, tmp.file("dims.json"));
        REQUIRE_THROWS_AS(load_dataset<float>(tmp.file("dims.json")), data_error);
    }
}

TEST_CASE("config text round trip and precedence", "[dataio]") {
    TrainConfig cfg;
    cfg.iterations = 123;
    cfg.lr_start = 3.5e-4;
    cfg.norm_mode = NormMode::unit(1.5);
    cfg.height = 48;
    cfg.width = 32;
    const TrainConfig back = parse_config_text(config_text(cfg));
    REQUIRE(config_text(back) == config_text(cfg));
    REQUIRE(config_hash(back) == config_hash(cfg));

    // file overrides defaults, CLI-style assignment overrides the file
    TrainConfig base;
    TrainConfig from_file = parse_config_text("iterations=77\nnorm_mode=2\n", base);
    REQUIRE(from_file.iterations == 77);
    REQUIRE(from_file.norm_mode.str() == "2");
    REQUIRE(from_file.batch_pixels == base.batch_pixels);  // untouched default
    config_set(from_file, "iterations", "99");
    REQUIRE(from_file.iterations == 99);

    REQUIRE_THROWS_AS(parse_config_text("bogus_key=1\n"), config_error);
    REQUIRE_THROWS_AS(parse_config_text("iterations\n"), config_error);
    REQUIRE_THROWS_AS(parse_config_text("iterations=abc\n"), config_error);

    TrainConfig bad;
    bad.lr_end = 1.0;
    REQUIRE_THROWS_AS(bad.validate(), config_error);
}

TEST_CASE("checkpoint round trip is byte-identical", "[dataio]") {
    TempDir tmp;
    const Scene scene = generate(SceneSpec::translate_sprite_default());
    ImageSet<float> data;
    for (std::size_t k = 0; k < 2; ++k)
        data.push(scene.ground_truth_at(scene.view_param(k)).cast<float>(), "");

    TrainConfig cfg;
    cfg.iterations = 3;
    cfg.batch_pixels = 32;
    cfg.code_len = 6;
    cfg.hidden_dim = 16;
    cfg.depth = 2;
    cfg.alpha_inter = 0.0;
    cfg.lr_start = 1e-3;
    cfg.lr_end = 1e-4;
    const Checkpoint ckpt = fit(data, cfg);

    save_checkpoint(ckpt, tmp.file("a.viin"));
    const Checkpoint loaded = load_checkpoint(tmp.file("a.viin"));
    save_checkpoint(loaded, tmp.file("b.viin"));
    REQUIRE(slurp(tmp.file("a.viin")) == slurp(tmp.file("b.viin")));
    REQUIRE(loaded.iteration == 3);

    // corrupt magic
    {
        std::string bytes = slurp(tmp.file("a.viin"));
        bytes[0] = 'X';
        std::ofstream f(tmp.file("bad_magic.viin"), std::ios::binary);
        f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    }
    REQUIRE_THROWS_AS(load_checkpoint(tmp.file("bad_magic.viin")), format_error);

    // version mismatch
    {
        std::string bytes = slurp(tmp.file("a.viin"));
        bytes[4] = 9;
        std::ofstream f(tmp.file("bad_ver.viin"), std::ios::binary);
        f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    }
    REQUIRE_THROWS_AS(load_checkpoint(tmp.file("bad_ver.viin")), format_error);

    // truncation
    {
        std::string bytes = slurp(tmp.file("a.viin"));
        bytes.resize(bytes.size() / 2);
        std::ofstream f(tmp.file("trunc.viin"), std::ios::binary);
        f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    }
    REQUIRE_THROWS_AS(load_checkpoint(tmp.file("trunc.viin")), format_error);

    // rebuilds agree with the live model
    const auto net = build_network(loaded);
    REQUIRE(net.layers.size() == cfg.depth + 1);
    const auto codes = build_codes(loaded);
    REQUIRE(codes.size() == 2);
}

TEST_CASE("16-bit PNGs are rejected as unsupported bit depth", "[dataio]") {
    TempDir tmp;
    const std::string path = tmp.file("deep.png");
    {
        std::FILE* fp = std::fopen(path.c_str(), "wb");
        REQUIRE(fp != nullptr);
        png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                                  nullptr, nullptr);
        png_infop info = png_create_info_struct(png);
        REQUIRE(setjmp(png_jmpbuf(png)) == 0);
        png_init_io(png, fp);
        png_set_IHDR(png, info, 2, 2, 16, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
                     PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
        png_write_info(png, info);
        std::vector<png_byte> row(2 * 3 * 2, 0x7f);
        for (int r = 0; r < 2; ++r) png_write_row(png, row.data());
        png_write_end(png, nullptr);
        png_destroy_write_struct(&png, &info);
        std::fclose(fp);
    }
    REQUIRE_THROWS_WITH(load_image<float>(path),
                        Catch::Matchers::ContainsSubstring("bit depth"));
}
