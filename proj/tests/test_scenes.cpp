#include <catch2/catch_amalgamated.hpp>

#include "viinter/metrics.hpp"
#include "viinter/scenes.hpp"

using namespace viinter;
using Catch::Approx;

TEST_CASE("views coincide with the continuous generator", "[scenes]") {
    const Scene scene = generate(SceneSpec::translate_sprite_default());
    const auto views = scene.views();
    for (std::size_t k = 0; k < views.size(); ++k) {
        const auto gt = scene.ground_truth_at(scene.view_param(k));
        REQUIRE(gt.data == views.images[k].data);
    }
}

TEST_CASE("zero displacement collapses all views", "[scenes]") {
    SceneSpec spec = SceneSpec::two_layer_parallax_default();
    spec.disparity = 0.0;
    spec.bg_disparity = 0.0;
    const Scene scene = generate(spec);
    const auto views = scene.views();
    for (std::size_t k = 1; k < views.size(); ++k)
        REQUIRE(views.images[k].data == views.images[0].data);
}

TEST_CASE("generator midpoint self-check", "[scenes]") {
    // The camera midpoint of views 0 and 2 is exactly view 1.
    const Scene scene = generate(SceneSpec::translate_sprite_default());
    const double mid = (scene.view_param(0) + scene.view_param(2)) / 2.0;
    REQUIRE(mid == scene.view_param(1));
    const auto gt = scene.ground_truth_at(mid);
    const auto views = scene.views();
    REQUIRE(psnr(gt, views.images[1]) == 99.0);
}

TEST_CASE("determinism per seed, variation across seeds", "[scenes]") {
    SceneSpec spec = SceneSpec::translate_sprite_default();
    const auto a = generate(spec).ground_truth_at(0.25);
    const auto b = generate(spec).ground_truth_at(0.25);
    REQUIRE(a.data == b.data);

    spec.seed = 2;
    const auto c = generate(spec).ground_truth_at(0.25);
    REQUIRE(a.data != c.data);
}

TEST_CASE("pixel values stay in range", "[scenes]") {
    for (auto spec : {SceneSpec::translate_sprite_default(),
                      SceneSpec::two_layer_parallax_default(),
                      SceneSpec::large_disparity()}) {
        const Scene scene = generate(spec);
        for (double u : {0.0, 0.37, 1.0}) {
            const auto img = scene.ground_truth_at(u);
            for (double v : img.data) {
                REQUIRE(v >= 0.0);
                REQUIRE(v <= 1.0);
            }
        }
    }
}

TEST_CASE("sprites leaving the canvas are rejected", "[scenes]") {
    SceneSpec spec = SceneSpec::translate_sprite_default();
    spec.disparity = 12.0;  // 48 px of travel on a 48 px canvas
    REQUIRE_THROWS_AS(generate(spec), value_error);

    REQUIRE_NOTHROW(generate(SceneSpec::large_disparity()));
}

TEST_CASE("large-disparity preset is what it claims", "[scenes]") {
    REQUIRE(SceneSpec::large_disparity().disparity >= 10.0);
}
