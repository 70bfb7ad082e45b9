#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "revive/errors.hpp"
#include "revive/image_io.hpp"
#include "revive/rng.hpp"
#include "revive/synth.hpp"

using namespace revive;
using namespace revive::synth;
namespace fs = std::filesystem;

TEST(Ppm, DecodesTwoByTwoExample) {
    std::string bytes = "P6\n2 2\n255\n";
    for (int i = 0; i < 12; ++i) bytes.push_back(static_cast<char>(i * 20));
    const Tensor t = io::decode_ppm(bytes);
    EXPECT_EQ(t.shape(), (Shape{1, 3, 2, 2}));
    EXPECT_EQ(t.at(0, 0, 0, 0), 0.0);
    EXPECT_EQ(t.at(0, 1, 0, 0), 20.0 / 255.0);
    EXPECT_EQ(t.at(0, 2, 1, 1), 220.0 / 255.0);
    EXPECT_EQ(io::encode_ppm(t), bytes);
}

TEST(Ppm, CommentsAllowed) {
    std::string bytes = "P6 # made by hand\n1 1\n# depth\n255\n";
    bytes += std::string("\x10\x20\x30", 3);
    EXPECT_EQ(io::decode_ppm(bytes).at(0, 2, 0, 0), 48.0 / 255.0);
}

TEST(Ppm, RejectsMalformedInput) {
    EXPECT_THROW(io::decode_ppm("P5\n1 1\n255\nabc"), IoError);
    EXPECT_THROW(io::decode_ppm("P6\n1 1\n65535\n" + std::string(6, 'a')), IoError);
    EXPECT_THROW(io::decode_ppm("P6\n2 2\n255\nabc"), IoError);
    EXPECT_THROW(io::decode_ppm("P6\nx 2\n255\n"), IoError);
    EXPECT_THROW(io::decode_ppm(""), IoError);
    EXPECT_THROW(io::load_image("/nonexistent/dir/file.ppm"), IoError);
}

TEST(Ppm, SaveClampsAndRoundsAndRoundtrips) {
    Rng rng(1);
    Tensor t = Tensor::uniform(Shape{1, 3, 5, 7}, rng, -0.2, 1.2);
    const Tensor q = io::quantize8(t);
    for (double v : q.data()) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
        EXPECT_EQ(v, std::round(v * 255.0) / 255.0);
    }
    const fs::path path = fs::temp_directory_path() / "revive_io_roundtrip.ppm";
    io::save_image(path, t);
    EXPECT_TRUE(bitwise_equal(io::load_image(path), q));
    io::save_image(path, q);
    EXPECT_TRUE(bitwise_equal(io::load_image(path), q));
    fs::remove(path);
    EXPECT_THROW(io::encode_ppm(Tensor(Shape{1, 1, 2, 2})), ShapeError);
}

TEST(Scene, DeterministicAndInRange) {
    const Tensor a = synthetic_scene(24, 20, 5);
    EXPECT_EQ(a.shape(), (Shape{1, 3, 24, 20}));
    EXPECT_TRUE(bitwise_equal(a, synthetic_scene(24, 20, 5)));
    EXPECT_FALSE(bitwise_equal(a, synthetic_scene(24, 20, 6)));
    for (double v : a.data()) {
        EXPECT_GE(v, 0.05);
        EXPECT_LE(v, 0.95);
    }
}

TEST(LowLight, IdentityParametersReproduceInput) {
    const Tensor img = synthetic_scene(16, 16, 1);
    EXPECT_LT(max_abs_diff(degrade_lowlight(img, 1.0, 1.0, 0.0, 3).degraded, img), 1e-15);
}

TEST(LowLight, DarkensMonotonicallyAndIsSeeded) {
    const Tensor img = synthetic_scene(16, 16, 2);
    const auto p = degrade_lowlight(img, 0.5, 1.5, 0.0, 1);
    for (std::size_t i = 0; i < img.numel(); ++i) EXPECT_LT(p.degraded.data()[i], img.data()[i]);
    for (std::size_t i = 1; i < img.numel(); ++i) {
        if (img.data()[i] > img.data()[i - 1]) EXPECT_GE(p.degraded.data()[i], p.degraded.data()[i - 1]);
    }
    EXPECT_TRUE(bitwise_equal(degrade_lowlight(img, 0.5, 1.3, 0.02, 9).degraded,
                              degrade_lowlight(img, 0.5, 1.3, 0.02, 9).degraded));
    EXPECT_FALSE(bitwise_equal(degrade_lowlight(img, 0.5, 1.3, 0.02, 9).degraded,
                               degrade_lowlight(img, 0.5, 1.3, 0.02, 10).degraded));
    EXPECT_THROW(degrade_lowlight(img, 0.0, 1.0, 0.0, 1), DomainError);
}

TEST(Haze, ExtremesAndInvertibility) {
    const Tensor img = synthetic_scene(16, 16, 3);
    EXPECT_LT(max_abs_diff(haze_model(img, 1.0, 0.8), img), 1e-15);
    const Tensor opaque = haze_model(img, 0.0, 0.8);
    for (double v : opaque.data()) EXPECT_EQ(v, 0.8);
    const double t = 0.6, a = 0.8;
    const Tensor hazy = haze_model(img, t, a);
    Tensor back = hazy.clone();
    for (double& v : back.mutable_data()) v = (v - a * (1.0 - t)) / t;
    EXPECT_LT(max_abs_diff(back, img), 1e-12);
    EXPECT_THROW(haze_model(img, 1.5, 0.5), DomainError);
}

TEST(Rain, ZeroIntensityIsIdentityAndStreaksOnlyBrighten) {
    const Tensor img = synthetic_scene(16, 16, 4);
    EXPECT_TRUE(bitwise_equal(degrade_rain(img, 6, 15.0, 0.0, 1).degraded, img));
    EXPECT_TRUE(bitwise_equal(degrade_rain(img, 0, 15.0, 0.5, 1).degraded, img));
    const Tensor layer = rain_layer(16, 16, 6, 15.0, 0.5, 1);
    double total = 0.0;
    for (double v : layer.data()) {
        EXPECT_GE(v, 0.0);
        total += v;
    }
    EXPECT_GT(total, 0.0);
    const auto p = degrade_rain(img, 6, 15.0, 0.5, 1);
    for (std::size_t i = 0; i < img.numel(); ++i) EXPECT_GE(p.degraded.data()[i], img.data()[i]);
}

TEST(Synth, ReferenceIsNotMutated) {
    const Tensor img = synthetic_scene(16, 16, 5);
    const Tensor copy = img.clone();
    const auto a = degrade_lowlight(img, 0.5, 1.3, 0.02, 1);
    const auto b = degrade_haze(img, 0.6, 0.8);
    const auto c = degrade_rain(img, 6, 15.0, 0.5, 1);
    EXPECT_TRUE(bitwise_equal(img, copy));
    for (const auto* p : {&a, &b, &c}) EXPECT_TRUE(bitwise_equal(p->reference, copy));
    EXPECT_FALSE(a.reference.same_storage(img));
}

TEST(Synth, NamesAndParsing) {
    EXPECT_EQ(file_stem(Degradation::Haze, 12), "haze_12");
    for (auto d : {Degradation::LowLight, Degradation::Haze, Degradation::Rain}) {
        EXPECT_EQ(parse_degradation(to_string(d)), d);
    }
    EXPECT_THROW(parse_degradation("snow"), DomainError);
}
