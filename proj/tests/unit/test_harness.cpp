#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "harness/commands.hpp"
#include "harness/config.hpp"
#include "revive/autodiff.hpp"
#include "revive/checkpoint.hpp"
#include "revive/errors.hpp"
#include "revive/image_io.hpp"
#include "revive/ops.hpp"
#include "revive/optim.hpp"
#include "revive/rng.hpp"
#include "revive/synth.hpp"

using namespace harness;
using revive::Shape;
using revive::Tensor;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("revive_harness_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(REVIVE_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string read_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Tiny training setup that runs in well under a second per iteration.
RunConfig tiny_train(const fs::path& dir, int iterations) {
    RunConfig c;
    c.command = "train-toy";
    c.seed = 11;
    c.schedule.steps = 20;
    c.network.depth = 1;
    c.network.base_channels = 8;
    c.network.time_embed_dim = 8;
    c.train.iterations = iterations;
    c.train.size = 8;
    c.train.batch = 2;
    c.train.train_pairs = 4;
    c.paths.out = dir.string();
    c.paths.report = (dir / "report.json").string();
    return c;
}

}  // namespace

TEST(Config, UnknownKeyAndTypeMismatchAreRejected) {
    const std::vector<json> bad{
        json::parse(R"({"schedul": {"steps": 3}})"),
        json::parse(R"({"schedule": {"stepz": 3}})"),
        json::parse(R"({"schedule": {"steps": "ten"}})"),
        json::parse(R"({"seed": -1})"),
        json::parse(R"({"network": 4})"),
    };
    for (const auto& doc : bad) EXPECT_THROW(merge_config({}, doc), ConfigError) << doc.dump();
    const RunConfig c = merge_config({}, json::parse(R"({"schedule": {"steps": 40}, "seed": 5})"));
    EXPECT_EQ(c.schedule.steps, 40);
    EXPECT_EQ(c.seed, 5u);
}

TEST(Config, JsonRoundtripIsLossless) {
    RunConfig c;
    c.command = "probe";
    c.seed = 99;
    c.schedule.kappa = 0.2;
    c.train.learning_rate = 3e-4;
    c.probe.dilations = {1, 2, 3};
    const RunConfig back = merge_config({}, to_json(c));
    EXPECT_EQ(to_json(back), to_json(c));
}

TEST(Config, ValidationCatchesBadValues) {
    RunConfig c;
    c.schedule.steps = 0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = {};
    c.degradation.tag = "snow";
    EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Report, NonFiniteNumbersBecomeStrings) {
    EXPECT_EQ(json_number(std::numeric_limits<double>::infinity()), "inf");
    EXPECT_EQ(json_number(-std::numeric_limits<double>::infinity()), "-inf");
    EXPECT_EQ(json_number(std::nan("")), "nan");
    EXPECT_EQ(json_number(1.5), 1.5);
}

TEST(LossTrend, HeadAndTailWindows) {
    const auto t = loss_trend({4, 4, 3, 2, 1, 1}, 2);
    EXPECT_EQ(t.head, 4.0);
    EXPECT_EQ(t.tail, 1.0);
    EXPECT_EQ(t.reduction, 0.75);
}

TEST(Seeds, TrainAndHeldOutPoolsAreDisjoint) {
    std::set<std::uint64_t> train;
    for (int k = 0; k < 256; ++k) train.insert(train_pair_seed(1, k));
    for (int k = 0; k < 256; ++k) EXPECT_FALSE(train.contains(heldout_pair_seed(1, k)));
}

TEST(Checkpoint, EncodeDecodeRoundtrip) {
    revive::Rng rng(1);
    revive::nn::Checkpoint ck;
    ck.metadata = R"({"k": 1})";
    ck.arrays.emplace_back("a", Tensor::randn(Shape{2, 3, 4, 5}, rng));
    ck.arrays.emplace_back("b/c", Tensor::scalar(-0.0));
    const std::string bytes = revive::nn::encode_checkpoint(ck);
    const auto back = revive::nn::decode_checkpoint(bytes);
    EXPECT_EQ(back.metadata, ck.metadata);
    ASSERT_EQ(back.arrays.size(), 2u);
    EXPECT_TRUE(revive::bitwise_equal(*back.find("a"), ck.arrays[0].second));
    EXPECT_TRUE(std::signbit(back.find("b/c")->item()));
    EXPECT_EQ(revive::nn::encode_checkpoint(back), bytes);
    EXPECT_THROW(revive::nn::decode_checkpoint(bytes.substr(0, bytes.size() - 1)), revive::IoError);
    EXPECT_THROW(revive::nn::decode_checkpoint(bytes + "x"), revive::IoError);
    EXPECT_THROW(revive::nn::decode_checkpoint("XXXX" + bytes.substr(4)), revive::IoError);

    revive::nn::ParamList params{{"a", Tensor(Shape{2, 3, 4, 5})}};
    revive::nn::assign_parameters(params, back);
    EXPECT_TRUE(revive::bitwise_equal(params[0].second, ck.arrays[0].second));
    revive::nn::ParamList wrong{{"a", Tensor(Shape{1, 1, 1, 1})}};
    EXPECT_THROW(revive::nn::assign_parameters(wrong, back), revive::IoError);
    revive::nn::ParamList missing{{"z", Tensor(Shape{1, 1, 1, 1})}};
    EXPECT_THROW(revive::nn::assign_parameters(missing, back), revive::IoError);
}

namespace {

// Gives p the gradient `g` through sum(p * g).
void set_gradient(Tensor& p, const Tensor& g) {
    revive::Tape tape;
    tape.backward(revive::sum(revive::mul(p, g)));
}

}  // namespace

TEST(Adam, ZeroLearningRateLeavesParametersUnchanged) {
    Tensor p(Shape{1, 1, 2, 2}, 0.5);
    p.set_requires_grad(true);
    revive::nn::Adam adam({{"p", p}}, {0.0, 0.9, 0.999, 1e-8});
    set_gradient(p, Tensor(Shape{1, 1, 2, 2}, 3.0));
    adam.step();
    for (double v : p.data()) EXPECT_EQ(v, 0.5);
    EXPECT_EQ(adam.steps(), 1);
}

TEST(Adam, FirstStepMovesByLearningRateAgainstGradient) {
    Tensor p(Shape{1, 1, 1, 2}, 0.0);
    p.set_requires_grad(true);
    revive::nn::Adam adam({{"p", p}}, {0.01, 0.9, 0.999, 1e-12});
    set_gradient(p, Tensor(Shape{1, 1, 1, 2}, std::vector<double>{2.0, -0.5}));
    adam.step();
    EXPECT_NEAR(p.data()[0], -0.01, 1e-12);
    EXPECT_NEAR(p.data()[1], 0.01, 1e-12);
}

TEST(TrainToy, ZeroLearningRateKeepsObjectiveFlat) {
    const fs::path dir = scratch("lr0");
    RunConfig c = tiny_train(dir, 3);
    c.train.learning_rate = 0.0;
    const auto res = cmd_train_toy(c);
    const auto& r = res.report.at("results");
    EXPECT_EQ(r.at("eval_objective_start"), r.at("eval_objective_end"));
}

TEST(TrainToy, ResumeMatchesUninterruptedRun) {
    const fs::path dir = scratch("resume");
    RunConfig straight = tiny_train(dir, 4);
    straight.paths.checkpoint = (dir / "straight.rvck").string();
    cmd_train_toy(straight);

    RunConfig first = tiny_train(dir, 2);
    first.paths.checkpoint = (dir / "half.rvck").string();
    cmd_train_toy(first);
    RunConfig second = tiny_train(dir, 4);
    second.paths.resume = (dir / "half.rvck").string();
    second.paths.checkpoint = (dir / "resumed.rvck").string();
    cmd_train_toy(second);

    EXPECT_EQ(read_bytes(dir / "straight.rvck"), read_bytes(dir / "resumed.rvck"));
}

TEST(TrainToy, ResumeRejectsDifferentNetwork) {
    const fs::path dir = scratch("resume_bad");
    RunConfig first = tiny_train(dir, 1);
    first.paths.checkpoint = (dir / "a.rvck").string();
    cmd_train_toy(first);
    RunConfig second = tiny_train(dir, 2);
    second.network.base_channels = 16;
    second.paths.resume = (dir / "a.rvck").string();
    EXPECT_THROW(cmd_train_toy(second), ConfigError);
}

TEST(Metrics, FileAgainstItself) {
    const fs::path dir = scratch("metrics_self");
    revive::io::save_image(dir / "a.ppm", revive::synth::synthetic_scene(16, 16, 3));
    RunConfig c;
    c.command = "metrics";
    c.paths.input = (dir / "a.ppm").string();
    c.paths.reference = (dir / "a.ppm").string();
    const auto r = cmd_metrics(c).report.at("results");
    EXPECT_EQ(r.at("psnr"), "inf");
    EXPECT_EQ(r.at("ssim"), 1.0);
    EXPECT_EQ(r.at("losses").at("combined"), 0.0);
}

TEST(Cli, ExitCodes) {
    const fs::path dir = scratch("cli");
    {
        std::ofstream(dir / "bad.json") << R"({"schedule": {"stepz": 3}})";
    }
    EXPECT_EQ(run_cli("probe --grad-trials 1 --config " + (dir / "bad.json").string()), 2);
    EXPECT_EQ(run_cli("no-such-command"), 2);
    EXPECT_EQ(run_cli("restore --checkpoint " + (dir / "missing.rvck").string() + " --out " + dir.string()), 3);
    revive::io::save_image(dir / "a.ppm", revive::synth::synthetic_scene(16, 16, 1));
    revive::io::save_image(dir / "b.ppm", revive::synth::synthetic_scene(16, 12, 1));
    EXPECT_EQ(run_cli("metrics --input " + (dir / "a.ppm").string() + " --reference " + (dir / "b.ppm").string()), 4);
    EXPECT_EQ(run_cli("metrics --input " + (dir / "a.ppm").string() + " --reference " + (dir / "a.ppm").string()), 0);
    EXPECT_EQ(run_cli("probe --grad-trials 1 --dilations 2,4,4 --report " + (dir / "p.json").string()), 4);
    std::ifstream in(dir / "p.json");
    const json report = json::parse(in);
    EXPECT_EQ(report.at("exit_code"), 4);
    EXPECT_EQ(report.at("results").at("ladder").at("measured"), json({3, 7, 15, 23}));
}

TEST(Cli, GenDataWritesNamedPairs) {
    const fs::path dir = scratch("gen");
    ASSERT_EQ(run_cli("gen-data --count 2 --size 16 --tag haze --seed 7 --out " + dir.string()), 0);
    for (const char* f : {"haze_7_deg.ppm", "haze_7_ref.ppm", "haze_8_deg.ppm", "haze_8_ref.ppm"}) {
        EXPECT_TRUE(fs::exists(dir / f)) << f;
    }
    EXPECT_EQ(revive::io::load_image(dir / "haze_7_ref.ppm").shape(), (Shape{1, 3, 16, 16}));
}
