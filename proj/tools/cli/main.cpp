#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "harness/commands.hpp"
#include "harness/config.hpp"

namespace {

struct Flags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<int> steps;
    std::optional<double> kappa;
    std::optional<std::string> report;
    std::optional<std::string> input;
    std::optional<std::string> reference;
    std::optional<std::string> checkpoint;
    std::optional<std::string> resume;
    std::optional<int> iterations;
    std::optional<double> lr;
    std::optional<std::string> tag;
    std::optional<int> count;
    std::optional<int> size;
    std::optional<std::string> dilations;
    std::optional<int> grad_trials;
    bool stochastic = false;
};

harness::RunConfig resolve(const std::string& command, const Flags& f) {
    harness::RunConfig c;
    if (!f.config.empty()) c = harness::load_config_file(f.config, c);
    c.command = command;
    if (f.seed) c.seed = *f.seed;
    if (f.out) c.paths.out = *f.out;
    if (f.steps) c.schedule.steps = *f.steps;
    if (f.kappa) c.schedule.kappa = *f.kappa;
    if (f.report) c.paths.report = *f.report;
    if (f.input) c.paths.input = *f.input;
    if (f.reference) c.paths.reference = *f.reference;
    if (f.checkpoint) c.paths.checkpoint = *f.checkpoint;
    if (f.resume) c.paths.resume = *f.resume;
    if (f.iterations) c.train.iterations = *f.iterations;
    if (f.lr) c.train.learning_rate = *f.lr;
    if (f.tag) c.degradation.tag = *f.tag;
    if (f.count) c.gen_data.count = *f.count;
    if (f.grad_trials) c.probe.grad_trials = *f.grad_trials;
    if (f.size) {
        c.roundtrip.size = *f.size;
        c.gen_data.size = *f.size;
        c.train.size = *f.size;
    }
    if (f.stochastic) {
        c.roundtrip.stochastic = true;
        c.restore.stochastic = true;
    }
    if (f.dilations) {
        std::array<int, 3> d{};
        char sep1 = 0, sep2 = 0;
        std::istringstream in(*f.dilations);
        if (!(in >> d[0] >> sep1 >> d[1] >> sep2 >> d[2]) || sep1 != ',' || sep2 != ',' || !in.eof()) {
            throw harness::ConfigError("--dilations expects three comma-separated integers, e.g. 2,4,8");
        }
        c.probe.dilations = d;
    }
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"revive: mean-reverting SDE image restoration toolkit"};
    app.require_subcommand(1);
    Flags f;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", f.config, "JSON config file; flags override its values");
        sub->add_option("--seed", f.seed, "Global RNG seed");
        sub->add_option("--out", f.out, "Output directory for images and checkpoints");
        sub->add_option("--steps", f.steps, "Number of SDE steps T");
        sub->add_option("--kappa", f.kappa, "Stationary standard deviation, image units [0,1]");
        sub->add_option("--report", f.report, "Write the JSON report here instead of stdout");
    };

    auto* roundtrip = app.add_subcommand("sde-roundtrip", "Forward to T, reverse with the exact score");
    common(roundtrip);
    roundtrip->add_option("--size", f.size, "Image side");
    roundtrip->add_flag("--stochastic", f.stochastic, "Keep the noise term in reverse steps");

    auto* train = app.add_subcommand("train-toy", "Train the small denoiser on synthetic pairs");
    common(train);
    train->add_option("--iterations", f.iterations, "Optimizer steps");
    train->add_option("--lr", f.lr, "Adam learning rate");
    train->add_option("--checkpoint", f.checkpoint, "Checkpoint output path");
    train->add_option("--resume", f.resume, "Continue from this checkpoint");
    train->add_option("--tag", f.tag, "Degradation: lowlight, haze or rain");
    train->add_option("--size", f.size, "Training image side");

    auto* restore = app.add_subcommand("restore", "Restore images with a trained checkpoint");
    common(restore);
    restore->add_option("--checkpoint", f.checkpoint, "Trained checkpoint")->required();
    restore->add_option("--input", f.input, "Degraded PPM; omit to use generated held-out pairs");
    restore->add_option("--reference", f.reference, "Clean PPM for metrics");
    restore->add_flag("--stochastic", f.stochastic, "Keep the noise term in reverse steps");

    auto* probe = app.add_subcommand("probe", "Receptive-field ladder and gradient checks");
    common(probe);
    probe->add_option("--dilations", f.dilations, "Coarse dilations, e.g. 2,4,8");
    probe->add_option("--grad-trials", f.grad_trials, "Randomized trials per gradient case");

    auto* metrics = app.add_subcommand("metrics", "PSNR, SSIM and fidelity losses between two images");
    common(metrics);
    metrics->add_option("--input", f.input, "Image under test")->required();
    metrics->add_option("--reference", f.reference, "Reference image")->required();

    auto* gen = app.add_subcommand("gen-data", "Write synthetic degraded/reference PPM pairs");
    common(gen);
    gen->add_option("--count", f.count, "Number of pairs");
    gen->add_option("--size", f.size, "Image side");
    gen->add_option("--tag", f.tag, "Degradation: lowlight, haze or rain");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        const std::string command = app.get_subcommands().front()->get_name();
        const auto result = harness::run_command(resolve(command, f));
        if (result.exit_code != 0) std::cerr << "revive " << command << ": checks failed\n";
        return result.exit_code;
    } catch (...) {
        std::string message;
        const int code = harness::exit_code_for_current_exception(message);
        std::cerr << "revive: " << message << "\n";
        return code;
    }
}
