#include "harness/commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>

#include "harness/gradient_suite.hpp"
#include "revive/autodiff.hpp"
#include "revive/blocks.hpp"
#include "revive/checkpoint.hpp"
#include "revive/errors.hpp"
#include "revive/image_io.hpp"
#include "revive/losses.hpp"
#include "revive/metrics.hpp"
#include "revive/ops.hpp"
#include "revive/optim.hpp"
#include "revive/rng.hpp"

namespace harness {

namespace fs = std::filesystem;
using revive::Rng;
using revive::Shape;
using revive::Tensor;
using revive::derive_seed;

namespace {

constexpr const char* kCheckpointFormat = "revive-toy-denoiser";

// Stream ids for derive_seed; distinct purposes never share a stream.
enum Stream : std::uint64_t {
    kForwardNoise = 1,
    kReverseNoise = 2,
    kProbeWeights = 3,
    kNetworkInit = 4,
    kDegradeNoise = 5,
    kGradSuite = 6,
    kRestoreStart = 7,
    kRestoreReverse = 8,
    kEvalBatch = 9,
    kTrainPool = 1'000'000,
    kHeldOut = 2'000'000,
    kIteration = 3'000'000,
};

json envelope(const RunConfig& config) {
    return json{{"schema_version", kSchemaVersion}, {"command", config.command}, {"config", to_json(config)}};
}

fs::path out_dir(const RunConfig& config) {
    fs::path dir = config.paths.out.empty() ? fs::path(".") : fs::path(config.paths.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw revive::IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
    return dir;
}

double rms_diff(const Tensor& a, const Tensor& b) {
    auto x = a.data();
    auto y = b.data();
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += (x[i] - y[i]) * (x[i] - y[i]);
    return std::sqrt(acc / static_cast<double>(x.size()));
}

double mse(const Tensor& a, const Tensor& b) {
    const double r = rms_diff(a, b);
    return r * r;
}

json loss_report_json(const revive::loss::LossReport& r) {
    return json{{"pixel", r.pixel},
                {"edge", r.edge},
                {"hist", r.hist},
                {"combined", r.combined},
                {"weights", {{"lambda1", r.weights.lambda1},
                             {"lambda2", r.weights.lambda2},
                             {"lambda3", r.weights.lambda3}}}};
}

json network_json(const revive::nn::NetworkSpec& s) {
    return json{{"depth", s.depth},
                {"base_channels", s.base_channels},
                {"blocks_per_level", s.blocks_per_level},
                {"time_embed_dim", s.time_embed_dim},
                {"image_channels", s.image_channels},
                {"coarse_group_width", s.coarse_group_width},
                {"ln_eps", s.ln_eps}};
}

revive::nn::NetworkSpec network_from_json(const json& j) {
    revive::nn::NetworkSpec s;
    s.depth = j.at("depth").get<int>();
    s.base_channels = j.at("base_channels").get<int>();
    s.blocks_per_level = j.at("blocks_per_level").get<int>();
    s.time_embed_dim = j.at("time_embed_dim").get<int>();
    s.image_channels = j.at("image_channels").get<int>();
    s.coarse_group_width = j.at("coarse_group_width").get<int>();
    s.ln_eps = j.at("ln_eps").get<double>();
    return s;
}

revive::nn::ParamList network_params(const revive::nn::UNetWeights& w) {
    revive::nn::ParamList out;
    for (auto& [name, t] : w.parameters()) out.emplace_back("net/" + name, t);
    return out;
}

struct Batch {
    Tensor clean;
    Tensor mu;
    Tensor y_t;
    std::vector<int> t;
};

// Noisy states for a batch of pairs at per-item times drawn from `rng`.
Batch make_batch(const revive::sde::SdeSchedule& schedule, const std::vector<synth::ImagePair>& pool,
                 const std::vector<std::size_t>& picks, Rng& rng) {
    std::vector<Tensor> clean, mu, y;
    Batch b;
    for (std::size_t idx : picks) {
        const auto& pair = pool[idx];
        const int t = rng.uniform_int(1, schedule.steps());
        const auto noise_seed = static_cast<std::uint64_t>(rng.uniform_int(0, std::numeric_limits<int>::max()));
        const auto sample = revive::sde::forward_sample(schedule, pair.reference, pair.degraded, t, noise_seed);
        clean.push_back(pair.reference);
        mu.push_back(pair.degraded);
        y.push_back(sample.y_t);
        b.t.push_back(t);
    }
    b.clean = stack_batch(clean);
    b.mu = stack_batch(mu);
    b.y_t = stack_batch(y);
    return b;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw revive::IoError("cannot open '" + path.string() + "' for writing");
    out << text;
    if (!out) throw revive::IoError("write failed for '" + path.string() + "'");
}

}  // namespace

json json_number(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    return value;
}

std::uint64_t train_pair_seed(std::uint64_t seed, int k) { return derive_seed(seed, kTrainPool + k); }
std::uint64_t heldout_pair_seed(std::uint64_t seed, int k) { return derive_seed(seed, kHeldOut + k); }

synth::ImagePair make_pair(const RunConfig& config, std::size_t size, std::uint64_t seed) {
    const Tensor scene = synth::synthetic_scene(size, size, seed);
    const auto& d = config.degradation;
    synth::ImagePair pair;
    switch (synth::parse_degradation(d.tag)) {
        case synth::Degradation::LowLight:
            pair = synth::degrade_lowlight(scene, d.gain, d.gamma, d.noise_std, derive_seed(seed, kDegradeNoise));
            break;
        case synth::Degradation::Haze:
            pair = synth::degrade_haze(scene, d.transmission, d.airlight);
            break;
        case synth::Degradation::Rain:
            pair = synth::degrade_rain(scene, d.streaks, d.angle, d.intensity, derive_seed(seed, kDegradeNoise));
            break;
    }
    pair.seed = seed;
    return pair;
}

Tensor stack_batch(const std::vector<Tensor>& items) {
    if (items.empty()) throw revive::ShapeError("stack_batch: no items");
    Shape s = items.front().shape();
    if (s.n != 1) throw revive::ShapeError("stack_batch: items must have batch size 1");
    std::vector<double> data;
    data.reserve(s.numel() * items.size());
    for (const auto& t : items) {
        if (t.shape() != s) throw revive::ShapeError("stack_batch: items differ in shape");
        data.insert(data.end(), t.data().begin(), t.data().end());
    }
    s.n = items.size();
    return Tensor(s, std::move(data));
}

Tensor batch_item(const Tensor& batch, std::size_t n) {
    Shape s = batch.shape();
    if (n >= s.n) throw revive::ShapeError("batch_item: index out of range");
    const std::size_t len = s.c * s.h * s.w;
    auto first = batch.data().begin() + static_cast<std::ptrdiff_t>(n * len);
    s.n = 1;
    return Tensor(s, std::vector<double>(first, first + static_cast<std::ptrdiff_t>(len)));
}

LossTrend loss_trend(const std::vector<double>& curve, std::size_t window) {
    LossTrend t;
    if (curve.empty()) return t;
    const std::size_t w = std::min(window, curve.size());
    for (std::size_t i = 0; i < w; ++i) {
        t.head += curve[i];
        t.tail += curve[curve.size() - w + i];
    }
    t.head /= static_cast<double>(w);
    t.tail /= static_cast<double>(w);
    t.reduction = t.head > 0.0 ? 1.0 - t.tail / t.head : 0.0;
    return t;
}

// ------------------------------------------------------------------ commands

CommandResult cmd_sde_roundtrip(const RunConfig& config) {
    const auto schedule = config.schedule.build();
    const auto size = static_cast<std::size_t>(config.roundtrip.size);
    const auto pair = make_pair(config, size, config.seed);
    const Tensor& x0 = pair.reference;
    const Tensor& mu = pair.degraded;

    const auto start = revive::sde::forward_sample(schedule, x0, mu, schedule.steps(),
                                                   derive_seed(config.seed, kForwardNoise));
    std::vector<double> residuals;
    residuals.reserve(static_cast<std::size_t>(schedule.steps()));
    const Tensor recovered = revive::sde::reverse_integrate(
        schedule, start.y_t, mu,
        [&](const Tensor& y, int t) { return revive::sde::exact_score(schedule, y, x0, mu, t); },
        derive_seed(config.seed, kReverseNoise), !config.roundtrip.stochastic,
        [&](const revive::sde::SdeState& s) { residuals.push_back(rms_diff(s.y, x0)); });

    const fs::path dir = out_dir(config);
    const std::string stem = "roundtrip_" + std::to_string(config.seed);
    revive::io::save_image(dir / (stem + ".ppm"), recovered);

    CommandResult res{envelope(config), 0};
    res.report["results"] = {
        {"image", stem + ".ppm"},
        {"psnr", json_number(revive::metrics::psnr(recovered, x0))},
        {"mse", mse(recovered, x0)},
        {"psnr_start", json_number(revive::metrics::psnr(start.y_t, x0))},
        {"psnr_degraded", json_number(revive::metrics::psnr(mu, x0))},
        {"terminal_sigma", schedule.sigma(schedule.steps())},
        {"residuals", residuals},
    };
    return res;
}

CommandResult cmd_train_toy(const RunConfig& config) {
    using namespace revive;
    const auto schedule = config.schedule.build();
    const auto& tc = config.train;
    const auto size = static_cast<std::size_t>(tc.size);

    nn::Denoiser den{config.network, nn::UNetWeights::init(config.network, derive_seed(config.seed, kNetworkInit))};
    nn::ParamList params = network_params(den.weights);
    loss::LearnedWeights learned;
    if (tc.learned_weights) {
        learned = loss::LearnedWeights::from(config.loss);
        for (int i = 0; i < 3; ++i) params.emplace_back("loss/rho" + std::to_string(i + 1), learned.rho[i]);
    }
    nn::Adam adam(params, {tc.learning_rate, 0.9, 0.999, 1e-8});

    int start_iter = 0;
    json history = json::array();
    if (!config.paths.resume.empty()) {
        const auto ck = nn::load_checkpoint(config.paths.resume);
        json meta;
        try {
            meta = json::parse(ck.metadata);
        } catch (const json::exception& e) {
            throw IoError("checkpoint metadata is not JSON: " + std::string(e.what()));
        }
        if (meta.value("format", "") != kCheckpointFormat) throw IoError("not a toy-denoiser checkpoint");
        if (meta.at("network") != network_json(config.network) || meta.at("seed") != config.seed ||
            meta.at("learned_weights") != tc.learned_weights) {
            throw ConfigError("resume: checkpoint network, seed or loss mode differs from the config");
        }
        nn::assign_parameters(params, ck);
        nn::ParamList state;
        for (const auto& [name, t] : ck.arrays) {
            if (name.starts_with("adam.")) state.emplace_back(name, t);
        }
        adam.load_state(state, meta.at("adam_steps").get<std::int64_t>());
        start_iter = meta.at("iterations_done").get<int>();
        history = meta.value("loss_curve", json::array());
        if (start_iter > tc.iterations) throw ConfigError("resume: checkpoint is past train.iterations");
    }

    std::vector<synth::ImagePair> pool;
    for (int k = 0; k < tc.train_pairs; ++k) pool.push_back(make_pair(config, size, train_pair_seed(config.seed, k)));

    // Fixed evaluation batch: first `batch` pool entries at fixed times.
    Rng eval_rng(derive_seed(config.seed, kEvalBatch));
    std::vector<std::size_t> eval_picks;
    for (int i = 0; i < tc.batch; ++i) eval_picks.push_back(static_cast<std::size_t>(i) % pool.size());
    const Batch eval = make_batch(schedule, pool, eval_picks, eval_rng);
    auto eval_objective = [&] {
        NoGradGuard guard;
        const Tensor pred = den.predict_clean(eval.y_t, eval.mu, eval.t);
        const auto terms = loss::surrogate_terms(pred, eval.clean, config.canny, config.bins);
        return (tc.learned_weights ? loss::surrogate_objective(terms, learned)
                                   : loss::surrogate_objective(terms, config.loss)).item();
    };
    const double eval_start = eval_objective();

    for (int iter = start_iter; iter < tc.iterations; ++iter) {
        Rng rng(derive_seed(config.seed, kIteration + static_cast<std::uint64_t>(iter)));
        std::vector<std::size_t> picks;
        for (int i = 0; i < tc.batch; ++i) {
            picks.push_back(static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(pool.size()) - 1)));
        }
        const Batch b = make_batch(schedule, pool, picks, rng);

        Tape tape;
        const Tensor pred = den.predict_clean(b.y_t, b.mu, b.t);
        const auto terms = loss::surrogate_terms(pred, b.clean, config.canny, config.bins);
        const loss::LossWeights weights = tc.learned_weights ? learned.current() : config.loss;
        const Tensor objective = tc.learned_weights ? loss::surrogate_objective(terms, learned)
                                                    : loss::surrogate_objective(terms, weights);
        const auto report = loss::combined_loss(pred, b.clean, weights, config.canny, config.bins);
        history.push_back({{"iteration", iter + 1},
                           {"objective", objective.item()},
                           {"surrogate", {{"pixel", terms.pixel.item()},
                                          {"edge", terms.edge.item()},
                                          {"hist", terms.hist.item()}}},
                           {"report", loss_report_json(report)}});
        tape.backward(objective);
        adam.step();
        adam.zero_grad();
        if ((iter + 1) % 20 == 0) {
            std::cerr << "train-toy: iteration " << iter + 1 << "/" << tc.iterations
                      << " objective " << objective.item() << "\n";
        }
    }
    const double eval_end = eval_objective();

    std::vector<double> curve;
    for (const auto& h : history) curve.push_back(h.at("objective").get<double>());
    const LossTrend trend = loss_trend(curve);

    json meta = {{"format", kCheckpointFormat},
                 {"iterations_done", std::max(start_iter, tc.iterations)},
                 {"adam_steps", adam.steps()},
                 {"seed", config.seed},
                 {"network", network_json(config.network)},
                 {"schedule", to_json(config).at("schedule")},
                 {"degradation", to_json(config).at("degradation")},
                 {"image_size", tc.size},
                 {"learned_weights", tc.learned_weights},
                 {"loss_curve", history}};
    nn::Checkpoint ck;
    ck.metadata = meta.dump();
    ck.arrays = params;
    for (auto& entry : adam.state()) ck.arrays.push_back(entry);

    const fs::path dir = out_dir(config);
    const fs::path ck_path = config.paths.checkpoint.empty() ? dir / "toy.rvck" : fs::path(config.paths.checkpoint);
    nn::save_checkpoint(ck_path, ck);

    CommandResult res{envelope(config), 0};
    const auto w = tc.learned_weights ? learned.current() : config.loss;
    const json weights_json = {{"lambda1", w.lambda1}, {"lambda2", w.lambda2}, {"lambda3", w.lambda3}};
    res.report["results"] = {
        {"checkpoint", ck_path.filename().string()},
        {"iterations", tc.iterations},
        {"resumed_from", start_iter},
        {"loss_head_mean", trend.head},
        {"loss_tail_mean", trend.tail},
        {"loss_reduction", trend.reduction},
        {"eval_objective_start", eval_start},
        {"eval_objective_end", eval_end},
        {"final_weights", weights_json},
        {"loss_curve", history},
    };
    return res;
}

CommandResult cmd_restore(const RunConfig& config) {
    using namespace revive;
    if (config.paths.checkpoint.empty()) throw ConfigError("restore: paths.checkpoint is required");
    const auto ck = nn::load_checkpoint(config.paths.checkpoint);
    json meta;
    try {
        meta = json::parse(ck.metadata);
    } catch (const json::exception& e) {
        throw IoError("checkpoint metadata is not JSON: " + std::string(e.what()));
    }
    if (meta.value("format", "") != kCheckpointFormat) throw IoError("not a toy-denoiser checkpoint");

    RunConfig trained = config;
    try {
        trained.network = network_from_json(meta.at("network"));
        trained = merge_config(trained, {{"schedule", meta.at("schedule")}, {"degradation", meta.at("degradation")}});
    } catch (const json::exception& e) {
        throw IoError("checkpoint metadata incomplete: " + std::string(e.what()));
    } catch (const ConfigError& e) {
        throw IoError(std::string("checkpoint metadata invalid: ") + e.what());
    }
    const auto schedule = trained.schedule.build();
    nn::Denoiser den{trained.network, nn::UNetWeights::init(trained.network, 0)};
    nn::assign_parameters(network_params(den.weights), ck);

    struct Item {
        std::string name;
        Tensor degraded;
        Tensor reference;  // undefined in no-reference mode
    };
    std::vector<Item> items;
    if (!config.paths.input.empty()) {
        Item it{fs::path(config.paths.input).stem().string(), io::load_image(config.paths.input), {}};
        if (!config.paths.reference.empty()) it.reference = io::load_image(config.paths.reference);
        if (it.reference.defined() && it.reference.shape() != it.degraded.shape()) {
            throw ShapeError("restore: input and reference sizes differ");
        }
        items.push_back(std::move(it));
    } else {
        const auto size = static_cast<std::size_t>(meta.at("image_size").get<int>());
        for (int k = 0; k < config.restore.pairs; ++k) {
            const auto seed = heldout_pair_seed(config.seed, k);
            auto pair = make_pair(trained, size, seed);
            items.push_back({synth::file_stem(pair.tag, seed), pair.degraded, pair.reference});
        }
    }

    std::vector<Tensor> mus;
    for (const auto& it : items) mus.push_back(it.degraded);
    const Tensor mu = stack_batch(mus);
    const auto start = sde::forward_sample(schedule, mu, mu, schedule.steps(), derive_seed(config.seed, kRestoreStart));
    const Tensor restored = sde::reverse_integrate(
        schedule, start.y_t, mu, [&](const Tensor& y, int t) { return den.score(schedule, y, mu, t); },
        derive_seed(config.seed, kRestoreReverse), !config.restore.stochastic);

    const fs::path dir = out_dir(config);
    json per_image = json::array();
    double sum_restored = 0.0, sum_degraded = 0.0;
    bool have_reference = true;
    for (std::size_t k = 0; k < items.size(); ++k) {
        const Tensor out = synth::clamp01(batch_item(restored, k));
        const std::string file = items[k].name + "_restored.ppm";
        io::save_image(dir / file, out);
        json entry = {{"name", items[k].name}, {"image", file}};
        if (items[k].reference.defined()) {
            const auto& ref = items[k].reference;
            const double p_deg = metrics::psnr(items[k].degraded, ref);
            const double p_res = metrics::psnr(out, ref);
            sum_degraded += p_deg;
            sum_restored += p_res;
            entry["psnr_degraded"] = json_number(p_deg);
            entry["psnr_restored"] = json_number(p_res);
            const std::size_t min_side = std::min(ref.shape().h, ref.shape().w);
            if (min_side >= 11) {
                entry["ssim_degraded"] = metrics::ssim(items[k].degraded, ref);
                entry["ssim_restored"] = metrics::ssim(out, ref);
            }
        } else {
            have_reference = false;
        }
        per_image.push_back(entry);
    }

    CommandResult res{envelope(config), 0};
    res.report["results"] = {{"checkpoint", fs::path(config.paths.checkpoint).filename().string()},
                             {"images", per_image}};
    if (have_reference) {
        const double n = static_cast<double>(items.size());
        res.report["results"]["mean_psnr_degraded"] = json_number(sum_degraded / n);
        res.report["results"]["mean_psnr_restored"] = json_number(sum_restored / n);
        res.report["results"]["psnr_gain"] = json_number((sum_restored - sum_degraded) / n);
    }
    return res;
}

CommandResult cmd_probe(const RunConfig& config) {
    using namespace revive;
    nn::BlockSpec spec;
    spec.channels = config.probe.channels;
    spec.dilations = config.probe.dilations;
    spec.coarse_group_width = std::min(config.network.coarse_group_width, spec.channels);
    spec.validate();
    Rng rng(derive_seed(config.seed, kProbeWeights));
    const auto weights = nn::C2FBlockWeights::init(spec, rng);
    const auto ladder = nn::receptive_field_ladder(spec, weights);
    const std::array<std::size_t, 4> claimed{3, 7, 15, 31};
    bool ladder_ok = true;
    for (std::size_t i = 0; i < 4; ++i) ladder_ok = ladder_ok && ladder.extents[i] == claimed[i] && ladder.solid[i];

    GradSuiteOptions opt;
    opt.trials_per_case = config.probe.grad_trials;
    opt.seed = derive_seed(config.seed, kGradSuite);
    const auto grads = run_gradient_suite(opt);
    bool grads_ok = true;
    json grad_json = json::array();
    int total_trials = 0;
    for (const auto& g : grads) {
        grads_ok = grads_ok && g.passed;
        total_trials += g.trials;
        grad_json.push_back({{"name", g.name},
                             {"trials", g.trials},
                             {"worst_rel_error", g.worst_rel_error},
                             {"tolerance", g.tolerance},
                             {"passed", g.passed}});
    }

    CommandResult res{envelope(config), 0};
    res.report["results"] = {
        {"ladder", {{"measured", ladder.extents},
                    {"solid", ladder.solid},
                    {"claimed", claimed},
                    {"dilation_arithmetic", nn::expected_ladder(spec.dilations)},
                    {"passed", ladder_ok}}},
        {"gradients", {{"cases", grad_json}, {"total_trials", total_trials}, {"passed", grads_ok}}},
        {"passed", ladder_ok && grads_ok},
    };
    if (!ladder_ok || !grads_ok) res.exit_code = 4;
    return res;
}

CommandResult cmd_metrics(const RunConfig& config) {
    using namespace revive;
    if (config.paths.input.empty() || config.paths.reference.empty()) {
        throw ConfigError("metrics: paths.input and paths.reference are required");
    }
    const Tensor a = io::load_image(config.paths.input);
    const Tensor b = io::load_image(config.paths.reference);
    if (a.shape() != b.shape()) {
        throw ShapeError("metrics: image sizes differ, " + to_string(a.shape()) + " vs " + to_string(b.shape()));
    }
    CommandResult res{envelope(config), 0};
    json r = {{"psnr", json_number(metrics::psnr(a, b))}};
    r["ssim"] = std::min(a.shape().h, a.shape().w) >= 11 ? json(metrics::ssim(a, b)) : json(nullptr);
    r["losses"] = loss_report_json(loss::combined_loss(a, b, config.loss, config.canny, config.bins));
    res.report["results"] = r;
    return res;
}

CommandResult cmd_gen_data(const RunConfig& config) {
    const fs::path dir = out_dir(config);
    json files = json::array();
    for (int k = 0; k < config.gen_data.count; ++k) {
        const std::uint64_t seed = config.seed + static_cast<std::uint64_t>(k);
        const auto pair = make_pair(config, static_cast<std::size_t>(config.gen_data.size), seed);
        const std::string stem = synth::file_stem(pair.tag, seed);
        revive::io::save_image(dir / (stem + "_deg.ppm"), pair.degraded);
        revive::io::save_image(dir / (stem + "_ref.ppm"), pair.reference);
        files.push_back({{"seed", seed}, {"degraded", stem + "_deg.ppm"}, {"reference", stem + "_ref.ppm"}});
    }
    CommandResult res{envelope(config), 0};
    res.report["results"] = {{"pairs", files}};
    return res;
}

CommandResult run_command(const RunConfig& config) {
    config.validate();
    CommandResult res;
    if (config.command == "sde-roundtrip") {
        res = cmd_sde_roundtrip(config);
    } else if (config.command == "train-toy") {
        res = cmd_train_toy(config);
    } else if (config.command == "restore") {
        res = cmd_restore(config);
    } else if (config.command == "probe") {
        res = cmd_probe(config);
    } else if (config.command == "metrics") {
        res = cmd_metrics(config);
    } else if (config.command == "gen-data") {
        res = cmd_gen_data(config);
    } else {
        throw ConfigError("unknown command '" + config.command + "'");
    }
    res.report["exit_code"] = res.exit_code;
    const std::string text = res.report.dump(2) + "\n";
    if (config.paths.report.empty()) {
        std::cout << text;
    } else {
        write_text(config.paths.report, text);
    }
    return res;
}

int exit_code_for_current_exception(std::string& message) {
    try {
        throw;
    } catch (const ConfigError& e) {
        message = std::string("config error: ") + e.what();
        return 2;
    } catch (const revive::IoError& e) {
        message = std::string("i/o error: ") + e.what();
        return 3;
    } catch (const CheckFailure& e) {
        message = std::string("check failed: ") + e.what();
        return 4;
    } catch (const revive::ShapeError& e) {
        message = std::string("shape error: ") + e.what();
        return 4;
    } catch (const revive::DomainError& e) {
        message = std::string("domain error: ") + e.what();
        return 4;
    } catch (const revive::NumericError& e) {
        message = std::string("numeric error: ") + e.what();
        return 4;
    } catch (const std::exception& e) {
        message = std::string("error: ") + e.what();
        return 1;
    }
}

}  // namespace harness
