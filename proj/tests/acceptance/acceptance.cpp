// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <sys/wait.h>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "harness/commands.hpp"
#include "harness/config.hpp"
#include "harness/gradient_suite.hpp"
#include "oracles/canny_corpus.hpp"
#include "oracles/canny_reference.hpp"
#include "oracles/reference_ops.hpp"
#include "revive/blocks.hpp"
#include "revive/canny.hpp"
#include "revive/image_io.hpp"
#include "revive/losses.hpp"
#include "revive/metrics.hpp"
#include "revive/rng.hpp"
#include "revive/sde.hpp"
#include "revive/synth.hpp"

using namespace revive;
using harness::json;
using harness::RunConfig;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("revive_acceptance_" + name);
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

json read_json(const fs::path& p) {
    std::ifstream in(p);
    return json::parse(in);
}

// ---------------------------------------------------------------- criteria

Outcome sde_moments() {
    const auto start = Clock::now();
    const int T = 300;
    const double kappa = 90.0 / 255.0, alpha_scale = 3.0, y0 = 0.8, mu = 0.2;
    const auto schedule = sde::SdeSchedule::make(T, kappa, sde::AlphaProfile::Constant, alpha_scale);
    const std::size_t n = 10000;
    const Tensor x0(Shape{1, 1, 100, 100}, y0);
    const Tensor m(Shape{1, 1, 100, 100}, mu);
    const Tensor y = sde::forward_sample(schedule, x0, m, T, 2024).y_t;

    // Constant alpha integrates to alpha_scale over [0, T].
    const double want_mean = mu + (y0 - mu) * std::exp(-alpha_scale);
    const double want_var = kappa * kappa * (1.0 - std::exp(-2.0 * alpha_scale));
    const auto d = y.data();
    const double mean = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (double v : d) ss += (v - mean) * (v - mean);
    const double var = ss / static_cast<double>(n - 1);
    const double se = std::sqrt(want_var / static_cast<double>(n));
    const double z = std::abs(mean - want_mean) / se;
    const double rel_var = std::abs(var / want_var - 1.0);
    const double secs = seconds_since(start);
    return {z <= 3.0 && rel_var <= 0.05 && secs < 30.0,
            fmt("mean dev %.2f SE, var rel err %.4f, %.2fs", z, rel_var, secs)};
}

Outcome exact_roundtrip() {
    const fs::path dir = scratch("roundtrip");
    auto mean_over_seeds = [&](int steps, double& mean_psnr) {
        double mse = 0.0;
        mean_psnr = 0.0;
        for (std::uint64_t seed = 1; seed <= 8; ++seed) {
            RunConfig c;
            c.command = "sde-roundtrip";
            c.seed = seed;
            c.schedule.steps = steps;
            c.roundtrip.size = 32;
            c.paths.out = dir.string();
            const auto r = harness::cmd_sde_roundtrip(c).report.at("results");
            mse += r.at("mse").get<double>();
            const auto& p = r.at("psnr");
            mean_psnr += p.is_number() ? p.get<double>() : 999.0;
        }
        mean_psnr /= 8.0;
        return mse / 8.0;
    };
    double psnr300 = 0.0, psnr600 = 0.0;
    const double mse300 = mean_over_seeds(300, psnr300);
    const double mse600 = mean_over_seeds(600, psnr600);
    return {psnr300 >= 30.0 && mse600 < mse300,
            fmt("mean PSNR %.2f dB at T=300; mean MSE %.3e -> %.3e when dt halves", psnr300, mse300, mse600)};
}

Outcome receptive_field() {
    const nn::BlockSpec spec;
    Rng rng(5);
    const auto w = nn::C2FBlockWeights::init(spec, rng);
    const auto ladder = nn::receptive_field_ladder(spec, w);
    const std::array<std::size_t, 4> want{3, 7, 15, 31};
    bool solid = true;
    for (bool s : ladder.solid) solid = solid && s;

    RunConfig good;
    good.command = "probe";
    good.probe.grad_trials = 1;
    good.paths.out = scratch("probe").string();
    RunConfig tampered = good;
    tampered.probe.dilations = {2, 4, 4};
    const int good_rc = harness::cmd_probe(good).exit_code;
    const int bad_rc = harness::cmd_probe(tampered).exit_code;
    return {ladder.extents == want && solid && good_rc == 0 && bad_rc == 4,
            fmt("ladder %zu/%zu/%zu/%zu, probe rc %d, tampered rc %d", ladder.extents[0], ladder.extents[1],
                ladder.extents[2], ladder.extents[3], good_rc, bad_rc)};
}

Outcome gradient_suite() {
    const auto start = Clock::now();
    harness::GradSuiteOptions opt;
    opt.trials_per_case = 4;
    opt.seed = 17;
    const auto results = harness::run_gradient_suite(opt);
    int trials = 0;
    bool ok = true;
    double worst_prim = 0.0, worst_block = 0.0;
    for (const auto& r : results) {
        trials += r.trials;
        ok = ok && r.passed && r.worst_rel_error < r.tolerance;
        double& worst = r.tolerance > opt.primitive_tolerance ? worst_block : worst_prim;
        worst = std::max(worst, r.worst_rel_error);
    }
    const double secs = seconds_since(start);
    return {ok && trials >= 100 && secs < 120.0,
            fmt("%d trials over %zu cases, worst primitive %.2e, worst block %.2e, %.1fs", trials, results.size(),
                worst_prim, worst_block, secs)};
}

Outcome canny_reference() {
    const auto corpus = oracle::canny_corpus();
    std::size_t images = 0, mismatched_images = 0;
    for (const auto& item : corpus) {
        const Shape s = item.image.shape();
        if (s.h > 32 || s.w > 32) continue;
        ++images;
        const Tensor got = loss::canny(item.image);
        const auto ref = oracle::canny_reference(oracle::luminance_grid(item.image), 1.0, 0.1, 0.2);
        bool same = true;
        for (std::size_t y = 0; y < s.h; ++y)
            for (std::size_t x = 0; x < s.w; ++x) same = same && got.at(0, 0, y, x) == ref[y][x];
        mismatched_images += !same;
    }
    return {images >= 20 && mismatched_images == 0,
            fmt("%zu images, %zu mismatched", images, mismatched_images)};
}

Outcome loss_axioms() {
    Rng rng(8);
    int violations = 0;
    const int trials = 100;
    for (int t = 0; t < trials; ++t) {
        const Tensor a = Tensor::uniform(Shape{1, 3, 16, 16}, rng, 0, 1);
        const Tensor b = Tensor::uniform(Shape{1, 3, 16, 16}, rng, 0, 1);
        const double p = loss::pixel_loss(a, b), e = loss::edge_loss(a, b), h = loss::hist_loss(a, b);
        violations += !(p >= 0 && e >= 0 && h >= 0);
        violations += loss::pixel_loss(a, a) != 0.0 || loss::edge_loss(a, a) != 0.0 || loss::hist_loss(a, a) != 0.0;
        violations += h != loss::hist_loss(b, a);

        // Reversing pixel order is a permutation of positions.
        Tensor rev(a.shape());
        const std::size_t plane = 16 * 16;
        for (std::size_t c = 0; c < 3; ++c)
            for (std::size_t i = 0; i < plane; ++i)
                rev.mutable_data()[c * plane + i] = a.data()[c * plane + plane - 1 - i];
        violations += loss::hist_loss(rev, b) != h;

        const loss::LossWeights w{rng.uniform(0, 2), rng.uniform(0, 2), rng.uniform(0, 2)};
        const auto r = loss::combined_loss(a, b, w);
        violations += r.combined != w.lambda1 * r.pixel + w.lambda2 * r.edge + w.lambda3 * r.hist;
    }
    return {violations == 0, fmt("%d trials, %d violations", trials, violations)};
}

Outcome metric_oracles() {
    Rng rng(9);
    const Tensor a = Tensor::uniform(Shape{1, 3, 24, 24}, rng, 0.1, 0.9);
    Tensor shifted = a.clone();
    for (double& v : shifted.mutable_data()) v += 1.0 / 255.0;
    const double psnr_err = std::abs(metrics::psnr(a, shifted) - 20.0 * std::log10(255.0));
    const bool self_one = metrics::ssim(a, a) == 1.0;
    double worst = 0.0;
    for (int t = 0; t < 10; ++t) {
        const Tensor x = Tensor::uniform(Shape{1, 3, 20, 20}, rng, 0, 1);
        Tensor y = x.clone();
        for (double& v : y.mutable_data()) v += 0.2 * rng.normal();
        const double want = oracle::ssim_direct(oracle::luminance_grid(x), oracle::luminance_grid(y));
        worst = std::max(worst, std::abs(metrics::ssim(x, y) - want));
    }
    return {psnr_err <= 1e-9 && self_one && worst <= 1e-10,
            fmt("PSNR err %.1e, SSIM(a,a)==1 %s, SSIM oracle err %.1e", psnr_err, self_one ? "yes" : "no", worst)};
}

Outcome toy_end_to_end() {
    const fs::path dir = scratch("toy");
    const auto start = Clock::now();
    const int train_rc = run_cli("train-toy --seed 0 --out " + dir.string() + " --report " + (dir / "train.json").string());
    const int restore_rc = run_cli("restore --seed 0 --checkpoint " + (dir / "toy.rvck").string() + " --out " +
                                   dir.string() + " --report " + (dir / "restore.json").string());
    const double secs = seconds_since(start);
    if (train_rc != 0 || restore_rc != 0) return {false, fmt("train rc %d, restore rc %d", train_rc, restore_rc)};
    const json train = read_json(dir / "train.json").at("results");
    const json restore = read_json(dir / "restore.json").at("results");
    const double reduction = train.at("loss_reduction").get<double>();
    const double gain = restore.at("psnr_gain").get<double>();
    return {reduction >= 0.5 && gain >= 2.0 && secs < 600.0,
            fmt("loss drop %.1f%%, PSNR %.2f -> %.2f dB (+%.2f), %.1fs", 100.0 * reduction,
                restore.at("mean_psnr_degraded").get<double>(), restore.at("mean_psnr_restored").get<double>(),
                gain, secs)};
}

Outcome determinism() {
    const fs::path root = scratch("determinism");
    const fs::path run = root / "run";
    const std::string out = " --out " + run.string() + " --report " + (run / "report.json").string();
    const fs::path ck = root / "ck.rvck";
    // Checkpoint for restore lives outside the run dir so both restores read the same file.
    if (run_cli("train-toy --seed 3 --iterations 10 --checkpoint " + ck.string() + " --out " + root.string() +
                " --report " + (root / "ck.json").string()) != 0) {
        return {false, "could not build the restore checkpoint"};
    }
    const std::string img = (root / "img.ppm").string();
    io::save_image(img, synth::synthetic_scene(24, 24, 2));

    const std::vector<std::pair<std::string, std::string>> commands{
        {"sde-roundtrip", "sde-roundtrip --seed 4 --size 16 --steps 100"},
        {"sde-roundtrip-stochastic", "sde-roundtrip --seed 4 --size 16 --steps 100 --stochastic"},
        {"train-toy", "train-toy --seed 5 --iterations 10 --checkpoint " + (run / "t.rvck").string()},
        {"restore", "restore --seed 6 --checkpoint " + ck.string()},
        {"restore-stochastic", "restore --seed 6 --stochastic --checkpoint " + ck.string()},
        {"probe", "probe --seed 7 --grad-trials 1"},
        {"metrics", "metrics --input " + img + " --reference " + img},
        {"gen-data", "gen-data --seed 8 --count 2 --tag rain"},
    };
    int differing = 0;
    std::string which;
    for (const auto& [name, args] : commands) {
        std::array<std::map<std::string, std::string>, 2> files;
        for (int pass = 0; pass < 2; ++pass) {
            fs::remove_all(run);
            fs::create_directories(run);
            run_cli(args + out);
            for (const auto& e : fs::directory_iterator(run)) files[pass][e.path().filename().string()] = read_bytes(e.path());
        }
        if (files[0] != files[1] || files[0].empty()) {
            ++differing;
            which += " " + name;
        }
    }
    return {differing == 0, fmt("%zu commands run twice, %d differ%s", commands.size(), differing, which.c_str())};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"sde_moment_fidelity", sde_moments},
        {"exact_score_roundtrip", exact_roundtrip},
        {"receptive_field_ladder", receptive_field},
        {"gradient_suite", gradient_suite},
        {"canny_reference", canny_reference},
        {"loss_axioms", loss_axioms},
        {"metric_oracles", metric_oracles},
        {"toy_end_to_end", toy_end_to_end},
        {"determinism", determinism},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += !o.pass;
        std::printf("[%s] %zu %s (%s)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
