#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "revive/canny.hpp"
#include "revive/losses.hpp"
#include "revive/sde.hpp"
#include "revive/unet.hpp"

namespace harness {

using nlohmann::json;

/// Invalid or unknown configuration; maps to exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A verification step did not hold (probe ladder, gradient suite); exit code 4.
class CheckFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ScheduleConfig {
    int steps = 300;
    double kappa = 90.0 / 255.0;
    std::string profile = "constant";
    double alpha_scale = 3.0;

    revive::sde::SdeSchedule build() const;
};

struct DegradationConfig {
    std::string tag = "lowlight";
    double gain = 0.55;
    double gamma = 1.3;
    double noise_std = 0.01;
    double transmission = 0.6;
    double airlight = 0.8;
    int streaks = 6;
    double angle = 15.0;
    double intensity = 0.5;
};

struct TrainConfig {
    int iterations = 200;
    int batch = 4;
    double learning_rate = 1e-4;
    int size = 16;
    int train_pairs = 64;
    bool learned_weights = false;
};

struct RestoreConfig {
    int pairs = 4;
    bool stochastic = false;
};

struct RoundtripConfig {
    int size = 32;
    bool stochastic = false;
};

struct ProbeConfig {
    std::array<int, 3> dilations{2, 4, 8};
    int channels = 16;
    int grad_trials = 5;
};

struct GenDataConfig {
    int count = 4;
    int size = 32;
};

struct PathConfig {
    std::string input;
    std::string reference;
    std::string checkpoint;
    std::string resume;
    std::string out = ".";
    std::string report;
};

struct RunConfig {
    std::string command;
    std::uint64_t seed = 0;
    ScheduleConfig schedule;
    revive::nn::NetworkSpec network;
    revive::loss::LossWeights loss;
    int bins = 64;
    revive::loss::CannyParams canny;
    DegradationConfig degradation;
    TrainConfig train;
    RestoreConfig restore;
    RoundtripConfig roundtrip;
    ProbeConfig probe;
    GenDataConfig gen_data;
    PathConfig paths;

    /// Throws ConfigError describing the first invalid field.
    void validate() const;
};

/// Overlays a JSON document onto `base`. Unknown keys and type mismatches throw
/// ConfigError naming the offending key path.
RunConfig merge_config(RunConfig base, const json& doc);
RunConfig load_config_file(const std::string& path, RunConfig base = {});

json to_json(const RunConfig& config);

}  // namespace harness
