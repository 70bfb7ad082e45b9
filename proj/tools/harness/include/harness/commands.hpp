#pragma once

#include <string>
#include <vector>

#include "harness/config.hpp"
#include "revive/denoiser.hpp"
#include "revive/synth.hpp"

namespace harness {

namespace synth = revive::synth;

inline constexpr int kSchemaVersion = 1;

/// Outcome of one command: the JSON report and the exit status it implies.
struct CommandResult {
    json report;
    int exit_code = 0;
};

CommandResult cmd_sde_roundtrip(const RunConfig& config);
CommandResult cmd_train_toy(const RunConfig& config);
CommandResult cmd_restore(const RunConfig& config);
CommandResult cmd_probe(const RunConfig& config);
CommandResult cmd_metrics(const RunConfig& config);
CommandResult cmd_gen_data(const RunConfig& config);

/// Dispatches on config.command, writes the report (to paths.report if set)
/// and returns the exit code. Errors propagate as exceptions.
CommandResult run_command(const RunConfig& config);

/// Maps an in-flight exception to the documented exit code:
/// config 2, I/O 3, numeric/shape/assertion 4, anything else 1.
int exit_code_for_current_exception(std::string& message);

// Shared data plumbing, exposed for tests.
synth::ImagePair make_pair(const RunConfig& config, std::size_t size, std::uint64_t seed);
revive::Tensor stack_batch(const std::vector<revive::Tensor>& items);
revive::Tensor batch_item(const revive::Tensor& batch, std::size_t n);

/// Seeds for the training pool and the held-out restore set never overlap.
std::uint64_t train_pair_seed(std::uint64_t seed, int k);
std::uint64_t heldout_pair_seed(std::uint64_t seed, int k);

/// Mean of the first and last `window` entries, and the relative drop between them.
struct LossTrend {
    double head = 0.0;
    double tail = 0.0;
    double reduction = 0.0;
};
LossTrend loss_trend(const std::vector<double>& curve, std::size_t window = 10);

/// Replaces non-finite numbers by "inf", "-inf" or "nan" strings.
json json_number(double value);

}  // namespace harness
