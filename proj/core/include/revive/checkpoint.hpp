#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "revive/blocks.hpp"
#include "revive/tensor.hpp"

namespace revive::nn {

/// Named-array container written as a little-endian binary file:
///
///   bytes 0..3   magic "RVCK"
///   u32          format version (1)
///   u32, bytes   metadata length and UTF-8 text (free-form; the CLI stores JSON)
///   u32          array count
///   per array, in insertion order:
///     u32, bytes  name length and name
///     u64 x 4     shape n, c, h, w
///     f64 x numel values, row-major NCHW
struct Checkpoint {
    static constexpr std::uint32_t kVersion = 1;

    std::string metadata;
    std::vector<std::pair<std::string, Tensor>> arrays;

    const Tensor* find(const std::string& name) const;
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

std::string encode_checkpoint(const Checkpoint& checkpoint);
Checkpoint decode_checkpoint(const std::string& bytes);

/// Copies values for every entry of `params` from arrays named prefix + name.
/// Throws IoError on a missing name or a shape mismatch.
void assign_parameters(const ParamList& params, const Checkpoint& checkpoint,
                       const std::string& prefix = "");

}  // namespace revive::nn
