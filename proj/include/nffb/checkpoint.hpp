#pragma once

#include "nffb/config.hpp"
#include "nffb/tasks.hpp"

#include <string>

namespace nffb {

/// Binary checkpoint: "NFFB" magic, u32 format version, the canonical config
/// text (u32 length prefix), the flat parameter vector, the Adam moments and
/// step counter, the loop position, and the sampling RNG state. All scalars
/// little-endian; parameters and moments are 32-bit floats. Round-trips
/// bit-exactly.
struct Checkpoint {
    RunConfig config;
    Vec<float> params;
    AdamState<float> adam;
    std::int64_t step = 0;
    std::uint64_t rng_state = 0;
    std::uint64_t rng_inc = 0;
};

void save_checkpoint(const Model<float>& model, const TrainState& state,
                     const RunConfig& cfg, const std::string& path);

Checkpoint read_checkpoint(const std::string& path);

/// Rebuild the model and training state a checkpoint describes; fails if the
/// stored parameter count disagrees with the config echo.
std::pair<Model<float>, TrainState> load_checkpoint(const std::string& path,
                                                    RunConfig* cfg_out = nullptr);

}  // namespace nffb
