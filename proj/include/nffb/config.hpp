#pragma once

#include "nffb/filter_bank.hpp"

#include <cstdint>
#include <string>

namespace nffb {

/// One experiment: task, variant, model hyperparameters, training settings,
/// and file paths. Defaults follow the task presets; `task = ...` must come
/// before any key it would otherwise overwrite.
struct RunConfig {
    std::string task = "image";     // image | sdf
    std::string variant = "full";   // full | only_grid | grid_ff | only_mlp

    // model
    int levels = 8;
    int width = 96;
    double alpha = 100.0;
    int n_min = 64;
    double c_g = 1.5;
    int table_log2 = 17;
    int feature_dim = 2;
    double sigma_min = 5.0;
    double c_f = 2.0;

    // training
    std::int64_t steps = 50000;
    int batch_size = 16384;
    std::uint64_t seed = 1;
    bool deterministic = false;
    double base_lr = 1e-4;
    std::int64_t lr_half_every = 5000;
    double beta1 = 0.9;
    double beta2 = 0.99;
    double adam_eps = 1e-8;
    std::int64_t eval_interval = 500;
    std::int64_t checkpoint_interval = 0;  // 0 = final checkpoint only
    int chunk_size = 4096;
    int threads = 1;

    // task inputs
    std::string image_path;
    std::string points_path;
    std::string shape = "sphere";
    double near_surface_sigma = 0.01;
    double mape_eps = 0.01;
    std::string out_dir = "out";

    int dims() const { return task == "sdf" ? 3 : 2; }
    int d_out() const { return task == "sdf" ? 1 : 3; }

    FilterBankConfig model_config() const;
    void apply_task_preset(const std::string& task_name);
    void validate() const;
};

/// Parse the line-oriented `key = value` format (with optional [section]
/// headers, '#' comments). Unknown keys, bad values, and bad sections fail
/// with the offending line number.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Apply one `key = value` override outside a file (CLI flags, sweeps).
void apply_override(RunConfig& cfg, const std::string& key, const std::string& value);

/// Full key = value dump; stable ordering, round-trips through parse_config.
std::string canonical_text(const RunConfig& cfg);

}  // namespace nffb
