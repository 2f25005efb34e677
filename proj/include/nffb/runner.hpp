#pragma once

#include "nffb/checkpoint.hpp"
#include "nffb/config.hpp"
#include "nffb/tasks.hpp"

#include <iosfwd>
#include <string>

namespace nffb {

struct RunArtifacts {
    std::vector<MetricsRow> rows;
    double final_metric = 0.0;  // psnr (image) / mape (sdf)
    std::int64_t param_total = 0;
    std::string checkpoint_path;
    bool aborted = false;
    std::string abort_reason;
};

/// Train per config: writes metrics.csv, the final render (or SDF slices),
/// and model.nffb into cfg.out_dir. `resume_path` continues from a
/// checkpoint; `log` (may be null) receives the config echo and progress.
RunArtifacts run_fit(const RunConfig& cfg, const std::string& resume_path = "",
                     std::ostream* log = nullptr);

/// Load a checkpoint and report task metrics against the stored (or given)
/// reference.
struct EvalReport {
    std::string task;
    double psnr = 0.0, ssim = 0.0;           // image
    double surface_error = 0.0, iou = 0.0;   // sdf (analytic oracle)
    double mape = 0.0;                       // sdf
};
EvalReport run_eval(const std::string& checkpoint_path, const RunConfig& overrides,
                    bool have_overrides, std::ostream* log = nullptr);

/// Build the SdfTask a config describes (analytic shape or point file).
SdfTask make_sdf_task(const RunConfig& cfg);

/// Eval metric used in metrics rows: image -> PSNR of the full render; sdf ->
/// mean relative-squared error on a held-out batch drawn deterministically
/// from the seed.
EvalFn make_eval_fn(const RunConfig& cfg, const ImageTask& task);
EvalFn make_eval_fn(const RunConfig& cfg, const SdfTask& task);

}  // namespace nffb
