#pragma once

#include "nffb/config.hpp"
#include "nffb/filter_bank.hpp"
#include "nffb/image.hpp"
#include "nffb/optim.hpp"
#include "nffb/sdf_shapes.hpp"

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace nffb {

struct ImageTask {
    Image image;
};

/// Signed-distance regression target: an analytic oracle, or labeled points
/// loaded from a file (in which case batches are drawn from the records and
/// the split machinery does not apply).
struct SdfTask {
    std::shared_ptr<SdfShape> oracle;
    std::vector<std::array<float, 4>> points;   // (x, y, z, sdf), domain [-1,1]^3
    std::vector<std::array<float, 4>> heldout;  // file mode: reserved metric slice
    double near_surface_sigma = 0.01;
};

struct MetricsRow {
    std::int64_t step = 0;
    double loss = 0.0;
    double metric = 0.0;  // psnr (image) / mape (sdf)
    double lr = 0.0;
    double wall_seconds = 0.0;
};

/// Pixel (r, c) maps to ((c+0.5)/W, (r+0.5)/H).
void pixel_center(int r, int c, int height, int width, float* xy);

/// Uniform random pixels; coordinates 2 x batch, colors 3 x batch.
void sample_image_batch(const ImageTask& task, int batch, Pcg32& rng, Mat<float>& X,
                        Mat<float>& Y);

/// Every pixel exactly once in a random order. batch must equal H*W.
void exhaustive_image_batch(const ImageTask& task, int batch, Pcg32& rng, Mat<float>& X,
                            Mat<float>& Y);

/// 20/30/50 uniform/near-surface/on-surface partition, by cumulative floors:
/// (floor(.2B), floor(.5B)-floor(.2B), B-floor(.5B)).
struct SdfSplit {
    int uniform = 0;
    int near_surface = 0;
    int on_surface = 0;
};
SdfSplit sdf_split_counts(int batch);

/// Points are produced in [-1,1]^3 (near-surface = surface + isotropic
/// Gaussian, clamped to the cube), labeled by the oracle, then mapped
/// affinely to [0,1]^3 for the model. X is 3 x batch, labels 1 x batch.
void sample_sdf_batch(const SdfTask& task, int batch, Pcg32& rng, Mat<float>& X,
                      Mat<float>& Y);

/// Query every pixel center once; output clamped to [0,1].
Image render_image(const Model<float>& model, int height, int width, int chunk = 4096);

/// Per-level output contributions rendered as images (levels with their own
/// heads only), mapped by 0.5 + o and clamped.
std::vector<Image> render_level_images(const Model<float>& model, int height, int width,
                                       int chunk = 4096);

/// Axis-aligned slice of the predicted field at `coord` on `axis`, colored by
/// a blue-white-red ramp: s is divided by `scale`, clamped to [-1,1]; negative
/// (inside) shades blue, positive shades red, zero is white.
Image render_sdf_slice(const Model<float>& model, int axis, float coord, int res,
                       float scale = 1.0f, int chunk = 4096);

std::vector<Image> render_sdf_level_slices(const Model<float>& model, int axis, float coord,
                                           int res, float scale = 1.0f, int chunk = 4096);

struct SdfEval {
    double median_surface_abs = 0.0;  // median |model| over fresh surface points
    double iou = 0.0;                 // inside-sign agreement on a K^3 voxel grid
};
SdfEval sdf_eval_metrics(const Model<float>& model, const SdfShape& oracle, int n_surface,
                         int grid_k, Pcg32& rng, int chunk = 8192);

enum class LossKind { Mse, MapeSq };

/// Optimizer state, loop position, and the sampling stream — everything a
/// checkpoint needs to resume a run exactly.
struct TrainState {
    AdamState<float> adam;
    std::int64_t step = 0;
    Pcg32 sample_rng;

    static TrainState fresh(const Model<float>& model, std::uint64_t seed) {
        TrainState s;
        s.adam = AdamState<float>::zeros(model.params.size());
        s.sample_rng = Pcg32(seed, /*stream=*/1);
        return s;
    }
};

struct TrainHooks {
    std::function<void(const MetricsRow&)> on_row;
    std::function<void(const Model<float>&, const TrainState&)> on_checkpoint;
    std::function<void(const Model<float>&, const TrainState&, const std::string&)> on_abort;
};

struct TrainResult {
    std::vector<MetricsRow> rows;
    bool aborted = false;
    std::string abort_reason;
};

using BatchFn = std::function<void(Pcg32&, Mat<float>&, Mat<float>&)>;
using EvalFn = std::function<double(const Model<float>&)>;

/// sample -> forward -> loss -> backward -> adam, from state.step up to
/// cfg.steps. Batches run in fixed-size chunks accumulated in chunk order, so
/// results do not depend on the worker count. Non-finite losses or gradients
/// abort the run and hand the last snapshot taken at a metrics row to
/// on_abort.
TrainResult train_loop(Model<float>& model, TrainState& state, const RunConfig& cfg,
                       LossKind loss, float mape_eps, const BatchFn& next_batch,
                       const EvalFn& eval_metric, const TrainHooks& hooks = {});

/// One optimizer step over an explicit batch; returns the batch loss.
double train_step(Model<float>& model, AdamState<float>& adam, const Mat<float>& X,
                  const Mat<float>& Y, LossKind loss, float mape_eps, double lr,
                  const AdamConfig& adam_cfg, int chunk, int workers, Vec<float>& grad_buf);

/// Worker count: config value capped by the NFFB_THREADS environment variable.
int effective_threads(int configured);

std::string metrics_csv_header();
std::string metrics_csv_line(const MetricsRow& row);

}  // namespace nffb
