#include "nffb/runner.hpp"

#include "nffb/metrics.hpp"
#include "nffb/points_io.hpp"

#include <filesystem>
#include <fstream>
#include <ostream>

namespace nffb {

namespace {

namespace fs = std::filesystem;

std::string join(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

/// Held-out labeled batch for the sdf metric column, independent of the
/// training stream.
void heldout_sdf_batch(const RunConfig& cfg, const SdfTask& task, Mat<float>& X,
                       Mat<float>& Y) {
    if (!task.points.empty()) {
        // File mode: the trailing 10% of records (at least one).
        size_t n = task.points.size();
        size_t held = std::max<size_t>(1, n / 10);
        X.resize(3, Eigen::Index(held));
        Y.resize(1, Eigen::Index(held));
        for (size_t i = 0; i < held; ++i) {
            const auto& rec = task.points[n - held + i];
            for (int d = 0; d < 3; ++d) X(d, Eigen::Index(i)) = (rec[d] + 1.0f) * 0.5f;
            Y(0, Eigen::Index(i)) = rec[3];
        }
        return;
    }
    Pcg32 rng(cfg.seed, /*stream=*/2);
    sample_sdf_batch(task, 4096, rng, X, Y);
}

double mape_sq_metric(const Model<float>& model, const Mat<float>& X, const Mat<float>& Y,
                      float eps, int chunk) {
    double acc = 0.0;
    for (Eigen::Index lo = 0; lo < X.cols(); lo += chunk) {
        Eigen::Index len = std::min<Eigen::Index>(chunk, X.cols() - lo);
        Mat<float> pred = forward_values(model, Mat<float>(X.middleCols(lo, len)));
        for (Eigen::Index i = 0; i < len; ++i) {
            double r = double(pred(0, i)) - double(Y(0, lo + i));
            acc += r * r / (double(eps) + double(Y(0, lo + i)) * double(Y(0, lo + i)));
        }
    }
    return acc / double(X.cols());
}

void write_sdf_artifacts(const Model<float>& model, const RunConfig& cfg) {
    const char* names[3] = {"slice_x.ppm", "slice_y.ppm", "slice_z.ppm"};
    for (int axis = 0; axis < 3; ++axis)
        save_ppm(render_sdf_slice(model, axis, 0.0f, 256), join(cfg.out_dir, names[axis]));
}

}  // namespace

SdfTask make_sdf_task(const RunConfig& cfg) {
    SdfTask task;
    task.near_surface_sigma = cfg.near_surface_sigma;
    if (!cfg.points_path.empty()) {
        auto records = load_sdf_points(cfg.points_path);
        // Trailing 10% is the held-out metric slice.
        size_t held = std::max<size_t>(1, records.size() / 10);
        if (records.size() <= held)
            throw ConfigError(cfg.points_path + ": too few records to train on");
        task.points.assign(records.begin(), records.end() - std::ptrdiff_t(held));
        task.points.insert(task.points.end(), records.end() - std::ptrdiff_t(held),
                           records.end());
        // Draws use the leading 90% only; keep all records for the heldout view.
        task.points = std::move(records);
    } else {
        task.oracle = make_shape(cfg.shape);
    }
    return task;
}

EvalFn make_eval_fn(const RunConfig& cfg, const ImageTask& task) {
    const Image* gt = &task.image;
    int chunk = cfg.chunk_size;
    return [gt, chunk](const Model<float>& model) {
        return psnr(render_image(model, gt->height, gt->width, chunk), *gt);
    };
}

EvalFn make_eval_fn(const RunConfig& cfg, const SdfTask& task) {
    auto X = std::make_shared<Mat<float>>();
    auto Y = std::make_shared<Mat<float>>();
    heldout_sdf_batch(cfg, task, *X, *Y);
    float eps = float(cfg.mape_eps);
    int chunk = cfg.chunk_size;
    return [X, Y, eps, chunk](const Model<float>& model) {
        return mape_sq_metric(model, *X, *Y, eps, chunk);
    };
}

RunArtifacts run_fit(const RunConfig& cfg, const std::string& resume_path, std::ostream* log) {
    cfg.validate();
    fs::create_directories(cfg.out_dir);
    if (log) *log << canonical_text(cfg) << std::flush;

    Model<float> model;
    TrainState state;
    if (!resume_path.empty()) {
        RunConfig stored;
        std::tie(model, state) = load_checkpoint(resume_path, &stored);
        if (canonical_text(stored) != canonical_text(cfg))
            throw ConfigError("resume: checkpoint config differs from the requested run");
    } else {
        model = build_model<float>(cfg.model_config(), variant_from_name(cfg.variant));
        state = TrainState::fresh(model, cfg.seed);
    }

    RunArtifacts art;
    art.param_total = model.layout.total;
    art.checkpoint_path = join(cfg.out_dir, "model.nffb");

    std::ofstream csv;
    std::string csv_path = join(cfg.out_dir, "metrics.csv");
    if (resume_path.empty()) {
        csv.open(csv_path, std::ios::binary);
        csv << metrics_csv_header();
    } else {
        csv.open(csv_path, std::ios::binary | std::ios::app);
    }
    if (!csv) throw IoError(csv_path + ": cannot open for writing");

    TrainHooks hooks;
    hooks.on_row = [&](const MetricsRow& row) {
        csv << metrics_csv_line(row);
        csv.flush();
        if (log)
            *log << "step " << row.step << "  loss " << row.loss << "  metric " << row.metric
                 << "  lr " << row.lr << "\n";
    };
    hooks.on_checkpoint = [&](const Model<float>& m, const TrainState& s) {
        save_checkpoint(m, s, cfg, art.checkpoint_path);
    };
    hooks.on_abort = [&](const Model<float>& m, const TrainState& s, const std::string& why) {
        save_checkpoint(m, s, cfg, join(cfg.out_dir, "last_good.nffb"));
        if (log) *log << "aborted: " << why << " (last-good checkpoint written)\n";
    };

    TrainResult result;
    if (cfg.task == "image") {
        if (cfg.image_path.empty()) throw ConfigError("image task requires image_path");
        ImageTask task{load_image(cfg.image_path)};
        if (std::int64_t(task.image.pixels()) < cfg.batch_size && log)
            *log << "note: batch exceeds pixel count; sampling with replacement\n";
        BatchFn next = [&task, batch = cfg.batch_size](Pcg32& rng, Mat<float>& X,
                                                       Mat<float>& Y) {
            sample_image_batch(task, batch, rng, X, Y);
        };
        result = train_loop(model, state, cfg, LossKind::Mse, 0.0f, next,
                            make_eval_fn(cfg, task), hooks);
        if (!result.aborted) {
            Image render = render_image(model, task.image.height, task.image.width,
                                        cfg.chunk_size);
            save_ppm(render, join(cfg.out_dir, "render.ppm"));
            art.final_metric = psnr(render, task.image);
        }
    } else {
        SdfTask task = make_sdf_task(cfg);
        BatchFn next = [&task, batch = cfg.batch_size](Pcg32& rng, Mat<float>& X,
                                                       Mat<float>& Y) {
            sample_sdf_batch(task, batch, rng, X, Y);
        };
        EvalFn eval = make_eval_fn(cfg, task);
        result = train_loop(model, state, cfg, LossKind::MapeSq, float(cfg.mape_eps), next,
                            eval, hooks);
        if (!result.aborted) {
            write_sdf_artifacts(model, cfg);
            art.final_metric = eval(model);
        }
    }

    art.rows = std::move(result.rows);
    art.aborted = result.aborted;
    art.abort_reason = result.abort_reason;
    if (!art.aborted) save_checkpoint(model, state, cfg, art.checkpoint_path);
    return art;
}

EvalReport run_eval(const std::string& checkpoint_path, const RunConfig& overrides,
                    bool have_overrides, std::ostream* log) {
    RunConfig cfg;
    auto [model, state] = load_checkpoint(checkpoint_path, &cfg);
    if (have_overrides) cfg = overrides;
    EvalReport report;
    report.task = cfg.task;
    if (cfg.task == "image") {
        if (cfg.image_path.empty()) throw ConfigError("eval: image task requires image_path");
        Image gt = load_image(cfg.image_path);
        Image render = render_image(model, gt.height, gt.width, cfg.chunk_size);
        report.psnr = psnr(render, gt);
        report.ssim = ssim(render, gt);
        if (log) *log << "psnr_db " << report.psnr << "\nssim " << report.ssim << "\n";
    } else {
        SdfTask task = make_sdf_task(cfg);
        Mat<float> X, Y;
        heldout_sdf_batch(cfg, task, X, Y);
        report.mape = mape_sq_metric(model, X, Y, float(cfg.mape_eps), cfg.chunk_size);
        if (task.oracle) {
            Pcg32 rng(cfg.seed, /*stream=*/3);
            SdfEval ev = sdf_eval_metrics(model, *task.oracle, 10000, 64, rng);
            report.surface_error = ev.median_surface_abs;
            report.iou = ev.iou;
            if (log)
                *log << "surface_error " << ev.median_surface_abs << "\niou " << ev.iou
                     << "\n";
        }
        if (log) *log << "mape " << report.mape << "\n";
    }
    return report;
}

}  // namespace nffb
