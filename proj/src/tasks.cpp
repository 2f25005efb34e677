#include "nffb/tasks.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numeric>
#include <thread>

namespace nffb {

void pixel_center(int r, int c, int height, int width, float* xy) {
    xy[0] = (float(c) + 0.5f) / float(width);
    xy[1] = (float(r) + 0.5f) / float(height);
}

void sample_image_batch(const ImageTask& task, int batch, Pcg32& rng, Mat<float>& X,
                        Mat<float>& Y) {
    if (batch < 1) throw std::invalid_argument("sample_image_batch: batch must be >= 1");
    const int h = task.image.height, w = task.image.width;
    X.resize(2, batch);
    Y.resize(3, batch);
    for (int b = 0; b < batch; ++b) {
        int r = int(rng.below(std::uint32_t(h)));
        int c = int(rng.below(std::uint32_t(w)));
        pixel_center(r, c, h, w, X.col(b).data());
        for (int ch = 0; ch < 3; ++ch) Y(ch, b) = task.image.at(r, c, ch);
    }
}

void exhaustive_image_batch(const ImageTask& task, int batch, Pcg32& rng, Mat<float>& X,
                            Mat<float>& Y) {
    const int h = task.image.height, w = task.image.width;
    if (batch != h * w)
        throw std::invalid_argument("exhaustive_image_batch: batch must equal H*W");
    std::vector<std::uint32_t> order(size_t(batch));
    std::iota(order.begin(), order.end(), 0u);
    for (int i = batch - 1; i > 0; --i)
        std::swap(order[size_t(i)], order[rng.below(std::uint32_t(i) + 1)]);
    X.resize(2, batch);
    Y.resize(3, batch);
    for (int b = 0; b < batch; ++b) {
        int r = int(order[size_t(b)]) / w;
        int c = int(order[size_t(b)]) % w;
        pixel_center(r, c, h, w, X.col(b).data());
        for (int ch = 0; ch < 3; ++ch) Y(ch, b) = task.image.at(r, c, ch);
    }
}

SdfSplit sdf_split_counts(int batch) {
    if (batch < 1) throw std::invalid_argument("sdf_split_counts: batch must be >= 1");
    int c1 = int(std::floor(0.2 * double(batch)));
    int c2 = int(std::floor(0.5 * double(batch)));
    SdfSplit s;
    s.uniform = c1;
    s.near_surface = c2 - c1;
    s.on_surface = batch - c2;
    return s;
}

namespace {

void store_sdf_point(const Vec3d& p, double label, int col, Mat<float>& X, Mat<float>& Y) {
    for (int d = 0; d < 3; ++d) X(d, col) = float((p[d] + 1.0) * 0.5);
    Y(0, col) = float(label);
}

}  // namespace

void sample_sdf_batch(const SdfTask& task, int batch, Pcg32& rng, Mat<float>& X,
                      Mat<float>& Y) {
    if (batch < 1) throw std::invalid_argument("sample_sdf_batch: batch must be >= 1");
    X.resize(3, batch);
    Y.resize(1, batch);
    if (!task.points.empty()) {
        for (int b = 0; b < batch; ++b) {
            const auto& rec = task.points[rng.below(std::uint32_t(task.points.size()))];
            store_sdf_point({rec[0], rec[1], rec[2]}, rec[3], b, X, Y);
        }
        return;
    }
    if (!task.oracle) throw ConfigError("sdf task has neither an oracle nor points");
    const SdfShape& shape = *task.oracle;
    SdfSplit split = sdf_split_counts(batch);
    int col = 0;
    for (int i = 0; i < split.uniform; ++i, ++col) {
        Vec3d p = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
        store_sdf_point(p, shape.sdf(p), col, X, Y);
    }
    for (int i = 0; i < split.near_surface; ++i, ++col) {
        Vec3d p = shape.sample_surface(rng);
        for (int d = 0; d < 3; ++d)
            p[d] = std::clamp(p[d] + task.near_surface_sigma * rng.normal(), -1.0, 1.0);
        store_sdf_point(p, shape.sdf(p), col, X, Y);
    }
    for (int i = 0; i < split.on_surface; ++i, ++col)
        store_sdf_point(shape.sample_surface(rng), 0.0, col, X, Y);
}

namespace {

// Runs fn(0..n-1); inline when workers <= 1, else over a shared counter.
void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
    if (workers <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    auto body = [&] {
        for (;;) {
            int i = next.fetch_add(1);
            if (i >= n) return;
            fn(i);
        }
    };
    std::vector<std::thread> pool;
    int count = std::min(workers, n);
    pool.reserve(size_t(count - 1));
    for (int t = 1; t < count; ++t) pool.emplace_back(body);
    body();
    for (auto& th : pool) th.join();
}

Mat<float> forward_chunked(const Model<float>& model, const Mat<float>& X, int chunk) {
    Mat<float> out(model.cfg.d_out, X.cols());
    for (Eigen::Index lo = 0; lo < X.cols(); lo += chunk) {
        Eigen::Index len = std::min<Eigen::Index>(chunk, X.cols() - lo);
        out.middleCols(lo, len) = forward_values(model, Mat<float>(X.middleCols(lo, len)));
    }
    return out;
}

// Diverging ramp: inside shades toward blue, outside toward red, zero white.
Image slice_to_image(const Mat<float>& values, int res, float scale) {
    Image img(res, res);
    for (int r = 0; r < res; ++r)
        for (int c = 0; c < res; ++c) {
            float t = values(0, r * res + c) / scale;
            t = std::clamp(t, -1.0f, 1.0f);
            img.at(r, c, 0) = 1.0f + std::min(t, 0.0f);
            img.at(r, c, 1) = 1.0f - std::abs(t);
            img.at(r, c, 2) = 1.0f - std::max(t, 0.0f);
        }
    return img;
}

Mat<float> slice_points(int axis, float coord, int res) {
    Mat<float> X(3, res * res);
    int u = (axis + 1) % 3, v = (axis + 2) % 3;
    for (int r = 0; r < res; ++r)
        for (int c = 0; c < res; ++c) {
            float pu = -1.0f + 2.0f * (float(c) + 0.5f) / float(res);
            float pv = -1.0f + 2.0f * (float(r) + 0.5f) / float(res);
            int col = r * res + c;
            X(axis, col) = (coord + 1.0f) * 0.5f;
            X(u, col) = (pu + 1.0f) * 0.5f;
            X(v, col) = (pv + 1.0f) * 0.5f;
        }
    return X;
}

}  // namespace

Image render_image(const Model<float>& model, int height, int width, int chunk) {
    Mat<float> X(2, std::int64_t(height) * width);
    for (int r = 0; r < height; ++r)
        for (int c = 0; c < width; ++c)
            pixel_center(r, c, height, width, X.col(std::int64_t(r) * width + c).data());
    Mat<float> Y = forward_chunked(model, X, chunk);
    Image img(height, width);
    for (std::int64_t p = 0; p < Y.cols(); ++p)
        for (int ch = 0; ch < 3; ++ch)
            img.data[size_t(p) * 3 + ch] = std::clamp(Y(ch, p), 0.0f, 1.0f);
    return img;
}

std::vector<Image> render_level_images(const Model<float>& model, int height, int width,
                                       int chunk) {
    Mat<float> X(2, std::int64_t(height) * width);
    for (int r = 0; r < height; ++r)
        for (int c = 0; c < width; ++c)
            pixel_center(r, c, height, width, X.col(std::int64_t(r) * width + c).data());
    std::vector<Mat<float>> level_vals;
    for (Eigen::Index lo = 0; lo < X.cols(); lo += chunk) {
        Eigen::Index len = std::min<Eigen::Index>(chunk, X.cols() - lo);
        auto fwd = forward_batch(model, Mat<float>(X.middleCols(lo, len)));
        if (fwd.level_out.empty())
            throw ConfigError("this variant has no per-level outputs to dump");
        if (level_vals.empty())
            level_vals.assign(fwd.level_out.size(), Mat<float>(model.cfg.d_out, X.cols()));
        for (size_t l = 0; l < fwd.level_out.size(); ++l)
            level_vals[l].middleCols(lo, len) = fwd.tape.value(fwd.level_out[l]);
    }
    std::vector<Image> out;
    for (const auto& vals : level_vals) {
        Image img(height, width);
        for (std::int64_t p = 0; p < vals.cols(); ++p)
            for (int ch = 0; ch < 3; ++ch)
                img.data[size_t(p) * 3 + ch] = std::clamp(0.5f + vals(ch, p), 0.0f, 1.0f);
        out.push_back(std::move(img));
    }
    return out;
}

Image render_sdf_slice(const Model<float>& model, int axis, float coord, int res, float scale,
                       int chunk) {
    Mat<float> values = forward_chunked(model, slice_points(axis, coord, res), chunk);
    return slice_to_image(values, res, scale);
}

std::vector<Image> render_sdf_level_slices(const Model<float>& model, int axis, float coord,
                                           int res, float scale, int chunk) {
    Mat<float> X = slice_points(axis, coord, res);
    std::vector<Mat<float>> level_vals;
    for (Eigen::Index lo = 0; lo < X.cols(); lo += chunk) {
        Eigen::Index len = std::min<Eigen::Index>(chunk, X.cols() - lo);
        auto fwd = forward_batch(model, Mat<float>(X.middleCols(lo, len)));
        if (fwd.level_out.empty())
            throw ConfigError("this variant has no per-level outputs to dump");
        if (level_vals.empty())
            level_vals.assign(fwd.level_out.size(), Mat<float>(model.cfg.d_out, X.cols()));
        for (size_t l = 0; l < fwd.level_out.size(); ++l)
            level_vals[l].middleCols(lo, len) = fwd.tape.value(fwd.level_out[l]);
    }
    std::vector<Image> out;
    out.reserve(level_vals.size());
    for (const auto& vals : level_vals) out.push_back(slice_to_image(vals, res, scale));
    return out;
}

SdfEval sdf_eval_metrics(const Model<float>& model, const SdfShape& oracle, int n_surface,
                         int grid_k, Pcg32& rng, int chunk) {
    if (grid_k < 2) throw std::invalid_argument("sdf_eval_metrics: grid_k must be >= 2");
    SdfEval out;

    Mat<float> Xs(3, n_surface);
    for (int i = 0; i < n_surface; ++i) {
        Vec3d p = oracle.sample_surface(rng);
        for (int d = 0; d < 3; ++d) Xs(d, i) = float((p[d] + 1.0) * 0.5);
    }
    Mat<float> pred = forward_chunked(model, Xs, chunk);
    std::vector<float> abs_pred(size_t(n_surface));
    for (int i = 0; i < n_surface; ++i) abs_pred[size_t(i)] = std::abs(pred(0, i));
    auto mid = abs_pred.begin() + n_surface / 2;
    std::nth_element(abs_pred.begin(), mid, abs_pred.end());
    out.median_surface_abs = double(*mid);

    std::int64_t both = 0, either = 0;
    const std::int64_t total = std::int64_t(grid_k) * grid_k * grid_k;
    Mat<float> Xg(3, chunk);
    std::vector<bool> gt_inside(size_t(chunk));
    std::int64_t done = 0;
    while (done < total) {
        int len = int(std::min<std::int64_t>(chunk, total - done));
        for (int i = 0; i < len; ++i) {
            std::int64_t cell = done + i;
            int ix = int(cell % grid_k);
            int iy = int((cell / grid_k) % grid_k);
            int iz = int(cell / (std::int64_t(grid_k) * grid_k));
            Vec3d p = {-1.0 + 2.0 * (ix + 0.5) / grid_k, -1.0 + 2.0 * (iy + 0.5) / grid_k,
                       -1.0 + 2.0 * (iz + 0.5) / grid_k};
            for (int d = 0; d < 3; ++d) Xg(d, i) = float((p[d] + 1.0) * 0.5);
            gt_inside[size_t(i)] = oracle.sdf(p) < 0.0;
        }
        Mat<float> g = forward_values(model, Mat<float>(Xg.leftCols(len)));
        for (int i = 0; i < len; ++i) {
            bool pred_inside = g(0, i) < 0.0f;
            both += pred_inside && gt_inside[size_t(i)];
            either += pred_inside || gt_inside[size_t(i)];
        }
        done += len;
    }
    out.iou = either == 0 ? 1.0 : double(both) / double(either);
    return out;
}

int effective_threads(int configured) {
    int cap = configured;
    if (const char* env = std::getenv("NFFB_THREADS")) {
        int v = std::atoi(env);
        if (v >= 1) cap = std::min(cap, v);
    }
    return std::max(1, cap);
}

double train_step(Model<float>& model, AdamState<float>& adam, const Mat<float>& X,
                  const Mat<float>& Y, LossKind loss, float mape_eps, double lr,
                  const AdamConfig& adam_cfg, int chunk, int workers, Vec<float>& grad_buf) {
    const int total = int(X.cols());
    const int n_chunks = (total + chunk - 1) / chunk;
    std::vector<double> losses(size_t(n_chunks), 0.0);
    std::vector<Vec<float>> grads(size_t(n_chunks));
    const float scale = 1.0f / float(total);

    parallel_for(n_chunks, workers, [&](int k) {
        const int lo = k * chunk;
        const int len = std::min(chunk, total - lo);
        auto fwd = forward_batch(model, Mat<float>(X.middleCols(lo, len)));
        Mat<float> target = Y.middleCols(lo, len);
        float l = loss == LossKind::Mse
                      ? fwd.tape.mse_loss(fwd.y, target, scale)
                      : fwd.tape.mape_sq_loss(fwd.y, target, mape_eps, scale);
        grads[size_t(k)] = Vec<float>::Zero(model.params.size());
        fwd.tape.backward(grads[size_t(k)]);
        losses[size_t(k)] = double(l);
    });

    grad_buf.setZero();
    double batch_loss = 0.0;
    for (int k = 0; k < n_chunks; ++k) {
        batch_loss += losses[size_t(k)];
        grad_buf += grads[size_t(k)];
    }
    if (!std::isfinite(batch_loss)) throw NumericsError("train_step: non-finite batch loss");
    adam_step(model.params, grad_buf, adam, lr, adam_cfg);
    return batch_loss;
}

TrainResult train_loop(Model<float>& model, TrainState& state, const RunConfig& cfg,
                       LossKind loss, float mape_eps, const BatchFn& next_batch,
                       const EvalFn& eval_metric, const TrainHooks& hooks) {
    TrainResult result;
    const int workers = effective_threads(cfg.threads);
    const AdamConfig adam_cfg{cfg.beta1, cfg.beta2, cfg.adam_eps};
    Vec<float> grad_buf = Vec<float>::Zero(model.params.size());
    Mat<float> X, Y;

    Vec<float> good_params = model.params;
    TrainState good_state = state;

    auto wall_start = std::chrono::steady_clock::now();
    auto wall_now = [&] {
        if (cfg.deterministic) return 0.0;
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start)
            .count();
    };

    for (std::int64_t s = state.step; s < cfg.steps; ++s) {
        double lr = lr_at(s, cfg.base_lr, cfg.lr_half_every);
        next_batch(state.sample_rng, X, Y);
        double batch_loss;
        try {
            batch_loss = train_step(model, state.adam, X, Y, loss, mape_eps, lr, adam_cfg,
                                    cfg.chunk_size, workers, grad_buf);
        } catch (const NumericsError& e) {
            result.aborted = true;
            result.abort_reason = e.what();
            Model<float> good = model;
            good.params = good_params;
            if (hooks.on_abort) hooks.on_abort(good, good_state, result.abort_reason);
            return result;
        }
        state.step = s + 1;

        if (state.step % cfg.eval_interval == 0 || state.step == cfg.steps) {
            MetricsRow row;
            row.step = state.step;
            row.loss = batch_loss;
            row.metric = eval_metric ? eval_metric(model) : 0.0;
            row.lr = lr;
            row.wall_seconds = wall_now();
            result.rows.push_back(row);
            if (hooks.on_row) hooks.on_row(row);
            good_params = model.params;
            good_state = state;
        }
        if (cfg.checkpoint_interval > 0 && state.step % cfg.checkpoint_interval == 0 &&
            hooks.on_checkpoint)
            hooks.on_checkpoint(model, state);
    }
    return result;
}

std::string metrics_csv_header() { return "step,loss,metric,lr,wall_seconds\n"; }

std::string metrics_csv_line(const MetricsRow& row) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%lld,%.9g,%.9g,%.9g,%.3f\n",
                  static_cast<long long>(row.step), row.loss, row.metric, row.lr,
                  row.wall_seconds);
    return std::string(buf);
}

}  // namespace nffb
