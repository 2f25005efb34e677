#pragma once

#include "nffb/common.hpp"
#include "nffb/fourier.hpp"
#include "nffb/hash_grid.hpp"
#include "nffb/tape.hpp"

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace nffb {

/// Full architecture record. Levels and trunk layers are 1:1; the frequency
/// matrix at each level has as many rows as the trunk is wide.
struct FilterBankConfig {
    int dims = 2;          // input dimension (2 images, 3 SDF)
    int d_out = 3;         // output dimension (3 RGB, 1 signed distance)
    int levels = 6;
    int width = 64;
    double alpha = 100.0;  // sine frequency scale
    int base_resolution = 16;
    double growth = 1.5;
    std::int64_t table_capacity = 1 << 14;
    int feature_dim = 2;
    double sigma_min = 5.0;
    double sigma_growth = 2.0;
    std::uint64_t seed = 1;

    void validate() const {
        if (dims != 2 && dims != 3) throw ConfigError("config: dims must be 2 or 3");
        if (d_out < 1) throw ConfigError("config: d_out must be >= 1");
        if (levels < 1) throw ConfigError("config: levels must be >= 1");
        if (width < 1) throw ConfigError("config: width must be >= 1");
        if (!(alpha > 0)) throw ConfigError("config: alpha must be positive");
        if (base_resolution < 1) throw ConfigError("config: base_resolution must be >= 1");
        if (!(growth >= 1)) throw ConfigError("config: growth must be >= 1");
        if (feature_dim < 1) throw ConfigError("config: feature_dim must be >= 1");
        if (!(sigma_min > 0)) throw ConfigError("config: sigma_min must be positive");
        if (!(sigma_growth >= 1)) throw ConfigError("config: sigma_growth must be >= 1");
        if (table_capacity < 1 || (table_capacity & (table_capacity - 1)) != 0)
            throw ConfigError("config: table_capacity must be a power of two");
    }
};

enum class Variant { Full, OnlyGrid, GridFF, OnlyMlp };

inline Variant variant_from_name(const std::string& name) {
    if (name == "full") return Variant::Full;
    if (name == "only_grid") return Variant::OnlyGrid;
    if (name == "grid_ff") return Variant::GridFF;
    if (name == "only_mlp") return Variant::OnlyMlp;
    throw ConfigError("unknown variant: " + name);
}

inline const char* variant_name(Variant v) {
    switch (v) {
        case Variant::Full: return "full";
        case Variant::OnlyGrid: return "only_grid";
        case Variant::GridFF: return "grid_ff";
        case Variant::OnlyMlp: return "only_mlp";
    }
    return "?";
}

enum class SegKind {
    LayerW,     // trunk weight, level i
    LayerB,     // trunk bias, level i
    HeadW,      // per-level output weight
    HeadB,      // per-level output bias
    Frequency,  // Fourier matrix B (full/grid_ff) or linear lift (only_grid)
    Table,      // grid feature table, stored feature-major
    TrunkW,     // hidden layer of the concat trunk (grid_ff / only_grid)
    TrunkB,
    OutW,       // single output head (concat trunk and only_mlp)
    OutB,
};

struct Segment {
    SegKind kind;
    int level = -1;
    ParamSeg seg;
};

/// Ordered, named view of the flat parameter vector: the order below is the
/// serialization order and the init draw order, so identical seeds give
/// bit-identical models.
struct ParamLayout {
    std::vector<Segment> segments;
    std::int64_t total = 0;

    ParamSeg find(SegKind kind, int level = -1) const {
        for (const auto& s : segments)
            if (s.kind == kind && s.level == level) return s.seg;
        throw std::logic_error("param segment not found");
    }
};

namespace detail {

inline void push_seg(ParamLayout& layout, SegKind kind, int level, int rows, int cols) {
    Segment s;
    s.kind = kind;
    s.level = level;
    s.seg.offset = layout.total;
    s.seg.rows = rows;
    s.seg.cols = cols;
    layout.segments.push_back(s);
    layout.total += s.seg.size();
}

}  // namespace detail

inline std::vector<GridLevelRef> make_level_refs(const FilterBankConfig& cfg) {
    std::vector<GridLevelRef> refs;
    refs.reserve(cfg.levels);
    for (int l = 0; l < cfg.levels; ++l) {
        GridLevelConfig gc;
        gc.level = l;
        gc.base_resolution = cfg.base_resolution;
        gc.growth = cfg.growth;
        gc.table_capacity = cfg.table_capacity;
        gc.feature_dim = cfg.feature_dim;
        gc.dims = cfg.dims;
        refs.push_back(make_level_ref(gc));
    }
    return refs;
}

/// Trunk width used by `variant` (only_mlp widens to match parameter count).
int matched_mlp_width(const FilterBankConfig& cfg);

inline ParamLayout make_layout(const FilterBankConfig& cfg, Variant variant,
                               const std::vector<GridLevelRef>& levels) {
    ParamLayout layout;
    const int w = cfg.width;
    const int F = cfg.feature_dim;
    switch (variant) {
        case Variant::Full:
        case Variant::OnlyGrid:
            // only_grid keeps the same shapes; its Frequency segment acts as a
            // linear lift instead of a Fourier matrix.
            if (variant == Variant::Full) {
                for (int l = 0; l < cfg.levels; ++l) {
                    detail::push_seg(layout, SegKind::LayerW, l, w, l == 0 ? cfg.dims : w);
                    detail::push_seg(layout, SegKind::LayerB, l, w, 1);
                    detail::push_seg(layout, SegKind::HeadW, l, cfg.d_out, w);
                    detail::push_seg(layout, SegKind::HeadB, l, cfg.d_out, 1);
                    detail::push_seg(layout, SegKind::Frequency, l, w, F);
                    detail::push_seg(layout, SegKind::Table, l, F, int(levels[l].rows));
                }
            } else {
                for (int l = 0; l < cfg.levels; ++l) {
                    detail::push_seg(layout, SegKind::Frequency, l, w, F);
                    detail::push_seg(layout, SegKind::Table, l, F, int(levels[l].rows));
                }
                detail::push_seg(layout, SegKind::TrunkW, -1, w, w * cfg.levels);
                detail::push_seg(layout, SegKind::TrunkB, -1, w, 1);
                detail::push_seg(layout, SegKind::OutW, -1, cfg.d_out, w);
                detail::push_seg(layout, SegKind::OutB, -1, cfg.d_out, 1);
            }
            break;
        case Variant::GridFF:
            for (int l = 0; l < cfg.levels; ++l) {
                detail::push_seg(layout, SegKind::Frequency, l, w, F);
                detail::push_seg(layout, SegKind::Table, l, F, int(levels[l].rows));
            }
            detail::push_seg(layout, SegKind::TrunkW, -1, w, w * cfg.levels);
            detail::push_seg(layout, SegKind::TrunkB, -1, w, 1);
            detail::push_seg(layout, SegKind::OutW, -1, cfg.d_out, w);
            detail::push_seg(layout, SegKind::OutB, -1, cfg.d_out, 1);
            break;
        case Variant::OnlyMlp: {
            const int mw = matched_mlp_width(cfg);
            for (int l = 0; l < cfg.levels; ++l) {
                detail::push_seg(layout, SegKind::LayerW, l, mw, l == 0 ? cfg.dims : mw);
                detail::push_seg(layout, SegKind::LayerB, l, mw, 1);
            }
            detail::push_seg(layout, SegKind::OutW, -1, cfg.d_out, mw);
            detail::push_seg(layout, SegKind::OutB, -1, cfg.d_out, 1);
            break;
        }
    }
    return layout;
}

inline std::int64_t param_count(const FilterBankConfig& cfg, Variant variant) {
    auto levels = make_level_refs(cfg);
    return make_layout(cfg, variant, levels).total;
}

inline int matched_mlp_width(const FilterBankConfig& cfg) {
    const std::int64_t target = param_count(cfg, Variant::Full);
    auto count = [&](std::int64_t w) {
        std::int64_t c = w * cfg.dims + w;                       // first layer
        c += (cfg.levels - 1) * (w * w + w);                     // remaining layers
        c += std::int64_t(cfg.d_out) * w + cfg.d_out;            // single head
        return c;
    };
    int w = 1;
    while (count(w) < target) ++w;
    if (w > 1 && target - count(w - 1) < count(w) - target) --w;
    return w;
}

/// A built model: config, variant, parameter layout, grid levels, and the
/// flat trainable vector.
template <class S>
struct Model {
    FilterBankConfig cfg;
    Variant variant = Variant::Full;
    ParamLayout layout;
    std::vector<GridLevelRef> levels;
    Vec<S> params;

    int trunk_width() const {
        return variant == Variant::OnlyMlp ? matched_mlp_width(cfg) : cfg.width;
    }
};

/// Deterministic init. One generator, drawn in segment order:
///   first trunk layer U(-1/fan_in, 1/fan_in); deeper trunk layers
///   U(+-sqrt(6/fan_in)/alpha); heads U(+-1/sqrt(fan_in)); frequency matrices
///   N(0, sigma_l) with sigma_l = sigma_min * sigma_growth^l (only_grid lifts
///   use the head rule); tables U(+-1e-4); concat-trunk hidden layers
///   U(+-sqrt(6/fan_in)).
template <class S>
Model<S> build_model(const FilterBankConfig& cfg, Variant variant) {
    cfg.validate();
    Model<S> model;
    model.cfg = cfg;
    model.variant = variant;
    model.levels = make_level_refs(cfg);
    model.layout = make_layout(cfg, variant, model.levels);
    model.params = Vec<S>::Zero(model.layout.total);
    if (variant != Variant::OnlyMlp)
        for (size_t l = 0; l < model.levels.size(); ++l)
            model.levels[l].table = model.layout.find(SegKind::Table, int(l));

    Pcg32 rng(cfg.seed, /*stream=*/0);
    auto fill_uniform = [&](ParamSeg seg, double bound) {
        for (std::int64_t i = 0; i < seg.size(); ++i)
            model.params[seg.offset + i] = S(rng.uniform(-bound, bound));
    };
    for (const auto& s : model.layout.segments) {
        switch (s.kind) {
            case SegKind::LayerW:
            case SegKind::LayerB: {
                int fan_in = s.level == 0 ? cfg.dims
                                          : model.layout.find(SegKind::LayerW, s.level).cols;
                double bound = s.level == 0 ? 1.0 / fan_in
                                            : std::sqrt(6.0 / fan_in) / cfg.alpha;
                fill_uniform(s.seg, bound);
                break;
            }
            case SegKind::HeadW:
            case SegKind::HeadB:
                fill_uniform(s.seg, 1.0 / std::sqrt(double(cfg.width)));
                break;
            case SegKind::Frequency:
                if (variant == Variant::OnlyGrid) {
                    fill_uniform(s.seg, 1.0 / std::sqrt(double(cfg.feature_dim)));
                } else {
                    MatMap<S> B(model.params.data() + s.seg.offset, s.seg.rows, s.seg.cols);
                    init_fourier(B, fourier_sigma(s.level, cfg.sigma_min, cfg.sigma_growth),
                                 rng);
                }
                break;
            case SegKind::Table:
                fill_uniform(s.seg, 1e-4);
                break;
            case SegKind::TrunkW:
            case SegKind::TrunkB:
                fill_uniform(s.seg, std::sqrt(6.0 / (double(cfg.width) * cfg.levels)));
                break;
            case SegKind::OutW:
            case SegKind::OutB: {
                int fan_in = model.layout.find(SegKind::OutW).cols;
                fill_uniform(s.seg, 1.0 / std::sqrt(double(fan_in)));
                break;
            }
        }
    }
    return model;
}

template <class S>
struct Forward {
    Tape<S> tape;
    int y = -1;                   // field estimate, d_out x batch
    std::vector<int> level_out;   // per-level outputs (variants with heads)

    explicit Forward(const Vec<S>& params) : tape(params) {}
};

/// Record one batched forward pass. X is dims x batch with entries in [0,1].
template <class S>
Forward<S> forward_batch(const Model<S>& model, const Mat<S>& X) {
    if (X.rows() != model.cfg.dims)
        throw std::invalid_argument("forward: point dimension mismatch");
    if (!((X.array() >= S(0)) && (X.array() <= S(1))).all())
        throw std::invalid_argument("forward: points outside [0,1]^n");

    Forward<S> fwd(model.params);
    Tape<S>& t = fwd.tape;
    const auto& lo = model.layout;
    const S alpha = S(model.cfg.alpha);
    int x = t.input(X);

    switch (model.variant) {
        case Variant::Full: {
            int prev = x;
            std::vector<int> heads;
            for (int l = 0; l < model.cfg.levels; ++l) {
                int f = t.sine(t.affine(prev, lo.find(SegKind::LayerW, l),
                                        lo.find(SegKind::LayerB, l)),
                               alpha);
                int v = t.interpolate(x, model.levels[l]);
                int g = t.add(f, t.fourier(v, lo.find(SegKind::Frequency, l)));
                heads.push_back(t.affine(g, lo.find(SegKind::HeadW, l),
                                         lo.find(SegKind::HeadB, l)));
                prev = g;
            }
            fwd.level_out = heads;
            fwd.y = t.sum(heads);
            break;
        }
        case Variant::OnlyGrid:
        case Variant::GridFF: {
            std::vector<int> parts;
            for (int l = 0; l < model.cfg.levels; ++l) {
                int v = t.interpolate(x, model.levels[l]);
                ParamSeg fs = lo.find(SegKind::Frequency, l);
                parts.push_back(model.variant == Variant::GridFF
                                    ? t.fourier(v, fs)
                                    : t.affine(v, fs, ParamSeg{}));
            }
            int h = t.relu(t.affine(t.concat(parts), lo.find(SegKind::TrunkW),
                                    lo.find(SegKind::TrunkB)));
            fwd.y = t.affine(h, lo.find(SegKind::OutW), lo.find(SegKind::OutB));
            break;
        }
        case Variant::OnlyMlp: {
            int prev = x;
            for (int l = 0; l < model.cfg.levels; ++l)
                prev = t.sine(t.affine(prev, lo.find(SegKind::LayerW, l),
                                       lo.find(SegKind::LayerB, l)),
                              alpha);
            fwd.y = t.affine(prev, lo.find(SegKind::OutW), lo.find(SegKind::OutB));
            break;
        }
    }
    return fwd;
}

/// Forward values only (tape discarded).
template <class S>
Mat<S> forward_values(const Model<S>& model, const Mat<S>& X) {
    auto fwd = forward_batch(model, X);
    return fwd.tape.value(fwd.y);
}

}  // namespace nffb
