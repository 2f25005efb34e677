#pragma once

#include "nffb/common.hpp"

#include <array>
#include <cmath>
#include <cstdint>

namespace nffb {

enum class GridMode { Dense, Hashed };

/// Static description of one resolution level's vertex grid.
struct GridLevelConfig {
    int level = 0;
    int base_resolution = 16;       // coarsest grid resolution
    double growth = 1.5;            // per-level resolution scale, >= 1
    std::int64_t table_capacity = 1 << 14;  // power of two
    int feature_dim = 2;
    int dims = 2;                   // 2 or 3
};

/// Resolution of level `l`: floor(base * growth^l), at least 1.
inline int level_resolution(int level, int base_resolution, double growth) {
    if (base_resolution < 1 || growth < 1.0 || level < 0)
        throw ConfigError("level_resolution: need base >= 1, growth >= 1, level >= 0");
    double r = std::floor(double(base_resolution) * std::pow(growth, level));
    return r < 1.0 ? 1 : int(r);
}

/// Runtime view of one level: resolution, addressing mode, row count, and the
/// parameter segment of its feature table (stored feature-major, one column
/// per table row).
struct GridLevelRef {
    int dims = 2;
    int feature_dim = 2;
    int resolution = 16;
    GridMode mode = GridMode::Dense;
    std::int64_t rows = 0;   // rows actually allocated (T_eff)
    ParamSeg table;

    int corners() const { return 1 << dims; }
};

/// Dense when every vertex fits the capacity, hashed otherwise.
inline GridLevelRef make_level_ref(const GridLevelConfig& cfg) {
    if (cfg.dims != 2 && cfg.dims != 3) throw ConfigError("grid dims must be 2 or 3");
    if (cfg.feature_dim < 1) throw ConfigError("grid feature_dim must be >= 1");
    if (cfg.table_capacity < 1 || (cfg.table_capacity & (cfg.table_capacity - 1)) != 0)
        throw ConfigError("grid table capacity must be a power of two");
    GridLevelRef ref;
    ref.dims = cfg.dims;
    ref.feature_dim = cfg.feature_dim;
    ref.resolution = level_resolution(cfg.level, cfg.base_resolution, cfg.growth);
    std::int64_t side = std::int64_t(ref.resolution) + 1;
    double dense_rows = std::pow(double(side), cfg.dims);
    if (dense_rows <= double(cfg.table_capacity)) {
        ref.mode = GridMode::Dense;
        ref.rows = side * side * (cfg.dims == 3 ? side : 1);
    } else {
        ref.mode = GridMode::Hashed;
        ref.rows = cfg.table_capacity;
    }
    return ref;
}

inline constexpr std::uint32_t kHashPrimes[3] = {1u, 2654435761u, 805459861u};

/// Table row of an integer vertex. Hashed mode multiplies each coordinate by
/// its prime in wrapping 32-bit arithmetic, XORs, and reduces mod the row
/// count; dense mode is the injective row-major index.
inline std::int64_t hash_vertex(const std::array<int, 3>& v, int dims, GridMode mode,
                                int resolution, std::int64_t rows) {
    if (mode == GridMode::Dense) {
        std::int64_t idx = 0;
        std::int64_t stride = 1;
        for (int d = 0; d < dims; ++d) {
            idx += std::int64_t(v[d]) * stride;
            stride *= std::int64_t(resolution) + 1;
        }
        return idx;
    }
    std::uint32_t h = 0;
    for (int d = 0; d < dims; ++d) h ^= std::uint32_t(v[d]) * kHashPrimes[d];
    return std::int64_t(h % std::uint64_t(rows));
}

/// Lower cell vertex and fractional weights for a point in [0,1]^dims.
/// At the upper boundary the lower vertex clamps to resolution-1 with weight 1
/// so the opposite vertex stays on the grid.
template <class S>
inline void corner_coords(const S* x, int dims, int resolution, int* lower, S* w) {
    for (int d = 0; d < dims; ++d) {
        if (!(x[d] >= S(0) && x[d] <= S(1)))
            throw std::invalid_argument("grid point outside [0,1]^n");
        S t = x[d] * S(resolution);
        int lo = int(std::floor(double(t)));
        if (lo >= resolution) lo = resolution - 1;
        if (lo < 0) lo = 0;
        S wd = t - S(lo);
        if (wd < S(0)) wd = S(0);
        if (wd > S(1)) wd = S(1);
        lower[d] = lo;
        w[d] = wd;
    }
}

}  // namespace nffb
