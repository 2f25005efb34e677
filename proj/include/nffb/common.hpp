#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

namespace nffb {

template <class S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <class S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;
template <class S>
using MatMap = Eigen::Map<Mat<S>>;
template <class S>
using ConstMatMap = Eigen::Map<const Mat<S>>;

/// Invalid hyperparameters, malformed config, unknown keys.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Unreadable / malformed files.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Non-finite values where finite ones are required.
struct NumericsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// One trainable block inside the flat parameter vector.
/// Matrices are column-major; vectors have cols == 1. rows == 0 means "absent"
/// (used for optional biases).
struct ParamSeg {
    std::int64_t offset = 0;
    int rows = 0;
    int cols = 1;

    std::int64_t size() const { return std::int64_t(rows) * cols; }
    bool empty() const { return rows == 0; }
};

/// PCG32 generator. Chosen over std engines because its full state is two
/// words that round-trip through checkpoints exactly, and all derived draws
/// (uniforms, normals) are pure functions of the engine with no hidden
/// distribution state.
class Pcg32 {
public:
    explicit Pcg32(std::uint64_t seed = 0, std::uint64_t stream = 0) {
        state_ = 0;
        inc_ = (stream << 1u) | 1u;
        next_u32();
        state_ += seed;
        next_u32();
    }

    std::uint32_t next_u32() {
        std::uint64_t old = state_;
        state_ = old * 6364136223846793005ULL + inc_;
        std::uint32_t xorshifted = std::uint32_t(((old >> 18u) ^ old) >> 27u);
        std::uint32_t rot = std::uint32_t(old >> 59u);
        return (xorshifted >> rot) | (xorshifted << ((32u - rot) & 31u));
    }

    std::uint64_t next_u64() {
        std::uint64_t hi = next_u32();
        return (hi << 32) | next_u32();
    }

    /// Uniform double in [0, 1).
    double next_double() { return double(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, bound).
    std::uint32_t below(std::uint32_t bound) {
        return std::uint32_t((std::uint64_t(next_u32()) * bound) >> 32);
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    /// Standard normal via Box-Muller. Consumes two uniforms per call and
    /// keeps no cached spare, so the stream position fully determines output.
    double normal() {
        double u1, u2;
        do {
            u1 = next_double();
        } while (u1 <= 0.0);
        u2 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
    }

    std::pair<std::uint64_t, std::uint64_t> state() const { return {state_, inc_}; }
    void restore(std::uint64_t state, std::uint64_t inc) {
        state_ = state;
        inc_ = inc;
    }

private:
    std::uint64_t state_ = 0;
    std::uint64_t inc_ = 1;
};

}  // namespace nffb
