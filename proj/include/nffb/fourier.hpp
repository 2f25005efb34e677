#pragma once

#include "nffb/common.hpp"

#include <cmath>

namespace nffb {

/// Init standard deviation of the frequency matrix at `level`: coarse levels
/// start small, finer levels geometrically larger.
inline double fourier_sigma(int level, double sigma_min, double sigma_growth) {
    if (!(sigma_min > 0) || !(sigma_growth >= 1) || level < 0)
        throw ConfigError("fourier_sigma: need sigma_min > 0, growth >= 1, level >= 0");
    return sigma_min * std::pow(sigma_growth, level);
}

/// Fill a frequency matrix with N(0, sigma^2) entries drawn in column-major
/// order from `rng`.
template <class S>
void init_fourier(MatMap<S> B, double sigma, Pcg32& rng) {
    if (B.rows() < 1 || B.cols() < 1) throw ConfigError("init_fourier: empty matrix");
    if (!(sigma > 0)) throw ConfigError("init_fourier: sigma must be positive");
    for (Eigen::Index j = 0; j < B.cols(); ++j)
        for (Eigen::Index i = 0; i < B.rows(); ++i) B(i, j) = S(sigma * rng.normal());
}

}  // namespace nffb
