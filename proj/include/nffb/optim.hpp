#pragma once

#include "nffb/common.hpp"

#include <cmath>
#include <cstdint>
#include <string>

namespace nffb {

/// First/second moment estimates plus the step counter.
template <class S>
struct AdamState {
    Vec<S> m;
    Vec<S> v;
    std::int64_t t = 0;

    static AdamState zeros(Eigen::Index n) {
        AdamState s;
        s.m = Vec<S>::Zero(n);
        s.v = Vec<S>::Zero(n);
        return s;
    }
};

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.99;
    double eps = 1e-8;
};

/// One bias-corrected Adam update, in place. Rejects non-finite gradients
/// before touching any state so an aborted step leaves params/state intact.
template <class S>
void adam_step(Vec<S>& params, const Vec<S>& grad, AdamState<S>& state, double lr,
               const AdamConfig& cfg = {}) {
    if (params.size() != grad.size() || params.size() != state.m.size() ||
        params.size() != state.v.size())
        throw std::invalid_argument("adam_step: length mismatch");
    if (!(lr > 0)) throw ConfigError("adam_step: lr must be positive");
    if (!grad.allFinite()) {
        Eigen::Index bad = 0;
        for (Eigen::Index i = 0; i < grad.size(); ++i)
            if (!std::isfinite(double(grad[i]))) {
                bad = i;
                break;
            }
        throw NumericsError("adam_step: non-finite gradient at parameter index " +
                            std::to_string(bad));
    }
    const S b1 = S(cfg.beta1), b2 = S(cfg.beta2);
    state.t += 1;
    state.m = b1 * state.m + (S(1) - b1) * grad;
    state.v = b2 * state.v + (S(1) - b2) * grad.cwiseProduct(grad);
    const S c1 = S(1) - S(std::pow(cfg.beta1, double(state.t)));
    const S c2 = S(1) - S(std::pow(cfg.beta2, double(state.t)));
    params.array() -= S(lr) * (state.m.array() / c1) /
                      ((state.v.array() / c2).sqrt() + S(cfg.eps));
}

/// Stepwise schedule: base halves every `half_every` steps.
inline double lr_at(std::int64_t step, double base = 1e-4, std::int64_t half_every = 5000) {
    if (step < 0) throw std::invalid_argument("lr_at: negative step");
    if (half_every < 1) throw ConfigError("lr_at: half_every must be >= 1");
    return std::ldexp(base, -int(step / half_every));
}

}  // namespace nffb
