#pragma once

#include "nffb/common.hpp"
#include "nffb/hash_grid.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace nffb {

/// Recorded primitive applications for one forward pass over a batch.
/// Values are [dim x batch] matrices, one column per batch item. Parameters
/// live in an external flat vector addressed through ParamSeg; backward
/// scatters their gradients into a caller-owned accumulator of the same
/// length. Replay order is the exact reverse of recording order, and the
/// tape is cleared once backward completes.
template <class S>
class Tape {
public:
    explicit Tape(const Vec<S>& params) : params_(&params) {}

    /// Leaf value (batch inputs). No gradient is propagated past it.
    int input(Mat<S> x) { return push_value(std::move(x)); }

    /// y = W x + b (bias optional: pass a ParamSeg with rows == 0).
    int affine(int x, ParamSeg W, ParamSeg b) {
        const Mat<S>& X = vals_[x];
        if (W.cols != X.rows())
            throw ConfigError("affine: weight columns do not match input rows");
        if (!b.empty() && b.rows != W.rows)
            throw ConfigError("affine: bias length does not match weight rows");
        Mat<S> y = map(W) * X;
        if (!b.empty()) y.colwise() += map(b).col(0);
        Node n;
        n.kind = Kind::Affine;
        n.in0 = x;
        n.pa = W;
        n.pb = b;
        n.out = push_value(std::move(y));
        nodes_.push_back(std::move(n));
        return nodes_.back().out;
    }

    /// y = sin(alpha * z), elementwise.
    int sine(int z, S alpha) {
        if (!(alpha > S(0))) throw ConfigError("sine: alpha must be positive");
        Node n;
        n.kind = Kind::Sine;
        n.in0 = z;
        n.alpha = alpha;
        n.out = push_value(Mat<S>((alpha * vals_[z].array()).sin()));
        nodes_.push_back(std::move(n));
        return nodes_.back().out;
    }

    int relu(int z) {
        Node n;
        n.kind = Kind::Relu;
        n.in0 = z;
        n.out = push_value(Mat<S>(vals_[z].array().max(S(0))));
        nodes_.push_back(std::move(n));
        return nodes_.back().out;
    }

    int add(int a, int b) {
        Node n;
        n.kind = Kind::Add;
        n.in0 = a;
        n.in1 = b;
        n.out = push_value(Mat<S>(vals_[a] + vals_[b]));
        nodes_.push_back(std::move(n));
        return nodes_.back().out;
    }

    /// Ordered sum of terms (left to right).
    int sum(const std::vector<int>& terms) {
        if (terms.empty()) throw ConfigError("sum: no terms");
        Mat<S> acc = vals_[terms[0]];
        for (size_t i = 1; i < terms.size(); ++i) acc += vals_[terms[i]];
        Node n;
        n.kind = Kind::Sum;
        n.ins = terms;
        n.out = push_value(std::move(acc));
        nodes_.push_back(std::move(n));
        return nodes_.back().out;
    }

    /// Vertical concatenation of same-batch values.
    int concat(const std::vector<int>& parts) {
        if (parts.empty()) throw ConfigError("concat: no parts");
        Eigen::Index rows = 0;
        Eigen::Index cols = vals_[parts[0]].cols();
        for (int id : parts) rows += vals_[id].rows();
        Mat<S> out(rows, cols);
        Eigen::Index at = 0;
        for (int id : parts) {
            out.middleRows(at, vals_[id].rows()) = vals_[id];
            at += vals_[id].rows();
        }
        Node n;
        n.kind = Kind::Concat;
        n.ins = parts;
        n.out = push_value(std::move(out));
        nodes_.push_back(std::move(n));
        return nodes_.back().out;
    }

    /// gamma = sin(2*pi * B v), with gradients to both B and v.
    int fourier(int v, ParamSeg B) {
        const Mat<S>& V = vals_[v];
        if (B.cols != V.rows()) throw ConfigError("fourier: B columns do not match feature rows");
        Node n;
        n.kind = Kind::Fourier;
        n.in0 = v;
        n.pa = B;
        n.aux = S(2) * std::numbers::pi_v<S> * (map(B) * V);
        n.out = push_value(Mat<S>(n.aux.array().sin()));
        nodes_.push_back(std::move(n));
        return nodes_.back().out;
    }

    /// n-linear interpolation of a feature table at points x (one column per
    /// point, components in [0,1]). Gradients flow to table rows only;
    /// colliding corners accumulate additively, in (item, corner) order.
    int interpolate(int x, const GridLevelRef& level) {
        const Mat<S>& X = vals_[x];
        if (X.rows() != level.dims) throw ConfigError("interpolate: point dims mismatch");
        const Eigen::Index batch = X.cols();
        const int corners = level.corners();
        Node n;
        n.kind = Kind::Interp;
        n.in0 = x;
        n.pa = level.table;
        n.idx.resize(corners, batch);
        n.wts.resize(corners, batch);
        Mat<S> out = Mat<S>::Zero(level.feature_dim, batch);
        auto table = map(level.table);
        int lower[3];
        S w[3];
        for (Eigen::Index b = 0; b < batch; ++b) {
            corner_coords(X.col(b).data(), level.dims, level.resolution, lower, w);
            for (int c = 0; c < corners; ++c) {
                std::array<int, 3> v{0, 0, 0};
                S cw = S(1);
                for (int d = 0; d < level.dims; ++d) {
                    int bit = (c >> d) & 1;
                    v[d] = lower[d] + bit;
                    cw *= bit ? w[d] : S(1) - w[d];
                }
                std::int64_t row =
                    hash_vertex(v, level.dims, level.mode, level.resolution, level.rows);
                n.idx(c, b) = std::uint32_t(row);
                n.wts(c, b) = cw;
                out.col(b) += cw * table.col(row);
            }
        }
        n.out = push_value(std::move(out));
        nodes_.push_back(std::move(n));
        return nodes_.back().out;
    }

    /// scale * sum over columns of ||y - target||^2. Pass scale = 1/batch for
    /// the per-batch mean, or 1/total when summing chunk losses.
    S mse_loss(int y, const Mat<S>& target, S scale) {
        const Mat<S>& Y = vals_[y];
        if (Y.rows() != target.rows() || Y.cols() != target.cols())
            throw std::invalid_argument("mse_loss: shape mismatch");
        if (Y.cols() == 0) throw std::invalid_argument("mse_loss: empty batch");
        Node n;
        n.kind = Kind::MseLoss;
        n.in0 = y;
        n.alpha = scale;
        n.aux = Y - target;
        S value = scale * n.aux.squaredNorm();
        nodes_.push_back(std::move(n));
        return value;
    }

    /// scale * sum over columns of (y - target)^2 / (eps + target^2), for
    /// scalar-valued y (one row).
    S mape_sq_loss(int y, const Mat<S>& target, S eps, S scale) {
        if (!(eps > S(0))) throw ConfigError("mape_sq_loss: eps must be positive");
        const Mat<S>& Y = vals_[y];
        if (Y.rows() != 1 || target.rows() != 1 || Y.cols() != target.cols())
            throw std::invalid_argument("mape_sq_loss: expects matching 1 x batch values");
        if (Y.cols() == 0) throw std::invalid_argument("mape_sq_loss: empty batch");
        Node n;
        n.kind = Kind::MapeLoss;
        n.in0 = y;
        n.alpha = scale;
        n.aux = Y - target;                                        // residual
        n.aux2 = (eps + target.array().square()).matrix();         // denominator
        S value = scale * (n.aux.array().square() / n.aux2.array()).sum();
        nodes_.push_back(std::move(n));
        return value;
    }

    const Mat<S>& value(int id) const { return vals_[id]; }
    bool recorded() const { return !nodes_.empty(); }

    /// Reverse sweep. Seeds every loss node with `upstream`, accumulates
    /// parameter gradients into `grad` (adds; caller zeroes between steps),
    /// then clears the tape.
    void backward(Vec<S>& grad, S upstream = S(1)) {
        if (nodes_.empty()) throw std::logic_error("backward: nothing recorded on tape");
        if (grad.size() != params_->size())
            throw std::invalid_argument("backward: gradient accumulator length mismatch");
        grads_.clear();
        grads_.resize(vals_.size());
        for (size_t i = 0; i < vals_.size(); ++i)
            grads_[i] = Mat<S>::Zero(vals_[i].rows(), vals_[i].cols());

        for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
            Node& n = *it;
            switch (n.kind) {
                case Kind::Affine: {
                    const Mat<S>& dY = grads_[n.out];
                    grads_[n.in0].noalias() += map(n.pa).transpose() * dY;
                    gmap(grad, n.pa).noalias() += dY * vals_[n.in0].transpose();
                    if (!n.pb.empty()) gmap(grad, n.pb).col(0) += dY.rowwise().sum();
                    break;
                }
                case Kind::Sine: {
                    grads_[n.in0].array() += n.alpha *
                        (n.alpha * vals_[n.in0].array()).cos() * grads_[n.out].array();
                    break;
                }
                case Kind::Relu: {
                    grads_[n.in0].array() += (vals_[n.in0].array() > S(0))
                                                 .template cast<S>() *
                                             grads_[n.out].array();
                    break;
                }
                case Kind::Add: {
                    grads_[n.in0] += grads_[n.out];
                    grads_[n.in1] += grads_[n.out];
                    break;
                }
                case Kind::Sum: {
                    for (int id : n.ins) grads_[id] += grads_[n.out];
                    break;
                }
                case Kind::Concat: {
                    Eigen::Index at = 0;
                    for (int id : n.ins) {
                        grads_[id] += grads_[n.out].middleRows(at, vals_[id].rows());
                        at += vals_[id].rows();
                    }
                    break;
                }
                case Kind::Fourier: {
                    constexpr S two_pi = S(2) * std::numbers::pi_v<S>;
                    Mat<S> w = (n.aux.array().cos() * grads_[n.out].array()).matrix();
                    gmap(grad, n.pa).noalias() += two_pi * (w * vals_[n.in0].transpose());
                    grads_[n.in0].noalias() += two_pi * (map(n.pa).transpose() * w);
                    break;
                }
                case Kind::Interp: {
                    const Mat<S>& dV = grads_[n.out];
                    auto gt = gmap(grad, n.pa);
                    for (Eigen::Index b = 0; b < dV.cols(); ++b)
                        for (Eigen::Index c = 0; c < n.idx.rows(); ++c)
                            gt.col(n.idx(c, b)) += n.wts(c, b) * dV.col(b);
                    break;
                }
                case Kind::MseLoss: {
                    grads_[n.in0] += (upstream * S(2) * n.alpha) * n.aux;
                    break;
                }
                case Kind::MapeLoss: {
                    grads_[n.in0].array() +=
                        (upstream * S(2) * n.alpha) * n.aux.array() / n.aux2.array();
                    break;
                }
            }
        }
        clear();
    }

    void clear() {
        nodes_.clear();
        vals_.clear();
        grads_.clear();
    }

private:
    enum class Kind { Affine, Sine, Relu, Add, Sum, Concat, Fourier, Interp, MseLoss, MapeLoss };

    struct Node {
        Kind kind;
        int out = -1;
        int in0 = -1, in1 = -1;
        std::vector<int> ins;
        ParamSeg pa, pb;
        S alpha{};        // sine scale / loss scale
        Mat<S> aux, aux2; // fourier angles / loss residuals and denominators
        Eigen::Matrix<std::uint32_t, Eigen::Dynamic, Eigen::Dynamic> idx;
        Mat<S> wts;
    };

    int push_value(Mat<S> v) {
        vals_.push_back(std::move(v));
        return int(vals_.size()) - 1;
    }

    ConstMatMap<S> map(ParamSeg s) const {
        return ConstMatMap<S>(params_->data() + s.offset, s.rows, s.cols);
    }
    static MatMap<S> gmap(Vec<S>& grad, ParamSeg s) {
        return MatMap<S>(grad.data() + s.offset, s.rows, s.cols);
    }

    const Vec<S>* params_;
    std::vector<Mat<S>> vals_;
    std::vector<Mat<S>> grads_;
    std::vector<Node> nodes_;
};

}  // namespace nffb
