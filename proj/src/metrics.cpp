#include "nffb/metrics.hpp"

#include "nffb/common.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace nffb {

double mse(const Image& a, const Image& b) {
    if (a.width != b.width || a.height != b.height)
        throw std::invalid_argument("mse: image shapes differ");
    if (a.data.empty()) throw std::invalid_argument("mse: empty image");
    double acc = 0.0;
    for (size_t i = 0; i < a.data.size(); ++i) {
        double d = double(a.data[i]) - double(b.data[i]);
        acc += d * d;
    }
    return acc / double(a.data.size());
}

double psnr(const Image& a, const Image& b, double peak) {
    double m = mse(a, b);
    if (m == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(peak * peak / m);
}

namespace {

constexpr int kWin = 11;
constexpr double kSigma = 1.5;

std::vector<double> gaussian_kernel() {
    std::vector<double> k(kWin);
    double sum = 0.0;
    for (int i = 0; i < kWin; ++i) {
        double d = i - (kWin - 1) / 2.0;
        k[i] = std::exp(-d * d / (2.0 * kSigma * kSigma));
        sum += k[i];
    }
    for (double& v : k) v /= sum;
    return k;
}

std::vector<double> luminance(const Image& img) {
    std::vector<double> y(img.pixels());
    for (size_t p = 0; p < img.pixels(); ++p)
        y[p] = 0.299 * img.data[p * 3] + 0.587 * img.data[p * 3 + 1] +
               0.114 * img.data[p * 3 + 2];
    return y;
}

// Separable valid-mode Gaussian filter; output is (h-10) x (w-10).
std::vector<double> blur_valid(const std::vector<double>& in, int h, int w,
                               const std::vector<double>& k) {
    int wv = w - kWin + 1;
    std::vector<double> tmp(size_t(h) * wv);
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < wv; ++c) {
            double acc = 0.0;
            for (int i = 0; i < kWin; ++i) acc += k[i] * in[size_t(r) * w + c + i];
            tmp[size_t(r) * wv + c] = acc;
        }
    int hv = h - kWin + 1;
    std::vector<double> out(size_t(hv) * wv);
    for (int r = 0; r < hv; ++r)
        for (int c = 0; c < wv; ++c) {
            double acc = 0.0;
            for (int i = 0; i < kWin; ++i) acc += k[i] * tmp[size_t(r + i) * wv + c];
            out[size_t(r) * wv + c] = acc;
        }
    return out;
}

std::vector<double> mul(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> out(a.size());
    for (size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
    return out;
}

}  // namespace

double ssim(const Image& a, const Image& b) {
    if (a.width != b.width || a.height != b.height)
        throw std::invalid_argument("ssim: image shapes differ");
    if (a.width < kWin || a.height < kWin)
        throw std::invalid_argument("ssim: image smaller than the 11x11 window");

    const double c1 = 0.01 * 0.01;  // (K1*peak)^2
    const double c2 = 0.03 * 0.03;  // (K2*peak)^2
    auto k = gaussian_kernel();
    auto x = luminance(a);
    auto y = luminance(b);
    int h = a.height, w = a.width;

    auto mu_x = blur_valid(x, h, w, k);
    auto mu_y = blur_valid(y, h, w, k);
    auto xx = blur_valid(mul(x, x), h, w, k);
    auto yy = blur_valid(mul(y, y), h, w, k);
    auto xy = blur_valid(mul(x, y), h, w, k);

    double acc = 0.0;
    for (size_t i = 0; i < mu_x.size(); ++i) {
        double mx = mu_x[i], my = mu_y[i];
        double var_x = xx[i] - mx * mx;
        double var_y = yy[i] - my * my;
        double cov = xy[i] - mx * my;
        acc += ((2 * mx * my + c1) * (2 * cov + c2)) /
               ((mx * mx + my * my + c1) * (var_x + var_y + c2));
    }
    return acc / double(mu_x.size());
}

}  // namespace nffb
