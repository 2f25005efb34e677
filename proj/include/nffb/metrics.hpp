#pragma once

#include "nffb/image.hpp"

namespace nffb {

/// Elementwise mean squared error over all channels.
double mse(const Image& a, const Image& b);

/// 10*log10(peak^2 / mse); +inf when the images are identical.
double psnr(const Image& a, const Image& b, double peak = 1.0);

/// Mean SSIM over the valid region of an 11x11 Gaussian window (sigma 1.5),
/// K1=0.01, K2=0.03, peak 1, on the Rec.601 luminance. Images must be at
/// least 11x11.
double ssim(const Image& a, const Image& b);

}  // namespace nffb
