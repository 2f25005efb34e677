#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace nffb {

/// RGB image with float channels in [0,1], row-major, interleaved.
struct Image {
    int height = 0;
    int width = 0;
    std::vector<float> data;  // height*width*3

    Image() = default;
    Image(int h, int w) : height(h), width(w), data(size_t(h) * w * 3, 0.0f) {}

    float& at(int r, int c, int ch) { return data[(size_t(r) * width + c) * 3 + ch]; }
    float at(int r, int c, int ch) const { return data[(size_t(r) * width + c) * 3 + ch]; }
    size_t pixels() const { return size_t(height) * width; }
};

/// Binary PPM (P6, maxval 255).
Image load_ppm(const std::string& path);
void save_ppm(const Image& img, const std::string& path);

/// PNG via libpng (8/16-bit gray/palette/RGB/RGBA accepted, decoded to RGB8).
/// Only compiled in when the build enables PNG support.
bool png_supported();
Image load_png(const std::string& path);

/// Dispatch on file extension (.png requires PNG support; anything else is
/// treated as PPM).
Image load_image(const std::string& path);

}  // namespace nffb
