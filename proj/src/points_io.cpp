#include "nffb/points_io.hpp"

#include "nffb/common.hpp"

#include <cstring>
#include <fstream>

namespace nffb {

namespace {

void put_f32(std::ostream& out, float f) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = (unsigned char)(bits >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 4);
}

float get_f32(std::istream& in, const std::string& path) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (in.gcount() != 4) throw IoError(path + ": truncated point file");
    std::uint32_t bits = 0;
    for (int i = 0; i < 4; ++i) bits |= std::uint32_t(b[i]) << (8 * i);
    float f;
    std::memcpy(&f, &bits, 4);
    return f;
}

}  // namespace

std::vector<std::array<float, 4>> load_sdf_points(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path + ": cannot open");
    unsigned char hdr[8];
    in.read(reinterpret_cast<char*>(hdr), 8);
    if (in.gcount() != 8) throw IoError(path + ": truncated point file header");
    std::uint64_t count = 0;
    for (int i = 0; i < 8; ++i) count |= std::uint64_t(hdr[i]) << (8 * i);
    if (count == 0) throw IoError(path + ": point file holds no records");
    std::vector<std::array<float, 4>> records(count);
    for (auto& rec : records)
        for (float& v : rec) v = get_f32(in, path);
    return records;
}

void save_sdf_points(const std::vector<std::array<float, 4>>& records,
                     const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(path + ": cannot open for writing");
    std::uint64_t count = records.size();
    unsigned char hdr[8];
    for (int i = 0; i < 8; ++i) hdr[i] = (unsigned char)(count >> (8 * i));
    out.write(reinterpret_cast<const char*>(hdr), 8);
    for (const auto& rec : records)
        for (float v : rec) put_f32(out, v);
    if (!out) throw IoError(path + ": write failed");
}

}  // namespace nffb
