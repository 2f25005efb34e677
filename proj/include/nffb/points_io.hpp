#pragma once

#include <array>
#include <string>
#include <vector>

namespace nffb {

/// Labeled SDF samples: u64 little-endian count, then (x, y, z, sdf) records
/// of little-endian 32-bit floats, coordinates in [-1,1]^3.
std::vector<std::array<float, 4>> load_sdf_points(const std::string& path);
void save_sdf_points(const std::vector<std::array<float, 4>>& records,
                     const std::string& path);

}  // namespace nffb
