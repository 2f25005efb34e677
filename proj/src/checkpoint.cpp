#include "nffb/checkpoint.hpp"

#include <cstring>
#include <fstream>

namespace nffb {

namespace {

constexpr char kMagic[4] = {'N', 'F', 'F', 'B'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = (unsigned char)(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = (unsigned char)(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
}

void put_f32_array(std::ostream& out, const Vec<float>& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        std::uint32_t bits;
        std::memcpy(&bits, &v[i], 4);
        put_u32(out, bits);
    }
}

std::uint32_t get_u32(std::istream& in, const std::string& path) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (in.gcount() != 4) throw IoError(path + ": truncated checkpoint");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(b[i]) << (8 * i);
    return v;
}

std::uint64_t get_u64(std::istream& in, const std::string& path) {
    std::uint64_t lo = get_u32(in, path);
    std::uint64_t hi = get_u32(in, path);
    return lo | (hi << 32);
}

Vec<float> get_f32_array(std::istream& in, std::int64_t n, const std::string& path) {
    Vec<float> v(n);
    for (std::int64_t i = 0; i < n; ++i) {
        std::uint32_t bits = get_u32(in, path);
        std::memcpy(&v[i], &bits, 4);
    }
    return v;
}

}  // namespace

void save_checkpoint(const Model<float>& model, const TrainState& state,
                     const RunConfig& cfg, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(path + ": cannot open for writing");
    out.write(kMagic, 4);
    put_u32(out, kVersion);
    std::string cfg_text = canonical_text(cfg);
    put_u32(out, std::uint32_t(cfg_text.size()));
    out.write(cfg_text.data(), std::streamsize(cfg_text.size()));
    put_u64(out, std::uint64_t(model.params.size()));
    put_f32_array(out, model.params);
    put_f32_array(out, state.adam.m);
    put_f32_array(out, state.adam.v);
    put_u64(out, std::uint64_t(state.adam.t));
    put_u64(out, std::uint64_t(state.step));
    auto rs = state.sample_rng.state();
    put_u64(out, rs.first);
    put_u64(out, rs.second);
    if (!out) throw IoError(path + ": write failed");
}

Checkpoint read_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path + ": cannot open");
    char magic[4];
    in.read(magic, 4);
    if (in.gcount() != 4 || std::memcmp(magic, kMagic, 4) != 0)
        throw IoError(path + ": bad checkpoint magic");
    std::uint32_t version = get_u32(in, path);
    if (version != kVersion)
        throw IoError(path + ": unsupported checkpoint version " + std::to_string(version));
    std::uint32_t cfg_len = get_u32(in, path);
    std::string cfg_text(cfg_len, '\0');
    in.read(cfg_text.data(), cfg_len);
    if (std::uint32_t(in.gcount()) != cfg_len) throw IoError(path + ": truncated checkpoint");

    Checkpoint ck;
    ck.config = parse_config(cfg_text);
    std::int64_t count = std::int64_t(get_u64(in, path));
    ck.params = get_f32_array(in, count, path);
    ck.adam.m = get_f32_array(in, count, path);
    ck.adam.v = get_f32_array(in, count, path);
    ck.adam.t = std::int64_t(get_u64(in, path));
    ck.step = std::int64_t(get_u64(in, path));
    ck.rng_state = get_u64(in, path);
    ck.rng_inc = get_u64(in, path);
    return ck;
}

std::pair<Model<float>, TrainState> load_checkpoint(const std::string& path,
                                                    RunConfig* cfg_out) {
    Checkpoint ck = read_checkpoint(path);
    Model<float> model = build_model<float>(ck.config.model_config(),
                                            variant_from_name(ck.config.variant));
    if (model.params.size() != ck.params.size())
        throw IoError(path + ": parameter count disagrees with the stored config (" +
                      std::to_string(ck.params.size()) + " vs " +
                      std::to_string(model.params.size()) + ")");
    model.params = ck.params;
    TrainState state;
    state.adam.m = ck.adam.m;
    state.adam.v = ck.adam.v;
    state.adam.t = ck.adam.t;
    state.step = ck.step;
    state.sample_rng.restore(ck.rng_state, ck.rng_inc);
    if (cfg_out) *cfg_out = ck.config;
    return {std::move(model), std::move(state)};
}

}  // namespace nffb
