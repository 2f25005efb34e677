#include "nffb/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace nffb {

FilterBankConfig RunConfig::model_config() const {
    FilterBankConfig m;
    m.dims = dims();
    m.d_out = d_out();
    m.levels = levels;
    m.width = width;
    m.alpha = alpha;
    m.base_resolution = n_min;
    m.growth = c_g;
    if (table_log2 < 1 || table_log2 > 30) throw ConfigError("table_log2 out of range [1,30]");
    m.table_capacity = std::int64_t(1) << table_log2;
    m.feature_dim = feature_dim;
    m.sigma_min = sigma_min;
    m.sigma_growth = c_f;
    m.seed = seed;
    return m;
}

void RunConfig::apply_task_preset(const std::string& task_name) {
    task = task_name;
    if (task_name == "image") {
        levels = 8;
        width = 96;
        alpha = 100.0;
        n_min = 64;
        c_g = 1.5;
        table_log2 = 17;
        sigma_min = 5.0;
        c_f = 2.0;
        batch_size = 16384;
    } else if (task_name == "sdf") {
        levels = 5;
        width = 256;
        alpha = 45.0;
        n_min = 8;
        c_g = 1.3;
        table_log2 = 15;
        sigma_min = 5.0;
        c_f = 1.2;
        batch_size = 49152;
    } else {
        throw ConfigError("unknown task: " + task_name + " (expected image|sdf)");
    }
}

void RunConfig::validate() const {
    model_config().validate();
    variant_from_name(variant);
    if (task != "image" && task != "sdf") throw ConfigError("task must be image or sdf");
    if (steps < 0) throw ConfigError("steps must be >= 0");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (!(base_lr > 0)) throw ConfigError("base_lr must be positive");
    if (lr_half_every < 1) throw ConfigError("lr_half_every must be >= 1");
    if (!(mape_eps > 0)) throw ConfigError("mape_eps must be positive");
    if (!(near_surface_sigma > 0)) throw ConfigError("near_surface_sigma must be positive");
    if (eval_interval < 1) throw ConfigError("eval_interval must be >= 1");
    if (checkpoint_interval < 0) throw ConfigError("checkpoint_interval must be >= 0");
    if (chunk_size < 1) throw ConfigError("chunk_size must be >= 1");
    if (threads < 1) throw ConfigError("threads must be >= 1");
    if (task == "sdf" && shape != "sphere" && shape != "box" && shape != "torus" &&
        shape != "union2" && !shape.empty())
        throw ConfigError("shape must be sphere|box|torus|union2");
}

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

struct Setter {
    std::function<void(RunConfig&, const std::string&)> apply;
};

template <class T>
T parse_number(const std::string& key, const std::string& value) {
    T out{};
    std::string v = trim(value);
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size())
        throw ConfigError("invalid number for key '" + key + "': " + value);
    return out;
}

double parse_real(const std::string& key, const std::string& value) {
    std::string v = trim(value);
    char* end = nullptr;
    double out = std::strtod(v.c_str(), &end);
    if (v.empty() || end != v.c_str() + v.size())
        throw ConfigError("invalid real for key '" + key + "': " + value);
    return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
    std::string v = trim(value);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("invalid bool for key '" + key + "': " + value);
}

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"task", {[](RunConfig& c, const std::string& v) { c.apply_task_preset(trim(v)); }}},
        {"variant", {[](RunConfig& c, const std::string& v) {
             c.variant = trim(v);
             variant_from_name(c.variant);
         }}},
        {"levels", {[](RunConfig& c, const std::string& v) { c.levels = parse_number<int>("levels", v); }}},
        {"width", {[](RunConfig& c, const std::string& v) { c.width = parse_number<int>("width", v); }}},
        {"alpha", {[](RunConfig& c, const std::string& v) { c.alpha = parse_real("alpha", v); }}},
        {"n_min", {[](RunConfig& c, const std::string& v) { c.n_min = parse_number<int>("n_min", v); }}},
        {"c_g", {[](RunConfig& c, const std::string& v) { c.c_g = parse_real("c_g", v); }}},
        {"table_log2", {[](RunConfig& c, const std::string& v) { c.table_log2 = parse_number<int>("table_log2", v); }}},
        {"feature_dim", {[](RunConfig& c, const std::string& v) { c.feature_dim = parse_number<int>("feature_dim", v); }}},
        {"sigma_min", {[](RunConfig& c, const std::string& v) { c.sigma_min = parse_real("sigma_min", v); }}},
        {"c_f", {[](RunConfig& c, const std::string& v) { c.c_f = parse_real("c_f", v); }}},
        {"steps", {[](RunConfig& c, const std::string& v) { c.steps = parse_number<std::int64_t>("steps", v); }}},
        {"batch_size", {[](RunConfig& c, const std::string& v) { c.batch_size = parse_number<int>("batch_size", v); }}},
        {"seed", {[](RunConfig& c, const std::string& v) { c.seed = parse_number<std::uint64_t>("seed", v); }}},
        {"deterministic", {[](RunConfig& c, const std::string& v) { c.deterministic = parse_bool("deterministic", v); }}},
        {"base_lr", {[](RunConfig& c, const std::string& v) { c.base_lr = parse_real("base_lr", v); }}},
        {"lr_half_every", {[](RunConfig& c, const std::string& v) { c.lr_half_every = parse_number<std::int64_t>("lr_half_every", v); }}},
        {"beta1", {[](RunConfig& c, const std::string& v) { c.beta1 = parse_real("beta1", v); }}},
        {"beta2", {[](RunConfig& c, const std::string& v) { c.beta2 = parse_real("beta2", v); }}},
        {"adam_eps", {[](RunConfig& c, const std::string& v) { c.adam_eps = parse_real("adam_eps", v); }}},
        {"eval_interval", {[](RunConfig& c, const std::string& v) { c.eval_interval = parse_number<std::int64_t>("eval_interval", v); }}},
        {"checkpoint_interval", {[](RunConfig& c, const std::string& v) { c.checkpoint_interval = parse_number<std::int64_t>("checkpoint_interval", v); }}},
        {"chunk_size", {[](RunConfig& c, const std::string& v) { c.chunk_size = parse_number<int>("chunk_size", v); }}},
        {"threads", {[](RunConfig& c, const std::string& v) { c.threads = parse_number<int>("threads", v); }}},
        {"image_path", {[](RunConfig& c, const std::string& v) { c.image_path = trim(v); }}},
        {"points_path", {[](RunConfig& c, const std::string& v) { c.points_path = trim(v); }}},
        {"shape", {[](RunConfig& c, const std::string& v) { c.shape = trim(v); }}},
        {"near_surface_sigma", {[](RunConfig& c, const std::string& v) { c.near_surface_sigma = parse_real("near_surface_sigma", v); }}},
        {"mape_eps", {[](RunConfig& c, const std::string& v) { c.mape_eps = parse_real("mape_eps", v); }}},
        {"out_dir", {[](RunConfig& c, const std::string& v) { c.out_dir = trim(v); }}},
    };
    return table;
}

}  // namespace

void apply_override(RunConfig& cfg, const std::string& key, const std::string& value) {
    auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError("unknown key '" + key + "'");
    it->second.apply(cfg, value);
}

RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = raw;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3)
                throw ConfigError("line " + std::to_string(line_no) + ": malformed section header");
            continue;  // sections only group keys visually
        }
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        try {
            apply_override(cfg, key, value);
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    cfg.validate();
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path + ": cannot open config");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string canonical_text(const RunConfig& cfg) {
    std::ostringstream out;
    auto real = [](double v) {
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    out << "task = " << cfg.task << "\n";
    out << "variant = " << cfg.variant << "\n";
    out << "[model]\n";
    out << "levels = " << cfg.levels << "\n";
    out << "width = " << cfg.width << "\n";
    out << "alpha = " << real(cfg.alpha) << "\n";
    out << "n_min = " << cfg.n_min << "\n";
    out << "c_g = " << real(cfg.c_g) << "\n";
    out << "table_log2 = " << cfg.table_log2 << "\n";
    out << "feature_dim = " << cfg.feature_dim << "\n";
    out << "sigma_min = " << real(cfg.sigma_min) << "\n";
    out << "c_f = " << real(cfg.c_f) << "\n";
    out << "[train]\n";
    out << "steps = " << cfg.steps << "\n";
    out << "batch_size = " << cfg.batch_size << "\n";
    out << "seed = " << cfg.seed << "\n";
    out << "deterministic = " << (cfg.deterministic ? "true" : "false") << "\n";
    out << "base_lr = " << real(cfg.base_lr) << "\n";
    out << "lr_half_every = " << cfg.lr_half_every << "\n";
    out << "beta1 = " << real(cfg.beta1) << "\n";
    out << "beta2 = " << real(cfg.beta2) << "\n";
    out << "adam_eps = " << real(cfg.adam_eps) << "\n";
    out << "eval_interval = " << cfg.eval_interval << "\n";
    out << "checkpoint_interval = " << cfg.checkpoint_interval << "\n";
    out << "chunk_size = " << cfg.chunk_size << "\n";
    out << "threads = " << cfg.threads << "\n";
    out << "[task]\n";
    if (!cfg.image_path.empty()) out << "image_path = " << cfg.image_path << "\n";
    if (!cfg.points_path.empty()) out << "points_path = " << cfg.points_path << "\n";
    out << "shape = " << cfg.shape << "\n";
    out << "near_surface_sigma = " << real(cfg.near_surface_sigma) << "\n";
    out << "mape_eps = " << real(cfg.mape_eps) << "\n";
    out << "out_dir = " << cfg.out_dir << "\n";
    return out.str();
}

}  // namespace nffb
