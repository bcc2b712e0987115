#include "stf/config.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "stf/errors.hpp"

namespace stf {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return "";
    }
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

int parse_int(const std::string& key, const std::string& v) {
    errno = 0;
    char* end = nullptr;
    const long value = std::strtol(v.c_str(), &end, 10);
    if (errno != 0 || end == v.c_str() || *end != '\0') {
        throw ConfigError("config: key '" + key + "' expects an integer, got '" + v + "'");
    }
    return static_cast<int>(value);
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
    errno = 0;
    char* end = nullptr;
    const unsigned long long value = std::strtoull(v.c_str(), &end, 10);
    if (errno != 0 || end == v.c_str() || *end != '\0') {
        throw ConfigError("config: key '" + key + "' expects an unsigned integer, got '" + v + "'");
    }
    return static_cast<std::uint64_t>(value);
}

double parse_double(const std::string& key, const std::string& v) {
    errno = 0;
    char* end = nullptr;
    const double value = std::strtod(v.c_str(), &end);
    if (errno != 0 || end == v.c_str() || *end != '\0') {
        throw ConfigError("config: key '" + key + "' expects a number, got '" + v + "'");
    }
    return value;
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void RunConfig::validate() const {
    auto positive = [](long long v, const char* key) {
        if (v <= 0) {
            throw ConfigError(std::string("config: key '") + key + "' must be positive");
        }
    };
    positive(t_his, "t_his");
    positive(t_pred, "t_pred");
    positive(n_max, "n_max");
    positive(stride, "stride");
    positive(embed_width, "embed_width");
    positive(gat_width, "gat_width");
    positive(gat_layers, "gat_layers");
    positive(attention_heads, "attention_heads");
    positive(stgcn_layers, "stgcn_layers");
    positive(stgcn_channels, "stgcn_channels");
    positive(temporal_kernel, "temporal_kernel");
    positive(gru_hidden, "gru_hidden");
    positive(epochs, "epochs");
    positive(batch_size, "batch_size");
    if (!(d_close > 0.0)) {
        throw ConfigError("config: key 'd_close' must be positive");
    }
    if (!(lr > 0.0)) {
        throw ConfigError("config: key 'lr' must be positive");
    }
    if (!(leaky_slope > 0.0 && leaky_slope < 1.0)) {
        throw ConfigError("config: key 'leaky_slope' must lie in (0,1)");
    }
    if (temporal_kernel % 2 == 0) {
        throw ConfigError("config: key 'temporal_kernel' must be odd");
    }
    if (checkpoint_interval < 0) {
        throw ConfigError("config: key 'checkpoint_interval' must be >= 0");
    }
    if (grad_clip < 0.0) {
        throw ConfigError("config: key 'grad_clip' must be >= 0");
    }
    if (loss != "mse" && loss != "smooth_l1") {
        throw ConfigError("config: key 'loss' must be 'mse' or 'smooth_l1'");
    }
}

void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "t_his") {
        cfg.t_his = parse_int(key, value);
    } else if (key == "t_pred") {
        cfg.t_pred = parse_int(key, value);
    } else if (key == "n_max") {
        cfg.n_max = parse_int(key, value);
    } else if (key == "stride") {
        cfg.stride = parse_int(key, value);
    } else if (key == "d_close") {
        cfg.d_close = parse_double(key, value);
    } else if (key == "embed_width") {
        cfg.embed_width = parse_int(key, value);
    } else if (key == "gat_width") {
        cfg.gat_width = parse_int(key, value);
    } else if (key == "gat_layers") {
        cfg.gat_layers = parse_int(key, value);
    } else if (key == "attention_heads") {
        cfg.attention_heads = parse_int(key, value);
    } else if (key == "leaky_slope") {
        cfg.leaky_slope = parse_double(key, value);
    } else if (key == "stgcn_layers") {
        cfg.stgcn_layers = parse_int(key, value);
    } else if (key == "stgcn_channels") {
        cfg.stgcn_channels = parse_int(key, value);
    } else if (key == "temporal_kernel") {
        cfg.temporal_kernel = parse_int(key, value);
    } else if (key == "gru_hidden") {
        cfg.gru_hidden = parse_int(key, value);
    } else if (key == "lr") {
        cfg.lr = parse_double(key, value);
    } else if (key == "epochs") {
        cfg.epochs = parse_int(key, value);
    } else if (key == "batch_size") {
        cfg.batch_size = parse_int(key, value);
    } else if (key == "seed") {
        cfg.seed = parse_u64(key, value);
    } else if (key == "checkpoint_interval") {
        cfg.checkpoint_interval = parse_int(key, value);
    } else if (key == "grad_clip") {
        cfg.grad_clip = parse_double(key, value);
    } else if (key == "loss") {
        cfg.loss = value;
    } else {
        throw ConfigError("config: unknown key '" + key + "'");
    }
}

RunConfig parse_run_config(std::istream& is) {
    RunConfig cfg;
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto pos = line.find('=');
        if (pos == std::string::npos) {
            throw ConfigError("config: line " + std::to_string(line_no) +
                              " is not a key=value assignment");
        }
        apply_config_entry(cfg, trim(line.substr(0, pos)), trim(line.substr(pos + 1)));
    }
    cfg.validate();
    return cfg;
}

RunConfig parse_run_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) {
        throw IoError("config: cannot open '" + path + "'");
    }
    return parse_run_config(is);
}

std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& c) {
    return {
        {"t_his", std::to_string(c.t_his)},
        {"t_pred", std::to_string(c.t_pred)},
        {"n_max", std::to_string(c.n_max)},
        {"stride", std::to_string(c.stride)},
        {"d_close", fmt_double(c.d_close)},
        {"embed_width", std::to_string(c.embed_width)},
        {"gat_width", std::to_string(c.gat_width)},
        {"gat_layers", std::to_string(c.gat_layers)},
        {"attention_heads", std::to_string(c.attention_heads)},
        {"leaky_slope", fmt_double(c.leaky_slope)},
        {"stgcn_layers", std::to_string(c.stgcn_layers)},
        {"stgcn_channels", std::to_string(c.stgcn_channels)},
        {"temporal_kernel", std::to_string(c.temporal_kernel)},
        {"gru_hidden", std::to_string(c.gru_hidden)},
        {"lr", fmt_double(c.lr)},
        {"epochs", std::to_string(c.epochs)},
        {"batch_size", std::to_string(c.batch_size)},
        {"seed", std::to_string(c.seed)},
        {"checkpoint_interval", std::to_string(c.checkpoint_interval)},
        {"grad_clip", fmt_double(c.grad_clip)},
        {"loss", c.loss},
    };
}

RunConfig config_from_entries(const std::vector<std::pair<std::string, std::string>>& entries) {
    RunConfig cfg;
    for (const auto& [k, v] : entries) {
        apply_config_entry(cfg, k, v);
    }
    cfg.validate();
    return cfg;
}

void write_run_config(const RunConfig& cfg, std::ostream& os) {
    for (const auto& [k, v] : config_entries(cfg)) {
        os << k << "=" << v << "\n";
    }
}

std::string RunConfig::model_signature() const {
    static const char* kModelKeys[] = {
        "t_his",        "t_pred",          "n_max",           "stride",
        "d_close",      "embed_width",     "gat_width",       "gat_layers",
        "attention_heads", "leaky_slope",  "stgcn_layers",    "stgcn_channels",
        "temporal_kernel", "gru_hidden",
    };
    std::ostringstream os;
    for (const auto& [k, v] : config_entries(*this)) {
        for (const char* mk : kModelKeys) {
            if (k == mk) {
                os << k << "=" << v << "\n";
            }
        }
    }
    return os.str();
}

}  // namespace stf
