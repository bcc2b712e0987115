#include "stf/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "stf/errors.hpp"

namespace stf {

namespace {

constexpr char kMagic[] = "STF-CHECKPOINT";

void write_f64_le(std::ostream& os, const std::vector<double>& data) {
    for (double v : data) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        unsigned char raw[8];
        for (int i = 0; i < 8; ++i) {
            raw[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
        }
        os.write(reinterpret_cast<const char*>(raw), 8);
    }
}

std::vector<double> read_f64_le(std::istream& is, std::size_t count) {
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        unsigned char raw[8];
        if (!is.read(reinterpret_cast<char*>(raw), 8)) {
            throw IoError("checkpoint: truncated tensor payload");
        }
        std::uint64_t bits = 0;
        for (int b = 0; b < 8; ++b) {
            bits |= static_cast<std::uint64_t>(raw[b]) << (8 * b);
        }
        double v;
        std::memcpy(&v, &bits, sizeof v);
        out[i] = v;
    }
    return out;
}

std::string read_line(std::istream& is, const char* what) {
    std::string line;
    if (!std::getline(is, line)) {
        throw IoError(std::string("checkpoint: missing ") + what);
    }
    return line;
}

}  // namespace

const Checkpoint::Entry* Checkpoint::find(const std::string& name) const {
    for (const auto& e : tensors) {
        if (e.name == name) {
            return &e;
        }
    }
    return nullptr;
}

void save_checkpoint(const Checkpoint& ck, std::ostream& os) {
    os << kMagic << " " << ck.version << "\n";
    os << "epoch " << ck.epoch << "\n";
    os << "config " << ck.config.size() << "\n";
    for (const auto& [k, v] : ck.config) {
        os << k << "=" << v << "\n";
    }
    os << "tensors " << ck.tensors.size() << "\n";
    for (const auto& e : ck.tensors) {
        os << "tensor " << e.name << " " << e.shape.size();
        for (int d : e.shape) {
            os << " " << d;
        }
        os << "\n";
        write_f64_le(os, e.data);
        os << "\n";
    }
    if (!os) {
        throw IoError("checkpoint: write failed");
    }
}

Checkpoint load_checkpoint(std::istream& is) {
    Checkpoint ck;
    {
        std::istringstream head(read_line(is, "header"));
        std::string magic;
        head >> magic >> ck.version;
        if (magic != kMagic || ck.version != 1) {
            throw IoError("checkpoint: unrecognized header");
        }
    }
    {
        std::istringstream line(read_line(is, "epoch line"));
        std::string tag;
        line >> tag >> ck.epoch;
        if (tag != "epoch" || !line) {
            throw IoError("checkpoint: malformed epoch line");
        }
    }
    std::size_t n_config = 0;
    {
        std::istringstream line(read_line(is, "config line"));
        std::string tag;
        line >> tag >> n_config;
        if (tag != "config" || !line) {
            throw IoError("checkpoint: malformed config line");
        }
    }
    for (std::size_t i = 0; i < n_config; ++i) {
        const std::string kv = read_line(is, "config entry");
        const auto pos = kv.find('=');
        if (pos == std::string::npos) {
            throw IoError("checkpoint: malformed config entry '" + kv + "'");
        }
        ck.config.emplace_back(kv.substr(0, pos), kv.substr(pos + 1));
    }
    std::size_t n_tensors = 0;
    {
        std::istringstream line(read_line(is, "tensor count"));
        std::string tag;
        line >> tag >> n_tensors;
        if (tag != "tensors" || !line) {
            throw IoError("checkpoint: malformed tensor count");
        }
    }
    for (std::size_t i = 0; i < n_tensors; ++i) {
        std::istringstream line(read_line(is, "tensor header"));
        std::string tag;
        Checkpoint::Entry e;
        std::size_t rank = 0;
        line >> tag >> e.name >> rank;
        if (tag != "tensor" || !line) {
            throw IoError("checkpoint: malformed tensor header");
        }
        std::size_t count = 1;
        for (std::size_t r = 0; r < rank; ++r) {
            int d = 0;
            line >> d;
            if (!line || d <= 0) {
                throw IoError("checkpoint: malformed tensor shape for '" + e.name + "'");
            }
            e.shape.push_back(d);
            count *= static_cast<std::size_t>(d);
        }
        e.data = read_f64_le(is, count);
        char nl;
        if (!is.get(nl) || nl != '\n') {
            throw IoError("checkpoint: missing payload terminator for '" + e.name + "'");
        }
        ck.tensors.push_back(std::move(e));
    }
    return ck;
}

void save_checkpoint_file(const Checkpoint& ck, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw IoError("checkpoint: cannot open '" + path + "' for writing");
    }
    save_checkpoint(ck, os);
}

Checkpoint load_checkpoint_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        throw IoError("checkpoint: cannot open '" + path + "'");
    }
    return load_checkpoint(is);
}

}  // namespace stf
