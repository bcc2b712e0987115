#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "stf/tensor.hpp"

namespace stf {

/// On-disk training state. The wire layout is a text header (format version,
/// resume epoch, config snapshot as key=value lines) followed by one entry
/// per tensor: a text line with its name and shape, then the raw
/// little-endian 64-bit float payload. Round-trips byte-exactly.
struct Checkpoint {
    int version = 1;
    long long epoch = 0;
    std::vector<std::pair<std::string, std::string>> config;

    struct Entry {
        std::string name;
        std::vector<int> shape;
        std::vector<double> data;
    };
    std::vector<Entry> tensors;

    const Entry* find(const std::string& name) const;
};

void save_checkpoint(const Checkpoint& ck, std::ostream& os);
Checkpoint load_checkpoint(std::istream& is);

void save_checkpoint_file(const Checkpoint& ck, const std::string& path);
Checkpoint load_checkpoint_file(const std::string& path);

}  // namespace stf
