#include "b2w/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <fstream>
#include <sstream>

#include "b2w/errors.hpp"

namespace b2w {

namespace {

constexpr const char* kMagic = "byte2word-checkpoint v1";

void write_f64_le(std::ofstream& out, double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    char bytes[8];
    for (int i = 0; i < 8; ++i) {
        bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xFF);
    }
    out.write(bytes, 8);
}

double read_f64_le(const unsigned char* p) {
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) {
        bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    }
    return std::bit_cast<double>(bits);
}

}  // namespace

void save_checkpoint(const std::vector<std::pair<std::string, Tensor>>& tensors,
                     const std::vector<std::pair<std::string, std::string>>& config,
                     const std::string& path) {
    std::ofstream manifest(path + ".manifest", std::ios::binary | std::ios::trunc);
    std::ofstream blob(path + ".blob", std::ios::binary | std::ios::trunc);
    if (!manifest || !blob) {
        throw IoError("cannot write checkpoint at " + path);
    }
    manifest << kMagic << "\n";
    for (const auto& [key, value] : config) {
        manifest << "config " << key << " " << value << "\n";
    }
    std::size_t offset = 0;
    for (const auto& [name, tensor] : tensors) {
        if (!tensor.defined()) {
            throw ContractError("save_checkpoint: undefined tensor " + name);
        }
        manifest << "tensor " << name << " " << tensor.shape().size();
        for (std::size_t d : tensor.shape()) {
            manifest << " " << d;
        }
        manifest << " " << offset << "\n";
        for (double v : tensor.data()) {
            write_f64_le(blob, v);
        }
        offset += tensor.numel() * 8;
    }
    manifest << "end\n";
    if (!manifest.good() || !blob.good()) {
        throw IoError("checkpoint write failed at " + path);
    }
}

CheckpointData load_checkpoint(const std::string& path) {
    std::ifstream manifest(path + ".manifest", std::ios::binary);
    if (!manifest) {
        throw IoError("cannot open checkpoint manifest " + path + ".manifest");
    }
    std::ifstream blob_in(path + ".blob", std::ios::binary);
    if (!blob_in) {
        throw IoError("cannot open checkpoint blob " + path + ".blob");
    }
    std::vector<unsigned char> blob((std::istreambuf_iterator<char>(blob_in)),
                                    std::istreambuf_iterator<char>());

    std::string line;
    if (!std::getline(manifest, line) || line != kMagic) {
        throw CorruptionError("checkpoint manifest has wrong magic line: \"" + line + "\"");
    }
    CheckpointData data;
    bool saw_end = false;
    std::size_t expected_offset = 0;
    while (std::getline(manifest, line)) {
        if (line == "end") {
            saw_end = true;
            break;
        }
        std::istringstream row(line);
        std::string kind;
        row >> kind;
        if (kind == "config") {
            std::string key;
            row >> key;
            std::string value;
            std::getline(row, value);
            if (!value.empty() && value.front() == ' ') {
                value.erase(value.begin());
            }
            data.config.emplace_back(key, value);
        } else if (kind == "tensor") {
            std::string name;
            std::size_t rank = 0;
            if (!(row >> name >> rank) || rank == 0) {
                throw CorruptionError("malformed tensor line in manifest: \"" + line + "\"");
            }
            Shape shape(rank);
            for (std::size_t i = 0; i < rank; ++i) {
                if (!(row >> shape[i]) || shape[i] == 0) {
                    throw CorruptionError("malformed shape for tensor " + name);
                }
            }
            std::size_t offset = 0;
            if (!(row >> offset)) {
                throw CorruptionError("missing offset for tensor " + name);
            }
            if (offset != expected_offset) {
                throw CorruptionError("tensor " + name + " offset " + std::to_string(offset) +
                                      " does not follow previous tensor (expected " +
                                      std::to_string(expected_offset) + ")");
            }
            std::size_t numel = 1;
            for (std::size_t d : shape) {
                numel *= d;
            }
            if (offset + numel * 8 > blob.size()) {
                throw CorruptionError("blob too short for tensor " + name + ": needs " +
                                      std::to_string(offset + numel * 8) + " bytes, blob has " +
                                      std::to_string(blob.size()));
            }
            std::vector<double> values(numel);
            for (std::size_t i = 0; i < numel; ++i) {
                values[i] = read_f64_le(blob.data() + offset + i * 8);
            }
            if (data.tensors.count(name) != 0) {
                throw CorruptionError("tensor " + name + " appears twice in manifest");
            }
            data.order.push_back(name);
            data.tensors.emplace(name, Tensor::from(shape, std::move(values)));
            expected_offset = offset + numel * 8;
        } else {
            throw CorruptionError("unknown manifest line: \"" + line + "\"");
        }
    }
    if (!saw_end) {
        throw CorruptionError("checkpoint manifest is truncated (no end line)");
    }
    if (expected_offset != blob.size()) {
        throw CorruptionError("blob length " + std::to_string(blob.size()) +
                              " does not match manifest total " + std::to_string(expected_offset));
    }
    return data;
}

void restore_params(const CheckpointData& data,
                    const std::vector<std::pair<std::string, Tensor>>& dest) {
    for (const auto& [name, tensor] : dest) {
        auto it = data.tensors.find(name);
        if (it == data.tensors.end()) {
            throw CorruptionError("checkpoint is missing tensor " + name);
        }
        if (it->second.shape() != tensor.shape()) {
            throw ShapeError("checkpoint tensor " + name + " has shape " +
                             shape_str(it->second.shape()) + ", model expects " +
                             shape_str(tensor.shape()));
        }
        auto src = it->second.data();
        auto dst = const_cast<Tensor&>(tensor).data();
        std::copy(src.begin(), src.end(), dst.begin());
    }
}

std::vector<std::pair<std::string, Tensor>> optimizer_tensors(
    const AdamWState& state, const std::vector<std::pair<std::string, Tensor>>& params) {
    std::vector<std::pair<std::string, Tensor>> out;
    out.emplace_back("opt.t", Tensor::from({1}, {static_cast<double>(state.t)}));
    for (std::size_t p = 0; p < params.size(); ++p) {
        out.emplace_back("opt.m." + params[p].first,
                         Tensor::from(params[p].second.shape(), state.m[p]));
        out.emplace_back("opt.v." + params[p].first,
                         Tensor::from(params[p].second.shape(), state.v[p]));
    }
    return out;
}

bool has_optimizer_state(const CheckpointData& data) {
    return data.tensors.count("opt.t") != 0;
}

void restore_optimizer(const CheckpointData& data, AdamWState& state,
                       const std::vector<std::pair<std::string, Tensor>>& params) {
    auto t_it = data.tensors.find("opt.t");
    if (t_it == data.tensors.end()) {
        throw CorruptionError("checkpoint carries no optimizer state");
    }
    state.t = static_cast<std::uint64_t>(t_it->second.item());
    state.m.assign(params.size(), {});
    state.v.assign(params.size(), {});
    for (std::size_t p = 0; p < params.size(); ++p) {
        for (const char* kind : {"m", "v"}) {
            const std::string name = std::string("opt.") + kind + "." + params[p].first;
            auto it = data.tensors.find(name);
            if (it == data.tensors.end()) {
                throw CorruptionError("checkpoint is missing tensor " + name);
            }
            if (it->second.numel() != params[p].second.numel()) {
                throw ShapeError("checkpoint tensor " + name + " has " +
                                 std::to_string(it->second.numel()) + " values, parameter has " +
                                 std::to_string(params[p].second.numel()));
            }
            auto src = it->second.data();
            auto& dst = kind[0] == 'm' ? state.m[p] : state.v[p];
            dst.assign(src.begin(), src.end());
        }
    }
}

}  // namespace b2w
