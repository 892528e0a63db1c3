#include "hardhank/nn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hardhank::nn {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'H', 'H', 'A', 'N', 'K', 'N', 'N', '\0'};

template <class T>
void put(std::ostream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is, const std::string& path) {
    T v{};
    if (!is.read(reinterpret_cast<char*>(&v), sizeof(T)))
        throw std::runtime_error("checkpoint '" + path + "': truncated file");
    return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
    os.write(kMagic, sizeof kMagic);
    put<std::uint32_t>(os, Checkpoint::kVersion);
    put<std::uint64_t>(os, ckpt.seed);
    put<std::uint32_t>(os, static_cast<std::uint32_t>(ckpt.activation));
    put<std::uint32_t>(os, static_cast<std::uint32_t>(ckpt.widths.size()));
    for (const auto& w : ckpt.widths) {
        put<std::uint32_t>(os, static_cast<std::uint32_t>(w.size()));
        for (int x : w) put<std::uint32_t>(os, static_cast<std::uint32_t>(x));
    }
    put<std::uint64_t>(os, static_cast<std::uint64_t>(ckpt.params.size()));
    os.write(reinterpret_cast<const char*>(ckpt.params.data()),
             static_cast<std::streamsize>(ckpt.params.size() * sizeof(double)));
    if (!os) throw std::runtime_error("write to '" + path + "' failed");
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open checkpoint '" + path + "'");
    char magic[8];
    if (!is.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
        throw std::runtime_error("'" + path + "' is not a network checkpoint");
    const auto version = get<std::uint32_t>(is, path);
    if (version != Checkpoint::kVersion)
        throw std::runtime_error("checkpoint '" + path + "': unsupported version " + std::to_string(version));
    Checkpoint c;
    c.seed = get<std::uint64_t>(is, path);
    const auto act = get<std::uint32_t>(is, path);
    if (act > 1) throw std::runtime_error("checkpoint '" + path + "': unknown activation code");
    c.activation = static_cast<Activation>(act);
    const auto nets = get<std::uint32_t>(is, path);
    if (nets > 16) throw std::runtime_error("checkpoint '" + path + "': implausible network count");
    for (std::uint32_t n = 0; n < nets; ++n) {
        const auto count = get<std::uint32_t>(is, path);
        if (count > 1024) throw std::runtime_error("checkpoint '" + path + "': implausible layer count");
        std::vector<int> w(count);
        for (auto& x : w) x = static_cast<int>(get<std::uint32_t>(is, path));
        c.widths.push_back(std::move(w));
    }
    const auto size = get<std::uint64_t>(is, path);
    if (size > (std::uint64_t{1} << 32)) throw std::runtime_error("checkpoint '" + path + "': implausible size");
    c.params.resize(static_cast<Eigen::Index>(size));
    if (!is.read(reinterpret_cast<char*>(c.params.data()), static_cast<std::streamsize>(size * sizeof(double))))
        throw std::runtime_error("checkpoint '" + path + "': truncated parameter payload");
    return c;
}

std::string describe_shapes(const std::vector<std::vector<int>>& widths) {
    std::ostringstream os;
    for (std::size_t n = 0; n < widths.size(); ++n) {
        if (n) os << " + ";
        os << "[";
        for (std::size_t i = 0; i < widths[n].size(); ++i) os << (i ? "x" : "") << widths[n][i];
        os << "]";
    }
    return os.str();
}

void check_compatible(const Checkpoint& ckpt, const std::vector<std::vector<int>>& expected, Activation activation) {
    if (ckpt.widths != expected)
        throw std::runtime_error("checkpoint network shape " + describe_shapes(ckpt.widths) +
                                 " does not match configured shape " + describe_shapes(expected));
    if (ckpt.activation != activation)
        throw std::runtime_error("checkpoint activation " + to_string(ckpt.activation) +
                                 " does not match configured activation " + to_string(activation));
    Eigen::Index n = 0;
    for (const auto& w : expected) n += NetworkSpec{w, activation, {}}.num_params();
    if (ckpt.params.size() != n)
        throw std::runtime_error("checkpoint holds " + std::to_string(ckpt.params.size()) +
                                 " parameters, configured networks need " + std::to_string(n));
}

}  // namespace hardhank::nn
