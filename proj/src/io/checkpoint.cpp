#include "splatlm/io/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace splatlm::io {

namespace {

constexpr char kMagic[8] = {'S', 'P', 'L', 'M', 'G', 'S', '0', '1'};
constexpr std::uint32_t kVersion = 1;

void put_u64_le(std::ostream& out, std::uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(b, 8);
}

std::uint64_t get_u64_le(std::istream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

void put_u32_le(std::ostream& out, std::uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(b, 4);
}

std::uint32_t get_u32_le(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const GaussianSet& gaussians) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path.string());

    out.write(kMagic, sizeof(kMagic));
    put_u32_le(out, kVersion);
    put_u64_le(out, static_cast<std::uint64_t>(gaussians.count));

    const ParamVector params = gaussians.pack();
    for (double d : params) put_u64_le(out, std::bit_cast<std::uint64_t>(d));
    if (!out) throw std::runtime_error("checkpoint write failed: " + path.string());

    std::ofstream meta(path.string() + ".meta.txt");
    meta << "splatlm checkpoint v" << kVersion << "\n"
         << "gaussians: " << gaussians.count << "\n"
         << "parameters: " << params.size() << "\n"
         << "layout: per-Gaussian [mean(3), log_scale(3), rotation wxyz(4), "
            "opacity_logit(1), color(3)], little-endian float64\n";
}

GaussianSet load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read checkpoint: " + path.string());

    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0)
        throw std::runtime_error("not a splatlm checkpoint: " + path.string());
    const std::uint32_t version = get_u32_le(in);
    if (version != kVersion)
        throw std::runtime_error("unsupported checkpoint version in " + path.string());
    const std::uint64_t count = get_u64_le(in);

    ParamVector params(count * kParamsPerGaussian);
    for (double& d : params) d = std::bit_cast<double>(get_u64_le(in));
    if (!in) throw std::runtime_error("truncated checkpoint: " + path.string());
    return GaussianSet::unpack(params);
}

}  // namespace splatlm::io
