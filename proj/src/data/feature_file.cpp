#include "oia/data/feature_file.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

namespace oia {

namespace le {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f32(std::vector<std::uint8_t>& out, float v) { put_u32(out, std::bit_cast<std::uint32_t>(v)); }

std::uint32_t get_u32(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
           static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

float get_f32(const std::uint8_t* p) { return std::bit_cast<float>(get_u32(p)); }

}  // namespace le

namespace {

constexpr char kMagic[4] = {'O', 'I', 'A', 'F'};
constexpr std::size_t kHeaderBytes = 4 + 4 * 6;

std::uint32_t checked_u32(std::size_t v, const char* what) {
    if (v > 0xffffffffu) throw DimensionError(std::string("feature file: ") + what + " exceeds 32 bits");
    return static_cast<std::uint32_t>(v);
}

void put_tensor(std::vector<std::uint8_t>& out, const ag::Tensor& t) {
    for (double v : t.values()) le::put_f32(out, static_cast<float>(v));
}

ag::Tensor read_tensor(const std::uint8_t*& p, ag::Shape shape, const std::string& origin, const char* what) {
    ag::Tensor t(std::move(shape));
    for (double& v : t.values()) {
        const float f = le::get_f32(p);
        p += 4;
        if (!std::isfinite(f)) {
            throw FeatureFileError(FeatureFileError::Kind::NonFinite, origin + ": non-finite value in " + what);
        }
        v = f;
    }
    return t;
}

}  // namespace

void round_to_float(ag::Tensor& t) {
    for (double& v : t.values()) v = static_cast<float>(v);
}

std::vector<std::uint8_t> encode_features(const ag::Tensor& backbone, std::span<const ag::Tensor> proposals,
                                          std::size_t c_local) {
    if (backbone.rank() != 3) throw DimensionError("feature file: backbone must be C x H x W");
    const ag::Shape* block = proposals.empty() ? nullptr : &proposals[0].shape();
    if (block && (block->size() != 3 || (*block)[0] != c_local || (*block)[1] != (*block)[2])) {
        throw DimensionError("feature file: proposal blocks must be c_local x s x s, got " + ag::shape_str(*block));
    }
    std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
    le::put_u32(out, kFeatureFileVersion);
    le::put_u32(out, checked_u32(proposals.size(), "N"));
    le::put_u32(out, checked_u32(c_local, "c_local"));
    for (std::size_t d = 0; d < 3; ++d) le::put_u32(out, checked_u32(backbone.dim(d), "backbone extent"));
    put_tensor(out, backbone);
    for (const ag::Tensor& p : proposals) {
        if (p.shape() != *block) throw DimensionError("feature file: proposal blocks differ in shape");
        put_tensor(out, p);
    }
    return out;
}

SceneFeatures decode_features(std::span<const std::uint8_t> bytes, const std::string& origin) {
    using Kind = FeatureFileError::Kind;
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
        throw FeatureFileError(Kind::BadMagic, origin + ": not a feature file (bad magic)");
    }
    if (bytes.size() < kHeaderBytes) {
        throw FeatureFileError(Kind::SizeMismatch, origin + ": truncated header (" + std::to_string(bytes.size()) +
                                                       " bytes)");
    }
    const std::uint8_t* p = bytes.data() + 4;
    const std::uint32_t version = le::get_u32(p);
    if (version != kFeatureFileVersion) {
        throw FeatureFileError(Kind::BadVersion, origin + ": unsupported version " + std::to_string(version));
    }
    const std::uint64_t n = le::get_u32(p + 4), c_local = le::get_u32(p + 8), c_b = le::get_u32(p + 12),
                        h = le::get_u32(p + 16), w = le::get_u32(p + 20);
    auto mismatch = [&](const std::string& detail) {
        return FeatureFileError(Kind::SizeMismatch, origin + ": size mismatch, " + detail);
    };
    if (c_b == 0 || h == 0 || w == 0) throw mismatch("zero backbone extent");
    const std::uint64_t payload = bytes.size() - kHeaderBytes;
    const std::uint64_t backbone_bytes = 4 * c_b * h * w;
    if (payload < backbone_bytes) throw mismatch("backbone needs " + std::to_string(backbone_bytes) + " bytes");
    const std::uint64_t rest = payload - backbone_bytes;
    std::uint64_t side = 0;
    if (n == 0) {
        if (rest != 0) throw mismatch(std::to_string(rest) + " trailing bytes after an empty scene");
    } else {
        if (c_local == 0) throw mismatch("zero c_local with N > 0");
        const std::uint64_t per = 4 * n * c_local;
        if (rest % per != 0) throw mismatch("proposal payload not a whole number of blocks");
        const std::uint64_t area = rest / per;
        side = static_cast<std::uint64_t>(std::llround(std::sqrt(static_cast<double>(area))));
        if (side == 0 || side * side != area) throw mismatch("proposal blocks are not square");
    }

    SceneFeatures f;
    f.c_local = c_local;
    const std::uint8_t* cur = bytes.data() + kHeaderBytes;
    f.backbone = read_tensor(cur, ag::Shape{c_b, h, w}, origin, "backbone");
    f.proposals.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) f.proposals.push_back(read_tensor(cur, ag::Shape{c_local, side, side}, origin, "proposal"));
    return f;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FeatureFileError(FeatureFileError::Kind::Io, "cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FeatureFileError(FeatureFileError::Kind::Io, "cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw FeatureFileError(FeatureFileError::Kind::Io, "write failed for " + path.string());
}

void save_features(const std::filesystem::path& path, const ag::Tensor& backbone,
                   std::span<const ag::Tensor> proposals, std::size_t c_local) {
    write_file_bytes(path, encode_features(backbone, proposals, c_local));
}

SceneFeatures load_features(const std::filesystem::path& path) {
    const auto bytes = read_file_bytes(path);
    return decode_features(bytes, path.string());
}

}  // namespace oia
