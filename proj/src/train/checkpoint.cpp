#include "oia/train/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <string>

#include "oia/data/feature_file.hpp"
#include "oia/errors.hpp"

namespace oia {

namespace {

constexpr char kMagic[4] = {'O', 'I', 'A', 'C'};

void put_f64(std::vector<std::uint8_t>& out, double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    le::put_u32(out, static_cast<std::uint32_t>(bits));
    le::put_u32(out, static_cast<std::uint32_t>(bits >> 32));
}

class Reader {
public:
    Reader(std::span<const std::uint8_t> bytes, const std::string& origin) : bytes_(bytes), origin_(origin) {}

    const std::uint8_t* take(std::size_t n) {
        if (bytes_.size() - pos_ < n) throw DataError(origin_ + ": checkpoint truncated");
        const std::uint8_t* p = bytes_.data() + pos_;
        pos_ += n;
        return p;
    }
    std::uint32_t u32() { return le::get_u32(take(4)); }
    double f64() {
        const std::uint8_t* p = take(8);
        return std::bit_cast<double>(static_cast<std::uint64_t>(le::get_u32(p)) |
                                     static_cast<std::uint64_t>(le::get_u32(p + 4)) << 32);
    }
    bool done() const { return pos_ == bytes_.size(); }

private:
    std::span<const std::uint8_t> bytes_;
    const std::string& origin_;
    std::size_t pos_ = 0;
};

constexpr std::array<Ablation, 5> kAblations = {Ablation::Full, Ablation::LocalOnly, Ablation::GlobalOnly,
                                                Ablation::RandomSelector, Ablation::SingleAction};

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt) {
    const ModelConfig& c = ckpt.params.config;
    std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
    le::put_u32(out, kCheckpointVersion);
    le::put_u32(out, static_cast<std::uint32_t>(ckpt.ablation));
    put_f64(out, ckpt.lambda);
    le::put_u32(out, static_cast<std::uint32_t>(ckpt.seed));
    le::put_u32(out, static_cast<std::uint32_t>(ckpt.seed >> 32));
    le::put_u32(out, static_cast<std::uint32_t>(c.profile.size()));
    out.insert(out.end(), c.profile.begin(), c.profile.end());
    for (std::size_t v : {c.c_backbone, c.c_local, c.c_global, c.spatial, c.k, c.global_hidden, c.selector_hidden1,
                          c.selector_hidden2, c.head_dims[0], c.head_dims[1]}) {
        le::put_u32(out, static_cast<std::uint32_t>(v));
    }
    for (const ag::Tensor* t : ckpt.params.tensors()) {
        le::put_u32(out, static_cast<std::uint32_t>(t->numel()));
        for (double v : t->values()) put_f64(out, v);
    }
    return out;
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes, const std::string& origin) {
    Reader r(bytes, origin);
    if (std::memcmp(r.take(4), kMagic, 4) != 0) throw DataError(origin + ": not a checkpoint (bad magic)");
    if (const std::uint32_t v = r.u32(); v != kCheckpointVersion) {
        throw DataError(origin + ": unsupported checkpoint version " + std::to_string(v));
    }
    Checkpoint ck;
    const std::uint32_t ab = r.u32();
    if (ab >= kAblations.size()) throw DataError(origin + ": unknown ablation code " + std::to_string(ab));
    ck.ablation = kAblations[ab];
    ck.lambda = r.f64();
    ck.seed = r.u32();
    ck.seed |= static_cast<std::uint64_t>(r.u32()) << 32;
    ModelConfig c;
    const std::uint32_t plen = r.u32();
    const std::uint8_t* p = r.take(plen);
    c.profile.assign(reinterpret_cast<const char*>(p), plen);
    for (std::size_t* f : {&c.c_backbone, &c.c_local, &c.c_global, &c.spatial, &c.k, &c.global_hidden,
                           &c.selector_hidden1, &c.selector_hidden2, &c.head_dims[0], &c.head_dims[1]}) {
        *f = r.u32();
    }
    c.lambda = ck.lambda;
    try {
        c.validate();
    } catch (const std::invalid_argument& e) {
        throw DataError(origin + ": " + e.what());
    }
    ck.params = ModelParams::init(c, 0);
    for (auto& nt : ck.params.named_tensors()) {
        const std::uint32_t n = r.u32();
        if (n != nt.tensor->numel()) {
            throw DataError(origin + ": " + nt.name + " holds " + std::to_string(n) + " values, config implies " +
                            std::to_string(nt.tensor->numel()));
        }
        for (double& v : nt.tensor->values()) v = r.f64();
    }
    if (!r.done()) throw DataError(origin + ": trailing bytes after checkpoint");
    return ck;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
    write_file_bytes(path, encode_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    const auto bytes = read_file_bytes(path);
    return decode_checkpoint(bytes, path.string());
}

}  // namespace oia
