#pragma once
// Binary per-scene feature container.
//
// Layout (all little-endian):
//   "OIAF"  u32 version=1  u32 N  u32 c_local  u32 c_backbone  u32 H_b  u32 W_b
//   f32 backbone[c_backbone][H_b][W_b]
//   f32 proposals[N][c_local][s][s]
// The proposal side s is implied by the remaining byte count.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "oia/autograd/tensor.hpp"
#include "oia/errors.hpp"

namespace oia {

inline constexpr std::uint32_t kFeatureFileVersion = 1;

class FeatureFileError : public DataError {
public:
    enum class Kind { Io, BadMagic, BadVersion, SizeMismatch, NonFinite };
    FeatureFileError(Kind kind, const std::string& what) : DataError(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

struct SceneFeatures {
    ag::Tensor backbone;
    std::vector<ag::Tensor> proposals;
    // Declared proposal channel count; meaningful even when N = 0.
    std::size_t c_local = 0;
};

// Values are narrowed to binary32 on encode.
std::vector<std::uint8_t> encode_features(const ag::Tensor& backbone, std::span<const ag::Tensor> proposals,
                                          std::size_t c_local);
SceneFeatures decode_features(std::span<const std::uint8_t> bytes, const std::string& origin = "<memory>");

void save_features(const std::filesystem::path& path, const ag::Tensor& backbone,
                   std::span<const ag::Tensor> proposals, std::size_t c_local);
SceneFeatures load_features(const std::filesystem::path& path);

// Round-to-binary32 of every value, in place.
void round_to_float(ag::Tensor& t);

// Little-endian primitives shared with the checkpoint format.
namespace le {
void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v);
void put_f32(std::vector<std::uint8_t>& out, float v);
std::uint32_t get_u32(const std::uint8_t* p);
float get_f32(const std::uint8_t* p);
}  // namespace le

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace oia
