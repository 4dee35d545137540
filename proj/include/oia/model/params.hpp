#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "oia/autograd/tensor.hpp"
#include "oia/model/config.hpp"

namespace oia {

struct ConvParams {
    ag::Tensor weight;  // C_out x C_in x kH x kW
    ag::Tensor bias;    // C_out
};

struct LinearParams {
    ag::Tensor weight;  // D_out x D_in
    ag::Tensor bias;    // D_out
};

// conv 3x3 (c_backbone -> global_hidden) -> ReLU -> conv 3x3 (-> c_global)
// -> ReLU -> adaptive average pool.
struct GlobalModuleParams {
    ConvParams conv1;
    ConvParams conv2;
};

// conv 1x1 (c -> h1) -> ReLU -> conv 3x3 (h1 -> h2) -> ReLU -> conv 1x1 (h2 -> 1)
// -> spatial mean.
struct SelectorParams {
    ConvParams conv1;
    ConvParams conv2;
    ConvParams conv3;
};

// fc1 (k*c -> head_dims[0]) -> ReLU -> fc2 -> ReLU -> out (-> 4 + 21).
struct HeadParams {
    LinearParams fc1;
    LinearParams fc2;
    LinearParams out;
};

struct NamedTensor {
    std::string name;
    ag::Tensor* tensor;
};

struct ModelParams {
    ModelConfig config;
    GlobalModuleParams global;
    SelectorParams selector;
    HeadParams head;

    // He-uniform weights (bound sqrt(6 / fan_in)), zero biases; the output
    // layer uses bound sqrt(1 / fan_in).
    static ModelParams init(const ModelConfig& config, std::uint64_t seed);

    // Every tensor in a fixed order. Pointers are into *this.
    std::vector<NamedTensor> named_tensors();
    std::vector<const ag::Tensor*> tensors() const;

    void set_requires_grad(bool flag);
    void zero_grad();
    std::size_t parameter_count() const;
};

}  // namespace oia
