#include "oia/model/params.hpp"

#include <cmath>
#include <random>

namespace oia {
namespace {

void fill_uniform(ag::Tensor& t, double bound, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> d(-bound, bound);
    for (double& v : t.values()) v = d(rng);
}

ConvParams make_conv(std::size_t cin, std::size_t cout, std::size_t kernel, double gain, std::mt19937_64& rng) {
    ConvParams p{ag::Tensor(ag::Shape{cout, cin, kernel, kernel}), ag::Tensor(ag::Shape{cout})};
    fill_uniform(p.weight, std::sqrt(gain / static_cast<double>(cin * kernel * kernel)), rng);
    return p;
}

LinearParams make_linear(std::size_t din, std::size_t dout, double gain, std::mt19937_64& rng) {
    LinearParams p{ag::Tensor(ag::Shape{dout, din}), ag::Tensor(ag::Shape{dout})};
    fill_uniform(p.weight, std::sqrt(gain / static_cast<double>(din)), rng);
    return p;
}

}  // namespace

ModelParams ModelParams::init(const ModelConfig& config, std::uint64_t seed) {
    config.validate();
    std::mt19937_64 rng(seed);
    const std::size_t c = config.object_scene_channels();
    ModelParams p;
    p.config = config;
    p.global.conv1 = make_conv(config.c_backbone, config.global_hidden, 3, 6.0, rng);
    p.global.conv2 = make_conv(config.global_hidden, config.c_global, 3, 6.0, rng);
    p.selector.conv1 = make_conv(c, config.selector_hidden1, 1, 6.0, rng);
    p.selector.conv2 = make_conv(config.selector_hidden1, config.selector_hidden2, 3, 6.0, rng);
    p.selector.conv3 = make_conv(config.selector_hidden2, 1, 1, 1.0, rng);
    p.head.fc1 = make_linear(config.head_input(), config.head_dims[0], 6.0, rng);
    p.head.fc2 = make_linear(config.head_dims[0], config.head_dims[1], 6.0, rng);
    p.head.out = make_linear(config.head_dims[1], kHeadOutputs, 1.0, rng);
    return p;
}

std::vector<NamedTensor> ModelParams::named_tensors() {
    return {
        {"global.conv1.weight", &global.conv1.weight},     {"global.conv1.bias", &global.conv1.bias},
        {"global.conv2.weight", &global.conv2.weight},     {"global.conv2.bias", &global.conv2.bias},
        {"selector.conv1.weight", &selector.conv1.weight}, {"selector.conv1.bias", &selector.conv1.bias},
        {"selector.conv2.weight", &selector.conv2.weight}, {"selector.conv2.bias", &selector.conv2.bias},
        {"selector.conv3.weight", &selector.conv3.weight}, {"selector.conv3.bias", &selector.conv3.bias},
        {"head.fc1.weight", &head.fc1.weight},             {"head.fc1.bias", &head.fc1.bias},
        {"head.fc2.weight", &head.fc2.weight},             {"head.fc2.bias", &head.fc2.bias},
        {"head.out.weight", &head.out.weight},             {"head.out.bias", &head.out.bias},
    };
}

std::vector<const ag::Tensor*> ModelParams::tensors() const {
    std::vector<const ag::Tensor*> out;
    for (const auto& nt : const_cast<ModelParams*>(this)->named_tensors()) out.push_back(nt.tensor);
    return out;
}

void ModelParams::set_requires_grad(bool flag) {
    for (auto& nt : named_tensors()) nt.tensor->set_requires_grad(flag);
}

void ModelParams::zero_grad() {
    for (auto& nt : named_tensors()) nt.tensor->zero_grad();
}

std::size_t ModelParams::parameter_count() const {
    std::size_t n = 0;
    for (const ag::Tensor* t : tensors()) n += t->numel();
    return n;
}

}  // namespace oia
