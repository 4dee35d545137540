#include "oia/autograd/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "oia/errors.hpp"

namespace oia::ag {

std::size_t shape_numel(const Shape& shape) {
    if (shape.empty()) return 0;
    std::size_t n = 1;
    for (std::size_t e : shape) n *= e;
    return n;
}

std::string shape_str(const Shape& shape) {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += "x";
        s += std::to_string(shape[i]);
    }
    return s + "]";
}

namespace {

void check_extents(const Shape& shape) {
    if (shape.empty()) throw DimensionError("tensor shape must have at least one axis");
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (shape[i] == 0) {
            throw DimensionError("tensor extent " + std::to_string(i) + " is zero in " + shape_str(shape));
        }
    }
}

}  // namespace

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)) {
    check_extents(shape_);
    values_.assign(shape_numel(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<double> values) : shape_(std::move(shape)), values_(std::move(values)) {
    check_extents(shape_);
    if (values_.size() != shape_numel(shape_)) {
        throw DimensionError("tensor of shape " + shape_str(shape_) + " needs " +
                             std::to_string(shape_numel(shape_)) + " values, got " +
                             std::to_string(values_.size()));
    }
}

Tensor Tensor::vector(std::initializer_list<double> values) {
    return Tensor(Shape{values.size()}, std::vector<double>(values));
}

std::size_t Tensor::dim(std::size_t axis) const {
    if (axis >= shape_.size()) {
        throw DimensionError("axis " + std::to_string(axis) + " out of range for " + shape_str(shape_));
    }
    return shape_[axis];
}

double& Tensor::at(std::size_t c, std::size_t h, std::size_t w) {
    return values_[(c * shape_[1] + h) * shape_[2] + w];
}

double Tensor::at(std::size_t c, std::size_t h, std::size_t w) const {
    return values_[(c * shape_[1] + h) * shape_[2] + w];
}

Tensor& Tensor::set_requires_grad(bool flag) {
    requires_grad_ = flag;
    if (flag) {
        grad_.assign(values_.size(), 0.0);
    } else {
        grad_.clear();
        grad_.shrink_to_fit();
    }
    return *this;
}

void Tensor::zero_grad() { std::fill(grad_.begin(), grad_.end(), 0.0); }

Tensor Tensor::reshaped(Shape shape) const {
    return Tensor(std::move(shape), values_);
}

bool Tensor::all_finite() const noexcept {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace oia::ag
