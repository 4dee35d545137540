#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace oia::ag {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

// Dense row-major array of doubles with an optional gradient buffer.
//
// A default-constructed Tensor is empty (rank 0, no values). Any tensor built
// from a shape has extents >= 1 and exactly prod(shape) values. The gradient
// buffer, when present, always matches the value shape.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape, double fill = 0.0);
    Tensor(Shape shape, std::vector<double> values);

    static Tensor zeros(Shape shape) { return Tensor(std::move(shape), 0.0); }
    static Tensor scalar(double v) { return Tensor(Shape{1}, v); }
    static Tensor vector(std::initializer_list<double> values);

    const Shape& shape() const noexcept { return shape_; }
    std::size_t rank() const noexcept { return shape_.size(); }
    std::size_t dim(std::size_t axis) const;
    std::size_t numel() const noexcept { return values_.size(); }
    bool empty() const noexcept { return values_.empty(); }

    std::span<double> values() noexcept { return values_; }
    std::span<const double> values() const noexcept { return values_; }
    double* data() noexcept { return values_.data(); }
    const double* data() const noexcept { return values_.data(); }

    double& operator[](std::size_t i) { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }

    // Row-major element access for rank-3 tensors (c, h, w).
    double& at(std::size_t c, std::size_t h, std::size_t w);
    double at(std::size_t c, std::size_t h, std::size_t w) const;

    bool requires_grad() const noexcept { return requires_grad_; }
    // Enabling allocates a zeroed gradient buffer; disabling drops it.
    Tensor& set_requires_grad(bool flag);
    bool has_grad() const noexcept { return !grad_.empty(); }
    std::span<double> grad() noexcept { return grad_; }
    std::span<const double> grad() const noexcept { return grad_; }
    void zero_grad();

    // Same values viewed under a new shape with equal element count.
    Tensor reshaped(Shape shape) const;

    bool all_finite() const noexcept;

private:
    Shape shape_;
    std::vector<double> values_;
    std::vector<double> grad_;
    bool requires_grad_ = false;
};

}  // namespace oia::ag
