#pragma once
// Differentiable operations recorded on a Tape.
//
// Shapes follow the (channels, height, width) convention for feature maps and
// flat vectors elsewhere. Every op validates extents and throws
// oia::DimensionError naming the offending axes.

#include <cstddef>
#include <span>

#include "oia/autograd/tape.hpp"

namespace oia::ag {

// Cross-correlation (no kernel flip) with zero padding.
// input C_in x H x W, weight C_out x C_in x kH x kW, bias C_out.
Var conv2d(Var input, Var weight, Var bias, std::size_t stride = 1, std::size_t padding = 0);

// weight D_out x D_in, input D_in, bias D_out.
Var linear(Var input, Var weight, Var bias);

// max(0, x); the subgradient at exactly 0 is 0.
Var relu(Var x);
Var sigmoid(Var x);

// Softmax over a vector, computed with max subtraction. The normalizer is
// summed in sorted order, so permuting the input permutes the output exactly.
Var softmax(Var x);

// Cell (i, j) averages rows [floor(i*H/out_h), ceil((i+1)*H/out_h)) and the
// analogous columns.
Var adaptive_avg_pool2d(Var x, std::size_t out_h, std::size_t out_w);

// Stacks a (C_a x H x W) on top of b (C_b x H x W) along channels.
Var concat_channels(Var a, Var b);

// Concatenates along axis 0; trailing extents must agree.
Var concat(std::span<const Var> parts);

// Rows [begin, end) along axis 0.
Var slice(Var x, std::size_t begin, std::size_t end);

Var reshape(Var x, Shape shape);

Var add(Var a, Var b);

// x multiplied by the single element of s.
Var scale(Var x, Var s);

// x multiplied by a constant.
Var mul(Var x, double c);

// Element i of x as a length-1 tensor.
Var pick(Var x, std::size_t i);

// Sum of all elements as a length-1 tensor.
Var sum(Var x);

// Sum over elements of the stable binary cross entropy
//   max(z, 0) - z*t + log(1 + exp(-|z|)).
// Targets must be 0 or 1 and match the number of logits.
Var bce_with_logits(Var logits, std::span<const int> targets);

// -log softmax(z)[target] using the log-sum-exp form.
Var cross_entropy_with_logits(Var logits, std::size_t target);

// Plain-value helpers shared with the metrics and tests.
double sigmoid_value(double x) noexcept;
double bce_value(double logit, int target) noexcept;

}  // namespace oia::ag
