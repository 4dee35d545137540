#include "oia/autograd/tape.hpp"

#include <stdexcept>

#include "oia/errors.hpp"
#include "oia/simd/kernels.hpp"

namespace oia::ag {

Var Tape::leaf(Tensor& tensor) {
    Node n;
    n.borrowed = &tensor;
    n.requires_grad = tensor.requires_grad();
    if (n.requires_grad) n.sink = &tensor;
    nodes_.push_back(std::move(n));
    return Var(this, nodes_.size() - 1);
}

Var Tape::leaf(const Tensor& tensor) {
    Node n;
    n.borrowed = &tensor;
    nodes_.push_back(std::move(n));
    return Var(this, nodes_.size() - 1);
}

Var Tape::constant(Tensor tensor) {
    Node n;
    n.owned = std::move(tensor);
    nodes_.push_back(std::move(n));
    return Var(this, nodes_.size() - 1);
}

Var Tape::record(Tensor value, std::span<const Var> operands, BackwardFn backward) {
    Node n;
    n.owned = std::move(value);
    for (const Var& v : operands) {
        if (&v.tape() != this) throw std::logic_error("operand recorded on a different tape");
        n.requires_grad = n.requires_grad || nodes_[v.id()].requires_grad;
    }
    if (n.requires_grad) n.backward = std::move(backward);
    nodes_.push_back(std::move(n));
    return Var(this, nodes_.size() - 1);
}

const Tensor& Tape::value(std::size_t id) const {
    const Node& n = nodes_[id];
    return n.borrowed ? *n.borrowed : n.owned;
}

std::span<double> Tape::grad_buffer(std::size_t id) {
    Node& n = nodes_[id];
    if (n.grad.empty()) n.grad.assign(value(id).numel(), 0.0);
    return n.grad;
}

std::span<const double> Tape::grad(Var v) const { return nodes_[v.id()].grad; }

void Tape::backward(Var loss) {
    if (&loss.tape() != this) throw std::logic_error("loss recorded on a different tape");
    if (value(loss.id()).numel() != 1) {
        throw DimensionError("backward needs a scalar loss, got shape " + shape_str(value(loss.id()).shape()));
    }
    if (backward_done_) throw std::logic_error("backward already ran on this tape");
    backward_done_ = true;
    if (!nodes_[loss.id()].requires_grad) return;

    grad_buffer(loss.id())[0] = 1.0;
    const auto& kt = simd::active();
    for (std::size_t i = loss.id() + 1; i-- > 0;) {
        Node& n = nodes_[i];
        if (!n.requires_grad || n.grad.empty()) continue;
        if (n.sink) {
            kt.axpy(1.0, n.grad.data(), n.sink->grad().data(), n.grad.size());
        } else if (n.backward) {
            n.backward(*this, n.owned, n.grad);
        }
    }
}

}  // namespace oia::ag
