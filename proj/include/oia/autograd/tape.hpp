#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <span>
#include <vector>

#include "oia/autograd/tensor.hpp"

namespace oia::ag {

class Tape;

// Handle to a value recorded on a Tape. Cheap to copy; valid while the tape
// lives.
class Var {
public:
    Var() = default;

    Tape& tape() const { return *tape_; }
    std::size_t id() const noexcept { return id_; }
    const Tensor& value() const;
    const Shape& shape() const { return value().shape(); }
    std::size_t numel() const { return value().numel(); }
    bool requires_grad() const;

private:
    friend class Tape;
    Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

    Tape* tape_ = nullptr;
    std::size_t id_ = 0;
};

// Records operations in execution order and replays them in reverse to
// propagate gradients.
//
// Leaves created with leaf() borrow an external Tensor; after backward() its
// gradient buffer holds the accumulated adjoint (when requires_grad is set).
// A tape belongs to one thread; run concurrent forward passes on separate
// tapes.
class Tape {
public:
    // Reads the output and adjoint of this node and accumulates into operand
    // adjoints.
    using BackwardFn = std::function<void(Tape&, const Tensor& out, std::span<const double> out_grad)>;

    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    // Borrowed leaf. The tensor must outlive the tape.
    Var leaf(Tensor& tensor);
    Var leaf(const Tensor& tensor);
    // Owned leaf that never receives gradient.
    Var constant(Tensor tensor);

    // Records an op result. `backward` is dropped when no operand requires grad.
    Var record(Tensor value, std::span<const Var> operands, BackwardFn backward);

    const Tensor& value(std::size_t id) const;
    bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }

    // Adjoint buffer of a node, allocated zeroed on first use.
    std::span<double> grad_buffer(std::size_t id);
    // Adjoint of a node after backward(); empty if nothing flowed into it.
    std::span<const double> grad(Var v) const;

    // Seeds d(loss)/d(loss) = 1 and walks the tape in reverse.
    void backward(Var loss);

    std::size_t size() const noexcept { return nodes_.size(); }

private:
    struct Node {
        Tensor owned;
        const Tensor* borrowed = nullptr;
        Tensor* sink = nullptr;
        std::vector<double> grad;
        bool requires_grad = false;
        BackwardFn backward;
    };

    // deque keeps references to earlier values stable while recording.
    std::deque<Node> nodes_;
    bool backward_done_ = false;
};

inline const Tensor& Var::value() const { return tape_->value(id_); }
inline bool Var::requires_grad() const { return tape_->requires_grad(id_); }

}  // namespace oia::ag
