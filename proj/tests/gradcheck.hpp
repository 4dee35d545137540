#pragma once
// Central finite-difference oracle for the autograd tests.
//
// The oracle only ever evaluates forward values on fresh tapes; it never
// reads a backward rule. The analytic side runs one backward pass.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "oia/autograd/ops.hpp"
#include "oia/autograd/tape.hpp"

namespace oia::testing {

using BuildFn = std::function<ag::Var(ag::Tape&, std::vector<ag::Var>&)>;

inline double evaluate(std::vector<ag::Tensor>& inputs, const BuildFn& build) {
    ag::Tape tape;
    std::vector<ag::Var> vars;
    for (auto& t : inputs) vars.push_back(tape.leaf(static_cast<const ag::Tensor&>(t)));
    return build(tape, vars).value()[0];
}

struct GradCheckResult {
    double max_rel_error = 0.0;  // worst over inputs of ||a - n|| / max(||a||, ||n||)
    std::vector<std::vector<double>> analytic;
    std::vector<std::vector<double>> numeric;
};

// Compares backward() against central differences for every input flagged in
// `check` (all inputs when empty).
inline GradCheckResult grad_check(std::vector<ag::Tensor> inputs, const BuildFn& build, double h = 1e-5,
                                  std::vector<bool> check = {}) {
    if (check.empty()) check.assign(inputs.size(), true);
    GradCheckResult r;

    for (std::size_t i = 0; i < inputs.size(); ++i) inputs[i].set_requires_grad(check[i]);
    {
        ag::Tape tape;
        std::vector<ag::Var> vars;
        for (auto& t : inputs) vars.push_back(tape.leaf(t));
        tape.backward(build(tape, vars));
    }
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        r.analytic.emplace_back(inputs[i].grad().begin(), inputs[i].grad().end());
        inputs[i].set_requires_grad(false);
    }

    for (std::size_t i = 0; i < inputs.size(); ++i) {
        std::vector<double> num(inputs[i].numel(), 0.0);
        if (check[i]) {
            for (std::size_t j = 0; j < inputs[i].numel(); ++j) {
                const double orig = inputs[i][j];
                inputs[i][j] = orig + h;
                const double fp = evaluate(inputs, build);
                inputs[i][j] = orig - h;
                const double fm = evaluate(inputs, build);
                inputs[i][j] = orig;
                num[j] = (fp - fm) / (2.0 * h);
            }
            double diff = 0.0, na = 0.0, nn = 0.0;
            for (std::size_t j = 0; j < num.size(); ++j) {
                diff += (r.analytic[i][j] - num[j]) * (r.analytic[i][j] - num[j]);
                na += r.analytic[i][j] * r.analytic[i][j];
                nn += num[j] * num[j];
            }
            const double denom = std::max(std::sqrt(na), std::sqrt(nn));
            const double rel = denom > 0.0 ? std::sqrt(diff) / denom : std::sqrt(diff);
            r.max_rel_error = std::max(r.max_rel_error, rel);
        }
        r.numeric.push_back(std::move(num));
    }
    return r;
}

inline ag::Tensor random_tensor(std::mt19937_64& rng, ag::Shape shape, double sd = 1.0) {
    std::normal_distribution<double> d(0.0, sd);
    ag::Tensor t(std::move(shape));
    for (double& v : t.values()) v = d(rng);
    return t;
}

// Random values with |x| >= margin, for kinked functions.
inline ag::Tensor random_tensor_away_from_zero(std::mt19937_64& rng, ag::Shape shape, double margin) {
    std::uniform_real_distribution<double> mag(margin, 2.0);
    std::bernoulli_distribution sign(0.5);
    ag::Tensor t(std::move(shape));
    for (double& v : t.values()) v = sign(rng) ? mag(rng) : -mag(rng);
    return t;
}

}  // namespace oia::testing
