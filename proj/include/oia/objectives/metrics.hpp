#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "oia/objectives/labels.hpp"

namespace oia {

struct ConfusionCounts {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;
    std::uint64_t tn = 0;

    ConfusionCounts& operator+=(const ConfusionCounts& o) {
        tp += o.tp;
        fp += o.fp;
        fn += o.fn;
        tn += o.tn;
        return *this;
    }
    bool operator==(const ConfusionCounts&) const = default;

    // 2TP / (2TP + FP + FN), or 0 when the denominator is 0.
    double f1() const;
};

// Row-major samples x classes matrix of {0,1} flags.
class BinaryMatrix {
public:
    BinaryMatrix() = default;
    BinaryMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    int operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    void set(std::size_t r, std::size_t c, int v);
    void append_row(std::span<const int> row);
    std::span<const int> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
    std::span<const int> flat() const { return data_; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<int> data_;
};

ConfusionCounts confusion(std::span<const int> predictions, std::span<const int> truths);

// Binary F1 over paired flags. Zero-denominator convention: 0.
double f1_binary(std::span<const int> predictions, std::span<const int> truths);

// Per-class F1 down the sample axis.
std::vector<double> per_class_f1(const BinaryMatrix& predictions, const BinaryMatrix& truths);

// Macro average: arithmetic mean of the per-class F1 values.
double mf1(const BinaryMatrix& predictions, const BinaryMatrix& truths);
double mean_of(std::span<const double> per_class);

// Micro average: F1 over every flattened (sample, class) pair.
double f1_all(const BinaryMatrix& predictions, const BinaryMatrix& truths);

// flag = 1 iff logit > 0.
std::vector<int> threshold_predict(std::span<const double> logits);

// Per-class confusion counts, mergeable across workers.
class MultiLabelCounter {
public:
    explicit MultiLabelCounter(std::size_t classes) : per_class_(classes) {}

    void add(std::span<const int> predictions, std::span<const int> truths);
    MultiLabelCounter& operator+=(const MultiLabelCounter& o);

    std::size_t classes() const noexcept { return per_class_.size(); }
    const ConfusionCounts& at(std::size_t c) const { return per_class_[c]; }
    std::vector<double> per_class_f1() const;
    double mf1() const;
    double f1_all() const;

private:
    std::vector<ConfusionCounts> per_class_;
};

struct MetricsBundle {
    std::array<double, kNumActions> action_f1{};
    double action_mf1 = 0.0;
    double action_f1_all = 0.0;
    double explanation_mf1 = 0.0;
    double explanation_f1_all = 0.0;

    bool operator==(const MetricsBundle&) const = default;
};

MetricsBundle make_bundle(const MultiLabelCounter& actions, const MultiLabelCounter& explanations);

}  // namespace oia
