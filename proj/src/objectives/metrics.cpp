#include "oia/objectives/metrics.hpp"

#include <numeric>
#include <stdexcept>
#include <string>

#include "oia/errors.hpp"

namespace oia {

double ConfusionCounts::f1() const {
    const std::uint64_t denom = 2 * tp + fp + fn;
    if (denom == 0) return 0.0;
    return static_cast<double>(2 * tp) / static_cast<double>(denom);
}

void BinaryMatrix::set(std::size_t r, std::size_t c, int v) {
    if (v != 0 && v != 1) throw std::invalid_argument("binary matrix entry must be 0 or 1");
    data_[r * cols_ + c] = v;
}

void BinaryMatrix::append_row(std::span<const int> row) {
    if (rows_ == 0 && cols_ == 0) cols_ = row.size();
    if (row.size() != cols_) {
        throw DimensionError("row of width " + std::to_string(row.size()) + " appended to matrix of width " +
                             std::to_string(cols_));
    }
    for (int v : row) {
        if (v != 0 && v != 1) throw std::invalid_argument("binary matrix entry must be 0 or 1");
    }
    data_.insert(data_.end(), row.begin(), row.end());
    ++rows_;
}

ConfusionCounts confusion(std::span<const int> predictions, std::span<const int> truths) {
    if (predictions.size() != truths.size()) {
        throw DimensionError("prediction length " + std::to_string(predictions.size()) + " != truth length " +
                             std::to_string(truths.size()));
    }
    ConfusionCounts c;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const bool p = predictions[i] != 0;
        const bool t = truths[i] != 0;
        if (p && t) ++c.tp;
        else if (p) ++c.fp;
        else if (t) ++c.fn;
        else ++c.tn;
    }
    return c;
}

double f1_binary(std::span<const int> predictions, std::span<const int> truths) {
    if (predictions.empty()) throw DimensionError("f1_binary needs at least one pair");
    return confusion(predictions, truths).f1();
}

namespace {

void check_same_shape(const BinaryMatrix& p, const BinaryMatrix& t) {
    if (p.rows() != t.rows() || p.cols() != t.cols()) {
        throw DimensionError("prediction matrix " + std::to_string(p.rows()) + "x" + std::to_string(p.cols()) +
                             " != truth matrix " + std::to_string(t.rows()) + "x" + std::to_string(t.cols()));
    }
}

MultiLabelCounter count(const BinaryMatrix& p, const BinaryMatrix& t) {
    check_same_shape(p, t);
    MultiLabelCounter c(p.cols());
    for (std::size_t r = 0; r < p.rows(); ++r) c.add(p.row(r), t.row(r));
    return c;
}

}  // namespace

std::vector<double> per_class_f1(const BinaryMatrix& predictions, const BinaryMatrix& truths) {
    return count(predictions, truths).per_class_f1();
}

double mean_of(std::span<const double> per_class) {
    if (per_class.empty()) return 0.0;
    return std::accumulate(per_class.begin(), per_class.end(), 0.0) / static_cast<double>(per_class.size());
}

double mf1(const BinaryMatrix& predictions, const BinaryMatrix& truths) {
    return count(predictions, truths).mf1();
}

double f1_all(const BinaryMatrix& predictions, const BinaryMatrix& truths) {
    return count(predictions, truths).f1_all();
}

std::vector<int> threshold_predict(std::span<const double> logits) {
    std::vector<int> out(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] > 0.0 ? 1 : 0;
    return out;
}

void MultiLabelCounter::add(std::span<const int> predictions, std::span<const int> truths) {
    if (predictions.size() != per_class_.size() || truths.size() != per_class_.size()) {
        throw DimensionError("expected " + std::to_string(per_class_.size()) + " classes, got " +
                             std::to_string(predictions.size()) + " predictions and " +
                             std::to_string(truths.size()) + " truths");
    }
    for (std::size_t c = 0; c < per_class_.size(); ++c) {
        per_class_[c] += confusion(predictions.subspan(c, 1), truths.subspan(c, 1));
    }
}

MultiLabelCounter& MultiLabelCounter::operator+=(const MultiLabelCounter& o) {
    if (o.per_class_.size() != per_class_.size()) throw DimensionError("merging counters of different arity");
    for (std::size_t c = 0; c < per_class_.size(); ++c) per_class_[c] += o.per_class_[c];
    return *this;
}

std::vector<double> MultiLabelCounter::per_class_f1() const {
    std::vector<double> out;
    out.reserve(per_class_.size());
    for (const auto& c : per_class_) out.push_back(c.f1());
    return out;
}

double MultiLabelCounter::mf1() const {
    const auto f = per_class_f1();
    return mean_of(f);
}

double MultiLabelCounter::f1_all() const {
    ConfusionCounts total;
    for (const auto& c : per_class_) total += c;
    return total.f1();
}

MetricsBundle make_bundle(const MultiLabelCounter& actions, const MultiLabelCounter& explanations) {
    if (actions.classes() != kNumActions || explanations.classes() != kNumExplanations) {
        throw DimensionError("metrics bundle needs 4 action and 21 explanation classes");
    }
    MetricsBundle b;
    const auto f = actions.per_class_f1();
    for (std::size_t i = 0; i < kNumActions; ++i) b.action_f1[i] = f[i];
    b.action_mf1 = mean_of(f);
    b.action_f1_all = actions.f1_all();
    b.explanation_mf1 = explanations.mf1();
    b.explanation_f1_all = explanations.f1_all();
    return b;
}

}  // namespace oia
