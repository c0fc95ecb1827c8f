#include "ctfat/metrics.hpp"

#include <cmath>

namespace ctfat {
namespace {

std::optional<double> safe_div(double num, double den) {
    if (den == 0.0) return std::nullopt;
    return num / den;
}

} // namespace

OverlapReport overlap(const BinaryMask& a, const BinaryMask& b) {
    if (!(a.shape == b.shape))
        throw ShapeMismatch("mask shapes differ");
    OverlapReport r;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const bool in_a = a.data[i] == BinaryMask::kForeground;
        const bool in_b = b.data[i] == BinaryMask::kForeground;
        r.size_a += in_a;
        r.size_b += in_b;
        r.intersection += in_a && in_b;
        r.set_union += in_a || in_b;
    }
    if (r.size_a == 0 && r.size_b == 0) {
        r.both_empty = true;
        r.dice = 1.0;
        r.jaccard = 1.0;
    } else {
        r.dice = 2.0 * static_cast<double>(r.intersection) /
                 static_cast<double>(r.size_a + r.size_b);
        r.jaccard = static_cast<double>(r.intersection) /
                    static_cast<double>(r.set_union);
    }
    return r;
}

ClassificationMetrics classification_metrics(const ConfusionCounts& c) {
    if (c.total() == 0) throw EmptyCounts("confusion matrix is empty");

    const double tp = static_cast<double>(c.tp);
    const double fp = static_cast<double>(c.fp);
    const double fn = static_cast<double>(c.fn);
    const double tn = static_cast<double>(c.tn);

    ClassificationMetrics m;
    m.accuracy = (tp + tn) / static_cast<double>(c.total());
    m.precision = safe_div(tp, tp + fp);
    m.recall = safe_div(tp, tp + fn);
    m.specificity = safe_div(tn, tn + fp);
    if (m.precision) m.false_discovery_rate = 1.0 - *m.precision;
    m.negative_predictive_value = safe_div(tn, tn + fn);
    m.f1 = safe_div(2.0 * tp, 2.0 * tp + fp + fn);
    if (m.recall && m.specificity)
        m.balanced_accuracy = 0.5 * (*m.recall + *m.specificity);

    const double denom_sq = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
    if (denom_sq > 0.0)
        m.mcc = (tp * tn - fp * fn) / std::sqrt(denom_sq);
    return m;
}

double relative_error(double measured, double reference) {
    if (reference == 0.0) throw ZeroReference("relative error against zero reference");
    return std::abs(measured - reference) / std::abs(reference);
}

ConfusionCounts batch_classify_eval(const std::vector<std::string>& predicted,
                                    const std::vector<std::string>& truth,
                                    const std::string& positive) {
    if (positive != "CD" && positive != "ITB")
        throw UnknownLabel("positive class must be CD or ITB, got '" + positive + "'");
    if (predicted.size() != truth.size())
        throw LengthMismatch("prediction/truth vectors differ in length");
    if (predicted.empty())
        throw LengthMismatch("empty prediction/truth vectors");

    auto as_positive = [&positive](const std::string& label) {
        if (label != "CD" && label != "ITB")
            throw UnknownLabel("unknown label '" + label + "'");
        return label == positive;
    };

    ConfusionCounts c;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const bool p = as_positive(predicted[i]);
        const bool t = as_positive(truth[i]);
        if (p && t) ++c.tp;
        else if (p && !t) ++c.fp;
        else if (!p && t) ++c.fn;
        else ++c.tn;
    }
    return c;
}

} // namespace ctfat
