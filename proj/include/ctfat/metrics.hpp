#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ctfat/volume.hpp"

namespace ctfat {

struct ConfusionCounts {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;
    std::uint64_t tn = 0;

    std::uint64_t total() const { return tp + fp + fn + tn; }
};

struct OverlapReport {
    double dice = 0.0;
    double jaccard = 0.0;
    std::uint64_t intersection = 0;
    std::uint64_t size_a = 0;
    std::uint64_t size_b = 0;
    std::uint64_t set_union = 0;
    bool both_empty = false; // dice/jaccard defined as 1.0 in that case
};

// Voxelwise overlap between two masks of identical shape.
// Throws ShapeMismatch otherwise.
OverlapReport overlap(const BinaryMask& a, const BinaryMask& b);

// Each metric is nullopt when its denominator is zero (serialized as null).
struct ClassificationMetrics {
    std::optional<double> accuracy;
    std::optional<double> precision;         // positive predictive value
    std::optional<double> recall;            // sensitivity
    std::optional<double> specificity;
    std::optional<double> false_discovery_rate;
    std::optional<double> negative_predictive_value;
    std::optional<double> f1;
    std::optional<double> balanced_accuracy;
    std::optional<double> mcc;
};

// Derives the scalar metrics from raw counts. Throws EmptyCounts when
// total() == 0.
ClassificationMetrics classification_metrics(const ConfusionCounts& counts);

// |measured - reference| / |reference|; throws ZeroReference when
// reference == 0.
double relative_error(double measured, double reference);

// Tallies a confusion matrix from parallel label vectors. Labels must be
// "CD" or "ITB" (throws UnknownLabel), `positive` selects which one counts
// as positive; vectors must have equal nonzero length (LengthMismatch).
ConfusionCounts batch_classify_eval(const std::vector<std::string>& predicted,
                                    const std::vector<std::string>& truth,
                                    const std::string& positive = "CD");

} // namespace ctfat
