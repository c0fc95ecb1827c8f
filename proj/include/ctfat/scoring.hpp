#pragma once

#include <vector>

#include "ctfat/fatseg.hpp"

namespace ctfat {

struct ScoringParams {
    double a = 1.0; // weight of the ratio margin in score_tb
    double b = 1.0; // weight of the PTB probability in score_tb
    double ratio_threshold = 0.63;
    double ptb_threshold = 0.5;
};

struct DiagnosisResult {
    double score_crohn = 0.0; // fat_ratio - ratio_threshold
    double score_tb = 0.0;    // a*(ratio_threshold - fat_ratio) + b*p_ptb
    double p_ptb = 0.0;
    bool ptb_positive = false;
    Label label = Label::ITB; // argmax of the two scores, CD on ties
};

// Indices 0, stride, 2*stride, ... below n_slices. stride < 1 throws
// InvalidStride; n_slices < 0 throws OutOfRange.
std::vector<int> select_slices(int n_slices, int stride = 10);

// Mean of the top-min(3, n) probabilities, summed largest-first. Values must
// be finite and within [0, 1] (OutOfRange); empty input throws EmptySeries,
// or, with require_three, fewer than three values do.
double aggregate_ptb(const std::vector<double>& probs, bool require_three = false);

// p_ptb > threshold, strictly.
bool classify_ptb(double p_ptb, double threshold = 0.5);

// Combined score pair and final label. Inputs must be finite
// (NonFiniteInput); p_ptb must lie in [0, 1] (OutOfRange).
DiagnosisResult compute_scores(double fat_ratio, double p_ptb,
                               const ScoringParams& params = {});

} // namespace ctfat
