#include "ctfat/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ctfat {

std::vector<int> select_slices(int n_slices, int stride) {
    if (stride < 1) throw InvalidStride("stride must be >= 1");
    if (n_slices < 0) throw OutOfRange("negative slice count");
    std::vector<int> out;
    for (int z = 0; z < n_slices; z += stride) out.push_back(z);
    return out;
}

double aggregate_ptb(const std::vector<double>& probs, bool require_three) {
    if (probs.empty()) throw EmptySeries("no PTB probabilities to aggregate");
    if (require_three && probs.size() < 3)
        throw EmptySeries("need at least 3 PTB probabilities, got " +
                          std::to_string(probs.size()));
    for (double p : probs) {
        if (!std::isfinite(p)) throw OutOfRange("non-finite PTB probability");
        if (p < 0.0 || p > 1.0)
            throw OutOfRange("PTB probability " + std::to_string(p) +
                             " outside [0, 1]");
    }

    const std::size_t k = std::min<std::size_t>(3, probs.size());
    std::vector<double> sorted = probs;
    std::partial_sort(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k),
                      sorted.end(), std::greater<>());
    double sum = 0.0; // largest-first: summation order is part of the contract
    for (std::size_t i = 0; i < k; ++i) sum += sorted[i];
    return sum / static_cast<double>(k);
}

bool classify_ptb(double p_ptb, double threshold) {
    if (!std::isfinite(p_ptb)) throw OutOfRange("non-finite PTB probability");
    return p_ptb > threshold;
}

DiagnosisResult compute_scores(double fat_ratio, double p_ptb,
                               const ScoringParams& params) {
    if (!std::isfinite(fat_ratio)) throw NonFiniteInput("fat_ratio is not finite");
    if (!std::isfinite(p_ptb)) throw NonFiniteInput("p_ptb is not finite");
    if (!std::isfinite(params.a) || !std::isfinite(params.b))
        throw NonFiniteInput("score coefficients must be finite");
    if (p_ptb < 0.0 || p_ptb > 1.0)
        throw OutOfRange("p_ptb " + std::to_string(p_ptb) + " outside [0, 1]");

    DiagnosisResult r;
    r.p_ptb = p_ptb;
    r.score_crohn = fat_ratio - params.ratio_threshold;
    r.score_tb = params.a * (params.ratio_threshold - fat_ratio) + params.b * p_ptb;
    r.ptb_positive = classify_ptb(p_ptb, params.ptb_threshold);
    r.label = r.score_crohn >= r.score_tb ? Label::CD : Label::ITB;
    return r;
}

} // namespace ctfat
