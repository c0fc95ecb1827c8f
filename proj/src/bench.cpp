#include "ctfat/bench.hpp"

#include <chrono>
#include <cmath>

namespace ctfat {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

StageStats stats_of(const std::vector<double>& samples) {
    StageStats s;
    if (samples.empty()) return s;
    double sum = 0.0;
    for (double v : samples) sum += v;
    s.mean_s = sum / static_cast<double>(samples.size());
    double var = 0.0;
    for (double v : samples) var += (v - s.mean_s) * (v - s.mean_s);
    s.std_s = std::sqrt(var / static_cast<double>(samples.size()));
    return s;
}

struct PipelineTimes {
    double threshold = 0.0;
    double morphology = 0.0;
    double sweep = 0.0;
    double total = 0.0;
};

PipelineTimes run_pipeline_once(const HuVolume& vol, const ThresholdConfig& thr,
                                const MorphologyConfig& morph,
                                const SweepConfig& sweep, int threads,
                                double* area_sink) {
    PipelineTimes t;
    const auto t0 = Clock::now();
    const BinaryMask mask = threshold_fat(vol, thr);
    t.threshold = seconds_since(t0);

    const auto t1 = Clock::now();
    const BinaryMask opened = open_mask(mask, morph);
    t.morphology = seconds_since(t1);

    const auto t2 = Clock::now();
    double area = 0.0;
    for (int z = 0; z < opened.shape.nz; ++z)
        area += compute_subcut_area(opened.slice(z), sweep, threads).area;
    t.sweep = seconds_since(t2);

    t.total = seconds_since(t0);
    if (area_sink) *area_sink = area;
    return t;
}

BenchReport bench_impl(const std::filesystem::path* path, const HuVolume* in_memory,
                       const SliceSelector& sel, const ThresholdConfig& thr,
                       const MorphologyConfig& morph, const SweepConfig& sweep,
                       int repetitions, int threads) {
    if (repetitions < 3)
        throw InvalidConfig("benchmark needs at least 3 repetitions");

    std::vector<double> load_s, thr_s, morph_s, sweep_s, total_s;
    double sink = 0.0;

    // Untimed warmup.
    {
        HuVolume vol = path ? load_volume(*path) : *in_memory;
        HuVolume selected = extract_slices(vol, sel);
        run_pipeline_once(selected, thr, morph, sweep, threads, &sink);
    }

    BenchReport report;
    for (int rep = 0; rep < repetitions; ++rep) {
        HuVolume vol;
        if (path) {
            const auto t0 = Clock::now();
            vol = load_volume(*path);
            load_s.push_back(seconds_since(t0));
        } else {
            vol = *in_memory;
            load_s.push_back(0.0);
        }
        const HuVolume selected = extract_slices(vol, sel);
        report.voxels = selected.shape.voxels();
        const PipelineTimes t =
            run_pipeline_once(selected, thr, morph, sweep, threads, &sink);
        thr_s.push_back(t.threshold);
        morph_s.push_back(t.morphology);
        sweep_s.push_back(t.sweep);
        total_s.push_back(t.total);
    }

    report.repetitions = repetitions;
    report.threads = threads;
    report.load = stats_of(load_s);
    report.threshold = stats_of(thr_s);
    report.morphology = stats_of(morph_s);
    report.sweep = stats_of(sweep_s);
    report.total = stats_of(total_s);
    return report;
}

} // namespace

BenchReport run_bench(const std::filesystem::path& volume_path,
                      const SliceSelector& sel, const ThresholdConfig& thr,
                      const MorphologyConfig& morph, const SweepConfig& sweep,
                      int repetitions, int threads) {
    return bench_impl(&volume_path, nullptr, sel, thr, morph, sweep, repetitions,
                      threads);
}

BenchReport run_bench_volume(const HuVolume& vol, const SliceSelector& sel,
                             const ThresholdConfig& thr, const MorphologyConfig& morph,
                             const SweepConfig& sweep, int repetitions, int threads) {
    return bench_impl(nullptr, &vol, sel, thr, morph, sweep, repetitions, threads);
}

} // namespace ctfat
