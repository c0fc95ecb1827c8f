#pragma once

#include <cstdint>
#include <filesystem>

#include "ctfat/fatseg.hpp"

namespace ctfat {

struct StageStats {
    double mean_s = 0.0;
    double std_s = 0.0; // population standard deviation over repetitions
};

struct BenchReport {
    std::uint64_t voxels = 0;
    int repetitions = 0;
    int threads = 1;
    StageStats load;      // file read + decode (excluded from total)
    StageStats threshold;
    StageStats morphology;
    StageStats sweep;
    StageStats total;     // threshold + morphology + sweep span
};

// Times the pipeline stages over `repetitions` runs (>= 3, InvalidConfig
// otherwise) after one untimed warmup. The load stage re-reads the file each
// repetition but is excluded from the pipeline total.
BenchReport run_bench(const std::filesystem::path& volume_path,
                      const SliceSelector& sel, const ThresholdConfig& thr,
                      const MorphologyConfig& morph, const SweepConfig& sweep,
                      int repetitions = 5, int threads = 1);

// Same timing loop for an in-memory volume (load stage reported as zero).
BenchReport run_bench_volume(const HuVolume& vol, const SliceSelector& sel,
                             const ThresholdConfig& thr,
                             const MorphologyConfig& morph,
                             const SweepConfig& sweep, int repetitions = 5,
                             int threads = 1);

} // namespace ctfat
