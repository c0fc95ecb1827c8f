#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ctfat/preprocess.hpp"
#include "ctfat/raycast.hpp"
#include "ctfat/volume.hpp"

namespace ctfat {

enum class RayLengthMode {
    // Rays run to the image diagonal, guaranteeing they exit the body for
    // any center. Default.
    ImageDiagonal,
    // Rays run to center + (cos*w/2, sin*h/2): the original formulation.
    // Off-center anatomy can truncate rays; kept for fidelity comparisons.
    HalfExtent,
};

struct SweepConfig {
    // Angular step in degrees; rays are cast at k*step for
    // k = 0 .. ceil(360/step)-1 (360 excluded).
    double granular_degree = 0.05;
    // Sweep origin; defaults to (floor(w/2), floor(h/2)).
    std::optional<PixelPoint> center;
    RayLengthMode ray_length = RayLengthMode::ImageDiagonal;
    // When true, the sector weight multiplies by the step in degrees instead
    // of radians, reproducing the original arithmetic verbatim. Areas scale
    // by 180/pi, and ratios derived from them shift accordingly — this mode
    // is for numeric fidelity comparisons, not classification.
    bool faithful_degrees = false;
};

// One ray of a sweep. d1/d2 are *squared* pixel distances from the center to
// the outer/inner hits; contribution is 0.5*(d1-d2)*step (radians unless
// faithful_degrees). Rays without both hits contribute zero.
struct RayRecord {
    double theta_deg = 0.0;
    RayHit hit;
    double d1 = 0.0;
    double d2 = 0.0;
    double contribution = 0.0;
};

struct SweepTrace {
    PixelPoint center;
    std::vector<RayRecord> rays;
};

struct SweepResult {
    double area = 0.0; // square pixels
    SweepTrace trace;
};

// Number of rays for a given angular step.
int sweep_ray_count(double granular_degree);

// Count of foreground pixels in the slice.
std::uint64_t total_fat_area(MaskSlice img);

// Polar sweep integrating the subcutaneous band between the ray hits.
// Deterministic for any `threads`: per-ray records are computed into a
// preallocated table and summed in ascending-angle order.
// Throws InvalidConfig for step <= 0 or > 90, DegenerateCenter when the
// center lies outside the image.
SweepResult compute_subcut_area(MaskSlice img, const SweepConfig& cfg = {},
                                int threads = 1);

// Renders the subcutaneous band: for every ray with both hits, the line
// pixels strictly between inner and outer (inclusive of outer, exclusive of
// inner) that are foreground in `img` are copied out. Returns a mask volume
// with nz == input nz (per-slice sweep for multi-slice masks).
BinaryMask subcut_mask(const BinaryMask& mask, const SweepConfig& cfg = {},
                       int threads = 1);

enum class Label { CD, ITB };
std::string to_string(Label label);

// CD when ratio >= threshold (inclusive), ITB otherwise.
// Throws NonFiniteRatio on NaN/inf.
Label classify_by_ratio(double ratio, double threshold = 0.63);

struct FatMeasurement {
    std::uint64_t total_fat = 0;   // foreground pixel count over the selection
    double subcut = 0.0;           // swept subcutaneous area, square pixels
    double visceral = 0.0;         // total_fat - subcut
    double ratio = 0.0;            // visceral / subcut == total/subcut - 1
    double physical_total_mm3 = 0; // total_fat * voxel volume
    Label label = Label::ITB;
};

struct RatioOutcome {
    FatMeasurement measurement;
    // Slices whose sweep produced no subcutaneous area (skipped in 3D
    // aggregation with a warning; fatal in 2D).
    std::vector<int> skipped_slices;
};

// Core accumulation over an already-binarized mask (oracle-injection route).
// 2D formula per slice: ratio = total/subcut - 1; 3D sums totals and subcut
// areas over the selected slices first. Throws NoSubcutaneousFat when every
// selected slice is skipped or the summed subcut area is <= 0.
RatioOutcome measure_mask(const BinaryMask& mask, const SliceSelector& sel,
                          const SweepConfig& cfg = {}, int threads = 1);

// Full pipeline for one slice: threshold -> opening -> sweep -> ratio.
// The volume must have nz == 1 (use fat_ratio_3d otherwise).
FatMeasurement fat_ratio_2d(const HuVolume& slice,
                            const ThresholdConfig& thr = {},
                            const MorphologyConfig& morph = {},
                            const SweepConfig& sweep = {}, int threads = 1);

// Full pipeline over a slice selection of a volume.
RatioOutcome fat_ratio_3d(const HuVolume& vol, const SliceSelector& sel,
                          const ThresholdConfig& thr = {},
                          const MorphologyConfig& morph = {},
                          const SweepConfig& sweep = {}, int threads = 1);

} // namespace ctfat
