#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ctfat/raycast.hpp"
#include "ctfat/volume.hpp"

namespace ctfat {

// Axis-aligned ellipse, semi-axes in pixels, centered on the grid center
// (floor(w/2), floor(h/2)).
struct EllipseSpec {
    double a = 0.0; // x semi-axis
    double b = 0.0; // y semi-axis
};

// Circular visceral fat blob; cx/cy are offsets from the grid center.
struct BlobSpec {
    double cx = 0.0;
    double cy = 0.0;
    double r = 0.0;
};

// 1-px line artifact (scanner hardware streak); must lie entirely in air.
struct ArtifactLine {
    PixelPoint from;
    PixelPoint to;
};

struct PhantomSpec {
    int width = 512;
    int height = 512;
    int n_slices = 1;
    Spacing spacing;

    // Concentric anatomy, innermost region first at paint time:
    // blobs (fat) < ring_inner (muscle inside) < ring (fat) < body (skin) < air.
    EllipseSpec ring_inner{50.0, 50.0};
    EllipseSpec ring_outer{100.0, 100.0};
    // Body boundary; defaults to ring_outer + 5 px when unset. Must strictly
    // contain the ring and fit inside the image.
    std::optional<EllipseSpec> body;
    std::vector<BlobSpec> blobs;

    std::int16_t fat_hu = -100;
    std::int16_t muscle_hu = 40;
    std::int16_t skin_hu = 20;
    std::int16_t air_hu = -1000;

    // Zero-mean Gaussian HU noise, deterministic for a given seed, disabled
    // when sigma == 0. Clamped so no tissue crosses a threshold boundary.
    double noise_sigma = 0.0;
    std::uint64_t seed = 0;

    std::vector<ArtifactLine> artifact_lines;
};

struct PhantomTruth {
    // Continuous-geometry areas in square pixels (per slice).
    double analytic_subcut = 0.0;
    double analytic_visceral = 0.0;
    double analytic_total = 0.0;
    double true_ratio = 0.0; // analytic_visceral / analytic_subcut

    // Center-point rasterization counts (per slice; all slices identical).
    std::uint64_t raster_subcut_px = 0;
    std::uint64_t raster_visceral_px = 0;
    std::uint64_t raster_total_px = 0;
    double raster_ratio = 0.0; // raster_visceral / raster_subcut
};

struct PhantomResult {
    HuVolume volume;
    PhantomTruth truth;
    PhantomSpec spec; // geometry actually used (blobs filled in by packers)
};

// Renders the phantom and its analytic + rasterized ground truth.
// Pixel membership is by center-point test: a pixel (x, y) belongs to an
// ellipse when ((x-cx)/a)^2 + ((y-cy)/b)^2 <= 1, boundaries inclusive.
// Throws InvalidGeometry when containment constraints fail (ring not inside
// body, body not inside image, blob not strictly inside the inner region,
// overlapping blobs, artifact line touching the body).
PhantomResult generate_phantom(const PhantomSpec& spec);

// Packs equal-radius non-overlapping blobs into the template's inner region
// so the analytic ratio lands within 1% of target_ratio. Tries increasing
// blob counts with r = sqrt(target*subcut/(k*pi)) on a center-out grid;
// throws Infeasible when no count fits (the template's ring is too wide for
// the requested target) and OutOfRange for target <= 0 or non-finite.
PhantomResult near_threshold_phantom(double target_ratio, PhantomSpec tmpl);

// Deterministic N vertical artifact lines in the air margin beside the body.
// Throws InvalidGeometry when the margin cannot host them.
std::vector<ArtifactLine> default_artifact_lines(const PhantomSpec& spec, int count);

// The phantom's ideal fat mask (ring + blobs rasterized, no noise, no
// artifacts) — the oracle companion to the rendered volume.
BinaryMask phantom_fat_mask(const PhantomSpec& spec);

} // namespace ctfat
