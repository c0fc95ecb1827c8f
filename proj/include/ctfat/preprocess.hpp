#pragma once

#include "ctfat/volume.hpp"

namespace ctfat {

// Fat window in Hounsfield units, inclusive on both ends.
struct ThresholdConfig {
    int hu_min = -150;
    int hu_max = 0;
};

// Structuring element is the full 3x3 square; morphology is applied per
// slice (2D). Out-of-bounds neighbours count as background, so erosion eats
// the image border.
struct MorphologyConfig {
    int erosion_iterations = 1;
    int dilation_iterations = 1;
};

// Marks voxels with hu_min <= HU <= hu_max as foreground (255).
// Throws InvalidConfig when hu_min > hu_max.
BinaryMask threshold_fat(const HuVolume& vol, const ThresholdConfig& cfg = {});

BinaryMask erode(const BinaryMask& mask, int iterations = 1);
BinaryMask dilate(const BinaryMask& mask, int iterations = 1);

// Opening: erosion then dilation. Iteration counts < 0 throw InvalidConfig;
// zero iterations for both stages returns the input unchanged.
BinaryMask open_mask(const BinaryMask& mask, const MorphologyConfig& cfg = {});

} // namespace ctfat
