#pragma once

#include <optional>
#include <vector>

#include "ctfat/volume.hpp"

namespace ctfat {

struct PixelPoint {
    int x = 0;
    int y = 0;
    bool operator==(const PixelPoint&) const = default;
};

// Hit pair returned by a radial scan: `inner` is the outermost non-fat pixel
// that still has fat beyond it along the ray; `outer` is the outermost fat
// pixel. Either may be absent when the ray never crosses the pattern.
struct RayHit {
    std::optional<PixelPoint> inner;
    std::optional<PixelPoint> outer;
};

// 8-connected Bresenham line from a to b, endpoints included, using the
// accumulating-error variant. The visited set is symmetric under endpoint
// swap: internally the walk always starts from the lexicographically smaller
// endpoint and the result is reversed when needed, so line_iter(a,b) is
// exactly line_iter(b,a) reversed.
std::vector<PixelPoint> line_iter(PixelPoint a, PixelPoint b);

// Same, appending into a caller-owned buffer (cleared first) to avoid
// per-ray allocations in hot loops.
void line_points(PixelPoint a, PixelPoint b, std::vector<PixelPoint>& out);

// Walks the line from start to end over a binary slice and returns the
// boundary hits: tracks the last background pixel seen; on the first
// foreground pixel after it, records that background pixel as `inner`
// (updated as deeper such transitions appear); `outer` is the last
// foreground pixel on the whole ray. Points outside the image are skipped.
RayHit find_last_point(MaskSlice img, PixelPoint start, PixelPoint end);
RayHit find_last_point(MaskSlice img, PixelPoint start, PixelPoint end,
                       std::vector<PixelPoint>& scratch);

} // namespace ctfat
