#include "ctfat/raycast.hpp"

#include <algorithm>
#include <cstdlib>
#include <tuple>

namespace ctfat {
namespace {

bool lex_less(PixelPoint a, PixelPoint b) {
    return std::tie(a.x, a.y) < std::tie(b.x, b.y);
}

// Accumulating-error Bresenham from a to b, both endpoints emitted.
void walk(PixelPoint a, PixelPoint b, std::vector<PixelPoint>& out) {
    int x = a.x, y = a.y;
    const int dx = std::abs(b.x - a.x);
    const int sx = a.x < b.x ? 1 : -1;
    const int dy = -std::abs(b.y - a.y);
    const int sy = a.y < b.y ? 1 : -1;
    int err = dx + dy;
    for (;;) {
        out.push_back({x, y});
        if (x == b.x && y == b.y) break;
        const int e2 = 2 * err;
        if (e2 >= dy) {
            err += dy;
            x += sx;
        }
        if (e2 <= dx) {
            err += dx;
            y += sy;
        }
    }
}

} // namespace

void line_points(PixelPoint a, PixelPoint b, std::vector<PixelPoint>& out) {
    out.clear();
    // Tie-breaking in the error term depends on walk direction, so the walk
    // always runs from the lexicographically smaller endpoint; this makes the
    // visited set independent of argument order.
    if (lex_less(b, a)) {
        walk(b, a, out);
        std::reverse(out.begin(), out.end());
    } else {
        walk(a, b, out);
    }
}

std::vector<PixelPoint> line_iter(PixelPoint a, PixelPoint b) {
    std::vector<PixelPoint> out;
    out.reserve(static_cast<std::size_t>(
                    std::max(std::abs(b.x - a.x), std::abs(b.y - a.y))) + 1);
    line_points(a, b, out);
    return out;
}

RayHit find_last_point(MaskSlice img, PixelPoint start, PixelPoint end,
                       std::vector<PixelPoint>& scratch) {
    line_points(start, end, scratch);

    RayHit hit;
    std::optional<PixelPoint> last_black;
    for (const PixelPoint& p : scratch) {
        if (!img.in_bounds(p.x, p.y)) continue;
        if (img.at(p.x, p.y) == 0) {
            last_black = p;
        } else {
            if (last_black) hit.inner = last_black;
            hit.outer = p;
        }
    }
    return hit;
}

RayHit find_last_point(MaskSlice img, PixelPoint start, PixelPoint end) {
    std::vector<PixelPoint> scratch;
    return find_last_point(img, start, end, scratch);
}

} // namespace ctfat
