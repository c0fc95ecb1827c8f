#include "ctfat/preprocess.hpp"

namespace ctfat {
namespace {

enum class MorphOp { Erode, Dilate };

// One pass of 3x3 square morphology on a single slice. Out-of-bounds
// neighbours are background: erosion clears border foreground, dilation can
// grow up to the border but not past it.
void morph_pass(const std::uint8_t* src, std::uint8_t* dst, int w, int h, MorphOp op) {
    const std::uint8_t fg = BinaryMask::kForeground;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            bool all = true, any = false;
            for (int dy = -1; dy <= 1; ++dy) {
                const int yy = y + dy;
                for (int dx = -1; dx <= 1; ++dx) {
                    const int xx = x + dx;
                    const bool on = xx >= 0 && xx < w && yy >= 0 && yy < h &&
                                    src[static_cast<std::size_t>(yy) * w + xx] == fg;
                    all = all && on;
                    any = any || on;
                }
            }
            dst[static_cast<std::size_t>(y) * w + x] =
                (op == MorphOp::Erode ? all : any) ? fg : 0;
        }
    }
}

BinaryMask morph(const BinaryMask& mask, int iterations, MorphOp op) {
    if (iterations < 0) throw InvalidConfig("negative morphology iteration count");
    if (iterations == 0) return mask;

    BinaryMask cur = mask;
    BinaryMask next(mask.shape, mask.spacing);
    const std::size_t slice_px =
        static_cast<std::size_t>(mask.shape.nx) * mask.shape.ny;
    for (int it = 0; it < iterations; ++it) {
        for (int z = 0; z < mask.shape.nz; ++z)
            morph_pass(cur.data.data() + z * slice_px, next.data.data() + z * slice_px,
                       mask.shape.nx, mask.shape.ny, op);
        std::swap(cur, next);
    }
    return cur;
}

} // namespace

BinaryMask threshold_fat(const HuVolume& vol, const ThresholdConfig& cfg) {
    if (cfg.hu_min > cfg.hu_max)
        throw InvalidConfig("hu_min exceeds hu_max");
    BinaryMask mask(vol.shape, vol.spacing);
    for (std::size_t i = 0; i < vol.data.size(); ++i) {
        const int v = vol.data[i];
        mask.data[i] = (v >= cfg.hu_min && v <= cfg.hu_max) ? BinaryMask::kForeground : 0;
    }
    return mask;
}

BinaryMask erode(const BinaryMask& mask, int iterations) {
    return morph(mask, iterations, MorphOp::Erode);
}

BinaryMask dilate(const BinaryMask& mask, int iterations) {
    return morph(mask, iterations, MorphOp::Dilate);
}

BinaryMask open_mask(const BinaryMask& mask, const MorphologyConfig& cfg) {
    return dilate(erode(mask, cfg.erosion_iterations), cfg.dilation_iterations);
}

} // namespace ctfat
