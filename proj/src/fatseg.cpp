#include "ctfat/fatseg.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <thread>

namespace ctfat {
namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

void validate_sweep(const SweepConfig& cfg) {
    if (!std::isfinite(cfg.granular_degree) || cfg.granular_degree <= 0.0 ||
        cfg.granular_degree > 90.0)
        throw InvalidConfig("granular_degree must lie in (0, 90]");
}

PixelPoint sweep_center(MaskSlice img, const SweepConfig& cfg) {
    PixelPoint c = cfg.center.value_or(PixelPoint{img.width / 2, img.height / 2});
    if (!img.in_bounds(c.x, c.y))
        throw DegenerateCenter("sweep center (" + std::to_string(c.x) + ", " +
                               std::to_string(c.y) + ") outside " +
                               std::to_string(img.width) + "x" +
                               std::to_string(img.height) + " image");
    return c;
}

double sq_dist(PixelPoint a, PixelPoint b) {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    return dx * dx + dy * dy;
}

// Splits [0, n) into contiguous chunks; deterministic regardless of thread
// count because each item's result is written to its own slot.
template <typename Fn>
void parallel_chunks(int n, int threads, Fn&& fn) {
    if (threads < 1) throw InvalidConfig("thread count must be >= 1");
    threads = std::min(threads, std::max(n, 1));
    if (threads == 1) {
        fn(0, n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    const int base = n / threads, extra = n % threads;
    int begin = 0;
    for (int t = 0; t < threads; ++t) {
        const int len = base + (t < extra ? 1 : 0);
        pool.emplace_back([&fn, begin, len] { fn(begin, begin + len); });
        begin += len;
    }
    for (auto& th : pool) th.join();
}

PixelPoint ray_endpoint(PixelPoint center, double theta_deg, MaskSlice img,
                        RayLengthMode mode) {
    const double rad = theta_deg * kDegToRad;
    double ox, oy;
    if (mode == RayLengthMode::ImageDiagonal) {
        const double len = std::ceil(std::hypot(static_cast<double>(img.width),
                                                static_cast<double>(img.height)));
        ox = std::cos(rad) * len;
        oy = std::sin(rad) * len;
    } else {
        ox = std::cos(rad) * (img.width / 2.0);
        oy = std::sin(rad) * (img.height / 2.0);
    }
    return {center.x + static_cast<int>(std::llround(ox)),
            center.y + static_cast<int>(std::llround(oy))};
}

} // namespace

int sweep_ray_count(double granular_degree) {
    SweepConfig probe;
    probe.granular_degree = granular_degree;
    validate_sweep(probe);
    return static_cast<int>(std::ceil(360.0 / granular_degree));
}

std::uint64_t total_fat_area(MaskSlice img) {
    std::uint64_t count = 0;
    const std::size_t n = static_cast<std::size_t>(img.width) * img.height;
    for (std::size_t i = 0; i < n; ++i)
        if (img.px[i] == BinaryMask::kForeground) ++count;
    return count;
}

SweepResult compute_subcut_area(MaskSlice img, const SweepConfig& cfg, int threads) {
    validate_sweep(cfg);
    const PixelPoint center = sweep_center(img, cfg);
    const int n = sweep_ray_count(cfg.granular_degree);
    const double step_weight =
        cfg.faithful_degrees ? cfg.granular_degree : cfg.granular_degree * kDegToRad;

    SweepResult result;
    result.trace.center = center;
    result.trace.rays.assign(static_cast<std::size_t>(n), RayRecord{});

    auto* rays = result.trace.rays.data();
    parallel_chunks(n, threads, [&](int begin, int end) {
        std::vector<PixelPoint> scratch;
        for (int k = begin; k < end; ++k) {
            RayRecord& rec = rays[k];
            rec.theta_deg = k * cfg.granular_degree;
            const PixelPoint tip = ray_endpoint(center, rec.theta_deg, img, cfg.ray_length);
            rec.hit = find_last_point(img, center, tip, scratch);
            if (rec.hit.inner && rec.hit.outer) {
                rec.d1 = sq_dist(*rec.hit.outer, center);
                rec.d2 = sq_dist(*rec.hit.inner, center);
                rec.contribution = 0.5 * (rec.d1 - rec.d2) * step_weight;
            }
        }
    });

    // Sequential ascending-angle sum keeps the result independent of the
    // thread partition.
    double area = 0.0;
    for (const RayRecord& rec : result.trace.rays) area += rec.contribution;
    result.area = area;
    return result;
}

BinaryMask subcut_mask(const BinaryMask& mask, const SweepConfig& cfg, int threads) {
    BinaryMask out(mask.shape, mask.spacing);
    for (int z = 0; z < mask.shape.nz; ++z) {
        const MaskSlice img = mask.slice(z);
        SweepResult swept = compute_subcut_area(img, cfg, threads);
        std::uint8_t* dst = out.slice_ptr(z);
        std::vector<PixelPoint> scratch;
        for (const RayRecord& rec : swept.trace.rays) {
            if (!rec.hit.inner || !rec.hit.outer) continue;
            const PixelPoint tip =
                ray_endpoint(swept.trace.center, rec.theta_deg, img, cfg.ray_length);
            line_points(swept.trace.center, tip, scratch);
            bool past_inner = false;
            for (const PixelPoint& p : scratch) {
                if (p == *rec.hit.inner) {
                    past_inner = true;
                    continue;
                }
                if (past_inner && img.in_bounds(p.x, p.y) &&
                    img.at(p.x, p.y) == BinaryMask::kForeground)
                    dst[static_cast<std::size_t>(p.y) * mask.shape.nx + p.x] =
                        BinaryMask::kForeground;
                if (p == *rec.hit.outer) break;
            }
        }
    }
    return out;
}

std::string to_string(Label label) { return label == Label::CD ? "CD" : "ITB"; }

Label classify_by_ratio(double ratio, double threshold) {
    if (!std::isfinite(ratio)) throw NonFiniteRatio("fat ratio is not finite");
    if (!std::isfinite(threshold)) throw NonFiniteRatio("ratio threshold is not finite");
    return ratio >= threshold ? Label::CD : Label::ITB;
}

RatioOutcome measure_mask(const BinaryMask& mask, const SliceSelector& sel,
                          const SweepConfig& cfg, int threads) {
    auto [z0, z1] = sel.resolve(mask.shape.nz);

    RatioOutcome out;
    std::uint64_t total = 0;
    double subcut = 0.0;
    bool any = false;
    for (int z = z0; z <= z1; ++z) {
        const MaskSlice img = mask.slice(z);
        const SweepResult swept = compute_subcut_area(img, cfg, threads);
        if (!(swept.area > 0.0)) {
            out.skipped_slices.push_back(z);
            continue;
        }
        total += total_fat_area(img);
        subcut += swept.area;
        any = true;
    }
    if (!any || !(subcut > 0.0))
        throw NoSubcutaneousFat("no subcutaneous fat detected in selected slices");

    FatMeasurement& m = out.measurement;
    m.total_fat = total;
    m.subcut = subcut;
    m.ratio = static_cast<double>(total) / subcut - 1.0;
    m.visceral = static_cast<double>(total) - subcut;
    m.physical_total_mm3 = static_cast<double>(total) * mask.spacing.x *
                           mask.spacing.y * mask.spacing.z;
    m.label = classify_by_ratio(m.ratio);
    return out;
}

FatMeasurement fat_ratio_2d(const HuVolume& slice, const ThresholdConfig& thr,
                            const MorphologyConfig& morph, const SweepConfig& sweep,
                            int threads) {
    if (slice.shape.nz != 1)
        throw InvalidConfig("fat_ratio_2d expects a single-slice volume");
    const BinaryMask opened = open_mask(threshold_fat(slice, thr), morph);
    return measure_mask(opened, SliceSelector::all(), sweep, threads).measurement;
}

RatioOutcome fat_ratio_3d(const HuVolume& vol, const SliceSelector& sel,
                          const ThresholdConfig& thr, const MorphologyConfig& morph,
                          const SweepConfig& sweep, int threads) {
    auto [z0, z1] = sel.resolve(vol.shape.nz);
    const HuVolume selected = extract_slices(vol, sel);
    const BinaryMask opened = open_mask(threshold_fat(selected, thr), morph);
    RatioOutcome out = measure_mask(opened, SliceSelector::all(), sweep, threads);
    for (int& z : out.skipped_slices) z += z0; // report original indices
    return out;
}

} // namespace ctfat
