#include "ctfat/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>
#include <random>
#include <string>

namespace ctfat {
namespace {

constexpr double kPi = std::numbers::pi;

enum class Region : std::uint8_t { Air, Skin, Subcut, Muscle, Blob };

struct Geometry {
    PixelPoint center;
    EllipseSpec inner, outer, body;
    const std::vector<BlobSpec>* blobs = nullptr;
};

bool inside_ellipse(double fx, double fy, const EllipseSpec& e) {
    const double u = fx / e.a;
    const double v = fy / e.b;
    return u * u + v * v <= 1.0;
}

Region region_at(int x, int y, const Geometry& g) {
    const double fx = x - g.center.x;
    const double fy = y - g.center.y;
    for (const BlobSpec& blob : *g.blobs) {
        const double dx = fx - blob.cx;
        const double dy = fy - blob.cy;
        if (dx * dx + dy * dy <= blob.r * blob.r) return Region::Blob;
    }
    if (inside_ellipse(fx, fy, g.inner)) return Region::Muscle;
    if (inside_ellipse(fx, fy, g.outer)) return Region::Subcut;
    if (inside_ellipse(fx, fy, g.body)) return Region::Skin;
    return Region::Air;
}

EllipseSpec effective_body(const PhantomSpec& spec) {
    return spec.body.value_or(
        EllipseSpec{spec.ring_outer.a + 5.0, spec.ring_outer.b + 5.0});
}

// True when a circle of radius r at offset (cx, cy) from the grid center
// fits inside the ellipse with `clearance` pixels to spare.
bool circle_fits_inside(double cx, double cy, double r, const EllipseSpec& e,
                        double clearance) {
    const double rr = r + clearance;
    if (e.a == e.b) return std::hypot(cx, cy) + rr <= e.a;
    for (int k = 0; k < 720; ++k) {
        const double phi = k * (kPi / 360.0);
        const double px = cx + rr * std::cos(phi);
        const double py = cy + rr * std::sin(phi);
        const double u = px / e.a;
        const double v = py / e.b;
        if (u * u + v * v > 1.0) return false;
    }
    return true;
}

Geometry validate(const PhantomSpec& spec, const EllipseSpec& body) {
    if (spec.width < 16 || spec.height < 16)
        throw InvalidGeometry("image must be at least 16x16");
    if (spec.n_slices < 1) throw InvalidGeometry("need at least one slice");
    if (!(spec.ring_inner.a > 0 && spec.ring_inner.b > 0))
        throw InvalidGeometry("inner ellipse semi-axes must be positive");
    if (!(spec.ring_outer.a > spec.ring_inner.a && spec.ring_outer.b > spec.ring_inner.b))
        throw InvalidGeometry("subcut ring must have positive width on both axes");
    if (!(body.a > spec.ring_outer.a && body.b > spec.ring_outer.b))
        throw InvalidGeometry("body must strictly contain the subcut ring");

    Geometry g;
    g.center = {spec.width / 2, spec.height / 2};
    g.inner = spec.ring_inner;
    g.outer = spec.ring_outer;
    g.body = body;
    g.blobs = &spec.blobs;

    if (g.center.x - body.a < 1.0 || g.center.x + body.a > spec.width - 2.0 ||
        g.center.y - body.b < 1.0 || g.center.y + body.b > spec.height - 2.0)
        throw InvalidGeometry("body does not fit inside the image with an air border");

    for (std::size_t i = 0; i < spec.blobs.size(); ++i) {
        const BlobSpec& blob = spec.blobs[i];
        if (!(blob.r > 0)) throw InvalidGeometry("blob radius must be positive");
        if (!circle_fits_inside(blob.cx, blob.cy, blob.r, spec.ring_inner, 0.0))
            throw InvalidGeometry("blob " + std::to_string(i) +
                                  " is not strictly inside the inner region");
        for (std::size_t j = i + 1; j < spec.blobs.size(); ++j) {
            const BlobSpec& other = spec.blobs[j];
            if (std::hypot(blob.cx - other.cx, blob.cy - other.cy) <
                blob.r + other.r)
                throw InvalidGeometry("blobs " + std::to_string(i) + " and " +
                                      std::to_string(j) + " overlap");
        }
    }
    return g;
}

} // namespace

std::vector<ArtifactLine> default_artifact_lines(const PhantomSpec& spec, int count) {
    if (count < 0) throw InvalidGeometry("negative artifact line count");
    const EllipseSpec body = effective_body(spec);
    const int cx = spec.width / 2;
    const int y0 = 2, y1 = spec.height - 3;
    if (y1 <= y0) throw InvalidGeometry("image too small for artifact lines");

    std::vector<ArtifactLine> lines;
    // Left air margin first, then the right one, 3 px apart.
    for (int x = 3; static_cast<int>(lines.size()) < count &&
                    x < static_cast<int>(cx - body.a - 2.0); x += 3)
        lines.push_back({{x, y0}, {x, y1}});
    for (int x = spec.width - 4; static_cast<int>(lines.size()) < count &&
                    x > static_cast<int>(std::ceil(cx + body.a + 2.0)); x -= 3)
        lines.push_back({{x, y0}, {x, y1}});
    if (static_cast<int>(lines.size()) < count)
        throw InvalidGeometry("air margin cannot host " + std::to_string(count) +
                              " artifact lines");
    return lines;
}

PhantomResult generate_phantom(const PhantomSpec& spec) {
    const EllipseSpec body = effective_body(spec);
    const Geometry geo = validate(spec, body);

    PhantomResult result;
    result.spec = spec;
    result.spec.body = body;

    PhantomTruth& truth = result.truth;
    truth.analytic_subcut =
        kPi * (spec.ring_outer.a * spec.ring_outer.b -
               spec.ring_inner.a * spec.ring_inner.b);
    truth.analytic_visceral = 0.0;
    for (const BlobSpec& blob : spec.blobs)
        truth.analytic_visceral += kPi * blob.r * blob.r;
    truth.analytic_total = truth.analytic_subcut + truth.analytic_visceral;
    truth.true_ratio = truth.analytic_visceral / truth.analytic_subcut;

    // Render one slice and count raster truth from the same region map.
    const std::size_t slice_px =
        static_cast<std::size_t>(spec.width) * spec.height;
    std::vector<std::int16_t> slice(slice_px);
    for (int y = 0; y < spec.height; ++y) {
        for (int x = 0; x < spec.width; ++x) {
            std::int16_t hu;
            switch (region_at(x, y, geo)) {
                case Region::Blob:   hu = spec.fat_hu; ++truth.raster_visceral_px; break;
                case Region::Subcut: hu = spec.fat_hu; ++truth.raster_subcut_px; break;
                case Region::Muscle: hu = spec.muscle_hu; break;
                case Region::Skin:   hu = spec.skin_hu; break;
                default:             hu = spec.air_hu; break;
            }
            slice[static_cast<std::size_t>(y) * spec.width + x] = hu;
        }
    }
    truth.raster_total_px = truth.raster_subcut_px + truth.raster_visceral_px;
    truth.raster_ratio = truth.raster_subcut_px == 0
                             ? 0.0
                             : static_cast<double>(truth.raster_visceral_px) /
                                   static_cast<double>(truth.raster_subcut_px);

    // Gaussian HU noise, clamped so no tissue crosses the fat-window
    // boundaries (truth counts stay exact under default thresholds).
    if (spec.noise_sigma > 0.0) {
        std::mt19937_64 rng(spec.seed);
        std::normal_distribution<double> gauss(0.0, spec.noise_sigma);
        for (std::size_t i = 0; i < slice_px; ++i) {
            const std::int16_t base = slice[i];
            long noised = base + std::llround(gauss(rng));
            if (base == spec.fat_hu)
                noised = std::clamp<long>(noised, -150, 0);
            else if (base == spec.air_hu)
                noised = std::min<long>(noised, -151);
            else
                noised = std::max<long>(noised, 1);
            slice[i] = static_cast<std::int16_t>(noised);
        }
    }

    // Artifact streaks: 1-px fat-density lines, air region only.
    std::vector<PixelPoint> line_buf;
    for (std::size_t i = 0; i < spec.artifact_lines.size(); ++i) {
        const ArtifactLine& art = spec.artifact_lines[i];
        line_points(art.from, art.to, line_buf);
        for (const PixelPoint& p : line_buf) {
            if (p.x < 0 || p.x >= spec.width || p.y < 0 || p.y >= spec.height)
                throw InvalidGeometry("artifact line " + std::to_string(i) +
                                      " leaves the image");
            if (region_at(p.x, p.y, geo) != Region::Air)
                throw InvalidGeometry("artifact line " + std::to_string(i) +
                                      " touches the body");
            slice[static_cast<std::size_t>(p.y) * spec.width + p.x] = spec.fat_hu;
        }
    }

    HuVolume& vol = result.volume;
    vol.shape = GridShape{spec.width, spec.height, spec.n_slices};
    vol.spacing = spec.spacing;
    vol.data.resize(vol.shape.voxels());
    for (int z = 0; z < spec.n_slices; ++z)
        std::memcpy(vol.data.data() + z * slice_px, slice.data(),
                    slice_px * sizeof(std::int16_t));
    return result;
}

BinaryMask phantom_fat_mask(const PhantomSpec& spec) {
    const EllipseSpec body = effective_body(spec);
    const Geometry geo = validate(spec, body);

    BinaryMask mask(GridShape{spec.width, spec.height, spec.n_slices}, spec.spacing);
    const std::size_t slice_px =
        static_cast<std::size_t>(spec.width) * spec.height;
    for (int y = 0; y < spec.height; ++y)
        for (int x = 0; x < spec.width; ++x) {
            const Region r = region_at(x, y, geo);
            if (r == Region::Blob || r == Region::Subcut)
                mask.data[static_cast<std::size_t>(y) * spec.width + x] =
                    BinaryMask::kForeground;
        }
    for (int z = 1; z < spec.n_slices; ++z)
        std::memcpy(mask.data.data() + z * slice_px, mask.data.data(), slice_px);
    return mask;
}

PhantomResult near_threshold_phantom(double target_ratio, PhantomSpec tmpl) {
    if (!std::isfinite(target_ratio) || target_ratio <= 0.0)
        throw OutOfRange("target ratio must be positive and finite");

    tmpl.blobs.clear();
    const EllipseSpec body = effective_body(tmpl);
    validate(tmpl, body); // geometry sanity before packing

    const double subcut_area =
        kPi * (tmpl.ring_outer.a * tmpl.ring_outer.b -
               tmpl.ring_inner.a * tmpl.ring_inner.b);
    const double needed_area = target_ratio * subcut_area;
    const double inner_area = kPi * tmpl.ring_inner.a * tmpl.ring_inner.b;
    if (needed_area >= inner_area)
        throw Infeasible("target ratio " + std::to_string(target_ratio) +
                         " needs " + std::to_string(needed_area) +
                         " px^2 of visceral fat but the inner region only has " +
                         std::to_string(inner_area) + " px^2");

    constexpr double kGap = 2.0;       // raster separation between blobs
    constexpr double kClearance = 1.0; // distance kept from the muscle boundary
    const double max_extent = std::max(tmpl.ring_inner.a, tmpl.ring_inner.b);

    for (int k = 1; k <= 4096; ++k) {
        const double r = std::sqrt(needed_area / (k * kPi));
        if (r < 1.5) break; // blobs would degenerate below raster resolution
        const double pitch = 2.0 * r + kGap;

        // Candidate centers on a square grid, nearest-to-center first.
        std::vector<BlobSpec> candidates;
        const int m = static_cast<int>(std::ceil(max_extent / pitch)) + 1;
        for (int j = -m; j <= m; ++j)
            for (int i = -m; i <= m; ++i) {
                const double cx = i * pitch;
                const double cy = j * pitch;
                if (circle_fits_inside(cx, cy, r, tmpl.ring_inner, kClearance))
                    candidates.push_back({cx, cy, r});
            }
        if (static_cast<int>(candidates.size()) < k) continue;
        std::sort(candidates.begin(), candidates.end(),
                  [](const BlobSpec& p, const BlobSpec& q) {
                      const double dp = p.cx * p.cx + p.cy * p.cy;
                      const double dq = q.cx * q.cx + q.cy * q.cy;
                      if (dp != dq) return dp < dq;
                      if (p.cy != q.cy) return p.cy < q.cy;
                      return p.cx < q.cx;
                  });
        candidates.resize(static_cast<std::size_t>(k));
        tmpl.blobs = candidates;

        PhantomResult result = generate_phantom(tmpl);
        const double got = result.truth.true_ratio;
        if (std::abs(got - target_ratio) <= 0.01 * target_ratio)
            return result;
        tmpl.blobs.clear(); // contract violated; try a different count
    }
    throw Infeasible("cannot pack blobs for target ratio " +
                     std::to_string(target_ratio) + " in this template");
}

} // namespace ctfat
