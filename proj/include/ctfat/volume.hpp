#pragma once

#include <cstdint>
#include <cstddef>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "ctfat/errors.hpp"

namespace ctfat {

// Voxel spacing in millimetres. Stored as double but persisted at 32-bit
// float precision (the file format's pixdim fields), so round-trips quantize
// to float.
struct Spacing {
    double x = 1.0;
    double y = 1.0;
    double z = 1.0;

    bool operator==(const Spacing&) const = default;
};

struct GridShape {
    int nx = 0; // width
    int ny = 0; // height
    int nz = 1; // slices

    std::size_t voxels() const {
        return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) *
               static_cast<std::size_t>(nz);
    }
    bool operator==(const GridShape&) const = default;
};

// Hounsfield-unit CT volume, signed 16-bit, x fastest then y then z.
struct HuVolume {
    GridShape shape;
    Spacing spacing;
    std::vector<std::int16_t> data;

    HuVolume() = default;
    HuVolume(GridShape s, Spacing sp, std::int16_t fill = 0)
        : shape(s), spacing(sp), data(s.voxels(), fill) {}

    std::size_t index(int x, int y, int z) const {
        return static_cast<std::size_t>(z) * shape.nx * shape.ny +
               static_cast<std::size_t>(y) * shape.nx + static_cast<std::size_t>(x);
    }
    std::int16_t at(int x, int y, int z) const { return data[index(x, y, z)]; }
    std::int16_t& at(int x, int y, int z) { return data[index(x, y, z)]; }
};

// Read-only view of one mask slice; foreground pixels are 255, background 0.
struct MaskSlice {
    const std::uint8_t* px = nullptr;
    int width = 0;
    int height = 0;

    bool in_bounds(int x, int y) const {
        return x >= 0 && x < width && y >= 0 && y < height;
    }
    std::uint8_t at(int x, int y) const {
        return px[static_cast<std::size_t>(y) * width + x];
    }
};

// Binary mask volume; values are exactly 0 or 255.
struct BinaryMask {
    static constexpr std::uint8_t kForeground = 255;

    GridShape shape;
    Spacing spacing;
    std::vector<std::uint8_t> data;

    BinaryMask() = default;
    BinaryMask(GridShape s, Spacing sp, std::uint8_t fill = 0)
        : shape(s), spacing(sp), data(s.voxels(), fill) {}

    std::size_t index(int x, int y, int z) const {
        return static_cast<std::size_t>(z) * shape.nx * shape.ny +
               static_cast<std::size_t>(y) * shape.nx + static_cast<std::size_t>(x);
    }
    std::uint8_t at(int x, int y, int z) const { return data[index(x, y, z)]; }
    std::uint8_t& at(int x, int y, int z) { return data[index(x, y, z)]; }

    MaskSlice slice(int z) const {
        return MaskSlice{data.data() + index(0, 0, z), shape.nx, shape.ny};
    }
    std::uint8_t* slice_ptr(int z) { return data.data() + index(0, 0, z); }
};

// Slice selection: a single index "4", a half-open-free inclusive range
// "2:7", or all slices.
struct SliceSelector {
    enum class Mode { All, Single, Range };
    Mode mode = Mode::All;
    int z_start = 0;
    int z_end = 0; // inclusive, Range only

    static SliceSelector all() { return {}; }
    static SliceSelector single(int z) { return {Mode::Single, z, z}; }
    static SliceSelector range(int z0, int z1) { return {Mode::Range, z0, z1}; }

    // Parses "z", "z0:z1", or "all". Throws InvalidConfig on syntax errors.
    static SliceSelector parse(const std::string& text);

    // Resolves to an inclusive [first, last] pair for a volume with nz
    // slices. Throws IndexOutOfRange when the selection does not fit.
    std::pair<int, int> resolve(int nz) const;
};

// --- NIfTI-1 single-file I/O (.nii, .nii.gz; little-endian only) ---

// Loads a volume. Integer and float datatypes are accepted when every voxel,
// after scl_slope/scl_inter scaling, fits signed 16-bit losslessly; anything
// else throws UnsupportedDatatype. Byte-swapped (big-endian) files are
// rejected as MalformedHeader.
HuVolume load_volume(const std::filesystem::path& path);

// Loads a mask: requires unsigned 8-bit data with values exactly {0, 255}
// and no rescaling.
BinaryMask load_mask(const std::filesystem::path& path);

// Writers emit signed 16-bit (volumes) / unsigned 8-bit (masks), gzip
// compressed when the filename ends in ".gz".
void save_volume(const HuVolume& vol, const std::filesystem::path& path);
void save_mask(const BinaryMask& mask, const std::filesystem::path& path);

// Copies the selected slices into a new volume (spacing preserved).
HuVolume extract_slices(const HuVolume& vol, const SliceSelector& sel);
BinaryMask extract_slices(const BinaryMask& mask, const SliceSelector& sel);

} // namespace ctfat
