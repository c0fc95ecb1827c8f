// NIfTI-1 single-file reader/writer (little-endian, .nii / .nii.gz).
// Only the fields this toolkit needs are interpreted; everything else is
// preserved as zeros on write and ignored on read.

#include <bit>
#include <cmath>
#include <cstddef>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include <zlib.h>

#include "ctfat/volume.hpp"

namespace ctfat {
namespace {

static_assert(std::endian::native == std::endian::little,
              "this reader assumes a little-endian host");

struct Nifti1Header {
    std::int32_t sizeof_hdr;     // must be 348
    char data_type[10];
    char db_name[18];
    std::int32_t extents;
    std::int16_t session_error;
    char regular;
    char dim_info;
    std::int16_t dim[8];
    float intent_p1;
    float intent_p2;
    float intent_p3;
    std::int16_t intent_code;
    std::int16_t datatype;
    std::int16_t bitpix;
    std::int16_t slice_start;
    float pixdim[8];
    float vox_offset;
    float scl_slope;
    float scl_inter;
    std::int16_t slice_end;
    char slice_code;
    char xyzt_units;
    float cal_max;
    float cal_min;
    float slice_duration;
    float toffset;
    std::int32_t glmax;
    std::int32_t glmin;
    char descrip[80];
    char aux_file[24];
    std::int16_t qform_code;
    std::int16_t sform_code;
    float quatern_b;
    float quatern_c;
    float quatern_d;
    float qoffset_x;
    float qoffset_y;
    float qoffset_z;
    float srow_x[4];
    float srow_y[4];
    float srow_z[4];
    char intent_name[16];
    char magic[4];
};

static_assert(sizeof(Nifti1Header) == 348, "header must pack to 348 bytes");
static_assert(offsetof(Nifti1Header, dim) == 40);
static_assert(offsetof(Nifti1Header, datatype) == 70);
static_assert(offsetof(Nifti1Header, pixdim) == 76);
static_assert(offsetof(Nifti1Header, vox_offset) == 108);
static_assert(offsetof(Nifti1Header, scl_slope) == 112);
static_assert(offsetof(Nifti1Header, magic) == 344);

enum NiftiDatatype : std::int16_t {
    DT_UINT8 = 2,
    DT_INT16 = 4,
    DT_INT32 = 8,
    DT_FLOAT32 = 16,
    DT_FLOAT64 = 64,
    DT_INT8 = 256,
    DT_UINT16 = 512,
    DT_UINT32 = 768,
};

int bitpix_for(std::int16_t dt) {
    switch (dt) {
        case DT_UINT8: case DT_INT8: return 8;
        case DT_INT16: case DT_UINT16: return 16;
        case DT_INT32: case DT_UINT32: case DT_FLOAT32: return 32;
        case DT_FLOAT64: return 64;
        default: return 0;
    }
}

// gzread-based reader; zlib reads uncompressed files transparently, so one
// code path serves .nii and .nii.gz.
class GzReader {
public:
    explicit GzReader(const std::filesystem::path& path) {
        file_ = gzopen(path.string().c_str(), "rb");
        if (!file_) throw IoError("cannot open for reading: " + path.string());
    }
    ~GzReader() { if (file_) gzclose(file_); }
    GzReader(const GzReader&) = delete;
    GzReader& operator=(const GzReader&) = delete;

    void read_exact(void* dst, std::size_t n, const char* what) {
        auto* p = static_cast<unsigned char*>(dst);
        while (n > 0) {
            unsigned chunk = n > (1u << 30) ? (1u << 30) : static_cast<unsigned>(n);
            int got = gzread(file_, p, chunk);
            if (got <= 0)
                throw MalformedHeader(std::string("truncated file while reading ") + what);
            p += got;
            n -= static_cast<std::size_t>(got);
        }
    }

    void skip(std::size_t n) {
        std::vector<unsigned char> sink(std::min<std::size_t>(n, 65536));
        while (n > 0) {
            unsigned chunk = static_cast<unsigned>(std::min(n, sink.size()));
            int got = gzread(file_, sink.data(), chunk);
            if (got <= 0) throw MalformedHeader("truncated file before voxel data");
            n -= static_cast<std::size_t>(got);
        }
    }

private:
    gzFile file_ = nullptr;
};

struct ParsedHeader {
    GridShape shape;
    Spacing spacing;
    std::int16_t datatype = 0;
    double slope = 1.0;
    double inter = 0.0;
    std::size_t vox_offset = 352;
};

ParsedHeader read_and_validate_header(GzReader& in, const std::string& name) {
    Nifti1Header hdr{};
    in.read_exact(&hdr, sizeof(hdr), "header");

    if (hdr.sizeof_hdr != 348) {
        std::int32_t swapped;
        auto* s = reinterpret_cast<const unsigned char*>(&hdr.sizeof_hdr);
        unsigned char rev[4] = {s[3], s[2], s[1], s[0]};
        std::memcpy(&swapped, rev, 4);
        if (swapped == 348)
            throw MalformedHeader(name + ": big-endian NIfTI is not supported");
        throw MalformedHeader(name + ": bad sizeof_hdr (not a NIfTI-1 file?)");
    }
    if (std::memcmp(hdr.magic, "n+1", 4) != 0) {
        if (std::memcmp(hdr.magic, "ni1", 4) == 0)
            throw MalformedHeader(name + ": two-file NIfTI (hdr/img) is not supported");
        throw MalformedHeader(name + ": missing n+1 magic");
    }
    if (hdr.dim[0] < 1 || hdr.dim[0] > 7)
        throw MalformedHeader(name + ": dim[0] out of range (byte-swapped file?)");
    if (hdr.dim[0] < 2)
        throw MalformedHeader(name + ": need at least 2 dimensions");
    for (int k = 4; k <= hdr.dim[0]; ++k)
        if (hdr.dim[k] > 1)
            throw MalformedHeader(name + ": volumes with a 4th dimension are not supported");

    ParsedHeader out;
    out.shape.nx = hdr.dim[1];
    out.shape.ny = hdr.dim[2];
    out.shape.nz = hdr.dim[0] >= 3 ? hdr.dim[3] : 1;
    if (out.shape.nx < 1 || out.shape.ny < 1 || out.shape.nz < 1)
        throw MalformedHeader(name + ": non-positive dimension");

    out.datatype = hdr.datatype;
    int expect_bp = bitpix_for(hdr.datatype);
    if (expect_bp == 0)
        throw UnsupportedDatatype(name + ": datatype code " + std::to_string(hdr.datatype));
    if (hdr.bitpix != expect_bp)
        throw MalformedHeader(name + ": bitpix " + std::to_string(hdr.bitpix) +
                              " inconsistent with datatype " + std::to_string(hdr.datatype));

    out.spacing.x = hdr.pixdim[1] > 0 ? hdr.pixdim[1] : 1.0;
    out.spacing.y = hdr.pixdim[2] > 0 ? hdr.pixdim[2] : 1.0;
    out.spacing.z = hdr.pixdim[3] > 0 ? hdr.pixdim[3] : 1.0;

    if (!(hdr.vox_offset >= 348.0f))
        throw MalformedHeader(name + ": vox_offset below header size");
    out.vox_offset = static_cast<std::size_t>(hdr.vox_offset);

    out.slope = (hdr.scl_slope == 0.0f || !std::isfinite(hdr.scl_slope))
                    ? 1.0 : static_cast<double>(hdr.scl_slope);
    out.inter = std::isfinite(hdr.scl_inter) ? static_cast<double>(hdr.scl_inter) : 0.0;
    return out;
}

template <typename T>
void convert_voxels(const std::vector<unsigned char>& raw, std::size_t n,
                    double slope, double inter, const std::string& name,
                    std::vector<std::int16_t>& out) {
    const T* src = reinterpret_cast<const T*>(raw.data());
    const bool identity = (slope == 1.0 && inter == 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double v = static_cast<double>(src[i]);
        if (!identity) v = v * slope + inter;
        if (!std::isfinite(v))
            throw UnsupportedDatatype(name + ": non-finite voxel value");
        double r = std::nearbyint(v);
        if (std::abs(v - r) > 1e-9)
            throw UnsupportedDatatype(name + ": voxel value " + std::to_string(v) +
                                      " is not an integral HU after scaling");
        if (r < -32768.0 || r > 32767.0)
            throw UnsupportedDatatype(name + ": voxel value " + std::to_string(v) +
                                      " does not fit signed 16-bit");
        out[i] = static_cast<std::int16_t>(r);
    }
}

void check_exists(const std::filesystem::path& path) {
    std::error_code ec;
    if (!std::filesystem::exists(path, ec) || ec)
        throw FileNotFound("no such file: " + path.string());
    if (std::filesystem::is_directory(path, ec))
        throw IoError("path is a directory: " + path.string());
}

bool wants_gzip(const std::filesystem::path& path) {
    auto s = path.string();
    return s.size() >= 3 && s.compare(s.size() - 3, 3, ".gz") == 0;
}

void fill_write_header(Nifti1Header& hdr, GridShape shape, Spacing spacing,
                       std::int16_t datatype) {
    std::memset(&hdr, 0, sizeof(hdr));
    hdr.sizeof_hdr = 348;
    hdr.regular = 'r';
    hdr.dim[0] = 3;
    hdr.dim[1] = static_cast<std::int16_t>(shape.nx);
    hdr.dim[2] = static_cast<std::int16_t>(shape.ny);
    hdr.dim[3] = static_cast<std::int16_t>(shape.nz);
    for (int k = 4; k < 8; ++k) hdr.dim[k] = 1;
    hdr.datatype = datatype;
    hdr.bitpix = static_cast<std::int16_t>(bitpix_for(datatype));
    hdr.pixdim[0] = 1.0f;
    hdr.pixdim[1] = static_cast<float>(spacing.x);
    hdr.pixdim[2] = static_cast<float>(spacing.y);
    hdr.pixdim[3] = static_cast<float>(spacing.z);
    hdr.vox_offset = 352.0f;
    hdr.scl_slope = 1.0f;
    hdr.scl_inter = 0.0f;
    hdr.xyzt_units = 2; // millimetres
    std::snprintf(hdr.descrip, sizeof(hdr.descrip), "ctfat");
    std::memcpy(hdr.magic, "n+1", 4);
}

void write_blob(const std::filesystem::path& path, const Nifti1Header& hdr,
                const void* data, std::size_t nbytes) {
    static const char extender[4] = {0, 0, 0, 0};
    if (wants_gzip(path)) {
        gzFile f = gzopen(path.string().c_str(), "wb");
        if (!f) throw IoError("cannot open for writing: " + path.string());
        bool ok = gzwrite(f, &hdr, sizeof(hdr)) == static_cast<int>(sizeof(hdr)) &&
                  gzwrite(f, extender, 4) == 4;
        const auto* p = static_cast<const unsigned char*>(data);
        std::size_t left = nbytes;
        while (ok && left > 0) {
            unsigned chunk = left > (1u << 30) ? (1u << 30) : static_cast<unsigned>(left);
            ok = gzwrite(f, p, chunk) == static_cast<int>(chunk);
            p += chunk;
            left -= chunk;
        }
        int rc = gzclose(f);
        if (!ok || rc != Z_OK) throw IoError("write failed: " + path.string());
    } else {
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        if (!f) throw IoError("cannot open for writing: " + path.string());
        f.write(reinterpret_cast<const char*>(&hdr), sizeof(hdr));
        f.write(extender, 4);
        f.write(static_cast<const char*>(data), static_cast<std::streamsize>(nbytes));
        f.flush();
        if (!f) throw IoError("write failed: " + path.string());
    }
}

} // namespace

HuVolume load_volume(const std::filesystem::path& path) {
    check_exists(path);
    GzReader in(path);
    ParsedHeader ph = read_and_validate_header(in, path.filename().string());

    in.skip(ph.vox_offset - sizeof(Nifti1Header));
    const std::size_t n = ph.shape.voxels();
    const std::size_t bytes = n * static_cast<std::size_t>(bitpix_for(ph.datatype) / 8);
    std::vector<unsigned char> raw(bytes);
    in.read_exact(raw.data(), bytes, "voxel data");

    HuVolume vol;
    vol.shape = ph.shape;
    vol.spacing = ph.spacing;
    vol.data.resize(n);
    const std::string name = path.filename().string();
    switch (ph.datatype) {
        case DT_UINT8:   convert_voxels<std::uint8_t>(raw, n, ph.slope, ph.inter, name, vol.data); break;
        case DT_INT8:    convert_voxels<std::int8_t>(raw, n, ph.slope, ph.inter, name, vol.data); break;
        case DT_INT16:   convert_voxels<std::int16_t>(raw, n, ph.slope, ph.inter, name, vol.data); break;
        case DT_UINT16:  convert_voxels<std::uint16_t>(raw, n, ph.slope, ph.inter, name, vol.data); break;
        case DT_INT32:   convert_voxels<std::int32_t>(raw, n, ph.slope, ph.inter, name, vol.data); break;
        case DT_UINT32:  convert_voxels<std::uint32_t>(raw, n, ph.slope, ph.inter, name, vol.data); break;
        case DT_FLOAT32: convert_voxels<float>(raw, n, ph.slope, ph.inter, name, vol.data); break;
        case DT_FLOAT64: convert_voxels<double>(raw, n, ph.slope, ph.inter, name, vol.data); break;
        default:         throw UnsupportedDatatype(name + ": unreachable datatype");
    }
    return vol;
}

BinaryMask load_mask(const std::filesystem::path& path) {
    check_exists(path);
    GzReader in(path);
    const std::string name = path.filename().string();
    ParsedHeader ph = read_and_validate_header(in, name);
    if (ph.datatype != DT_UINT8)
        throw UnsupportedDatatype(name + ": masks must be unsigned 8-bit");
    if (ph.slope != 1.0 || ph.inter != 0.0)
        throw UnsupportedDatatype(name + ": masks must not carry rescaling");

    in.skip(ph.vox_offset - sizeof(Nifti1Header));
    BinaryMask mask;
    mask.shape = ph.shape;
    mask.spacing = ph.spacing;
    mask.data.resize(ph.shape.voxels());
    in.read_exact(mask.data.data(), mask.data.size(), "mask data");
    for (std::size_t i = 0; i < mask.data.size(); ++i)
        if (mask.data[i] != 0 && mask.data[i] != BinaryMask::kForeground)
            throw InvalidMaskValue(name + ": mask voxel " + std::to_string(i) +
                                   " has value " + std::to_string(mask.data[i]) +
                                   " (expected 0 or 255)");
    return mask;
}

void save_volume(const HuVolume& vol, const std::filesystem::path& path) {
    if (vol.shape.voxels() == 0 || vol.data.size() != vol.shape.voxels())
        throw InvalidConfig("volume shape/data size mismatch");
    if (vol.shape.nx > 32767 || vol.shape.ny > 32767 || vol.shape.nz > 32767)
        throw InvalidConfig("dimension exceeds NIfTI-1 16-bit dim field");
    Nifti1Header hdr;
    fill_write_header(hdr, vol.shape, vol.spacing, DT_INT16);
    write_blob(path, hdr, vol.data.data(), vol.data.size() * sizeof(std::int16_t));
}

void save_mask(const BinaryMask& mask, const std::filesystem::path& path) {
    if (mask.shape.voxels() == 0 || mask.data.size() != mask.shape.voxels())
        throw InvalidConfig("mask shape/data size mismatch");
    if (mask.shape.nx > 32767 || mask.shape.ny > 32767 || mask.shape.nz > 32767)
        throw InvalidConfig("dimension exceeds NIfTI-1 16-bit dim field");
    Nifti1Header hdr;
    fill_write_header(hdr, mask.shape, mask.spacing, DT_UINT8);
    write_blob(path, hdr, mask.data.data(), mask.data.size());
}

} // namespace ctfat
