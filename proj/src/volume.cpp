#include "ctfat/volume.hpp"

#include <charconv>
#include <cstring>

namespace ctfat {
namespace {

int parse_int(std::string_view text, const std::string& whole) {
    int value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw InvalidConfig("bad slice selector: '" + whole + "'");
    return value;
}

template <typename V>
V extract_impl(const V& src, const SliceSelector& sel) {
    auto [z0, z1] = sel.resolve(src.shape.nz);
    V out;
    out.shape = GridShape{src.shape.nx, src.shape.ny, z1 - z0 + 1};
    out.spacing = src.spacing;
    const std::size_t slice_px =
        static_cast<std::size_t>(src.shape.nx) * src.shape.ny;
    out.data.assign(src.data.begin() + static_cast<std::ptrdiff_t>(z0 * slice_px),
                    src.data.begin() + static_cast<std::ptrdiff_t>((z1 + 1) * slice_px));
    return out;
}

} // namespace

SliceSelector SliceSelector::parse(const std::string& text) {
    if (text.empty()) throw InvalidConfig("empty slice selector");
    if (text == "all") return all();
    auto colon = text.find(':');
    if (colon == std::string::npos) return single(parse_int(text, text));
    int z0 = parse_int(std::string_view(text).substr(0, colon), text);
    int z1 = parse_int(std::string_view(text).substr(colon + 1), text);
    if (z0 > z1)
        throw InvalidConfig("slice range start exceeds end: '" + text + "'");
    return range(z0, z1);
}

std::pair<int, int> SliceSelector::resolve(int nz) const {
    if (nz < 1) throw IndexOutOfRange("volume has no slices");
    switch (mode) {
        case Mode::All:
            return {0, nz - 1};
        case Mode::Single:
            if (z_start < 0 || z_start >= nz)
                throw IndexOutOfRange("slice " + std::to_string(z_start) +
                                      " out of range [0, " + std::to_string(nz - 1) + "]");
            return {z_start, z_start};
        case Mode::Range:
            if (z_start < 0 || z_end >= nz || z_start > z_end)
                throw IndexOutOfRange("slice range " + std::to_string(z_start) + ":" +
                                      std::to_string(z_end) + " out of range [0, " +
                                      std::to_string(nz - 1) + "]");
            return {z_start, z_end};
    }
    throw InvalidConfig("corrupt slice selector");
}

HuVolume extract_slices(const HuVolume& vol, const SliceSelector& sel) {
    return extract_impl(vol, sel);
}

BinaryMask extract_slices(const BinaryMask& mask, const SliceSelector& sel) {
    return extract_impl(mask, sel);
}

} // namespace ctfat
