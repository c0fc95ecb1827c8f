#pragma once

#include <stdexcept>
#include <string>

namespace ctfat {

// Base for every error thrown by the library. CLI maps these to exit code 2
// (data/algorithm errors); argument parsing problems exit 1.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define CTFAT_DEFINE_ERROR(NAME)                                       \
    class NAME : public Error {                                        \
    public:                                                            \
        explicit NAME(const std::string& msg) : Error(msg) {}          \
    }

// volume_io
CTFAT_DEFINE_ERROR(FileNotFound);
CTFAT_DEFINE_ERROR(MalformedHeader);
CTFAT_DEFINE_ERROR(UnsupportedDatatype);
CTFAT_DEFINE_ERROR(IoError);
CTFAT_DEFINE_ERROR(InvalidMaskValue);
CTFAT_DEFINE_ERROR(IndexOutOfRange);

// preprocess / fatseg
CTFAT_DEFINE_ERROR(InvalidConfig);
CTFAT_DEFINE_ERROR(ShapeMismatch);
CTFAT_DEFINE_ERROR(NoSubcutaneousFat);
CTFAT_DEFINE_ERROR(DegenerateCenter);
CTFAT_DEFINE_ERROR(NonFiniteRatio);

// metrics
CTFAT_DEFINE_ERROR(EmptyCounts);
CTFAT_DEFINE_ERROR(ZeroReference);
CTFAT_DEFINE_ERROR(LengthMismatch);
CTFAT_DEFINE_ERROR(UnknownLabel);

// scoring
CTFAT_DEFINE_ERROR(NonFiniteInput);
CTFAT_DEFINE_ERROR(InvalidStride);
CTFAT_DEFINE_ERROR(EmptySeries);
CTFAT_DEFINE_ERROR(OutOfRange);

// phantom
CTFAT_DEFINE_ERROR(InvalidGeometry);
CTFAT_DEFINE_ERROR(Infeasible);

#undef CTFAT_DEFINE_ERROR

} // namespace ctfat
