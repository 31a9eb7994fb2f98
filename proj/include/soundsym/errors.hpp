#pragma once

#include <stdexcept>
#include <string>

#include "soundsym/soundsym.h"

namespace soundsym {

// Every failure raised by the core carries the C status code it maps to, so the
// extern-C layer can translate exceptions without a type switch.
class Error : public std::runtime_error {
public:
    Error(ss_status code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ss_status code() const noexcept { return code_; }

private:
    ss_status code_;
};

#define SOUNDSYM_DEFINE_ERROR(Name, Code)                                       \
    class Name : public Error {                                                 \
    public:                                                                     \
        explicit Name(const std::string& what) : Error(Code, what) {}           \
    };

SOUNDSYM_DEFINE_ERROR(InvalidArgumentError, SS_ERR_INVALID_ARGUMENT)
SOUNDSYM_DEFINE_ERROR(TemplateError, SS_ERR_TEMPLATE)
SOUNDSYM_DEFINE_ERROR(MixedClassError, SS_ERR_MIXED_CLASS)
SOUNDSYM_DEFINE_ERROR(UnknownGraphemeError, SS_ERR_UNKNOWN_GRAPHEME)
SOUNDSYM_DEFINE_ERROR(FormatError, SS_ERR_FORMAT)
SOUNDSYM_DEFINE_ERROR(IoError, SS_ERR_IO)
SOUNDSYM_DEFINE_ERROR(MissingEmbeddingError, SS_ERR_MISSING_EMBEDDING)
SOUNDSYM_DEFINE_ERROR(BackendUnavailableError, SS_ERR_BACKEND_UNAVAILABLE)
SOUNDSYM_DEFINE_ERROR(DimensionMismatchError, SS_ERR_DIMENSION_MISMATCH)
SOUNDSYM_DEFINE_ERROR(ZeroMeanError, SS_ERR_ZERO_MEAN)
SOUNDSYM_DEFINE_ERROR(ZeroAxisError, SS_ERR_ZERO_AXIS)
SOUNDSYM_DEFINE_ERROR(StoreCorruptionError, SS_ERR_STORE_CORRUPTION)
SOUNDSYM_DEFINE_ERROR(DegenerateError, SS_ERR_DEGENERATE)
SOUNDSYM_DEFINE_ERROR(CoverageError, SS_ERR_COVERAGE)
SOUNDSYM_DEFINE_ERROR(KindMismatchError, SS_ERR_KIND_MISMATCH)
SOUNDSYM_DEFINE_ERROR(DecodeError, SS_ERR_DECODE)
SOUNDSYM_DEFINE_ERROR(ChannelError, SS_ERR_CHANNEL)

#undef SOUNDSYM_DEFINE_ERROR

}  // namespace soundsym
