// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace splitcomp {

/// Root of every exception thrown by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define SPLITCOMP_DEFINE_ERROR(Name)          \
    class Name : public Error {               \
    public:                                   \
        using Error::Error;                   \
    }

SPLITCOMP_DEFINE_ERROR(DimensionError);   // shape / axis mismatch
SPLITCOMP_DEFINE_ERROR(ParameterError);   // invalid scalar parameter (tau <= 0, ...)
SPLITCOMP_DEFINE_ERROR(InputError);       // empty or non-finite input
SPLITCOMP_DEFINE_ERROR(FormatError);      // bad magic / version / layout
SPLITCOMP_DEFINE_ERROR(ModelError);       // entropy model id mismatch
SPLITCOMP_DEFINE_ERROR(CorruptionError);  // truncated or inconsistent payload
SPLITCOMP_DEFINE_ERROR(CapacityError);    // CDF table cannot hold the alphabet
SPLITCOMP_DEFINE_ERROR(TaskError);        // unknown task id
SPLITCOMP_DEFINE_ERROR(RangeError);       // argument outside its domain
SPLITCOMP_DEFINE_ERROR(ConfigError);      // missing profile, wrong scenario kind
SPLITCOMP_DEFINE_ERROR(IoError);
SPLITCOMP_DEFINE_ERROR(TimeoutError);
SPLITCOMP_DEFINE_ERROR(ProtocolError);    // peer answered with an error frame

#undef SPLITCOMP_DEFINE_ERROR

}  // namespace splitcomp
