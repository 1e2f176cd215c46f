#pragma once

#include <stdexcept>
#include <string>

namespace hiref {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidSubset : Error { using Error::Error; };
struct DimensionError : Error { using Error::Error; };
struct RankError : Error { using Error::Error; };
struct CapacityError : Error { using Error::Error; };
struct ShapeError : Error { using Error::Error; };
struct TooLargeError : Error { using Error::Error; };
struct SizeError : Error { using Error::Error; };
struct ScheduleError : Error { using Error::Error; };
struct SpecError : Error { using Error::Error; };
struct UsageError : Error { using Error::Error; };
struct NumericalError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

/// No rank schedule satisfies the query; message names the binding constraint.
struct ScheduleInfeasible : Error { using Error::Error; };

}  // namespace hiref
