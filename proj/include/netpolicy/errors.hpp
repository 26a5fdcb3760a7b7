#pragma once

#include <stdexcept>
#include <string>

namespace netpolicy {

struct InvalidArgument : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// A sampled unit had propensity outside [1e-6, 1 - 1e-6].
struct DegeneratePropensity : std::domain_error {
    using std::domain_error::domain_error;
};

// Zero-variance pair estimates; the t statistic is undefined.
struct DegenerateStatistic : std::domain_error {
    using std::domain_error::domain_error;
};

inline void require(bool ok, const std::string& what) {
    if (!ok) throw InvalidArgument(what);
}

}  // namespace netpolicy
