#pragma once

#include <stdexcept>
#include <string>

namespace hybridlink {

// Invalid sizes, unknown presets, malformed parameter sets.
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Buffer lengths that do not line up with the frame layout.
struct FramingError : std::length_error {
    using std::length_error::length_error;
};

// Values outside the mathematical domain of an operation.
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// Caller did not supply what the selected mode needs.
struct PreconditionError : std::logic_error {
    using std::logic_error::logic_error;
};

}  // namespace hybridlink
