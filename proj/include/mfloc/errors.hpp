#pragma once

#include <stdexcept>
#include <string>

namespace mfloc {

// Shape or extent disagreement between operands.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Scalar parameter outside its documented domain.
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Unreadable/unwritable file or malformed file content.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Metric cannot be computed from the given data (e.g. single-class AUC).
class EvaluationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed configuration or command line.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace mfloc
