#pragma once

#include <stdexcept>
#include <string>

namespace chase {

/// Bad model configuration or document (invalid rows, hash mismatch, ...).
class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Unreadable or structurally broken input data.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace chase
