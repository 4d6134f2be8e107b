#pragma once

#include <stdexcept>
#include <string>

namespace pgdf {

// Invalid configuration or CLI input. Mapped to exit code 2.
struct config_error : std::runtime_error {
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed input file (bad CSV row, unreadable checkpoint, ...).
struct ingestion_error : std::runtime_error {
    explicit ingestion_error(const std::string& what) : std::runtime_error(what) {}
};

// Tensor/vector dimension mismatch.
struct shape_error : std::runtime_error {
    explicit shape_error(const std::string& what) : std::runtime_error(what) {}
};

// API called out of contract (double-recorded epoch, ...).
struct usage_error : std::runtime_error {
    explicit usage_error(const std::string& what) : std::runtime_error(what) {}
};

// NaN/Inf or other numeric breakdown during training. Mapped to exit code 3.
struct numeric_fault : std::runtime_error {
    explicit numeric_fault(const std::string& what) : std::runtime_error(what) {}
};

// Degenerate statistical situation (all losses identical, single-class
// training set, empty middle band, ...).
struct degenerate_error : std::runtime_error {
    explicit degenerate_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace pgdf
