#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace viinter {

/// Shape or dimension disagreement between operands.
class shape_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside its documented domain (t outside [0,1], degenerate code, ...).
class value_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid or inconsistent run configuration.
class config_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Dataset problems: missing files, mixed dimensions, undecodable images.
class data_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed serialized state (bad magic, version, truncation).
class format_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Training produced a non-finite loss or gradient.
class divergence_error : public std::runtime_error {
public:
    divergence_error(const std::string& what, std::uint64_t iteration)
        : std::runtime_error(what + " (iteration " + std::to_string(iteration) + ")"),
          iteration_(iteration) {}

    std::uint64_t iteration() const { return iteration_; }

private:
    std::uint64_t iteration_;
};

} // namespace viinter
