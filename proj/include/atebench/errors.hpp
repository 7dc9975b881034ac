#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace atebench {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed matrices, bad indices, broken graph invariants.
class StructuralError : public Error {
public:
    using Error::Error;
};

// Meek propagation forced an edge in both directions.
class InconsistencyError : public Error {
public:
    using Error::Error;
};

class ExtensionError : public Error {
public:
    using Error::Error;
};

class CapacityError : public Error {
public:
    CapacityError(const std::string& what, std::size_t partial_count)
        : Error(what), partial_count_(partial_count) {}

    std::size_t partial_count() const noexcept { return partial_count_; }

private:
    std::size_t partial_count_;
};

class ParameterError : public Error {
public:
    using Error::Error;
};

class DegenerateDataError : public Error {
public:
    using Error::Error;
};

class SampleSizeError : public Error {
public:
    using Error::Error;
};

// Label or column mismatches between files and graphs.
class SchemaError : public Error {
public:
    using Error::Error;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class AggregationError : public Error {
public:
    using Error::Error;
};

class DiscoveryError : public Error {
public:
    using Error::Error;
};

// Unknown keys or unparsable values in an experiment config.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace atebench
