#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace spca {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A local PCA or curve construction collapsed (zero spread, single point).
class DegenerateGeometry : public Error {
public:
    using Error::Error;
};

/// A curve coordinate or metric length outside the attainable range.
class OutOfRange : public Error {
public:
    OutOfRange(const std::string& what, double attainable_min, double attainable_max)
        : Error(what), attainable_min_(attainable_min), attainable_max_(attainable_max) {}

    double attainable_min() const noexcept { return attainable_min_; }
    double attainable_max() const noexcept { return attainable_max_; }

private:
    double attainable_min_;
    double attainable_max_;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t row) : Error(what), row_(row) {}

    /// 1-based line number of the offending row (0 when the whole input is at fault).
    std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

class FitFailure : public Error {
public:
    using Error::Error;
};

/// Raised when the sequential path for one sample cannot be built.
class TransformFailure : public Error {
public:
    TransformFailure(const std::string& what, std::size_t dimension)
        : Error(what), dimension_(dimension) {}

    std::size_t dimension() const noexcept { return dimension_; }

private:
    std::size_t dimension_;
};

class InversionFailure : public Error {
public:
    InversionFailure(const std::string& what, std::size_t dimension, double attainable_min,
                     double attainable_max)
        : Error(what),
          dimension_(dimension),
          attainable_min_(attainable_min),
          attainable_max_(attainable_max) {}

    std::size_t dimension() const noexcept { return dimension_; }
    double attainable_min() const noexcept { return attainable_min_; }
    double attainable_max() const noexcept { return attainable_max_; }

private:
    std::size_t dimension_;
    double attainable_min_;
    double attainable_max_;
};

class ClassificationFailure : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace spca
