#ifndef LIO_ERRORS_HPP
#define LIO_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace lio {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct AngleNearPi : Error {
    AngleNearPi() : Error("rotation angle within 1e-9 of pi, log map rejected") {}
};

struct DtOutOfRange : Error {
    explicit DtOutOfRange(double dt)
        : Error("dt out of range (0, 0.1]: " + std::to_string(dt)) {}
};

struct EmptyImu : Error {
    EmptyImu() : Error("IMU sample list is empty") {}
};

struct NonMonotonicStamps : Error {
    explicit NonMonotonicStamps(const std::string& where)
        : Error("non-monotonic timestamps: " + where) {}
};

struct MissingLeftImu : Error {
    MissingLeftImu() : Error("no IMU sample precedes the earliest scan point") {}
};

struct EmptyMap : Error {
    EmptyMap() : Error("feature map holds no points of the requested kind") {}
};

struct TooFewNeighbors : Error {
    explicit TooFewNeighbors(std::size_t n)
        : Error("need at least 5 neighbors for a fit, got " + std::to_string(n)) {}
};

struct SingularInnovation : Error {
    SingularInnovation() : Error("innovation matrix numerically singular") {}
};

struct SingularPrior : Error {
    SingularPrior() : Error("prior covariance cannot be inverted stably") {}
};

struct NoCorrespondences : Error {
    NoCorrespondences() : Error("every scan point failed the correspondence gate") {}
};

struct NotStatic : Error {
    NotStatic() : Error("initialization stream is not static") {}
};

struct TooShort : Error {
    TooShort() : Error("initialization stream shorter than requested duration") {}
};

struct OutOfRange : Error {
    explicit OutOfRange(double t)
        : Error("query time outside trajectory duration: " + std::to_string(t)) {}
};

struct NoVisibleFeatures : Error {
    NoVisibleFeatures() : Error("world model holds no features to sample") {}
};

struct TooFewPoints : Error {
    explicit TooFewPoints(std::size_t n)
        : Error("too few points for feature classification: " + std::to_string(n)) {}
};

struct ParseError : Error {
    ParseError(const std::string& path, std::size_t line, std::size_t byte_offset,
               const std::string& what_failed)
        : Error(path + ":" + std::to_string(line) + " (byte " +
                std::to_string(byte_offset) + "): " + what_failed),
          line_number(line),
          byte(byte_offset) {}
    std::size_t line_number;
    std::size_t byte;
};

}  // namespace lio

#endif  // LIO_ERRORS_HPP
