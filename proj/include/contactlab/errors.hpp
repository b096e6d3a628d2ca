#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace contactlab {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

class InvalidBlock : public Error {
public:
    using Error::Error;
};

// Interiors of two blocks overlap by more than the contact tolerance.
class OverlapError : public Error {
public:
    OverlapError(const std::string& what, double depth, long step = -1)
        : Error(what), depth_(depth), step_(step) {}

    double depth() const noexcept { return depth_; }
    // Simulation step at which the overlap was detected, -1 outside a simulation.
    long step() const noexcept { return step_; }

private:
    double depth_;
    long step_;
};

class DimensionMismatch : public Error {
public:
    DimensionMismatch(std::size_t expected, std::size_t got)
        : Error("dimension mismatch: expected " + std::to_string(expected) + ", got " +
                std::to_string(got)) {}
};

class SingularSystem : public Error {
public:
    using Error::Error;
};

class NonFinite : public Error {
public:
    using Error::Error;
};

class EmptyData : public Error {
public:
    using Error::Error;
};

class InsufficientData : public Error {
public:
    using Error::Error;
};

class UnlabeledGrid : public Error {
public:
    using Error::Error;
};

class WrongVertexCount : public Error {
public:
    using Error::Error;
};

class SizeTooLarge : public Error {
public:
    using Error::Error;
};

// Rule-count calibration could not land on the requested count.
class CalibrationError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

}  // namespace contactlab
