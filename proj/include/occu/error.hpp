#pragma once

#include <stdexcept>
#include <string>

namespace occu {

// Root of everything the library throws on bad input or failed training.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Array lengths that must agree do not.
class DimensionError : public Error {
public:
    using Error::Error;
};

// A scalar argument lies outside its admissible range.
class DomainError : public Error {
public:
    using Error::Error;
};

// Mixtures passed to a component-aligned operation do not share weights.
class AlignmentError : public Error {
public:
    using Error::Error;
};

// Input series are malformed, too short, or have gaps.
class DataError : public Error {
public:
    using Error::Error;
};

// The input carries too little information for the requested fit.
class DegenerateError : public Error {
public:
    using Error::Error;
};

class TrainingError : public Error {
public:
    using Error::Error;
};

} // namespace occu
