#pragma once

#include <stdexcept>
#include <string>

namespace mosaic {

// Base for everything this library throws.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : Error {
    using Error::Error;
};
struct UnsupportedDatatype : Error {
    using Error::Error;
};
struct UnsupportedRank : Error {
    using Error::Error;
};
struct IoError : Error {
    using Error::Error;
};
struct InvalidWindow : Error {
    using Error::Error;
};
struct DegenerateIntensity : Error {
    using Error::Error;
};
struct EmptyDataset : Error {
    using Error::Error;
};
struct InvalidSlice : Error {
    using Error::Error;
};
struct IndexError : Error {
    using Error::Error;
};
struct ShapeError : Error {
    using Error::Error;
};
struct ConfigError : Error {
    using Error::Error;
};
struct EmptyInput : Error {
    using Error::Error;
};
struct DegenerateVector : Error {
    using Error::Error;
};
struct UnknownOrgan : Error {
    using Error::Error;
};
struct MissingPredictions : Error {
    using Error::Error;
};
struct UndefinedMetric : Error {
    using Error::Error;
};
struct EmptyReport : Error {
    using Error::Error;
};

}  // namespace mosaic
