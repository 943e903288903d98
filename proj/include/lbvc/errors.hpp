#pragma once

#include <stdexcept>
#include <string>

namespace lbvc {

// Base class for everything the library throws on bad input or bad data.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// Malformed container or bitstream header (bad magic, unparsable Y4M header).
class FormatError : public Error
{
public:
    using Error::Error;
};

class TruncationError : public Error
{
public:
    TruncationError(const std::string& what, long frame_index)
        : Error(what + " (frame " + std::to_string(frame_index) + ")"), frame_index_(frame_index)
    {
    }

    long frame_index() const noexcept { return frame_index_; }

private:
    long frame_index_;
};

// Mismatched dimensions between frames, flows or file sizes.
class GeometryError : public Error
{
public:
    using Error::Error;
};

class ParameterError : public Error
{
public:
    using Error::Error;
};

// Range-coder state violation or payload inconsistent with its header.
class DecodeError : public Error
{
public:
    using Error::Error;
};

// Numerical input that violates a metric's preconditions (e.g. non-monotonic RD curve).
class DataError : public Error
{
public:
    using Error::Error;
};

class OverlapError : public DataError
{
public:
    using DataError::DataError;
};

} // namespace lbvc
