#pragma once

#include <stdexcept>
#include <string>

namespace soundmask {

// Base class for every error thrown by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// --- audio ---
class FormatError : public Error {
public:
    using Error::Error;
};
class EmptyAudioError : public Error {
public:
    using Error::Error;
};
class SilentNoiseError : public Error {
public:
    using Error::Error;
};

// --- features ---
class TooShortError : public Error {
public:
    using Error::Error;
};

// --- networks ---
class ConfigError : public Error {
public:
    using Error::Error;
};

// Training produced a NaN/Inf loss. gan::DivergenceError extends this
// with the last finite checkpoint.
class DivergenceError : public Error {
public:
    using Error::Error;
};

// --- randomness ---
class DegenerateSequenceError : public Error {
public:
    using Error::Error;
};
class InsufficientSamplesError : public Error {
public:
    using Error::Error;
};
class EmptyDatasetError : public Error {
public:
    using Error::Error;
};

// --- datasets ---
class LayoutError : public Error {
public:
    using Error::Error;
};
class LabelParseError : public Error {
public:
    using Error::Error;
};
class TooFewClipsError : public Error {
public:
    using Error::Error;
};

// --- evaluation ---
class MissingCellError : public Error {
public:
    using Error::Error;
};
class KeyMismatchError : public Error {
public:
    using Error::Error;
};
class ZeroBaselineError : public Error {
public:
    using Error::Error;
};
class InsufficientPairsError : public Error {
public:
    using Error::Error;
};
class SchemaError : public Error {
public:
    using Error::Error;
};

// --- i/o ---
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace soundmask
