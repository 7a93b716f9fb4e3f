#pragma once

#include <stdexcept>
#include <string>

namespace mlbc {

// Error taxonomy. The CLI maps each branch to a distinct exit code:
//   InputError -> 2, FormatError (and subtypes) -> 3,
//   CorruptionError -> 4, WrongDictionaryError -> 5.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Caller handed us something invalid: bad dimensions, empty corpus,
// out-of-range parameter.
struct InputError : Error {
    explicit InputError(const std::string& what) : Error(what) {}
};

// A persisted file does not parse: bad magic, wrong layout.
struct FormatError : Error {
    explicit FormatError(const std::string& what) : Error(what) {}
};

struct VersionError : FormatError {
    explicit VersionError(const std::string& what) : FormatError(what) {}
};

struct TruncationError : FormatError {
    explicit TruncationError(const std::string& what) : FormatError(what) {}
};

struct ChecksumError : FormatError {
    explicit ChecksumError(const std::string& what) : FormatError(what) {}
};

// A container parsed structurally but its contents are inconsistent
// (CRC mismatch, payload under/overrun, impossible symbol).
struct CorruptionError : Error {
    explicit CorruptionError(const std::string& what) : Error(what) {}
};

// Container references a dictionary set other than the one loaded.
struct WrongDictionaryError : Error {
    explicit WrongDictionaryError(const std::string& what) : Error(what) {}
};

}  // namespace mlbc
