#pragma once

#include <stdexcept>
#include <string>

namespace plc {

/// Error categories surfaced by the library. Most indicate a caller
/// contract violation; UnreconstructiblePrune and DecodeFailure indicate
/// an internal protocol construction bug and are never silently ignored.
enum class Errc {
    NotPrime,
    FieldTooSmall,
    Unsolvable,
    NonUniformColumnWeight,
    RowLacksInformationSet,
    NotFound,
    SearchCutoff,
    FieldMismatch,
    IndexOutOfRange,
    NoSource,
    NotDivisible,
    UnreconstructiblePrune,
    DecodeFailure,
    BudgetExceeded,
    InvalidParameters,
    InternalMismatch,
    ConfigError,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    Errc code() const { return code_; }

private:
    Errc code_;
};

} // namespace plc
