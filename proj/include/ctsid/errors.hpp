#pragma once

#include <stdexcept>
#include <string>

namespace ctsid {

// Stable error identifiers, also used by the CLI to pick exit codes
// (validation errors exit 2, numeric failures exit 3).
enum class ErrorCode {
    DIM_MISMATCH,
    IMPROPER_FILTER,
    NON_COPRIME,
    MISSING_REFERENCE,
    ILL_CONDITIONED,
    UNSTABLE_ITERATE,
    ALGEBRAIC_LOOP,
    CL_UNSTABLE,
    NOT_OSCILLATORY,
    DEGENERATE_MODE,
    NOT_PD_WEIGHT,
    SINGULAR_JACOBIAN,
    UNSTABLE_NOISE_FILTER,
    ZERO_SIGNAL,
    EMPTY_TABLE,
    MC_UNRELIABLE,
    BAD_INPUT,
    NUMERIC_FAIL,
};

const char* error_code_name(ErrorCode c);

// True for errors caused by malformed user input rather than a failed computation.
bool is_validation_error(ErrorCode c);

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

    ErrorCode code() const { return code_; }

  private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool ok, ErrorCode code, const std::string& what) {
    if (!ok) fail(code, what);
}

}  // namespace ctsid
