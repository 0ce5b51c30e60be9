#include "ctsid/errors.hpp"

namespace ctsid {

const char* error_code_name(ErrorCode c) {
    switch (c) {
        case ErrorCode::DIM_MISMATCH: return "DIM_MISMATCH";
        case ErrorCode::IMPROPER_FILTER: return "IMPROPER_FILTER";
        case ErrorCode::NON_COPRIME: return "NON_COPRIME";
        case ErrorCode::MISSING_REFERENCE: return "MISSING_REFERENCE";
        case ErrorCode::ILL_CONDITIONED: return "ILL_CONDITIONED";
        case ErrorCode::UNSTABLE_ITERATE: return "UNSTABLE_ITERATE";
        case ErrorCode::ALGEBRAIC_LOOP: return "ALGEBRAIC_LOOP";
        case ErrorCode::CL_UNSTABLE: return "CL_UNSTABLE";
        case ErrorCode::NOT_OSCILLATORY: return "NOT_OSCILLATORY";
        case ErrorCode::DEGENERATE_MODE: return "DEGENERATE_MODE";
        case ErrorCode::NOT_PD_WEIGHT: return "NOT_PD_WEIGHT";
        case ErrorCode::SINGULAR_JACOBIAN: return "SINGULAR_JACOBIAN";
        case ErrorCode::UNSTABLE_NOISE_FILTER: return "UNSTABLE_NOISE_FILTER";
        case ErrorCode::ZERO_SIGNAL: return "ZERO_SIGNAL";
        case ErrorCode::EMPTY_TABLE: return "EMPTY_TABLE";
        case ErrorCode::MC_UNRELIABLE: return "MC_UNRELIABLE";
        case ErrorCode::BAD_INPUT: return "BAD_INPUT";
        case ErrorCode::NUMERIC_FAIL: return "NUMERIC_FAIL";
    }
    return "UNKNOWN";
}

bool is_validation_error(ErrorCode c) {
    switch (c) {
        case ErrorCode::DIM_MISMATCH:
        case ErrorCode::IMPROPER_FILTER:
        case ErrorCode::NON_COPRIME:
        case ErrorCode::MISSING_REFERENCE:
        case ErrorCode::NOT_PD_WEIGHT:
        case ErrorCode::UNSTABLE_NOISE_FILTER:
        case ErrorCode::ZERO_SIGNAL:
        case ErrorCode::EMPTY_TABLE:
        case ErrorCode::BAD_INPUT:
            return true;
        default:
            return false;
    }
}

}  // namespace ctsid
