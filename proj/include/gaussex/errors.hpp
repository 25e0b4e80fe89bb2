#pragma once

#include <stdexcept>
#include <string>

namespace gaussex {

// Failure classes surfaced by the library. User-input failures map to CLI
// exit code 1, internal_inconsistency to exit code 2.
enum class errc {
    dimension_mismatch,
    non_finite_input,
    not_surjective,
    not_total,
    not_psd,
    not_parallel,
    unsupported_region,
    not_complementary,
    bad_index,
    bad_placement,
    infeasible,
    syntax_error,
    scope_error,
    bad_query,
    internal_inconsistency,
};

inline const char* errc_name(errc c) {
    switch (c) {
        case errc::dimension_mismatch: return "DimensionMismatch";
        case errc::non_finite_input: return "NonFiniteInput";
        case errc::not_surjective: return "NotSurjective";
        case errc::not_total: return "NotTotal";
        case errc::not_psd: return "NotPSD";
        case errc::not_parallel: return "NotParallel";
        case errc::unsupported_region: return "UnsupportedRegion";
        case errc::not_complementary: return "NotComplementary";
        case errc::bad_index: return "BadIndex";
        case errc::bad_placement: return "BadPlacement";
        case errc::infeasible: return "Infeasible";
        case errc::syntax_error: return "SyntaxError";
        case errc::scope_error: return "ScopeError";
        case errc::bad_query: return "BadQuery";
        case errc::internal_inconsistency: return "InternalInconsistency";
    }
    return "UnknownError";
}

class Error : public std::runtime_error {
  public:
    Error(errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    errc code() const { return code_; }

  private:
    errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw Error(code, what); }

} // namespace gaussex
