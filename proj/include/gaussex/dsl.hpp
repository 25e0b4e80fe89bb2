#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "gaussex/category.hpp"
#include "gaussex/quadratic.hpp"
#include "gaussex/willems.hpp"

// A small declarative model language over extended Gaussians:
//
//   stmt  := ident "~" dist | ident "=" affine
//          | "observe" affine "==" affine | "output" ident-list
//   dist  := "N(" affine "," matrix-literal ")" | "R" ["^" int]
//   query := "marginal" ident-list | "pushforward" affine
//          | "event" [string ":"] affine "in" "[" bound "," bound "]"
//          | "form" ("precision" | "covariance")
//
// Whitespace-insensitive; "#" starts a comment running to end of line.
// Variables are vectors (dim from the declaration); affine expressions are
// sums of scalar*variable terms plus scalar or vector constants (scalars
// broadcast).  Every identifier must be declared before use.
namespace gaussex::dsl {

struct SrcPos {
    int line{1};
    int col{1};
};

// One reported problem, anchored to a position in the source.
struct Diagnostic {
    SrcPos pos;
    std::string severity{"error"};
    std::string message;
};

std::string format_diagnostic(const Diagnostic& d);

// Sum of coeff*var terms plus a constant (scalar or vector literal).
struct AffineTerm {
    double coeff{1.0};
    std::string var;
};

struct AffineExpr {
    std::vector<AffineTerm> terms;
    bool has_vector_constant{false};
    Vector vector_constant{Vector(0)}; // vector literals, scalars folded in
    double scalar_constant{0.0};       // used when no vector literal appears
    SrcPos pos;
};

// Covariance literal; `scalar` records that it was written as a bare number.
struct MatrixLit {
    Matrix m{0, 0};
    bool scalar{false};
};

enum class StmtKind { SampleGauss, SampleFree, Assign, Observe, Output };

struct Stmt {
    StmtKind kind{StmtKind::Assign};
    std::string var;                  // SampleGauss / SampleFree / Assign
    AffineExpr lhs;                   // Observe left side
    AffineExpr rhs;                   // Observe right side; mean / assigned value
    MatrixLit cov;                    // SampleGauss
    Index free_dim{1};                // SampleFree
    std::vector<std::string> outputs; // Output
    SrcPos pos;
};

enum class QueryKind { Marginal, Pushforward, Event, Form };

struct Query {
    QueryKind kind{QueryKind::Marginal};
    std::vector<std::string> vars; // Marginal
    AffineExpr expr;               // Pushforward / Event
    std::string name;              // Event label (may be empty)
    double lo{0.0}, hi{0.0};       // Event bounds, +-infinity allowed
    bool precision{true};          // Form kind
    SrcPos pos;
};

struct ModelAST {
    std::vector<Stmt> statements;
    std::vector<Query> queries;
};

// Throws Error(errc::syntax_error) carrying a formatted Diagnostic.
ModelAST parse(const std::string& source);

// Canonical text form; parse(print(ast)) reproduces the AST.
std::string print(const ModelAST& ast);

// ============================================================================
// Elaboration: statements compile to tensor / compose / conditional chains
// over a growing joint state; the result is the state over the `output`
// variables in order (all variables in declaration order when no `output`).
// ============================================================================

struct OutputVar {
    std::string name;
    Index offset{0};
    Index dim{0};
};

struct ElaboratedModel {
    GaussExMorphism state; // dom 0; `state.noise` is the joint distribution
    std::vector<OutputVar> outputs;
    std::vector<Query> queries;
};

// strict_interconnect switches `observe` from conditioning to behavioral
// interconnection, which errors (NotComplementary) when the observed
// combination is not fibre-valued.
ElaboratedModel elaborate(const ModelAST& ast, bool strict_interconnect = false,
                          const ToleranceConfig& tol = default_tolerance());

// The morphism a model denotes: its first output variable is the input wire,
// the remaining outputs the codomain; extracted as a conditional of the state.
GaussExMorphism morphism_of_model(const ElaboratedModel& model,
                                  const ToleranceConfig& tol = default_tolerance());

nlohmann::json run_query(const ElaboratedModel& model, const Query& query,
                         const ToleranceConfig& tol = default_tolerance());

// ============================================================================
// JSON (schema "gaussex/1"; doubles print in shortest round-trip form).
// The import path does not recompute anything, so canonical values
// round-trip bit-identically.
// ============================================================================

nlohmann::json state_to_json(const ExtendedGaussian& chi);
ExtendedGaussian state_from_json(const nlohmann::json& j,
                                 const ToleranceConfig& tol = default_tolerance());

nlohmann::json morphism_to_json(const GaussExMorphism& f);
GaussExMorphism morphism_from_json(const nlohmann::json& j,
                                   const ToleranceConfig& tol = default_tolerance());

nlohmann::json form_to_json(const PartialQuadratic& f, const std::string& kind);

std::string dump_json(const nlohmann::json& j, bool pretty);

// ============================================================================
// Subcommand drivers (the CLI binary is a thin argument-parsing shell).
// ============================================================================

enum class FormChoice { none, precision, covariance };

struct EvalOptions {
    bool strict_interconnect{false};
    FormChoice form{FormChoice::none};
};

nlohmann::json eval_model(const ModelAST& ast, const EvalOptions& opts = {},
                          const ToleranceConfig& tol = default_tolerance());

struct CheckResult {
    nlohmann::json report;
    bool ok{true};
};

CheckResult check_model(const ModelAST& ast, std::int64_t n_samples, std::uint64_t seed,
                        const ToleranceConfig& tol = default_tolerance());

nlohmann::json compose_models(const ModelAST& f, const ModelAST& g, bool via_interconnection,
                              const ToleranceConfig& tol = default_tolerance());

} // namespace gaussex::dsl
