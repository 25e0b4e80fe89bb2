// gaussex: evaluate, check, and compose models written in the gaussex DSL.
//
//   gaussex eval <file> [--json|--pretty] [--form precision|covariance]
//                       [--strict-interconnect]
//   gaussex check <file> --mc <n> [--seed <s>]
//   gaussex compose <f> <g> [--via-interconnection] [--json|--pretty]
//
// GAUSSEX_TOL overrides the equality tolerance tau_eq for the process.
// Exit codes: 0 success, 1 user error (message on stderr), 2 internal error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "gaussex/dsl.hpp"

namespace {

using namespace gaussex;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(errc::bad_index, "cannot open file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void apply_env_tolerance() {
    const char* env = std::getenv("GAUSSEX_TOL");
    if (env == nullptr || *env == '\0') return;
    char* end = nullptr;
    const double value = std::strtod(env, &end);
    if (end == env || *end != '\0')
        fail(errc::bad_index, std::string("GAUSSEX_TOL is not a number: '") + env + "'");
    ToleranceConfig tol = default_tolerance();
    tol.tau_eq = value;
    tol.validate();
    set_default_tolerance(tol);
}

int run(int argc, char** argv) {
    CLI::App app{"calculus of extended Gaussian distributions"};
    app.require_subcommand(1);

    std::string eval_file;
    bool eval_pretty = false, eval_json = false, eval_strict = false;
    std::string eval_form;
    CLI::App* eval = app.add_subcommand("eval", "evaluate a model and print its state");
    eval->add_option("file", eval_file, "model file")->required();
    CLI::Option* oj = eval->add_flag("--json", eval_json, "compact JSON output (default)");
    eval->add_flag("--pretty", eval_pretty, "indented JSON output")->excludes(oj);
    eval->add_option("--form", eval_form, "also print a quadratic form")
        ->check(CLI::IsMember({"precision", "covariance"}));
    eval->add_flag("--strict-interconnect", eval_strict,
                   "treat observe as behavioral interconnection");

    std::string check_file;
    std::int64_t check_n = 0;
    std::uint64_t check_seed = 0;
    CLI::App* check = app.add_subcommand("check", "Monte Carlo check of event queries");
    check->add_option("file", check_file, "model file")->required();
    check->add_option("--mc", check_n, "number of samples")->required()
        ->check(CLI::PositiveNumber);
    check->add_option("--seed", check_seed, "RNG seed");

    std::string comp_f, comp_g;
    bool comp_via = false, comp_pretty = false, comp_json = false;
    CLI::App* comp = app.add_subcommand("compose", "compose two models as morphisms");
    comp->add_option("f", comp_f, "first model file")->required();
    comp->add_option("g", comp_g, "second model file")->required();
    comp->add_flag("--via-interconnection", comp_via,
                   "also route through open-system interconnection and compare");
    CLI::Option* cj = comp->add_flag("--json", comp_json, "compact JSON output (default)");
    comp->add_flag("--pretty", comp_pretty, "indented JSON output")->excludes(cj);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    apply_env_tolerance();

    if (eval->parsed()) {
        dsl::EvalOptions opts;
        opts.strict_interconnect = eval_strict;
        if (eval_form == "precision") opts.form = dsl::FormChoice::precision;
        if (eval_form == "covariance") opts.form = dsl::FormChoice::covariance;
        const dsl::ModelAST ast = dsl::parse(read_file(eval_file));
        std::cout << dsl::dump_json(dsl::eval_model(ast, opts), eval_pretty) << "\n";
        return 0;
    }
    if (check->parsed()) {
        const dsl::ModelAST ast = dsl::parse(read_file(check_file));
        const dsl::CheckResult res = dsl::check_model(ast, check_n, check_seed);
        std::cout << dsl::dump_json(res.report, true) << "\n";
        return res.ok ? 0 : 1;
    }
    if (comp->parsed()) {
        const dsl::ModelAST f = dsl::parse(read_file(comp_f));
        const dsl::ModelAST g = dsl::parse(read_file(comp_g));
        std::cout << dsl::dump_json(dsl::compose_models(f, g, comp_via), comp_pretty)
                  << "\n";
        return 0;
    }
    return 1;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.code() == errc::internal_inconsistency ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    }
}
