#include "gaussex/dsl.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <set>
#include <unordered_map>
#include <utility>

namespace gaussex::dsl {

namespace {

// Shortest decimal form that parses back to the same double.
std::string format_double(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string format_bound(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return format_double(v);
}

const std::set<std::string>& reserved_words() {
    static const std::set<std::string> words{
        "observe", "output",    "marginal",   "pushforward", "event", "form",
        "in",      "inf",       "N",          "R",           "precision",
        "covariance"};
    return words;
}

[[noreturn]] void fail_at(errc code, SrcPos pos, const std::string& message) {
    fail(code, format_diagnostic(Diagnostic{pos, "error", message}));
}

// ============================================================================
// Lexer
// ============================================================================

enum class Tok {
    End, Ident, Number, String,
    Tilde, Assign, EqEq, LParen, RParen, LBracket, RBracket,
    Comma, Star, Plus, Minus, Caret, Colon,
};

struct Token {
    Tok kind{Tok::End};
    std::string text;
    double num{0.0};
    SrcPos pos;
};

std::vector<Token> lex(const std::string& src) {
    std::vector<Token> out;
    SrcPos pos{1, 1};
    std::size_t i = 0;

    auto advance = [&](std::size_t n) {
        for (std::size_t k = 0; k < n; ++k) {
            if (src[i] == '\n') {
                ++pos.line;
                pos.col = 1;
            } else {
                ++pos.col;
            }
            ++i;
        }
    };

    while (i < src.size()) {
        const char c = src[i];
        if (c == '#') {
            while (i < src.size() && src[i] != '\n') advance(1);
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance(1);
            continue;
        }
        const SrcPos start = pos;
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t j = i;
            while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            if (j < src.size() && src[j] == '.') {
                ++j;
                while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            }
            if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
                std::size_t k = j + 1;
                if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
                if (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) {
                    ++k;
                    while (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k])))
                        ++k;
                    j = k;
                }
            }
            const std::string text = src.substr(i, j - i);
            double value = 0.0;
            const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
            if (res.ec != std::errc{})
                fail_at(errc::syntax_error, start, "malformed number '" + text + "'");
            out.push_back({Tok::Number, text, value, start});
            advance(j - i);
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < src.size() &&
                   (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_'))
                ++j;
            out.push_back({Tok::Ident, src.substr(i, j - i), 0.0, start});
            advance(j - i);
            continue;
        }
        if (c == '"') {
            std::size_t j = i + 1;
            while (j < src.size() && src[j] != '"' && src[j] != '\n') ++j;
            if (j >= src.size() || src[j] != '"')
                fail_at(errc::syntax_error, start, "unterminated string");
            out.push_back({Tok::String, src.substr(i + 1, j - i - 1), 0.0, start});
            advance(j + 1 - i);
            continue;
        }
        if (c == '=' && i + 1 < src.size() && src[i + 1] == '=') {
            out.push_back({Tok::EqEq, "==", 0.0, start});
            advance(2);
            continue;
        }
        Tok kind;
        switch (c) {
            case '~': kind = Tok::Tilde; break;
            case '=': kind = Tok::Assign; break;
            case '(': kind = Tok::LParen; break;
            case ')': kind = Tok::RParen; break;
            case '[': kind = Tok::LBracket; break;
            case ']': kind = Tok::RBracket; break;
            case ',': kind = Tok::Comma; break;
            case '*': kind = Tok::Star; break;
            case '+': kind = Tok::Plus; break;
            case '-': kind = Tok::Minus; break;
            case '^': kind = Tok::Caret; break;
            case ':': kind = Tok::Colon; break;
            default:
                fail_at(errc::syntax_error, start,
                        std::string("unexpected character '") + c + "'");
        }
        out.push_back({kind, std::string(1, c), 0.0, start});
        advance(1);
    }
    out.push_back({Tok::End, "", 0.0, pos});
    return out;
}

// ============================================================================
// Parser
// ============================================================================

class Parser {
  public:
    explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

    ModelAST parse_model() {
        ModelAST ast;
        while (peek().kind != Tok::End) {
            const Token& t = peek();
            if (t.kind == Tok::Ident && t.text == "observe") {
                ast.statements.push_back(parse_observe());
            } else if (t.kind == Tok::Ident && t.text == "output") {
                ast.statements.push_back(parse_output());
            } else if (t.kind == Tok::Ident && t.text == "marginal") {
                ast.queries.push_back(parse_marginal());
            } else if (t.kind == Tok::Ident && t.text == "pushforward") {
                ast.queries.push_back(parse_pushforward());
            } else if (t.kind == Tok::Ident && t.text == "event") {
                ast.queries.push_back(parse_event());
            } else if (t.kind == Tok::Ident && t.text == "form") {
                ast.queries.push_back(parse_form());
            } else if (t.kind == Tok::Ident && !reserved_words().count(t.text)) {
                ast.statements.push_back(parse_declaration());
            } else {
                fail_at(errc::syntax_error, t.pos, "expected a statement or query");
            }
        }
        return ast;
    }

  private:
    const Token& peek(std::size_t ahead = 0) const {
        return toks_[std::min(i_ + ahead, toks_.size() - 1)];
    }
    Token next() { return toks_[std::min(i_++, toks_.size() - 1)]; }
    Token expect(Tok kind, const std::string& what) {
        if (peek().kind != kind) fail_at(errc::syntax_error, peek().pos, "expected " + what);
        return next();
    }

    std::string expect_variable() {
        if (peek().kind != Tok::Ident)
            fail_at(errc::syntax_error, peek().pos, "expected a variable name");
        if (reserved_words().count(peek().text))
            fail_at(errc::syntax_error, peek().pos,
                    "'" + peek().text + "' is a reserved word");
        return next().text;
    }

    double parse_signed_number() {
        double sign = 1.0;
        if (peek().kind == Tok::Minus) {
            next();
            sign = -1.0;
        } else if (peek().kind == Tok::Plus) {
            next();
        }
        const Token t = expect(Tok::Number, "a number");
        return sign * t.num;
    }

    double parse_bound() {
        double sign = 1.0;
        if (peek().kind == Tok::Minus) {
            next();
            sign = -1.0;
        } else if (peek().kind == Tok::Plus) {
            next();
        }
        if (peek().kind == Tok::Ident && peek().text == "inf") {
            next();
            return sign * std::numeric_limits<double>::infinity();
        }
        const Token t = expect(Tok::Number, "a number or inf");
        return sign * t.num;
    }

    Vector parse_vector_literal() {
        expect(Tok::LBracket, "'['");
        std::vector<double> vals;
        vals.push_back(parse_signed_number());
        while (peek().kind == Tok::Comma) {
            next();
            vals.push_back(parse_signed_number());
        }
        expect(Tok::RBracket, "']'");
        Vector v(static_cast<Index>(vals.size()));
        for (std::size_t k = 0; k < vals.size(); ++k) v(static_cast<Index>(k)) = vals[k];
        return v;
    }

    // One signed summand of an affine expression, merged into `expr`.
    void parse_affine_term(AffineExpr& expr, double sign) {
        const Token& t = peek();
        if (t.kind == Tok::Number) {
            next();
            double value = sign * t.num;
            if (peek().kind == Tok::Star) {
                next();
                expr.terms.push_back({value, expect_variable()});
            } else if (expr.has_vector_constant) {
                expr.vector_constant.array() += value;
            } else {
                expr.scalar_constant += value;
            }
            return;
        }
        if (t.kind == Tok::LBracket) {
            const Vector lit = sign * parse_vector_literal();
            if (expr.has_vector_constant) {
                if (expr.vector_constant.size() != lit.size())
                    fail_at(errc::dimension_mismatch, t.pos,
                            "vector literals of different lengths in one expression");
                expr.vector_constant += lit;
            } else {
                expr.has_vector_constant = true;
                expr.vector_constant = lit;
                if (expr.scalar_constant != 0.0) {
                    expr.vector_constant.array() += expr.scalar_constant;
                    expr.scalar_constant = 0.0;
                }
            }
            return;
        }
        if (t.kind == Tok::Ident && !reserved_words().count(t.text)) {
            next();
            expr.terms.push_back({sign, t.text});
            return;
        }
        fail_at(errc::syntax_error, t.pos, "expected expression");
    }

    AffineExpr parse_affine() {
        AffineExpr expr;
        expr.pos = peek().pos;
        double sign = 1.0;
        if (peek().kind == Tok::Minus) {
            next();
            sign = -1.0;
        } else if (peek().kind == Tok::Plus) {
            next();
        }
        parse_affine_term(expr, sign);
        while (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
            const double s = next().kind == Tok::Plus ? 1.0 : -1.0;
            parse_affine_term(expr, s);
        }
        return expr;
    }

    MatrixLit parse_matrix_literal() {
        if (peek().kind != Tok::LBracket) {
            const SrcPos pos = peek().pos;
            const double v = parse_signed_number();
            (void)pos;
            return MatrixLit{Matrix::Constant(1, 1, v), true};
        }
        const SrcPos pos = peek().pos;
        next(); // outer '['
        std::vector<Vector> rows;
        rows.push_back(parse_vector_literal());
        while (peek().kind == Tok::Comma) {
            next();
            rows.push_back(parse_vector_literal());
            if (rows.back().size() != rows.front().size())
                fail_at(errc::syntax_error, pos, "matrix rows of different lengths");
        }
        expect(Tok::RBracket, "']'");
        Matrix m(static_cast<Index>(rows.size()), rows.front().size());
        for (std::size_t r = 0; r < rows.size(); ++r) m.row(static_cast<Index>(r)) = rows[r];
        return MatrixLit{std::move(m), false};
    }

    Stmt parse_declaration() {
        Stmt s;
        s.pos = peek().pos;
        s.var = expect_variable();
        if (peek().kind == Tok::Tilde) {
            next();
            if (peek().kind == Tok::Ident && peek().text == "N") {
                next();
                s.kind = StmtKind::SampleGauss;
                expect(Tok::LParen, "'('");
                s.rhs = parse_affine();
                expect(Tok::Comma, "','");
                s.cov = parse_matrix_literal();
                expect(Tok::RParen, "')'");
                return s;
            }
            if (peek().kind == Tok::Ident && peek().text == "R") {
                next();
                s.kind = StmtKind::SampleFree;
                s.free_dim = 1;
                if (peek().kind == Tok::Caret) {
                    next();
                    const Token t = expect(Tok::Number, "an integer dimension");
                    if (t.num < 0 || t.num != std::floor(t.num))
                        fail_at(errc::syntax_error, t.pos,
                                "dimension must be a nonnegative integer");
                    s.free_dim = static_cast<Index>(t.num);
                }
                return s;
            }
            fail_at(errc::syntax_error, peek().pos, "expected a distribution N(...) or R");
        }
        if (peek().kind == Tok::Assign) {
            next();
            s.kind = StmtKind::Assign;
            s.rhs = parse_affine();
            return s;
        }
        fail_at(errc::syntax_error, peek().pos, "expected '~' or '=' after variable name");
    }

    Stmt parse_observe() {
        Stmt s;
        s.pos = next().pos; // 'observe'
        s.kind = StmtKind::Observe;
        s.lhs = parse_affine();
        expect(Tok::EqEq, "'=='");
        s.rhs = parse_affine();
        return s;
    }

    Stmt parse_output() {
        Stmt s;
        s.pos = next().pos; // 'output'
        s.kind = StmtKind::Output;
        s.outputs.push_back(expect_variable());
        while (peek().kind == Tok::Comma) {
            next();
            s.outputs.push_back(expect_variable());
        }
        return s;
    }

    Query parse_marginal() {
        Query q;
        q.pos = next().pos; // 'marginal'
        q.kind = QueryKind::Marginal;
        q.vars.push_back(expect_variable());
        while (peek().kind == Tok::Comma) {
            next();
            q.vars.push_back(expect_variable());
        }
        return q;
    }

    Query parse_pushforward() {
        Query q;
        q.pos = next().pos; // 'pushforward'
        q.kind = QueryKind::Pushforward;
        q.expr = parse_affine();
        return q;
    }

    Query parse_event() {
        Query q;
        q.pos = next().pos; // 'event'
        q.kind = QueryKind::Event;
        if (peek().kind == Tok::String) {
            q.name = next().text;
            expect(Tok::Colon, "':' after event name");
        }
        q.expr = parse_affine();
        if (!(peek().kind == Tok::Ident && peek().text == "in"))
            fail_at(errc::syntax_error, peek().pos, "expected 'in'");
        next();
        expect(Tok::LBracket, "'['");
        q.lo = parse_bound();
        expect(Tok::Comma, "','");
        q.hi = parse_bound();
        expect(Tok::RBracket, "']'");
        return q;
    }

    Query parse_form() {
        Query q;
        q.pos = next().pos; // 'form'
        q.kind = QueryKind::Form;
        if (peek().kind == Tok::Ident &&
            (peek().text == "precision" || peek().text == "covariance")) {
            q.precision = next().text == "precision";
            return q;
        }
        fail_at(errc::syntax_error, peek().pos, "expected 'precision' or 'covariance'");
    }

    std::vector<Token> toks_;
    std::size_t i_{0};
};

// ============================================================================
// Printer
// ============================================================================

std::string print_affine(const AffineExpr& e) {
    std::vector<std::string> pieces;
    for (const AffineTerm& t : e.terms) {
        if (t.coeff == 1.0)
            pieces.push_back(t.var);
        else if (t.coeff == -1.0)
            pieces.push_back("-" + t.var);
        else
            pieces.push_back(format_double(t.coeff) + "*" + t.var);
    }
    if (e.has_vector_constant) {
        std::string v = "[";
        for (Index k = 0; k < e.vector_constant.size(); ++k) {
            if (k > 0) v += ", ";
            v += format_double(e.vector_constant(k));
        }
        pieces.push_back(v + "]");
    } else if (e.scalar_constant != 0.0 || e.terms.empty()) {
        pieces.push_back(format_double(e.scalar_constant));
    }
    std::string out;
    for (std::size_t k = 0; k < pieces.size(); ++k) {
        if (k == 0) {
            out = pieces[k];
        } else if (pieces[k].front() == '-') {
            out += " - " + pieces[k].substr(1);
        } else {
            out += " + " + pieces[k];
        }
    }
    return out;
}

std::string print_matrix_literal(const MatrixLit& lit) {
    if (lit.scalar) return format_double(lit.m(0, 0));
    std::string out = "[";
    for (Index r = 0; r < lit.m.rows(); ++r) {
        if (r > 0) out += ", ";
        out += "[";
        for (Index c = 0; c < lit.m.cols(); ++c) {
            if (c > 0) out += ", ";
            out += format_double(lit.m(r, c));
        }
        out += "]";
    }
    return out + "]";
}

std::string join_names(const std::vector<std::string>& names) {
    std::string out;
    for (std::size_t k = 0; k < names.size(); ++k) {
        if (k > 0) out += ", ";
        out += names[k];
    }
    return out;
}

} // namespace

std::string format_diagnostic(const Diagnostic& d) {
    return std::to_string(d.pos.line) + ":" + std::to_string(d.pos.col) + ": " + d.severity +
           ": " + d.message;
}

ModelAST parse(const std::string& source) { return Parser(lex(source)).parse_model(); }

std::string print(const ModelAST& ast) {
    std::string out;
    for (const Stmt& s : ast.statements) {
        switch (s.kind) {
            case StmtKind::SampleGauss:
                out += s.var + " ~ N(" + print_affine(s.rhs) + ", " +
                       print_matrix_literal(s.cov) + ")";
                break;
            case StmtKind::SampleFree:
                out += s.var + " ~ R";
                if (s.free_dim != 1) out += "^" + std::to_string(s.free_dim);
                break;
            case StmtKind::Assign:
                out += s.var + " = " + print_affine(s.rhs);
                break;
            case StmtKind::Observe:
                out += "observe " + print_affine(s.lhs) + " == " + print_affine(s.rhs);
                break;
            case StmtKind::Output:
                out += "output " + join_names(s.outputs);
                break;
        }
        out += "\n";
    }
    for (const Query& q : ast.queries) {
        switch (q.kind) {
            case QueryKind::Marginal:
                out += "marginal " + join_names(q.vars);
                break;
            case QueryKind::Pushforward:
                out += "pushforward " + print_affine(q.expr);
                break;
            case QueryKind::Event:
                out += "event ";
                if (!q.name.empty()) out += "\"" + q.name + "\" : ";
                out += print_affine(q.expr) + " in [" + format_bound(q.lo) + ", " +
                       format_bound(q.hi) + "]";
                break;
            case QueryKind::Form:
                out += std::string("form ") + (q.precision ? "precision" : "covariance");
                break;
        }
        out += "\n";
    }
    return out;
}

// ============================================================================
// Elaboration
// ============================================================================

namespace {

struct VarTable {
    std::vector<OutputVar> vars;
    std::unordered_map<std::string, std::size_t> index;
    Index total{0};

    const OutputVar* find(const std::string& name) const {
        const auto it = index.find(name);
        return it == index.end() ? nullptr : &vars[it->second];
    }
    void declare(const std::string& name, Index dim, SrcPos pos) {
        if (index.count(name))
            fail_at(errc::scope_error, pos, "variable '" + name + "' is already declared");
        index[name] = vars.size();
        vars.push_back({name, total, dim});
        total += dim;
    }
};

// The dimension an expression forces, or -1 when every summand broadcasts.
Index probe_dim(const AffineExpr& e, const VarTable& table, errc scope_code) {
    Index d = -1;
    for (const AffineTerm& t : e.terms) {
        const OutputVar* v = table.find(t.var);
        if (v == nullptr)
            fail_at(scope_code, e.pos, "unknown variable '" + t.var + "'");
        if (d == -1)
            d = v->dim;
        else if (v->dim != d)
            fail_at(errc::dimension_mismatch, e.pos,
                    "mixed dimensions in expression: " + std::to_string(d) + " vs " +
                        std::to_string(v->dim));
    }
    if (e.has_vector_constant) {
        if (d == -1)
            d = e.vector_constant.size();
        else if (e.vector_constant.size() != d)
            fail_at(errc::dimension_mismatch, e.pos,
                    "vector constant of length " + std::to_string(e.vector_constant.size()) +
                        " in a dimension-" + std::to_string(d) + " expression");
    }
    return d;
}

struct CompiledAffine {
    Matrix a;
    Vector c;
};

// Realizes the expression as x |-> a*x + c over the table's coordinates.
CompiledAffine compile_affine(const AffineExpr& e, const VarTable& table, Index want,
                              errc scope_code) {
    Index d = probe_dim(e, table, scope_code);
    if (d == -1) d = want >= 0 ? want : 1;
    if (want >= 0 && d != want)
        fail_at(errc::dimension_mismatch, e.pos,
                "expression has dimension " + std::to_string(d) + ", expected " +
                    std::to_string(want));
    Matrix a = Matrix::Zero(d, table.total);
    for (const AffineTerm& t : e.terms) {
        const OutputVar* v = table.find(t.var);
        a.block(0, v->offset, d, d) += t.coeff * Matrix::Identity(d, d);
    }
    Vector c = e.has_vector_constant ? e.vector_constant
                                     : Vector::Constant(d, e.scalar_constant);
    return {std::move(a), std::move(c)};
}

// Appends a block computed as a*vars + c + fresh noise N(0, cov) to a state.
GaussExMorphism append_block(const GaussExMorphism& cur, const CompiledAffine& aff,
                             const Matrix& cov, const ToleranceConfig& tol) {
    const Index v = cur.cod();
    const Index k = aff.a.rows();
    Matrix m(v + k, v);
    m << Matrix::Identity(v, v), aff.a;
    const ExtendedGaussian noise = tensor(
        ext_point_mass(Vector::Zero(v)), from_gaussian(make_gaussian(aff.c, cov)));
    return compose(make_gaussex(m, noise, tol), cur, tol);
}

} // namespace

ElaboratedModel elaborate(const ModelAST& ast, bool strict_interconnect,
                          const ToleranceConfig& tol) {
    VarTable table;
    GaussExMorphism cur = gx_state(ext_point_mass(Vector(0)));
    std::optional<Stmt> output_stmt;

    for (const Stmt& s : ast.statements) {
        switch (s.kind) {
            case StmtKind::SampleFree: {
                table.declare(s.var, s.free_dim, s.pos);
                cur = tensor(cur, gx_uninformative(s.free_dim), tol);
                break;
            }
            case StmtKind::SampleGauss: {
                if (s.cov.m.rows() != s.cov.m.cols())
                    fail_at(errc::dimension_mismatch, s.pos, "covariance literal must be square");
                const Index k = s.cov.m.rows();
                const CompiledAffine mean = compile_affine(s.rhs, table, k, errc::scope_error);
                cur = append_block(cur, mean, s.cov.m, tol);
                table.declare(s.var, k, s.pos);
                break;
            }
            case StmtKind::Assign: {
                const CompiledAffine value = compile_affine(s.rhs, table, -1, errc::scope_error);
                cur = append_block(cur, value, Matrix::Zero(value.a.rows(), value.a.rows()), tol);
                table.declare(s.var, value.a.rows(), s.pos);
                break;
            }
            case StmtKind::Observe: {
                Index d = probe_dim(s.lhs, table, errc::scope_error);
                if (d == -1) d = probe_dim(s.rhs, table, errc::scope_error);
                if (d == -1) d = 1;
                const CompiledAffine l = compile_affine(s.lhs, table, d, errc::scope_error);
                const CompiledAffine r = compile_affine(s.rhs, table, d, errc::scope_error);
                const Index v = table.total;
                const Index k = d;

                // joint (w, vars) with w = lhs - rhs
                Matrix m(k + v, v);
                m << (l.a - r.a), Matrix::Identity(v, v);
                Vector shift(k + v);
                shift << (l.c - r.c), Vector::Zero(v);
                const GaussExMorphism joint =
                    compose(make_gaussex(m, ext_point_mass(shift), tol), cur, tol);

                if (strict_interconnect) {
                    const Subspace pin_fibre =
                        subspace_product(Subspace::zero(k), Subspace::full(v));
                    const GaussianSystem pinned{make_extended(
                        Vector::Zero(k + v), Matrix::Zero(k + v, k + v), pin_fibre, tol)};
                    const GaussianSystem merged =
                        interconnect(GaussianSystem{joint.noise}, pinned, tol);
                    std::vector<Index> keep(static_cast<std::size_t>(v));
                    for (Index j = 0; j < v; ++j) keep[static_cast<std::size_t>(j)] = k + j;
                    cur = gx_state(eliminate(merged, keep, tol).chi);
                } else {
                    const GaussExMorphism cond = conditional(joint, k, tol);
                    cur = compose(cond, gx_state(ext_point_mass(Vector::Zero(k))), tol);
                }
                break;
            }
            case StmtKind::Output: {
                if (output_stmt)
                    fail_at(errc::scope_error, s.pos, "more than one output statement");
                std::set<std::string> seen;
                for (const std::string& name : s.outputs) {
                    if (table.find(name) == nullptr)
                        fail_at(errc::scope_error, s.pos, "unknown variable '" + name + "'");
                    if (!seen.insert(name).second)
                        fail_at(errc::scope_error, s.pos,
                                "variable '" + name + "' listed twice in output");
                }
                output_stmt = s;
                break;
            }
        }
    }

    ElaboratedModel model;
    model.queries = ast.queries;
    if (!output_stmt) {
        model.state = cur;
        model.outputs = table.vars;
        return model;
    }
    std::vector<Index> coords;
    Index offset = 0;
    for (const std::string& name : output_stmt->outputs) {
        const OutputVar* v = table.find(name);
        for (Index j = 0; j < v->dim; ++j) coords.push_back(v->offset + j);
        model.outputs.push_back({name, offset, v->dim});
        offset += v->dim;
    }
    model.state = marginal(cur, coords, tol);
    return model;
}

GaussExMorphism morphism_of_model(const ElaboratedModel& model, const ToleranceConfig& tol) {
    if (model.outputs.empty())
        fail(errc::bad_query, "model has no output variables to form a morphism from");
    return conditional(model.state, model.outputs.front().dim, tol);
}

// ============================================================================
// Queries
// ============================================================================

nlohmann::json run_query(const ElaboratedModel& model, const Query& query,
                         const ToleranceConfig& tol) {
    VarTable table;
    for (const OutputVar& v : model.outputs) table.declare(v.name, v.dim, query.pos);
    const ExtendedGaussian& chi = model.state.noise;

    switch (query.kind) {
        case QueryKind::Marginal: {
            std::vector<Index> coords;
            for (const std::string& name : query.vars) {
                const OutputVar* v = table.find(name);
                if (v == nullptr)
                    fail_at(errc::bad_query, query.pos,
                            "'" + name + "' is not an output variable");
                for (Index j = 0; j < v->dim; ++j) coords.push_back(v->offset + j);
            }
            const GaussExMorphism sub = marginal(model.state, coords, tol);
            return {{"query", "marginal"},
                    {"vars", query.vars},
                    {"state", state_to_json(sub.noise)}};
        }
        case QueryKind::Pushforward: {
            const CompiledAffine aff =
                compile_affine(query.expr, table, -1, errc::bad_query);
            const ExtendedGaussian moved = pushforward(aff.a, chi, tol);
            const ExtendedGaussian shifted =
                make_extended(moved.mean + aff.c, moved.cov, moved.fibre, tol);
            return {{"query", "pushforward"},
                    {"expr", print_affine(query.expr)},
                    {"state", state_to_json(shifted)}};
        }
        case QueryKind::Event: {
            const CompiledAffine aff =
                compile_affine(query.expr, table, -1, errc::bad_query);
            if (aff.a.rows() != 1)
                fail_at(errc::bad_query, query.pos, "event expression must be scalar");
            const CylinderEvent ev{aff.a,
                                   interval_region(query.lo - aff.c(0), query.hi - aff.c(0))};
            const double p = cylinder_probability(GaussianSystem{chi}, ev, tol);
            nlohmann::json out{{"query", "event"},
                               {"expr", print_affine(query.expr)},
                               {"lo", format_bound(query.lo)},
                               {"hi", format_bound(query.hi)},
                               {"prob", p}};
            if (!query.name.empty()) out["name"] = query.name;
            return out;
        }
        case QueryKind::Form: {
            const PartialQuadratic f =
                query.precision ? precision_form(chi, tol) : covariance_form(chi, tol);
            return {{"query", "form"},
                    {"kind", query.precision ? "precision" : "covariance"},
                    {"form", form_to_json(f, query.precision ? "precision" : "covariance")}};
        }
    }
    fail(errc::internal_inconsistency, "unhandled query kind");
}

// ============================================================================
// JSON
// ============================================================================

namespace {

constexpr const char* kSchema = "gaussex/1";

nlohmann::json matrix_rows(const Matrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Index r = 0; r < m.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

nlohmann::json basis_columns(const Matrix& basis) {
    nlohmann::json cols = nlohmann::json::array();
    for (Index c = 0; c < basis.cols(); ++c) {
        nlohmann::json col = nlohmann::json::array();
        for (Index r = 0; r < basis.rows(); ++r) col.push_back(basis(r, c));
        cols.push_back(std::move(col));
    }
    return cols;
}

nlohmann::json vector_entries(const Vector& v) {
    nlohmann::json out = nlohmann::json::array();
    for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

double json_number(const nlohmann::json& j, const char* what) {
    if (!j.is_number()) fail(errc::syntax_error, std::string("json: ") + what + " must be a number");
    return j.get<double>();
}

Vector json_vector(const nlohmann::json& j, Index size, const char* what) {
    if (!j.is_array() || static_cast<Index>(j.size()) != size)
        fail(errc::dimension_mismatch,
             std::string("json: ") + what + " must be an array of length " +
                 std::to_string(size));
    Vector v(size);
    for (Index i = 0; i < size; ++i) v(i) = json_number(j[static_cast<std::size_t>(i)], what);
    return v;
}

Matrix json_matrix_rows(const nlohmann::json& j, Index rows, Index cols, const char* what) {
    if (!j.is_array() || static_cast<Index>(j.size()) != rows)
        fail(errc::dimension_mismatch,
             std::string("json: ") + what + " must have " + std::to_string(rows) + " rows");
    Matrix m(rows, cols);
    for (Index r = 0; r < rows; ++r)
        m.row(r) = json_vector(j[static_cast<std::size_t>(r)], cols, what).transpose();
    return m;
}

Matrix json_basis_columns(const nlohmann::json& j, Index ambient, const char* what) {
    if (!j.is_array())
        fail(errc::dimension_mismatch, std::string("json: ") + what + " must be an array");
    const Index d = static_cast<Index>(j.size());
    Matrix basis(ambient, d);
    for (Index c = 0; c < d; ++c)
        basis.col(c) = json_vector(j[static_cast<std::size_t>(c)], ambient, what);
    return basis;
}

void require_schema(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("schema") || j["schema"] != kSchema)
        fail(errc::syntax_error, std::string("json: expected schema \"") + kSchema + "\"");
}

const nlohmann::json& field(const nlohmann::json& j, const char* name) {
    if (!j.contains(name))
        fail(errc::syntax_error, std::string("json: missing field '") + name + "'");
    return j[name];
}

} // namespace

nlohmann::json state_to_json(const ExtendedGaussian& chi) {
    return {{"schema", kSchema},
            {"dim", chi.dim()},
            {"mean", vector_entries(chi.mean)},
            {"cov", matrix_rows(chi.cov)},
            {"fibre_basis", basis_columns(chi.fibre.basis())}};
}

ExtendedGaussian state_from_json(const nlohmann::json& j, const ToleranceConfig& tol) {
    require_schema(j);
    const Index n = static_cast<Index>(json_number(field(j, "dim"), "dim"));
    if (n < 0) fail(errc::dimension_mismatch, "json: negative dim");
    const Vector mean = json_vector(field(j, "mean"), n, "mean");
    const Matrix cov = json_matrix_rows(field(j, "cov"), n, n, "cov");
    const Matrix basis = json_basis_columns(field(j, "fibre_basis"), n, "fibre_basis");
    check_finite(mean, "mean");
    check_finite(cov, "cov");
    const Subspace fibre = Subspace::from_canonical(basis, tol);

    // Validate the canonical invariants without recomputing the fields, so
    // an exported state imports bit-identically.
    const Matrix perp = Matrix::Identity(n, n) - fibre.projector();
    if ((mean - perp * mean).norm() > tol.tau_orth * std::max(1.0, mean.norm()))
        fail(errc::bad_index, "json: mean has a component along the fibre");
    if ((cov - cov.transpose()).norm() > kPsdSlack * std::max(1.0, cov.norm()))
        fail(errc::not_psd, "json: cov is not symmetric");
    if ((cov - perp * cov * perp).norm() > tol.tau_orth * std::max(1.0, cov.norm()))
        fail(errc::bad_index, "json: cov is not supported on the fibre complement");
    if (n > 0) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(cov);
        if (es.eigenvalues().minCoeff() < -kPsdSlack * std::max(1.0, cov.norm()))
            fail(errc::not_psd, "json: cov is not positive semidefinite");
    }
    return ExtendedGaussian{fibre, mean, cov};
}

nlohmann::json morphism_to_json(const GaussExMorphism& f) {
    return {{"schema", kSchema},
            {"dom", f.dom()},
            {"cod", f.cod()},
            {"matrix", matrix_rows(f.m)},
            {"noise", state_to_json(f.noise)}};
}

GaussExMorphism morphism_from_json(const nlohmann::json& j, const ToleranceConfig& tol) {
    require_schema(j);
    const Index dom = static_cast<Index>(json_number(field(j, "dom"), "dom"));
    const Index cod = static_cast<Index>(json_number(field(j, "cod"), "cod"));
    if (dom < 0 || cod < 0) fail(errc::dimension_mismatch, "json: negative dimension");
    const Matrix m = json_matrix_rows(field(j, "matrix"), cod, dom, "matrix");
    check_finite(m, "matrix");
    const ExtendedGaussian noise = state_from_json(field(j, "noise"), tol);
    if (noise.dim() != cod)
        fail(errc::dimension_mismatch, "json: noise dim does not match cod");
    if ((noise.fibre.projector() * m).norm() > tol.tau_orth * std::max(1.0, m.norm()))
        fail(errc::bad_index, "json: matrix has a component along the noise fibre");
    return GaussExMorphism{m, noise};
}

nlohmann::json form_to_json(const PartialQuadratic& f, const std::string& kind) {
    return {{"schema", kSchema},
            {"kind", kind},
            {"dim", f.dim()},
            {"a", matrix_rows(f.a)},
            {"lin", vector_entries(f.lin)},
            {"offset", f.offset},
            {"domain_basis", basis_columns(f.domain.basis())},
            {"anchor", vector_entries(f.anchor)}};
}

std::string dump_json(const nlohmann::json& j, bool pretty) {
    return pretty ? j.dump(2) : j.dump();
}

// ============================================================================
// Subcommand drivers
// ============================================================================

nlohmann::json eval_model(const ModelAST& ast, const EvalOptions& opts,
                          const ToleranceConfig& tol) {
    const ElaboratedModel model = elaborate(ast, opts.strict_interconnect, tol);
    nlohmann::json out{{"schema", kSchema}};
    nlohmann::json names = nlohmann::json::array();
    for (const OutputVar& v : model.outputs) names.push_back(v.name);
    out["outputs"] = std::move(names);
    out["state"] = state_to_json(model.state.noise);
    if (opts.form != FormChoice::none) {
        const bool prec = opts.form == FormChoice::precision;
        const PartialQuadratic f = prec ? precision_form(model.state.noise, tol)
                                        : covariance_form(model.state.noise, tol);
        out["form"] = form_to_json(f, prec ? "precision" : "covariance");
    }
    nlohmann::json queries = nlohmann::json::array();
    for (const Query& q : model.queries) queries.push_back(run_query(model, q, tol));
    out["queries"] = std::move(queries);
    return out;
}

CheckResult check_model(const ModelAST& ast, std::int64_t n_samples, std::uint64_t seed,
                        const ToleranceConfig& tol) {
    const ElaboratedModel model = elaborate(ast, false, tol);
    VarTable table;
    for (const OutputVar& v : model.outputs) table.declare(v.name, v.dim, SrcPos{});
    const GaussianSystem sys{model.state.noise};

    CheckResult result;
    result.report = {{"schema", kSchema}, {"samples", n_samples}};
    nlohmann::json checks = nlohmann::json::array();
    std::uint64_t event_index = 0;
    for (const Query& q : model.queries) {
        if (q.kind != QueryKind::Event) continue;
        const CompiledAffine aff = compile_affine(q.expr, table, -1, errc::bad_query);
        if (aff.a.rows() != 1)
            fail_at(errc::bad_query, q.pos, "event expression must be scalar");
        const CylinderEvent ev{aff.a, interval_region(q.lo - aff.c(0), q.hi - aff.c(0))};
        const double analytic = cylinder_probability(sys, ev, tol);
        const McResult mc = mc_estimate(sys, ev, n_samples, seed + event_index, tol);
        const bool ok = std::abs(analytic - mc.estimate) <= 4.0 * mc.std_error + 1e-12;
        nlohmann::json entry{{"expr", print_affine(q.expr)},
                             {"analytic", analytic},
                             {"estimate", mc.estimate},
                             {"std_error", mc.std_error},
                             {"ok", ok}};
        if (!q.name.empty()) entry["name"] = q.name;
        checks.push_back(std::move(entry));
        result.ok = result.ok && ok;
        ++event_index;
    }
    result.report["checks"] = std::move(checks);
    result.report["ok"] = result.ok;
    return result;
}

nlohmann::json compose_models(const ModelAST& f, const ModelAST& g, bool via_interconnection,
                              const ToleranceConfig& tol) {
    const GaussExMorphism fm = morphism_of_model(elaborate(f, false, tol), tol);
    const GaussExMorphism gm = morphism_of_model(elaborate(g, false, tol), tol);
    if (fm.cod() != gm.dom())
        fail(errc::dimension_mismatch,
             "first model produces R^" + std::to_string(fm.cod()) +
                 " but second consumes R^" + std::to_string(gm.dom()));
    const GaussExMorphism direct = compose(gm, fm, tol);
    nlohmann::json out{{"schema", kSchema}, {"morphism", morphism_to_json(direct)}};
    if (via_interconnection) {
        const GaussExMorphism routed = compose_via_interconnection(fm, gm, tol);
        const bool agree = gaussex_equal(direct, routed, tol);
        out["agree"] = agree;
        if (!agree)
            fail(errc::internal_inconsistency,
                 "interconnection pipeline disagrees with direct composition");
    }
    return out;
}

} // namespace gaussex::dsl
