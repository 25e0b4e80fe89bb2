#include "gaussex/willems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace gaussex {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// standard normal CDF / PDF via the complementary error function (stable in
// both tails)
double normal_cdf(double x) { return 0.5 * std::erfc(-x * 0.7071067811865475244); }
double normal_pdf(double x) { return 0.3989422804014326779 * std::exp(-0.5 * x * x); }

// 16-point Gauss-Legendre rule on [-1, 1]
constexpr double kGlNode[16] = {
    -9.89400934991649939e-01, -9.44575023073232600e-01, -8.65631202387831755e-01,
    -7.55404408355002999e-01, -6.17876244402643771e-01, -4.58016777657227370e-01,
    -2.81603550779258915e-01, -9.50125098376374544e-02, 9.50125098376374544e-02,
    2.81603550779258915e-01,  4.58016777657227370e-01,  6.17876244402643771e-01,
    7.55404408355002999e-01,  8.65631202387831755e-01,  9.44575023073232600e-01,
    9.89400934991649939e-01};
constexpr double kGlWeight[16] = {
    2.71524594117540374e-02, 6.22535239386477063e-02, 9.51585116824925914e-02,
    1.24628971255534030e-01, 1.49595988816576764e-01, 1.69156519395002619e-01,
    1.82603415044923612e-01, 1.89450610455068585e-01, 1.89450610455068585e-01,
    1.82603415044923612e-01, 1.69156519395002619e-01, 1.49595988816576764e-01,
    1.24628971255534030e-01, 9.51585116824925914e-02, 6.22535239386477063e-02,
    2.71524594117540374e-02};

// Composite quadrature of f over [a, b], with the given points forced onto
// panel boundaries so f only needs to be smooth between breakpoints.
template <typename F>
double integrate(double a, double b, std::vector<double> breaks, const F& f) {
    if (!(a < b)) return 0.0;
    breaks.push_back(a);
    breaks.push_back(b);
    std::sort(breaks.begin(), breaks.end());
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        const double lo = std::max(breaks[i], a), hi = std::min(breaks[i + 1], b);
        if (!(hi - lo > 0.0)) continue;
        const int panels = std::clamp(static_cast<int>(std::ceil((hi - lo) / 0.25)), 1, 96);
        const double h = (hi - lo) / panels;
        for (int p = 0; p < panels; ++p) {
            const double mid = lo + (p + 0.5) * h;
            double acc = 0.0;
            for (int j = 0; j < 16; ++j)
                acc += kGlWeight[j] * f(mid + 0.5 * h * kGlNode[j]);
            total += 0.5 * h * acc;
        }
    }
    return total;
}

double phi_interval(double lo, double hi) {
    if (!(hi > lo)) return 0.0;
    return normal_cdf(hi) - normal_cdf(lo);
}

// Probability of the rectangle under a full-rank Gaussian, by conditioning
// on the leading coordinate; the integrand is smooth.
double rect_prob_full(const Vector& mean, const Matrix& cov, const Vector& lo,
                      const Vector& hi) {
    const Index k = mean.size();
    if (k == 0) return 1.0;
    const double mu = mean(0);
    const double sd = std::sqrt(cov(0, 0));
    if (k == 1) return phi_interval((lo(0) - mu) / sd, (hi(0) - mu) / sd);

    const Vector cross = cov.col(0).tail(k - 1);
    const Vector slope = cross / cov(0, 0);
    Matrix condCov = cov.bottomRightCorner(k - 1, k - 1) - slope * cross.transpose();
    condCov = 0.5 * (condCov + condCov.transpose());
    const Vector subMean = mean.tail(k - 1);
    const Vector subLo = lo.tail(k - 1), subHi = hi.tail(k - 1);

    // standardized outer variable, truncated where the mass runs out
    const double a = std::max((lo(0) - mu) / sd, -8.5);
    const double b = std::min((hi(0) - mu) / sd, 8.5);
    return integrate(a, b, {}, [&](double t) {
        const Vector m = subMean + slope * (sd * t);
        return normal_pdf(t) * rect_prob_full(m, condCov, subLo, subHi);
    });
}

// Probability of {l <= A*y <= u} for y ~ N(0, I_s), s <= 2.  Used for
// rank-deficient blocks after reduction to their support.
double polytope_prob(const Matrix& a, const Vector& l, const Vector& u, double slack) {
    const Index m = a.rows(), s = a.cols();
    const double scale = a.size() > 0 ? a.cwiseAbs().maxCoeff() : 0.0;
    const double tiny = 1e-12 * std::max(1.0, scale);

    if (s == 0) {
        for (Index i = 0; i < m; ++i)
            if (l(i) > slack || u(i) < -slack) return 0.0;
        return 1.0;
    }

    if (s == 1) {
        double lo = -kInf, hi = kInf;
        for (Index i = 0; i < m; ++i) {
            const double c = a(i, 0);
            if (std::abs(c) <= tiny) {
                if (l(i) > slack || u(i) < -slack) return 0.0;
            } else if (c > 0.0) {
                lo = std::max(lo, l(i) / c);
                hi = std::min(hi, u(i) / c);
            } else {
                lo = std::max(lo, u(i) / c);
                hi = std::min(hi, l(i) / c);
            }
        }
        return phi_interval(lo, hi);
    }

    // s == 2: integrate over y1; rows with a second coefficient bound y2 by
    // affine functions of y1, so panel breakpoints go where those lines
    // cross (the inner interval's active constraint switches there).
    double t0 = -8.5, t1 = 8.5;
    std::vector<double> num, den; // endpoint lines (c - slope*t) as (c, a1)/a2
    std::vector<double> cs, ss;
    for (Index i = 0; i < m; ++i) {
        const double a1 = a(i, 0), a2 = a(i, 1);
        if (std::abs(a2) <= tiny) {
            if (std::abs(a1) <= tiny) {
                if (l(i) > slack || u(i) < -slack) return 0.0;
            } else if (a1 > 0.0) {
                t0 = std::max(t0, l(i) / a1);
                t1 = std::min(t1, u(i) / a1);
            } else {
                t0 = std::max(t0, u(i) / a1);
                t1 = std::min(t1, l(i) / a1);
            }
        } else {
            for (double bound : {l(i), u(i)}) {
                if (std::isfinite(bound)) {
                    cs.push_back(bound / a2);
                    ss.push_back(a1 / a2);
                }
            }
        }
    }
    std::vector<double> breaks;
    for (std::size_t i = 0; i < cs.size(); ++i)
        for (std::size_t j = i + 1; j < cs.size(); ++j) {
            const double dslope = ss[i] - ss[j];
            if (std::abs(dslope) > 1e-12) breaks.push_back((cs[i] - cs[j]) / dslope);
        }
    return integrate(t0, t1, std::move(breaks), [&](double t) {
        double lo = -kInf, hi = kInf;
        for (Index i = 0; i < m; ++i) {
            const double a2 = a(i, 1);
            if (std::abs(a2) <= tiny) continue;
            const double lw = l(i) - a(i, 0) * t, uw = u(i) - a(i, 0) * t;
            if (a2 > 0.0) {
                lo = std::max(lo, lw / a2);
                hi = std::min(hi, uw / a2);
            } else {
                lo = std::max(lo, uw / a2);
                hi = std::min(hi, lw / a2);
            }
        }
        return normal_pdf(t) * phi_interval(lo, hi);
    });
}

// connected components of the correlation graph of cov
std::vector<std::vector<Index>> correlation_components(const Matrix& cov) {
    const Index r = cov.rows();
    const double eps = 1e-12 * std::max(1.0, cov.size() > 0 ? cov.cwiseAbs().maxCoeff() : 0.0);
    std::vector<Index> group(static_cast<std::size_t>(r), -1);
    std::vector<std::vector<Index>> comps;
    for (Index i = 0; i < r; ++i) {
        if (group[static_cast<std::size_t>(i)] >= 0) continue;
        std::vector<Index> stack{i}, comp;
        group[static_cast<std::size_t>(i)] = static_cast<Index>(comps.size());
        while (!stack.empty()) {
            const Index v = stack.back();
            stack.pop_back();
            comp.push_back(v);
            for (Index w = 0; w < r; ++w)
                if (group[static_cast<std::size_t>(w)] < 0 && std::abs(cov(v, w)) > eps) {
                    group[static_cast<std::size_t>(w)] = static_cast<Index>(comps.size());
                    stack.push_back(w);
                }
        }
        std::sort(comp.begin(), comp.end());
        comps.push_back(std::move(comp));
    }
    return comps;
}

// probability that a Gaussian block (possibly rank-deficient) lands in its
// sub-rectangle
double component_prob(const Vector& mean, const Matrix& cov, const Vector& lo,
                      const Vector& hi, const ToleranceConfig& tol) {
    const Index k = mean.size();
    for (Index i = 0; i < k; ++i)
        if (!(lo(i) <= hi(i))) return 0.0;

    Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
    const double scale = std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
    std::vector<Index> kept;
    for (Index i = 0; i < k; ++i)
        if (eig.eigenvalues()(i) > kPsdSlack * scale) kept.push_back(i);
    const Index s = static_cast<Index>(kept.size());

    if (s == k) return rect_prob_full(mean, cov, lo, hi);

    // reduce to the support: x = mean + B*y with y standard normal
    Matrix b(k, s);
    for (Index j = 0; j < s; ++j)
        b.col(j) = eig.eigenvectors().col(kept[static_cast<std::size_t>(j)]) *
                   std::sqrt(eig.eigenvalues()(kept[static_cast<std::size_t>(j)]));
    Vector l = lo - mean, u = hi - mean;
    const double slack = tol.tau_eq * std::max(1.0, mean.cwiseAbs().maxCoeff());
    for (Index i = 0; i < k; ++i) {
        if (!std::isfinite(l(i))) l(i) = -kInf;
        if (!std::isfinite(u(i))) u(i) = kInf;
    }
    return polytope_prob(b, l, u, slack);
}

void validate_event(const GaussianSystem& sys, const CylinderEvent& ev,
                    const ToleranceConfig& tol) {
    check_finite(ev.c, "event matrix");
    if (ev.c.cols() != sys.dim())
        fail(errc::dimension_mismatch, "event matrix cols vs system dim");
    if (ev.region.dim != ev.c.rows())
        fail(errc::dimension_mismatch, "event region dim vs matrix rows");
    for (const Rectangle& rect : ev.region.parts) {
        if (rect.lo.size() != ev.region.dim || rect.hi.size() != ev.region.dim)
            fail(errc::dimension_mismatch, "rectangle bounds vs region dim");
        for (Index i = 0; i < ev.region.dim; ++i)
            if (std::isnan(rect.lo(i)) || std::isnan(rect.hi(i)))
                fail(errc::non_finite_input, "rectangle bound is NaN");
    }
    if (sys.chi.fibre.dim() > 0) {
        const Matrix leak = ev.c * sys.chi.fibre.basis();
        if (leak.norm() > tol.tau_eq * std::max(1.0, ev.c.norm()))
            fail(errc::not_parallel, "event is not a cylinder along the system fibre");
    }
    if (ev.region.parts.size() > 16)
        fail(errc::unsupported_region, "too many rectangles in the union");
}

// probability of one rectangle for the pushforward N(mean, cov)
double rectangle_prob(const Vector& mean, const Matrix& cov, const Rectangle& rect,
                      const std::vector<std::vector<Index>>& comps,
                      const ToleranceConfig& tol) {
    double p = 1.0;
    for (const std::vector<Index>& comp : comps) {
        const Index k = static_cast<Index>(comp.size());
        if (k > 3) fail(errc::unsupported_region, "correlated block larger than 3");
        Vector m(k), lo(k), hi(k);
        Matrix c(k, k);
        for (Index i = 0; i < k; ++i) {
            m(i) = mean(comp[static_cast<std::size_t>(i)]);
            lo(i) = rect.lo(comp[static_cast<std::size_t>(i)]);
            hi(i) = rect.hi(comp[static_cast<std::size_t>(i)]);
            for (Index j = 0; j < k; ++j)
                c(i, j) = cov(comp[static_cast<std::size_t>(i)], comp[static_cast<std::size_t>(j)]);
        }
        p *= component_prob(m, c, lo, hi, tol);
        if (p == 0.0) break;
    }
    return p;
}

} // namespace

Region rectangle_region(const Vector& lo, const Vector& hi) {
    if (lo.size() != hi.size())
        fail(errc::dimension_mismatch, "rectangle_region: bound sizes differ");
    return Region{lo.size(), {Rectangle{lo, hi}}};
}

Region interval_region(double lo, double hi) {
    return rectangle_region(Vector::Constant(1, lo), Vector::Constant(1, hi));
}

double cylinder_probability(const GaussianSystem& sys, const CylinderEvent& ev,
                            const ToleranceConfig& tol) {
    validate_event(sys, ev, tol);
    const Vector mean = ev.c * sys.chi.mean;
    Matrix cov = ev.c * sys.chi.cov * ev.c.transpose();
    cov = 0.5 * (cov + cov.transpose());
    const auto comps = correlation_components(cov);

    // inclusion-exclusion over the union's parts (intersections of axis
    // rectangles are axis rectangles)
    const std::size_t n = ev.region.parts.size();
    double total = 0.0;
    for (std::size_t mask = 1; mask < (std::size_t{1} << n); ++mask) {
        Rectangle cut{Vector::Constant(ev.region.dim, -kInf),
                      Vector::Constant(ev.region.dim, kInf)};
        int bits = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (mask & (std::size_t{1} << i)) {
                ++bits;
                cut.lo = cut.lo.cwiseMax(ev.region.parts[i].lo);
                cut.hi = cut.hi.cwiseMin(ev.region.parts[i].hi);
            }
        const double p = rectangle_prob(mean, cov, cut, comps, tol);
        total += (bits % 2 == 1) ? p : -p;
    }
    return std::clamp(total, 0.0, 1.0);
}

namespace {

std::uint64_t splitmix_step(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t mix_key(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t s = index + 0x632be59bd9b4e019ULL;
    return seed ^ splitmix_step(s);
}

double uniform01(std::uint64_t bits) {
    // (0, 1): 53 mantissa bits, offset by half a step so 0 never occurs
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

bool region_contains(const Region& region, const Vector& w) {
    for (const Rectangle& rect : region.parts) {
        bool inside = true;
        for (Index i = 0; i < w.size() && inside; ++i)
            inside = rect.lo(i) <= w(i) && w(i) <= rect.hi(i);
        if (inside) return true;
    }
    return false;
}

} // namespace

std::int64_t mc_count(const GaussianSystem& sys, const CylinderEvent& ev,
                      std::uint64_t seed, std::int64_t begin, std::int64_t end,
                      const ToleranceConfig& tol) {
    validate_event(sys, ev, tol);
    const Index r = ev.c.rows();
    const Vector mean = ev.c * sys.chi.mean;
    Matrix cov = ev.c * sys.chi.cov * ev.c.transpose();
    cov = 0.5 * (cov + cov.transpose());

    Matrix b(r, 0);
    if (r > 0) {
        Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
        const double scale = std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
        std::vector<Index> kept;
        for (Index i = 0; i < r; ++i)
            if (eig.eigenvalues()(i) > kPsdSlack * scale) kept.push_back(i);
        b.resize(r, static_cast<Index>(kept.size()));
        for (std::size_t j = 0; j < kept.size(); ++j)
            b.col(static_cast<Index>(j)) =
                eig.eigenvectors().col(kept[j]) * std::sqrt(eig.eigenvalues()(kept[j]));
    }
    const Index s = b.cols();

    std::int64_t hits = 0;
    Vector z(s);
    for (std::int64_t i = begin; i < end; ++i) {
        // every draw depends only on (seed, i): sharding the index range in
        // any way reproduces the same samples
        std::uint64_t state = mix_key(seed, static_cast<std::uint64_t>(i));
        for (Index j = 0; j < s; j += 2) {
            const double u1 = uniform01(splitmix_step(state));
            const double u2 = uniform01(splitmix_step(state));
            const double rad = std::sqrt(-2.0 * std::log(u1));
            z(j) = rad * std::cos(6.283185307179586477 * u2);
            if (j + 1 < s) z(j + 1) = rad * std::sin(6.283185307179586477 * u2);
        }
        if (region_contains(ev.region, mean + b * z)) ++hits;
    }
    return hits;
}

McResult mc_estimate(const GaussianSystem& sys, const CylinderEvent& ev,
                     std::int64_t n_samples, std::uint64_t seed,
                     const ToleranceConfig& tol) {
    if (n_samples <= 0) fail(errc::bad_index, "mc_estimate: need a positive sample count");
    const double hits = static_cast<double>(mc_count(sys, ev, seed, 0, n_samples, tol));
    const double n = static_cast<double>(n_samples);
    const double p = hits / n;
    return McResult{p, std::sqrt(p * (1.0 - p) / n)};
}

GaussianSystem weaken(const GaussianSystem& sys, const Placement& placement,
                      const ToleranceConfig& tol) {
    const Index n = sys.dim(), total = placement.total_dim;
    if (static_cast<Index>(placement.coords.size()) != n)
        fail(errc::bad_placement, "weaken: placement must cover every coordinate");
    std::vector<bool> used(static_cast<std::size_t>(std::max<Index>(total, 0)), false);
    for (Index c : placement.coords) {
        if (c < 0 || c >= total) fail(errc::bad_placement, "weaken: coordinate out of range");
        if (used[static_cast<std::size_t>(c)])
            fail(errc::bad_placement, "weaken: placement is not injective");
        used[static_cast<std::size_t>(c)] = true;
    }
    Matrix e = Matrix::Zero(total, n);
    for (Index j = 0; j < n; ++j) e(placement.coords[static_cast<std::size_t>(j)], j) = 1.0;

    // unplaced axes are completely unspecified and join the fibre
    const Index extra = total - n;
    Matrix basis = Matrix::Zero(total, sys.chi.fibre.dim() + extra);
    basis.leftCols(sys.chi.fibre.dim()) = e * sys.chi.fibre.basis();
    Index col = sys.chi.fibre.dim();
    for (Index k = 0; k < total; ++k)
        if (!used[static_cast<std::size_t>(k)]) basis(k, col++) = 1.0;
    return GaussianSystem{make_extended(e * sys.chi.mean, e * sys.chi.cov * e.transpose(),
                                        Subspace::from_orthonormal(basis, tol), tol)};
}

bool is_complementary(const GaussianSystem& s1, const GaussianSystem& s2,
                      const ToleranceConfig& tol) {
    if (s1.dim() != s2.dim())
        fail(errc::dimension_mismatch, "is_complementary: dims differ");
    return subspace_sum(s1.chi.fibre, s2.chi.fibre, tol).dim() == s1.dim();
}

GaussianSystem interconnect(const GaussianSystem& s1, const GaussianSystem& s2,
                            const ToleranceConfig& tol) {
    if (!is_complementary(s1, s2, tol))
        fail(errc::not_complementary, "interconnect: fibres do not sum to everything");
    const KernelRep r1 = to_kernel_rep(s1.chi, tol), r2 = to_kernel_rep(s2.chi, tol);
    Matrix q(r1.q.rows() + r2.q.rows(), s1.dim());
    q << r1.q, r2.q;
    GaussianSystem out{from_kernel_rep(KernelRep{q, tensor(r1.psi, r2.psi)}, tol)};
    if (!subspace_equal(out.chi.fibre, subspace_intersect(s1.chi.fibre, s2.chi.fibre, tol),
                        tol))
        fail(errc::internal_inconsistency, "interconnect: fibre is not the intersection");
    return out;
}

GaussianSystem eliminate(const GaussianSystem& sys, const std::vector<Index>& keep,
                         const ToleranceConfig& tol) {
    const Index n = sys.dim();
    Matrix sel = Matrix::Zero(static_cast<Index>(keep.size()), n);
    for (std::size_t i = 0; i < keep.size(); ++i) {
        const Index c = keep[i];
        if (c < 0 || c >= n) fail(errc::bad_index, "eliminate: coordinate out of range");
        if (std::count(keep.begin(), keep.end(), c) > 1)
            fail(errc::bad_index, "eliminate: repeated coordinate");
        sel(static_cast<Index>(i), c) = 1.0;
    }
    return GaussianSystem{pushforward(sel, sys.chi, tol)};
}

GaussExMorphism compose_via_interconnection(const GaussExMorphism& f,
                                            const GaussExMorphism& g,
                                            const ToleranceConfig& tol) {
    if (f.cod() != g.dom())
        fail(errc::dimension_mismatch, "compose_via_interconnection: middle dims differ");
    const Index x = f.dom(), y = f.cod(), z = g.cod();
    const Index total = x + y + z;

    Placement left{total, {}}, right{total, {}};
    for (Index i = 0; i < x + y; ++i) left.coords.push_back(i);
    for (Index i = x; i < total; ++i) right.coords.push_back(i);
    const GaussianSystem joined =
        interconnect(weaken(GaussianSystem{name_of(f, tol).noise}, left, tol),
                     weaken(GaussianSystem{name_of(g, tol).noise}, right, tol), tol);

    // the interconnection must equal the name of x |-> (f(x), g(f(x)))
    const GaussExMorphism fanned =
        compose(tensor(gx_identity(y), g, tol), compose(gx_copy(y), f, tol), tol);
    if (!extended_equal(joined.chi, name_of(fanned, tol).noise, tol))
        fail(errc::internal_inconsistency,
             "compose_via_interconnection: interconnection disagrees with the joint name");

    std::vector<Index> keep;
    for (Index i = 0; i < x; ++i) keep.push_back(i);
    for (Index i = x + y; i < total; ++i) keep.push_back(i);
    const GaussianSystem reduced = eliminate(joined, keep, tol);
    return conditional(gx_state(reduced.chi), x, tol);
}

} // namespace gaussex
