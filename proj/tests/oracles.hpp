// Test-only oracles and generators, independent of the library paths they
// check: finite differences run through evaluate() of the plain formula,
// determinants and characteristic roots come from Gaussian elimination and
// bisection, not from the Jacobi solver.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "errsurf/expr.hpp"
#include "errsurf/linalg.hpp"
#include "errsurf/measure.hpp"
#include "errsurf/quadric.hpp"

namespace oracles {

inline bool close_rel(double a, double b, double tol) {
    return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

// --- finite differences ------------------------------------------------------

inline double fd_step(double x) {
    return std::cbrt(std::numeric_limits<double>::epsilon()) * std::max(1.0, std::abs(x));
}

/// Central difference of a scalar function of one coordinate.
inline double central_difference(const std::function<double(double)>& f, double x) {
    const double h = fd_step(x);
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

/// d(evaluate e)/d(var) at the given bindings.
inline double fd_partial(const errsurf::Expr& e, const errsurf::Bindings& at,
                         const std::string& var) {
    return central_difference(
        [&](double x) {
            errsurf::Bindings b = at;
            b[var] = x;
            return errsurf::evaluate(e, b);
        },
        at.at(var));
}

/// Central difference validated against its half-step refinement. Points
/// where the two disagree are treated as singular for the oracle and yield
/// no value; otherwise the Richardson combination of the two is returned.
inline std::optional<double> fd_partial_checked(const errsurf::Expr& e,
                                                const errsurf::Bindings& at,
                                                const std::string& var) {
    auto f = [&](double x) {
        errsurf::Bindings b = at;
        b[var] = x;
        return errsurf::evaluate(e, b);
    };
    const double x = at.at(var);
    const double h = fd_step(x);
    const double d1 = (f(x + h) - f(x - h)) / (2.0 * h);
    const double d2 = (f(x + h / 2.0) - f(x - h / 2.0)) / h;
    if (!close_rel(d1, d2, 1e-4)) return std::nullopt;
    return (4.0 * d2 - d1) / 3.0;
}

// --- determinants and characteristic roots -----------------------------------

/// Determinant by Gaussian elimination with partial pivoting.
inline double det_dense(errsurf::Matrix a) {
    const int n = a.rows();
    double det = 1.0;
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a(r, col)) > std::abs(a(pivot, col))) pivot = r;
        if (a(pivot, col) == 0.0) return 0.0;
        if (pivot != col) {
            for (int k = 0; k < n; ++k) std::swap(a(pivot, k), a(col, k));
            det = -det;
        }
        det *= a(col, col);
        for (int r = col + 1; r < n; ++r) {
            const double factor = a(r, col) / a(col, col);
            for (int k = col; k < n; ++k) a(r, k) -= factor * a(col, k);
        }
    }
    return det;
}

inline double char_poly(const errsurf::SymMatrix& m, double lambda) {
    errsurf::Matrix a = m.dense();
    for (int i = 0; i < a.rows(); ++i) a(i, i) -= lambda;
    return det_dense(a);
}

/// All real roots of det(M - lambda I) located by sign changes on a fine grid
/// and refined by bisection. Returns them descending; call only on matrices
/// whose roots are simple and separated beyond the grid step.
inline std::vector<double> char_roots_bisect(const errsurf::SymMatrix& m) {
    const int n = m.order();
    // Gershgorin bound
    double radius = 0.0;
    for (int i = 0; i < n; ++i) {
        double row = 0.0;
        for (int j = 0; j < n; ++j) row += std::abs(m(i, j));
        radius = std::max(radius, row);
    }
    const double lo = -radius - 1.0, hi = radius + 1.0;
    const int grid = 200000;
    std::vector<double> roots;
    double prev_x = lo, prev_f = char_poly(m, lo);
    for (int k = 1; k <= grid; ++k) {
        const double x = lo + (hi - lo) * k / grid;
        const double f = char_poly(m, x);
        if ((prev_f < 0.0 && f > 0.0) || (prev_f > 0.0 && f < 0.0) || f == 0.0) {
            double a = prev_x, b = x, fa = prev_f;
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (a + b);
                const double fm = char_poly(m, mid);
                if ((fa < 0.0) == (fm < 0.0)) {
                    a = mid;
                    fa = fm;
                } else {
                    b = mid;
                }
            }
            roots.push_back(0.5 * (a + b));
        }
        prev_x = x;
        prev_f = f;
    }
    std::sort(roots.begin(), roots.end(), std::greater<>());
    return roots;
}

// --- random structures --------------------------------------------------------

inline double uniform(std::mt19937& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline bool chance(std::mt19937& rng, double p) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
}

/// Random orthogonal matrix: Gram-Schmidt on a Gaussian matrix.
inline errsurf::Matrix random_orthogonal(std::mt19937& rng, int n) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    while (true) {
        errsurf::Matrix q(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) q(i, j) = gauss(rng);
        bool ok = true;
        for (int col = 0; col < n && ok; ++col) {
            for (int prev = 0; prev < col; ++prev) {
                double dot = 0.0;
                for (int i = 0; i < n; ++i) dot += q(i, col) * q(i, prev);
                for (int i = 0; i < n; ++i) q(i, col) -= dot * q(i, prev);
            }
            double norm = 0.0;
            for (int i = 0; i < n; ++i) norm += q(i, col) * q(i, col);
            norm = std::sqrt(norm);
            if (norm < 1e-6) {
                ok = false;
                break;
            }
            for (int i = 0; i < n; ++i) q(i, col) /= norm;
        }
        if (ok) return q;
    }
}

inline errsurf::InfluenceSet random_influence(std::mt19937& rng, int n,
                                              errsurf::Mode mode = errsurf::Mode::relative) {
    errsurf::InfluenceSet inf(n, mode);
    for (int i = 0; i < n; ++i)
        if (chance(rng, 0.7)) inf.set_first(i, uniform(rng, 0.0, 2.0));
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j)
            if (chance(rng, 0.5)) inf.set_second(i, j, uniform(rng, 0.0, 2.0));
    return inf;
}

/// Smallest-to-largest ratio of the nonzero spectrum of the quadratic block;
/// used to keep randomized canonical-form models well conditioned.
inline bool well_conditioned_block(const errsurf::QuadricModel& q, double ratio = 1e-4) {
    const auto eig = errsurf::eigen_symmetric(q.a.leading_block(q.n));
    double max_abs = 0.0, min_nonzero = std::numeric_limits<double>::infinity();
    for (double lam : eig.values) max_abs = std::max(max_abs, std::abs(lam));
    if (max_abs == 0.0) return false;
    const double cut = errsurf::kDefaultRankTolerance * std::max(1.0, max_abs);
    for (double lam : eig.values)
        if (std::abs(lam) > cut) min_nonzero = std::min(min_nonzero, std::abs(lam));
    return min_nonzero >= ratio * max_abs;
}

inline errsurf::InfluenceSet random_influence_of_kind(std::mt19937& rng,
                                                      errsurf::SurfaceClass want, int& n_out) {
    while (true) {
        int n = 0;
        errsurf::InfluenceSet inf;
        switch (want) {
            case errsurf::SurfaceClass::parabola: {
                n = 1;
                inf = errsurf::InfluenceSet(1, errsurf::Mode::relative);
                inf.set_second(0, 0, uniform(rng, 0.5, 3.0));
                if (chance(rng, 0.6)) inf.set_first(0, uniform(rng, 0.0, 2.0));
                break;
            }
            case errsurf::SurfaceClass::elliptic_paraboloid: {
                n = 2 + static_cast<int>(uniform(rng, 0.0, 4.0));
                inf = errsurf::InfluenceSet(n, errsurf::Mode::relative);
                for (int i = 0; i < n; ++i) {
                    inf.set_second(i, i, uniform(rng, 1.0, 3.0));
                    if (chance(rng, 0.5)) inf.set_first(i, uniform(rng, 0.0, 2.0));
                }
                for (int i = 0; i < n; ++i)
                    for (int j = i + 1; j < n; ++j)
                        if (chance(rng, 0.5)) inf.set_second(i, j, uniform(rng, 0.0, 0.4 / n));
                break;
            }
            case errsurf::SurfaceClass::hyperbolic_paraboloid: {
                n = 2 + static_cast<int>(uniform(rng, 0.0, 4.0));
                inf = errsurf::InfluenceSet(n, errsurf::Mode::relative);
                for (int i = 0; i < n; ++i)
                    for (int j = i + 1; j < n; ++j)
                        if (chance(rng, 0.8)) inf.set_second(i, j, uniform(rng, 1.0, 3.0));
                for (int i = 0; i < n; ++i) {
                    if (chance(rng, 0.4)) inf.set_second(i, i, uniform(rng, 0.0, 0.5));
                    if (chance(rng, 0.5)) inf.set_first(i, uniform(rng, 0.0, 2.0));
                }
                break;
            }
            case errsurf::SurfaceClass::parabolic_cylinder: {
                n = 2 + static_cast<int>(uniform(rng, 0.0, 5.0));
                const int active = 1 + static_cast<int>(uniform(rng, 0.0, 1.0) * (n - 1));
                inf = errsurf::InfluenceSet(n, errsurf::Mode::relative);
                if (active >= 2 && chance(rng, 0.5)) {
                    // cross-term dominant block: mixed-sign nonzero spectrum
                    for (int i = 0; i < active; ++i) {
                        for (int j = i + 1; j < active; ++j)
                            if (chance(rng, 0.8)) inf.set_second(i, j, uniform(rng, 1.0, 3.0));
                        if (chance(rng, 0.4)) inf.set_second(i, i, uniform(rng, 0.0, 0.5));
                    }
                } else {
                    for (int i = 0; i < active; ++i) {
                        inf.set_second(i, i, uniform(rng, 1.0, 3.0));
                        for (int j = i + 1; j < active; ++j)
                            if (chance(rng, 0.5))
                                inf.set_second(i, j, uniform(rng, 0.0, 0.4 / n));
                    }
                }
                for (int i = 0; i < n; ++i)
                    if (chance(rng, 0.5)) inf.set_first(i, uniform(rng, 0.0, 2.0));
                break;
            }
            default: throw std::logic_error("unsupported kind for the generator");
        }
        const errsurf::QuadricModel q = errsurf::build_quadric(inf);
        if (!well_conditioned_block(q)) continue;
        if (errsurf::classify(q).cls != want) continue;
        n_out = n;
        return inf;
    }
}

/// Random point on the surface: base coordinates in inaccuracy space plus
/// the exact height.
inline std::vector<double> sample_surface_point(std::mt19937& rng,
                                                const errsurf::InfluenceSet& inf) {
    errsurf::InaccuracyPoint p;
    for (int i = 0; i < inf.dimension(); ++i) p.magnitudes.push_back(uniform(rng, 0.0, 1.0));
    std::vector<double> y = p.magnitudes;
    y.push_back(errsurf::delta_total(inf, p));
    return y;
}

/// Relative residual of the model equation at a point.
inline double surface_residual_rel(const errsurf::QuadricModel& q,
                                   std::span<const double> y) {
    const int order = q.n + 1;
    double scale = 1.0;
    for (int i = 0; i < order; ++i)
        for (int j = 0; j < order; ++j)
            scale += std::abs(q.a(i, j) * y[static_cast<std::size_t>(i)] *
                              y[static_cast<std::size_t>(j)]);
    for (int i = 0; i < order; ++i)
        scale += 2.0 * std::abs(q.b[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(i)]);
    return std::abs(q.equation(y)) / scale;
}

// --- random expressions --------------------------------------------------------

inline errsurf::Expr random_expr(std::mt19937& rng, const std::vector<std::string>& vars,
                                 int depth) {
    using errsurf::Expr;
    if (depth <= 0 || chance(rng, 0.25)) {
        if (chance(rng, 0.6)) {
            const std::size_t k =
                static_cast<std::size_t>(uniform(rng, 0.0, 1.0) * vars.size()) % vars.size();
            return Expr::symbol(vars[k]);
        }
        return Expr::number(uniform(rng, 0.3, 2.5));
    }
    const int pick = static_cast<int>(uniform(rng, 0.0, 11.0));
    switch (pick) {
        case 0: return Expr::binary(errsurf::BinaryOp::add, random_expr(rng, vars, depth - 1),
                                    random_expr(rng, vars, depth - 1));
        case 1: return Expr::binary(errsurf::BinaryOp::sub, random_expr(rng, vars, depth - 1),
                                    random_expr(rng, vars, depth - 1));
        case 2: return Expr::binary(errsurf::BinaryOp::mul, random_expr(rng, vars, depth - 1),
                                    random_expr(rng, vars, depth - 1));
        case 3: return Expr::binary(errsurf::BinaryOp::div, random_expr(rng, vars, depth - 1),
                                    random_expr(rng, vars, depth - 1));
        case 4: {
            static const double exponents[] = {2.0, 3.0, -2.0, 0.5};
            const int e = static_cast<int>(uniform(rng, 0.0, 4.0));
            return Expr::binary(errsurf::BinaryOp::pow, random_expr(rng, vars, depth - 1),
                                Expr::number(exponents[e % 4]));
        }
        case 5: return Expr::negate(random_expr(rng, vars, depth - 1));
        case 6: return Expr::call(errsurf::UnaryFn::sin, random_expr(rng, vars, depth - 1));
        case 7: return Expr::call(errsurf::UnaryFn::cos, random_expr(rng, vars, depth - 1));
        case 8: return Expr::call(errsurf::UnaryFn::exp, random_expr(rng, vars, depth - 1));
        case 9: return Expr::call(errsurf::UnaryFn::tan, random_expr(rng, vars, depth - 1));
        default:
            return chance(rng, 0.5)
                       ? Expr::call(errsurf::UnaryFn::ln, random_expr(rng, vars, depth - 1))
                       : Expr::call(errsurf::UnaryFn::sqrt, random_expr(rng, vars, depth - 1));
    }
}

/// Bindings where the expression and its symbolic partials evaluate to
/// moderate finite values; empty optional when no such point is found.
inline std::optional<errsurf::Bindings> usable_point(
    std::mt19937& rng, const errsurf::Expr& e, const std::vector<errsurf::Expr>& partials,
    const std::vector<std::string>& vars, double magnitude_cap = 1e3, int tries = 80) {
    for (int attempt = 0; attempt < tries; ++attempt) {
        errsurf::Bindings b;
        for (const auto& v : vars) b[v] = uniform(rng, 0.25, 2.5);
        try {
            if (std::abs(errsurf::evaluate(e, b)) > magnitude_cap) continue;
            bool ok = true;
            for (const auto& d : partials)
                if (std::abs(errsurf::evaluate(d, b)) > magnitude_cap) {
                    ok = false;
                    break;
                }
            if (!ok) continue;
            // the finite-difference stencil must stay inside the domain too
            for (const auto& v : vars) {
                const double x = b.at(v);
                const double h = fd_step(x);
                errsurf::Bindings shifted = b;
                shifted[v] = x + h;
                (void)errsurf::evaluate(e, shifted);
                shifted[v] = x - h;
                (void)errsurf::evaluate(e, shifted);
            }
            return b;
        } catch (const std::exception&) {
            continue;
        }
    }
    return std::nullopt;
}

}  // namespace oracles
