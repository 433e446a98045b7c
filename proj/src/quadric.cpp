#include "errsurf/quadric.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "errsurf/error.hpp"

namespace errsurf {

double QuadricModel::equation(std::span<const double> y) const {
    const int order = n + 1;
    double quad = 0.0;
    for (int i = 0; i < order; ++i) {
        quad += a(i, i) * y[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < order; ++j)
            quad += 2.0 * a(i, j) * y[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(j)];
    }
    double lin = 0.0;
    for (int i = 0; i < order; ++i) lin += b[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(i)];
    return quad + 2.0 * lin;
}

QuadricModel build_quadric(const InfluenceSet& inf, double last_linear) {
    if (!(last_linear < 0.0))
        throw SchemaError("last linear coefficient of the quadric must be negative");
    const int n = inf.dimension();
    for (int i = 0; i < n; ++i) {
        if (inf.first(i) < 0.0) throw SchemaError("negative first-order influence coefficient");
        for (int j = i; j < n; ++j)
            if (inf.second(i, j) < 0.0)
                throw SchemaError("negative second-order influence coefficient");
    }

    QuadricModel q;
    q.n = n;
    q.mode = inf.mode();
    q.a = SymMatrix(n + 1);
    q.b.assign(static_cast<std::size_t>(n) + 1, 0.0);
    for (int i = 0; i < n; ++i) {
        q.a.set(i, i, 0.5 * inf.second(i, i));
        for (int j = i + 1; j < n; ++j) q.a.set(i, j, 0.25 * inf.second(i, j));
        q.b[static_cast<std::size_t>(i)] = 0.5 * inf.first(i);
    }
    q.b[static_cast<std::size_t>(n)] = last_linear;
    return q;
}

namespace {

double off_diagonal_norm(const Matrix& a) {
    double sum = 0.0;
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j)
            if (i != j) sum += a(i, j) * a(i, j);
    return std::sqrt(sum);
}

double frobenius_norm(const Matrix& a) {
    double sum = 0.0;
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) sum += a(i, j) * a(i, j);
    return std::sqrt(sum);
}

/// Flip the column sign so its first component of nontrivial magnitude is
/// positive. Columns are unit vectors, so 1e-9 cannot skip a real leading
/// component.
void normalize_column_sign(Matrix& v, int col) {
    for (int i = 0; i < v.rows(); ++i) {
        const double x = v(i, col);
        if (std::abs(x) > 1e-9) {
            if (x < 0.0)
                for (int k = 0; k < v.rows(); ++k) v(k, col) = -v(k, col);
            return;
        }
    }
}

}  // namespace

EigenDecomposition eigen_symmetric(const SymMatrix& m, double tol) {
    const int n = m.order();
    Matrix a = m.dense();
    Matrix v = Matrix::identity(n);

    const double threshold = 1e-12 * std::max(1.0, frobenius_norm(a));
    constexpr int kMaxSweeps = 100;

    bool converged = off_diagonal_norm(a) <= threshold;
    for (int sweep = 0; sweep < kMaxSweeps && !converged; ++sweep) {
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                // A <- G^T A G with the plane rotation G in coordinates (p, q)
                for (int k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
        converged = off_diagonal_norm(a) <= threshold;
    }
    if (!converged)
        throw NumericalError("Jacobi eigendecomposition failed to converge within 100 sweeps");

    for (int j = 0; j < n; ++j) normalize_column_sign(v, j);

    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int x, int y) {
        if (a(x, x) != a(y, y)) return a(x, x) > a(y, y);
        // equal eigenvalues: order by eigenvector so ties stay deterministic
        for (int k = 0; k < n; ++k)
            if (v(k, x) != v(k, y)) return v(k, x) > v(k, y);
        return false;
    });

    EigenDecomposition out;
    out.values.resize(static_cast<std::size_t>(n));
    out.basis = Matrix(n, n);
    for (int j = 0; j < n; ++j) {
        out.values[static_cast<std::size_t>(j)] = a(order[static_cast<std::size_t>(j)],
                                                    order[static_cast<std::size_t>(j)]);
        for (int i = 0; i < n; ++i) out.basis(i, j) = v(i, order[static_cast<std::size_t>(j)]);
    }

    double max_abs = 0.0;
    for (double lam : out.values) max_abs = std::max(max_abs, std::abs(lam));
    const double zero_cut = tol * std::max(1.0, max_abs);
    out.rank = static_cast<int>(
        std::count_if(out.values.begin(), out.values.end(),
                      [&](double lam) { return std::abs(lam) > zero_cut; }));
    return out;
}

std::string to_string(const SurfaceKind& kind) {
    char buf[80];
    switch (kind.cls) {
        case SurfaceClass::hyperplane:
            std::snprintf(buf, sizeof buf, "hyperplane with %d nonzero linear coefficient%s",
                          kind.detail, kind.detail == 1 ? "" : "s");
            return buf;
        case SurfaceClass::line: return "line";
        case SurfaceClass::parabola: return "parabola";
        case SurfaceClass::elliptic_paraboloid: return "elliptic paraboloid";
        case SurfaceClass::hyperbolic_paraboloid:
            std::snprintf(buf, sizeof buf, "hyperbolic paraboloid of type %d", kind.detail);
            return buf;
        case SurfaceClass::parabolic_cylinder:
            std::snprintf(buf, sizeof buf, "parabolic cylinder of type %d", kind.detail);
            return buf;
    }
    return "?";
}

SurfaceKind classify(const QuadricModel& q, double tol) {
    const EigenDecomposition eig = eigen_symmetric(q.a.leading_block(q.n), tol);
    const int r = eig.rank;

    if (r == 0) {
        if (q.n == 1) return {SurfaceClass::line, 0};
        double max_b = 0.0;
        for (int i = 0; i < q.n; ++i)
            max_b = std::max(max_b, std::abs(q.b[static_cast<std::size_t>(i)]));
        const double cut = tol * std::max(1.0, max_b);
        int nonzero = 0;
        for (int i = 0; i < q.n; ++i)
            if (std::abs(q.b[static_cast<std::size_t>(i)]) > cut) ++nonzero;
        return {SurfaceClass::hyperplane, nonzero};
    }

    if (q.n == 1) return {SurfaceClass::parabola, 0};
    if (r < q.n) return {SurfaceClass::parabolic_cylinder, r};

    const int positives = static_cast<int>(
        std::count_if(eig.values.begin(), eig.values.end(), [](double lam) { return lam > 0.0; }));
    if (positives == q.n || positives == 0) return {SurfaceClass::elliptic_paraboloid, 0};
    return {SurfaceClass::hyperbolic_paraboloid, positives};
}

namespace {

/// Symmetric orthogonal reflector H with H u = sigma e1 for the unit vector
/// u; sigma follows the sign of u's largest-magnitude component. First row
/// of H is then sigma * u.
Matrix householder_to_first_axis(const std::vector<double>& unit, double sigma) {
    const int len = static_cast<int>(unit.size());
    std::vector<double> v = unit;
    v[0] -= sigma;
    double vv = 0.0;
    for (double x : v) vv += x * x;
    Matrix h = Matrix::identity(len);
    if (vv == 0.0) return h;
    for (int i = 0; i < len; ++i)
        for (int j = 0; j < len; ++j)
            h(i, j) -= 2.0 * v[static_cast<std::size_t>(i)] * v[static_cast<std::size_t>(j)] / vv;
    return h;
}

std::string canonical_equation_text(const std::vector<int>& signs, int axis) {
    std::string eq;
    for (std::size_t k = 0; k < signs.size(); ++k) {
        if (k == 0)
            eq += signs[k] > 0 ? "" : "-";
        else
            eq += signs[k] > 0 ? " + " : " - ";
        eq += "z" + std::to_string(k + 1) + "^2/p" + std::to_string(k + 1);
    }
    eq += " = 2*z" + std::to_string(axis + 1);
    return eq;
}

}  // namespace

std::vector<double> CanonicalForm::to_canonical(std::span<const double> y) const {
    std::vector<double> z = mat_vec(rotation, y);
    for (std::size_t i = 0; i < z.size(); ++i) z[i] += translation[i];
    return z;
}

std::vector<double> CanonicalForm::from_canonical(std::span<const double> z) const {
    std::vector<double> shifted(z.begin(), z.end());
    for (std::size_t i = 0; i < shifted.size(); ++i) shifted[i] -= translation[i];
    return mat_vec(rotation.transposed(), shifted);
}

double CanonicalForm::canonical_residual(std::span<const double> z) const {
    double lhs = 0.0;
    for (int k = 0; k < rank; ++k)
        lhs += signs[static_cast<std::size_t>(k)] * z[static_cast<std::size_t>(k)] *
               z[static_cast<std::size_t>(k)] / parameters[static_cast<std::size_t>(k)];
    return lhs - 2.0 * z[static_cast<std::size_t>(linear_axis)];
}

CanonicalForm canonicalize(const QuadricModel& q, double tol) {
    const int n = q.n;
    const int order = n + 1;
    const EigenDecomposition eig = eigen_symmetric(q.a.leading_block(n), tol);
    const int r = eig.rank;
    if (r == 0)
        throw NumericalError("cannot canonicalize a surface with zero quadratic part");

    double max_abs = 0.0;
    for (double lam : eig.values) max_abs = std::max(max_abs, std::abs(lam));
    const double zero_cut = tol * std::max(1.0, max_abs);

    // ranked axes first (values are already descending, keep that order),
    // kernel axes after
    std::vector<int> axis_order;
    axis_order.reserve(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k)
        if (std::abs(eig.values[static_cast<std::size_t>(k)]) > zero_cut) axis_order.push_back(k);
    for (int k = 0; k < n; ++k)
        if (std::abs(eig.values[static_cast<std::size_t>(k)]) <= zero_cut) axis_order.push_back(k);

    std::vector<double> lambda(static_cast<std::size_t>(r));
    for (int k = 0; k < r; ++k)
        lambda[static_cast<std::size_t>(k)] =
            eig.values[static_cast<std::size_t>(axis_order[static_cast<std::size_t>(k)])];

    // block rotation: the kernel direction e_{n+1} stays put, which pins the
    // rotated linear coefficient on the last axis to b_{n+1} != 0
    Matrix u(order, order);
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            u(i, k) = eig.basis(i, axis_order[static_cast<std::size_t>(k)]);
    u(n, n) = 1.0;

    const std::vector<double> c = mat_vec(u.transposed(), q.b);

    std::vector<double> translation(static_cast<std::size_t>(order), 0.0);
    double q_const = 0.0;
    for (int k = 0; k < r; ++k) {
        translation[static_cast<std::size_t>(k)] =
            c[static_cast<std::size_t>(k)] / lambda[static_cast<std::size_t>(k)];
        q_const -= c[static_cast<std::size_t>(k)] * c[static_cast<std::size_t>(k)] /
                   lambda[static_cast<std::size_t>(k)];
    }

    CanonicalForm form;
    form.n = n;
    form.rank = r;
    form.kind = classify(q, tol);
    form.rotated_linear = c;
    form.residual_constant = q_const;

    double linear_coeff = 0.0;
    if (r == n) {
        form.linear_axis = n;
        linear_coeff = c[static_cast<std::size_t>(n)];
        translation[static_cast<std::size_t>(n)] = q_const / (2.0 * linear_coeff);
        form.rotation = u.transposed();
    } else {
        form.linear_axis = r;
        const int tail_len = order - r;
        std::vector<double> tail(c.begin() + r, c.end());
        double norm = 0.0;
        for (double x : tail) norm += x * x;
        norm = std::sqrt(norm);  // >= |b_{n+1}| > 0
        for (double& x : tail) x /= norm;

        int imax = 0;
        for (int k = 1; k < tail_len; ++k)
            if (std::abs(tail[static_cast<std::size_t>(k)]) >
                std::abs(tail[static_cast<std::size_t>(imax)]))
                imax = k;
        const double sigma = tail[static_cast<std::size_t>(imax)] >= 0.0 ? 1.0 : -1.0;

        const Matrix h = householder_to_first_axis(tail, sigma);
        Matrix b_rot = Matrix::identity(order);
        for (int i = 0; i < tail_len; ++i)
            for (int j = 0; j < tail_len; ++j) b_rot(r + i, r + j) = h(i, j);
        form.rotation = b_rot * u.transposed();

        linear_coeff = sigma * norm;
        translation[static_cast<std::size_t>(r)] = q_const / (2.0 * linear_coeff);
    }
    form.translation = translation;

    form.parameters.resize(static_cast<std::size_t>(r));
    form.signs.resize(static_cast<std::size_t>(r));
    for (int k = 0; k < r; ++k) {
        const double gamma = lambda[static_cast<std::size_t>(k)] / (-linear_coeff);
        form.signs[static_cast<std::size_t>(k)] = gamma > 0.0 ? 1 : -1;
        form.parameters[static_cast<std::size_t>(k)] = 1.0 / std::abs(gamma);
    }
    form.equation = canonical_equation_text(form.signs, form.linear_axis);
    return form;
}

const char* to_string(SignatureClass c) {
    switch (c) {
        case SignatureClass::elliptic: return "elliptic";
        case SignatureClass::hyperbolic: return "hyperbolic";
        case SignatureClass::parabolic: return "parabolic";
    }
    return "?";
}

SignatureClass signature_class(const SymMatrix& m, double tol) {
    const EigenDecomposition eig = eigen_symmetric(m, tol);
    if (eig.rank < m.order()) return SignatureClass::parabolic;
    const int positives = static_cast<int>(
        std::count_if(eig.values.begin(), eig.values.end(), [](double lam) { return lam > 0.0; }));
    if (positives == 0 || positives == m.order()) return SignatureClass::elliptic;
    return SignatureClass::hyperbolic;
}

}  // namespace errsurf
