#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "errsurf/linalg.hpp"
#include "errsurf/measure.hpp"

namespace errsurf {

/// Eigenvalues with |lambda| at or below tol * max(1, max|lambda|) count as
/// zero when ranking. Surfaced as a CLI flag because measured coefficients
/// are noisy.
inline constexpr double kDefaultRankTolerance = 1e-9;

/// Quadric model of the inaccuracy hypersurface: y^T A y + 2 b^T y = 0 in
/// the n+1 coordinates (inaccuracy magnitudes, total inaccuracy). The last
/// row and column of A are zero, so det A = 0 always.
struct QuadricModel {
    int n = 0;            // number of directly measured variables
    SymMatrix a;          // order n+1, quadratic part
    std::vector<double> b;  // length n+1, linear part; b[n] < 0
    Mode mode = Mode::relative;

    /// Residual of the surface equation at a point y of length n+1.
    double equation(std::span<const double> y) const;
};

/// Assemble the quadric from influence coefficients: a_ii = A_ii/2,
/// a_ij = A_ij/4 for i != j, b_i = A_i/2. The last linear coefficient
/// defaults to -1/2, which makes the equation pointwise identical to
/// delta_total(p) = y_{n+1}; any negative value yields the same
/// classification (the equation only scales).
QuadricModel build_quadric(const InfluenceSet& inf, double last_linear = -0.5);

/// Symmetric eigendecomposition, eigenvalues sorted descending.
struct EigenDecomposition {
    std::vector<double> values;
    Matrix basis;  // orthogonal; column j is the eigenvector of values[j]
    int rank = 0;  // eigenvalues above the zero threshold
};

/// Cyclic-sweep Jacobi rotations; deterministic for a fixed input.
/// Eigenvector signs are normalized (first nonvanishing component positive)
/// and equal eigenvalues are ordered by their eigenvectors, so the result
/// carries no dependence on sweep order.
EigenDecomposition eigen_symmetric(const SymMatrix& m,
                                   double tol = kDefaultRankTolerance);

enum class SurfaceClass {
    hyperplane,
    line,      // n = 1, zero quadratic part
    parabola,  // n = 1, nonzero quadratic part
    elliptic_paraboloid,
    hyperbolic_paraboloid,
    parabolic_cylinder
};

struct SurfaceKind {
    SurfaceClass cls = SurfaceClass::hyperplane;
    /// hyperplane: number of nonzero linear coefficients b_1..b_n;
    /// hyperbolic paraboloid: type k (positive canonical coefficients);
    /// parabolic cylinder: type r (rank of the quadratic part).
    int detail = 0;

    bool operator==(const SurfaceKind&) const = default;
};

std::string to_string(const SurfaceKind& kind);

/// Decide the taxonomy label from the rank and eigenvalue signs of the
/// upper n x n block.
SurfaceKind classify(const QuadricModel& q, double tol = kDefaultRankTolerance);

/// Full reduction to canonical coordinates. The affine map z = rotation * y
/// + translation carries surface points to coordinates where
///   sum_i signs[i] * z_i^2 / parameters[i] = 2 * z_{linear_axis}
/// holds; its inverse is y = rotation^T (z - translation).
struct CanonicalForm {
    SurfaceKind kind;
    int n = 0;
    int rank = 0;                      // r, number of canonical square terms
    std::vector<double> parameters;    // p_1..p_r, positive
    std::vector<int> signs;            // +1 or -1 per square term
    int linear_axis = 0;               // 0-based axis carrying the 2z term
    Matrix rotation;                   // (n+1) x (n+1) orthogonal
    std::vector<double> translation;   // length n+1
    std::vector<double> rotated_linear;  // c = U^T b before the cylinder step
    double residual_constant = 0.0;    // q = -sum c_i^2/lambda_i
    std::string equation;              // human-readable canonical equation

    std::vector<double> to_canonical(std::span<const double> y) const;
    std::vector<double> from_canonical(std::span<const double> z) const;

    /// sum sigma z^2/p - 2 z_axis; zero on the canonical surface.
    double canonical_residual(std::span<const double> z) const;
};

/// Requires a nonzero quadratic part (classify the model first; hyperplanes
/// and lines have no canonical reduction beyond themselves).
CanonicalForm canonicalize(const QuadricModel& q, double tol = kDefaultRankTolerance);

enum class SignatureClass { elliptic, hyperbolic, parabolic };

const char* to_string(SignatureClass c);

/// parabolic iff some eigenvalue vanishes within tolerance; elliptic iff all
/// nonzero with one sign; hyperbolic otherwise.
SignatureClass signature_class(const SymMatrix& m, double tol = kDefaultRankTolerance);

}  // namespace errsurf
