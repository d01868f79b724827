#pragma once

// Dense kernels shared by every other module: matrix exponential,
// Bartels-Stewart Lyapunov/Sylvester solvers, rank-revealing PSD square
// roots, pseudoinverse and Schatten norms.

#include <Eigen/Dense>

#include <cstddef>

namespace balred {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kDefaultRankTol = 1e-12;

/// Factor L of a symmetric PSD matrix, representing L * L^T.
///
/// The column count is the numerical rank and may be zero.
class PsdFactor {
public:
    PsdFactor() = default;
    explicit PsdFactor(Matrix factor) : factor_(std::move(factor)) {}

    const Matrix& factor() const noexcept { return factor_; }
    Eigen::Index dim() const noexcept { return factor_.rows(); }
    Eigen::Index rank() const noexcept { return factor_.cols(); }

    Matrix represented() const { return factor_ * factor_.transpose(); }

    PsdFactor scaled(double s) const { return PsdFactor(factor_ * s); }

private:
    Matrix factor_;
};

/// Which Lyapunov equation to solve.
enum class LyapunovForm {
    Reachability,   // A X + X A^T + W = 0
    Observability,  // A^T X + X A + W = 0
};

/// Matrix exponential by scaling and squaring with a degree-13 Pade
/// approximant; the scaled matrix satisfies ||A / 2^k||_inf <= 5.4.
Matrix expm(const Matrix& a);

/// Solves A^T S + S B + W = 0 by real Schur reduction of A and B and
/// block back-substitution. Throws SingularEquationError when an eigenvalue
/// of A^T and one of B (nearly) sum to zero.
Matrix solve_sylvester(const Matrix& a, const Matrix& b, const Matrix& w);

/// Solves the Lyapunov equation of the given form; the result is symmetrized.
Matrix solve_lyapunov(const Matrix& a, const Matrix& w, LyapunovForm form);

/// Eigenvalue-based square root of a symmetric PSD matrix. Eigenvalues below
/// tol * lambda_max are dropped; columns are ordered by decreasing eigenvalue.
PsdFactor psd_sqrt_factor(const Matrix& m, double tol = kDefaultRankTol);

/// SVD pseudoinverse truncating singular values below tol * sigma_max.
Matrix pinv(const Matrix& m, double tol = kDefaultRankTol);

/// Schatten p-norm for p = 2 (Frobenius) or p = infinity (spectral).
double schatten_norm(const Matrix& m, double p);

double spectral_norm(const Matrix& m);

/// Largest real part over the eigenvalues of a square matrix.
double spectral_abscissa(const Matrix& a);

/// Principal inverse square root of a symmetric positive definite matrix.
/// Block-diagonal inputs are processed block by block.
Matrix spd_inverse_sqrt(const Matrix& m);

/// Block-diagonal matrix holding `copies` copies of `block`.
Matrix block_diagonal(const Matrix& block, std::size_t copies);

inline Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

/// Relative asymmetry ||M - M^T||_F / ||M||_F (0 for the zero matrix).
double asymmetry(const Matrix& m);

/// Smallest eigenvalue of the symmetric part of m.
double min_symmetric_eigenvalue(const Matrix& m);

void require_square(const Matrix& m, const char* name);
void require_finite(const Matrix& m, const char* name);

}  // namespace balred
