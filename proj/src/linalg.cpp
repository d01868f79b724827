#include "balred/linalg.hpp"

#include "balred/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

namespace balred {

namespace {

using Complex = std::complex<double>;

// Degree-13 Pade coefficients for exp.
constexpr double kPade13[] = {64764752532480000.0,
                              32382376266240000.0,
                              7771770303897600.0,
                              1187353796428800.0,
                              129060195264000.0,
                              10559470521600.0,
                              670442572800.0,
                              33522128640.0,
                              1323241920.0,
                              40840800.0,
                              960960.0,
                              16380.0,
                              182.0,
                              1.0};

constexpr double kPadeScalingThreshold = 5.4;

// Separation below which A^T S + S B is treated as singular, relative to the
// spectral scale of the pair.
constexpr double kResonanceTol = 1e-10;

double inf_norm(const Matrix& a) {
    return a.size() == 0 ? 0.0 : a.cwiseAbs().rowwise().sum().maxCoeff();
}

// Diagonal block partition of a real quasi-triangular Schur factor.
struct Block {
    Eigen::Index start;
    Eigen::Index size;
};

std::vector<Block> schur_blocks(const Matrix& t) {
    std::vector<Block> blocks;
    const Eigen::Index n = t.rows();
    Eigen::Index i = 0;
    while (i < n) {
        if (i + 1 < n && t(i + 1, i) != 0.0) {
            blocks.push_back({i, 2});
            i += 2;
        } else {
            blocks.push_back({i, 1});
            i += 1;
        }
    }
    return blocks;
}

std::vector<Complex> block_eigenvalues(const Matrix& t, const std::vector<Block>& blocks) {
    std::vector<Complex> ev;
    ev.reserve(static_cast<std::size_t>(t.rows()));
    for (const auto& b : blocks) {
        if (b.size == 1) {
            ev.emplace_back(t(b.start, b.start), 0.0);
            continue;
        }
        const double a = t(b.start, b.start);
        const double bb = t(b.start, b.start + 1);
        const double c = t(b.start + 1, b.start);
        const double d = t(b.start + 1, b.start + 1);
        const Complex half_trace((a + d) / 2.0, 0.0);
        const Complex disc = std::sqrt(Complex(((a - d) / 2.0) * ((a - d) / 2.0) + bb * c, 0.0));
        ev.push_back(half_trace + disc);
        ev.push_back(half_trace - disc);
    }
    return ev;
}

void check_resonance(const std::vector<Complex>& ea, const std::vector<Complex>& eb) {
    double scale = 0.0;
    for (const auto& l : ea) scale = std::max(scale, std::abs(l));
    double scale_b = 0.0;
    for (const auto& m : eb) scale_b = std::max(scale_b, std::abs(m));
    scale += scale_b;
    double closest = std::numeric_limits<double>::infinity();
    for (const auto& l : ea)
        for (const auto& m : eb) closest = std::min(closest, std::abs(l + m));
    if (scale == 0.0 || closest <= kResonanceTol * scale) {
        throw SingularEquationError("Sylvester operator is singular: eigenvalue pair with sum " +
                                    std::to_string(closest) + " (spectral scale " +
                                    std::to_string(scale) + ")");
    }
}

Matrix sign_fixed_columns(Matrix m) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        Eigen::Index imax = 0;
        m.col(j).cwiseAbs().maxCoeff(&imax);
        if (m(imax, j) < 0.0) m.col(j) *= -1.0;
    }
    return m;
}

}  // namespace

void require_square(const Matrix& m, const char* name) {
    if (m.rows() != m.cols()) {
        throw DimensionError(std::string(name) + " must be square, got " +
                             std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
    }
}

void require_finite(const Matrix& m, const char* name) {
    if (!m.allFinite()) throw ArgumentError(std::string(name) + " has non-finite entries");
}

Matrix expm(const Matrix& a) {
    require_square(a, "expm argument");
    const Eigen::Index n = a.rows();
    const Matrix ident = Matrix::Identity(n, n);
    if (n == 0 || a.isZero(0.0)) return ident;

    const double norm = inf_norm(a);
    int squarings = 0;
    if (norm > kPadeScalingThreshold) {
        squarings = static_cast<int>(std::ceil(std::log2(norm / kPadeScalingThreshold)));
    }
    const Matrix as = a / std::ldexp(1.0, squarings);

    const auto& b = kPade13;
    const Matrix a2 = as * as;
    const Matrix a4 = a2 * a2;
    const Matrix a6 = a4 * a2;
    const Matrix u_inner = a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 +
                           b[3] * a2 + b[1] * ident;
    const Matrix u = as * u_inner;
    const Matrix v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 +
                     b[2] * a2 + b[0] * ident;

    Matrix r = (v - u).partialPivLu().solve(v + u);
    for (int k = 0; k < squarings; ++k) r = r * r;
    return r;
}

Matrix solve_sylvester(const Matrix& a, const Matrix& b, const Matrix& w) {
    require_square(a, "A");
    require_square(b, "B");
    if (w.rows() != a.rows() || w.cols() != b.rows()) {
        throw DimensionError("Sylvester right-hand side is " + std::to_string(w.rows()) + "x" +
                             std::to_string(w.cols()) + ", expected " +
                             std::to_string(a.rows()) + "x" + std::to_string(b.rows()));
    }
    const Eigen::Index m = a.rows();
    const Eigen::Index n = b.rows();
    if (m == 0 || n == 0) return Matrix::Zero(m, n);

    Eigen::RealSchur<Matrix> schur_a(a);
    Eigen::RealSchur<Matrix> schur_b(b);
    const Matrix& ta = schur_a.matrixT();
    const Matrix& ua = schur_a.matrixU();
    const Matrix& tb = schur_b.matrixT();
    const Matrix& ub = schur_b.matrixU();

    const auto blocks_a = schur_blocks(ta);
    const auto blocks_b = schur_blocks(tb);
    check_resonance(block_eigenvalues(ta, blocks_a), block_eigenvalues(tb, blocks_b));

    // Ta^T Y + Y Tb = -F with Ta^T lower and Tb upper block triangular.
    const Matrix f = ua.transpose() * w * ub;
    Matrix y = Matrix::Zero(m, n);
    for (const auto& bj : blocks_b) {
        for (const auto& bi : blocks_a) {
            Matrix rhs = -f.block(bi.start, bj.start, bi.size, bj.size);
            if (bi.start > 0) {
                rhs.noalias() -= ta.block(0, bi.start, bi.start, bi.size).transpose() *
                                 y.block(0, bj.start, bi.start, bj.size);
            }
            if (bj.start > 0) {
                rhs.noalias() -= y.block(bi.start, 0, bi.size, bj.start) *
                                 tb.block(0, bj.start, bj.start, bj.size);
            }
            const Matrix tii = ta.block(bi.start, bi.start, bi.size, bi.size).transpose();
            const Matrix tjj = tb.block(bj.start, bj.start, bj.size, bj.size);
            const Eigen::Index p = bi.size;
            const Eigen::Index q = bj.size;
            // vec(Tii X + X Tjj) = (I_q (x) Tii + Tjj^T (x) I_p) vec(X)
            Matrix k = Matrix::Zero(p * q, p * q);
            for (Eigen::Index c = 0; c < q; ++c) {
                k.block(c * p, c * p, p, p) += tii;
                for (Eigen::Index c2 = 0; c2 < q; ++c2) {
                    k.block(c * p, c2 * p, p, p) += tjj(c2, c) * Matrix::Identity(p, p);
                }
            }
            const Vector rv = Eigen::Map<const Vector>(rhs.data(), p * q);
            const Vector xv = k.fullPivLu().solve(rv);
            y.block(bi.start, bj.start, p, q) = Eigen::Map<const Matrix>(xv.data(), p, q);
        }
    }
    return ua * y * ub.transpose();
}

Matrix solve_lyapunov(const Matrix& a, const Matrix& w, LyapunovForm form) {
    require_square(a, "A");
    require_square(w, "W");
    if (w.rows() != a.rows()) throw DimensionError("Lyapunov operands are not conformal");
    const Matrix x = form == LyapunovForm::Observability
                         ? solve_sylvester(a, a, w)
                         : solve_sylvester(a.transpose(), a.transpose(), w);
    return symmetrized(x);
}

PsdFactor psd_sqrt_factor(const Matrix& m, double tol) {
    require_square(m, "PSD matrix");
    require_finite(m, "PSD matrix");
    const Eigen::Index n = m.rows();
    if (n == 0) return PsdFactor(Matrix(0, 0));
    const double fro = m.norm();
    if (fro == 0.0) return PsdFactor(Matrix::Zero(n, 0));
    if ((m - m.transpose()).norm() > 1e-10 * fro) {
        throw NotPsdError("matrix is not symmetric (relative asymmetry " +
                          std::to_string(asymmetry(m)) + ")");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrized(m));
    const Vector& ev = eig.eigenvalues();  // ascending
    const double norm2 = std::max(std::abs(ev(0)), std::abs(ev(n - 1)));
    if (ev(0) < -tol * norm2) {
        throw NotPsdError("matrix has eigenvalue " + std::to_string(ev(0)) + " below -" +
                          std::to_string(tol) + " * " + std::to_string(norm2));
    }
    const double cutoff = tol * ev(n - 1);
    Eigen::Index kept = 0;
    for (Eigen::Index i = n - 1; i >= 0 && ev(i) > cutoff && ev(i) > 0.0; --i) ++kept;

    Matrix factor(n, kept);
    for (Eigen::Index j = 0; j < kept; ++j) {
        const Eigen::Index i = n - 1 - j;
        factor.col(j) = eig.eigenvectors().col(i) * std::sqrt(ev(i));
    }
    return PsdFactor(sign_fixed_columns(std::move(factor)));
}

Matrix pinv(const Matrix& m, double tol) {
    require_finite(m, "pinv argument");
    if (m.size() == 0) return Matrix::Zero(m.cols(), m.rows());
    Eigen::JacobiSVD<Matrix, Eigen::ColPivHouseholderQRPreconditioner> svd(
        m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& s = svd.singularValues();
    if (s.size() == 0 || s(0) == 0.0) return Matrix::Zero(m.cols(), m.rows());
    Vector inv = Vector::Zero(s.size());
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (s(i) > tol * s(0)) inv(i) = 1.0 / s(i);
    }
    return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

double spectral_norm(const Matrix& m) {
    if (m.size() == 0) return 0.0;
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues()(0);
}

double schatten_norm(const Matrix& m, double p) {
    if (p == 2.0) return m.norm();
    if (std::isinf(p) && p > 0) return spectral_norm(m);
    throw ArgumentError("unsupported Schatten index " + std::to_string(p) +
                        " (supported: 2, infinity)");
}

double spectral_abscissa(const Matrix& a) {
    require_square(a, "A");
    if (a.rows() == 0) return -std::numeric_limits<double>::infinity();
    Eigen::EigenSolver<Matrix> eig(a, false);
    return eig.eigenvalues().real().maxCoeff();
}

namespace {

Matrix inverse_sqrt_block(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrized(m));
    const Vector& ev = eig.eigenvalues();
    if (ev.size() > 0 && !(ev(0) > 0.0)) {
        throw NotPdError("matrix is not positive definite (smallest eigenvalue " +
                         std::to_string(ev(0)) + ")");
    }
    return eig.eigenvectors() * ev.cwiseSqrt().cwiseInverse().asDiagonal() *
           eig.eigenvectors().transpose();
}

bool is_block_diagonal(const Matrix& m, Eigen::Index b) {
    const Eigen::Index n = m.rows();
    for (Eigen::Index j = 0; j < n; ++j) {
        const Eigen::Index lo = (j / b) * b;
        for (Eigen::Index i = 0; i < n; ++i) {
            if ((i < lo || i >= lo + b) && m(i, j) != 0.0) return false;
        }
    }
    return true;
}

}  // namespace

Matrix spd_inverse_sqrt(const Matrix& m) {
    require_square(m, "SPD matrix");
    const Eigen::Index n = m.rows();
    if (n == 0) return Matrix(0, 0);
    if ((m - m.transpose()).norm() > 1e-10 * m.norm()) {
        throw NotPdError("matrix is not symmetric");
    }
    Eigen::Index block = n;
    for (Eigen::Index b = 1; b < n; ++b) {
        if (n % b == 0 && is_block_diagonal(m, b)) {
            block = b;
            break;
        }
    }
    Matrix out = Matrix::Zero(n, n);
    Matrix prev_in;
    Matrix prev_out;
    for (Eigen::Index s = 0; s < n; s += block) {
        const Matrix blk = m.block(s, s, block, block);
        if (prev_in.size() == 0 || blk != prev_in) {
            prev_in = blk;
            prev_out = inverse_sqrt_block(blk);
        }
        out.block(s, s, block, block) = prev_out;
    }
    return out;
}

Matrix block_diagonal(const Matrix& block, std::size_t copies) {
    const Eigen::Index r = block.rows();
    const Eigen::Index c = block.cols();
    const auto k = static_cast<Eigen::Index>(copies);
    Matrix out = Matrix::Zero(r * k, c * k);
    for (Eigen::Index i = 0; i < k; ++i) out.block(i * r, i * c, r, c) = block;
    return out;
}

double asymmetry(const Matrix& m) {
    const double fro = m.norm();
    return fro == 0.0 ? 0.0 : (m - m.transpose()).norm() / fro;
}

double min_symmetric_eigenvalue(const Matrix& m) {
    require_square(m, "matrix");
    if (m.rows() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrized(m), Eigen::EigenvaluesOnly);
    return eig.eigenvalues()(0);
}

}  // namespace balred
