#pragma once

// Random problem generators and independent oracles shared by the tests.

#include "balred/balancing.hpp"
#include "balred/linalg.hpp"
#include "balred/lti.hpp"
#include "balred/posterior.hpp"

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace support {

using balred::Matrix;
using balred::Vector;

class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double normal() { return normal_(gen_); }
    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen_); }

    Matrix randn(Eigen::Index rows, Eigen::Index cols) {
        Matrix m(rows, cols);
        for (Eigen::Index j = 0; j < cols; ++j)
            for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal();
        return m;
    }

private:
    std::mt19937_64 gen_;
    std::normal_distribution<double> normal_;
};

inline double spectral_abscissa_oracle(const Matrix& a) {
    Eigen::EigenSolver<Matrix> es(a, false);
    return es.eigenvalues().real().maxCoeff();
}

// Random A with spectral abscissa exactly -margin.
inline Matrix random_stable(Rng& rng, Eigen::Index d, double margin = 0.3) {
    Matrix m = rng.randn(d, d) / std::sqrt(static_cast<double>(d));
    const double shift = spectral_abscissa_oracle(m) + margin;
    return m - shift * Matrix::Identity(d, d);
}

inline Matrix random_spd(Rng& rng, Eigen::Index n, double floor = 0.1) {
    const Matrix b = rng.randn(n, n);
    return b * b.transpose() / static_cast<double>(n) + floor * Matrix::Identity(n, n);
}

inline balred::LtiSystem random_system(Rng& rng, Eigen::Index d, Eigen::Index d_out,
                                       double margin = 0.3) {
    return balred::LtiSystem(random_stable(rng, d, margin), rng.randn(d_out, d),
                             random_spd(rng, d_out));
}

inline balred::PsdFactor random_factor(Rng& rng, Eigen::Index d, Eigen::Index s) {
    return balred::PsdFactor(rng.randn(d, s) / std::sqrt(static_cast<double>(s)));
}

inline Matrix inv_sqrt_oracle(const Matrix& spd) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(spd);
    return es.operatorInverseSqrt();
}

inline Matrix expm_oracle(const Matrix& a) { return a.exp(); }

inline Matrix impulse_oracle(const balred::LtiSystem& sys, const Matrix& l_pr, double t) {
    return inv_sqrt_oracle(sys.gamma_eps()) * sys.c() * expm_oracle(sys.a() * t) * l_pr;
}

inline Matrix reduced_impulse_oracle(const balred::LtiSystem& sys, const balred::ReducedModel& m,
                                     double t) {
    return inv_sqrt_oracle(sys.gamma_eps()) * m.c_r * expm_oracle(m.a_r * t) * m.l_pr_r;
}

inline double sq_error_at(const balred::LtiSystem& sys, const Matrix& l_pr,
                          const balred::ReducedModel& m, double t) {
    return (impulse_oracle(sys, l_pr, t) - reduced_impulse_oracle(sys, m, t)).squaredNorm();
}

// ||h(t) - h_r(t)||_F^2 with the whitening computed once.
class SqError {
public:
    SqError(const balred::LtiSystem& sys, const Matrix& l_pr, const balred::ReducedModel& m)
        : w_(inv_sqrt_oracle(sys.gamma_eps())), c_(w_ * sys.c()), cr_(w_ * m.c_r), a_(sys.a()),
          ar_(m.a_r), l_(l_pr), lr_(m.l_pr_r) {}

    double operator()(double t) const {
        return (c_ * expm_oracle(a_ * t) * l_ - cr_ * expm_oracle(ar_ * t) * lr_).squaredNorm();
    }

private:
    Matrix w_, c_, cr_, a_, ar_, l_, lr_;
};

// Composite Gauss-Kronrod over `panels` equal pieces, each refined at most
// four levels. Bounded depth keeps the cost finite when roundoff in the
// integrand stalls the error estimate.
template <class F>
double gk_panels(const F& f, double lo, double hi, int panels) {
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    double total = 0.0;
    for (int k = 0; k < panels; ++k) {
        const double a = lo + (hi - lo) * k / panels;
        const double b = lo + (hi - lo) * (k + 1) / panels;
        total += GK::integrate(f, a, b, 4, 1e-13);
    }
    return total;
}

// int_0^T ||h - h_r||_F^2 dt.
inline double l2_error_limited(const balred::LtiSystem& sys, const Matrix& l_pr,
                               const balred::ReducedModel& m, double horizon) {
    const SqError f(sys, l_pr, m);
    return gk_panels(f, 0.0, horizon, std::max(4, static_cast<int>(std::ceil(8.0 * horizon))));
}

// int_0^inf ||h - h_r||_F^2 dt, unit windows until the integrand has decayed.
inline double l2_error_infinite(const balred::LtiSystem& sys, const Matrix& l_pr,
                                const balred::ReducedModel& m) {
    const SqError f(sys, l_pr, m);
    double total = 0.0;
    double peak = f(0.0);
    for (int k = 0; k < 20000; ++k) {
        const double lo = k;
        const double hi = k + 1.0;
        total += gk_panels(f, lo, hi, 4);
        const double tail = std::max(f(hi), f(0.5 * (lo + hi)));
        peak = std::max(peak, tail);
        if (tail <= 1e-18 * peak || peak == 0.0) break;
    }
    return total;
}

inline double rel_diff(double a, double b) {
    const double scale = std::max(std::abs(a), std::abs(b));
    return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

inline double rel_diff(const Matrix& a, const Matrix& b) {
    const double scale = std::max(a.norm(), b.norm());
    return scale == 0.0 ? 0.0 : (a - b).norm() / scale;
}

// Operator 2-norm and Frobenius norm without the library.
inline double spec_norm_oracle(const Matrix& m) {
    if (m.size() == 0) return 0.0;
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues()(0);
}

}  // namespace support
