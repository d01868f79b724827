#include "balred/gramians.hpp"

#include "balred/balancing.hpp"
#include "balred/errors.hpp"
#include "balred/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <complex>
#include <string>

namespace balred {

namespace {

// Eigenvalue-pair separation, relative to the spectral scale, below which the
// Sylvester route is considered too ill-conditioned to trust.
constexpr double kSylvesterSeparationTol = 1e-8;

bool near_resonant(const Matrix& a1, const Matrix& a2) {
    const Eigen::VectorXcd e1 = Eigen::EigenSolver<Matrix>(a1, false).eigenvalues();
    const Eigen::VectorXcd e2 = Eigen::EigenSolver<Matrix>(a2, false).eigenvalues();
    const double scale = e1.cwiseAbs().maxCoeff() + e2.cwiseAbs().maxCoeff();
    if (scale == 0.0) return true;
    for (Eigen::Index i = 0; i < e1.size(); ++i) {
        for (Eigen::Index j = 0; j < e2.size(); ++j) {
            if (std::abs(e1(i) + e2(j)) <= kSylvesterSeparationTol * scale) return true;
        }
    }
    return false;
}

Matrix cross_gramian_quadrature(const Matrix& a1, const Matrix& a2, const Matrix& w,
                                double horizon) {
    const bool same = a1.rows() == a2.rows() && a1 == a2;
    auto integrand = [&](double t) -> Matrix {
        const Matrix e1 = expm(a1 * t);
        if (same) return e1 * w * e1.transpose();
        return e1 * w * expm(a2 * t).transpose();
    };
    quad::Options opts;
    opts.initial_panels = 2;
    return quad::integrate(integrand, 0.0, horizon, opts);
}

Matrix cross_gramian_sylvester(const Matrix& a1, const Matrix& a2, const Matrix& w,
                               double horizon) {
    const Matrix end = expm(a1 * horizon) * w * expm(a2 * horizon).transpose();
    // A1 X + X A2^T + (W - e^{A1 T} W e^{A2^T T}) = 0
    return solve_sylvester(a1.transpose(), a2.transpose(), w - end);
}

}  // namespace

Variant Variant::pdtlbt(double horizon) {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
        throw ArgumentError("time-limited horizon must be positive and finite");
    }
    return Variant(horizon);
}

double Variant::horizon() const {
    if (!is_limited()) throw ArgumentError("PD-BT has no finite horizon");
    return horizon_;
}

bool is_stable(const Matrix& a) { return spectral_abscissa(a) < -kStabilityMargin; }

GramianPair gramians_infinite(const LtiSystem& system, const Matrix& gamma_pr) {
    const Matrix& a = system.a();
    if (gamma_pr.rows() != a.rows() || gamma_pr.cols() != a.cols()) {
        throw DimensionError("prior covariance does not match the state dimension");
    }
    const double abscissa = spectral_abscissa(a);
    if (!(abscissa < -kStabilityMargin)) {
        throw StabilityError("A is not stable (spectral abscissa " + std::to_string(abscissa) +
                             "); use the time-limited variant (pdtlbt) instead");
    }
    return {solve_lyapunov(a, gamma_pr, LyapunovForm::Reachability),
            solve_lyapunov(a, system.output_weight(), LyapunovForm::Observability),
            Variant::pdbt()};
}

Matrix limited_cross_gramian(const Matrix& a1, const Matrix& a2, const Matrix& w, double horizon,
                             GramianMethod method) {
    require_square(a1, "A1");
    require_square(a2, "A2");
    if (w.rows() != a1.rows() || w.cols() != a2.rows()) {
        throw DimensionError("cross Gramian weight is not conformal");
    }
    if (!(horizon > 0.0)) throw ArgumentError("Gramian horizon must be positive");
    if (w.size() == 0) return Matrix::Zero(w.rows(), w.cols());
    switch (method) {
        case GramianMethod::Sylvester:
            return cross_gramian_sylvester(a1, a2, w, horizon);
        case GramianMethod::Quadrature:
            return cross_gramian_quadrature(a1, a2, w, horizon);
        case GramianMethod::Automatic:
            break;
    }
    if (near_resonant(a1, a2)) return cross_gramian_quadrature(a1, a2, w, horizon);
    try {
        return cross_gramian_sylvester(a1, a2, w, horizon);
    } catch (const SingularEquationError&) {
        return cross_gramian_quadrature(a1, a2, w, horizon);
    }
}

GramianPair gramians_limited(const LtiSystem& system, const Matrix& gamma_pr, double horizon,
                             GramianMethod method) {
    const Matrix& a = system.a();
    if (gamma_pr.rows() != a.rows() || gamma_pr.cols() != a.cols()) {
        throw DimensionError("prior covariance does not match the state dimension");
    }
    const Variant variant = Variant::pdtlbt(horizon);
    const Matrix at = a.transpose();
    return {symmetrized(limited_cross_gramian(a, a, gamma_pr, horizon, method)),
            symmetrized(limited_cross_gramian(at, at, system.output_weight(), horizon, method)),
            variant};
}

ReducedReachGramians mixed_and_reduced_reach_gramians(const LtiSystem& system,
                                                      const PsdFactor& prior_factor,
                                                      const ReducedModel& model, double horizon,
                                                      GramianMethod method) {
    if (prior_factor.dim() != system.state_dim() || model.w_r.rows() != system.state_dim() ||
        model.l_pr_r.cols() != prior_factor.rank()) {
        throw DimensionError("reduced model is not consistent with the full system");
    }
    const Matrix& lr = model.l_pr_r;
    return {symmetrized(limited_cross_gramian(model.a_r, model.a_r, lr * lr.transpose(), horizon,
                                              method)),
            limited_cross_gramian(system.a(), model.a_r, prior_factor.factor() * lr.transpose(),
                                  horizon, method)};
}

}  // namespace balred
