#include "balred/balancing.hpp"

#include "balred/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <numeric>
#include <string>

namespace balred {

namespace {

// Gramians come out of solvers with O(eps) negative eigenvalues in their null
// space, so the factor clips instead of rejecting.
constexpr double kGramianKeepTol = 1e-14;
constexpr double kGramianNegTol = 1e-8;

Matrix gramian_factor(const Matrix& g, const char* name) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrized(g));
    if (eig.info() != Eigen::Success) {
        throw NumericalInconsistencyError(std::string("eigendecomposition of ") + name +
                                          " failed");
    }
    const Vector& lam = eig.eigenvalues();  // ascending
    const double top = lam.cwiseAbs().maxCoeff();
    if (top == 0.0) return Matrix(g.rows(), 0);
    if (lam(0) < -kGramianNegTol * top) {
        throw NotPsdError(std::string(name) + " has eigenvalue " + std::to_string(lam(0)));
    }
    Eigen::Index keep = 0;
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
        if (lam(i) > kGramianKeepTol * top) ++keep;
    }
    Matrix f(g.rows(), keep);
    for (Eigen::Index j = 0; j < keep; ++j) {
        const Eigen::Index i = lam.size() - 1 - j;
        f.col(j) = eig.eigenvectors().col(i) * std::sqrt(lam(i));
    }
    return f;
}

}  // namespace

double ReducedModel::hsv_tail() const {
    if (r >= hsv.size()) return 0.0;
    return std::accumulate(hsv.begin() + static_cast<std::ptrdiff_t>(r), hsv.end(), 0.0);
}

Balancing::Balancing(const LtiSystem& system, const PsdFactor& prior_factor, Variant variant,
                     GramianMethod method)
    : a_(system.a()),
      c_(system.c()),
      l_pr_(prior_factor.factor()),
      gramians_{Matrix(), Matrix(), variant},
      variant_(variant) {
    if (prior_factor.dim() != system.state_dim()) {
        throw DimensionError("prior factor has " + std::to_string(prior_factor.dim()) +
                             " rows, state dimension is " + std::to_string(system.state_dim()));
    }
    const Matrix gamma_pr = prior_factor.represented();
    gramians_ = variant.is_limited()
                    ? gramians_limited(system, gamma_pr, variant.horizon(), method)
                    : gramians_infinite(system, gamma_pr);

    const Matrix lp = gramian_factor(gramians_.p, "reachability Gramian");
    const Matrix rq = gramian_factor(gramians_.q, "observability Gramian");
    if (lp.cols() == 0 || rq.cols() == 0) {
        throw DegenerateSystemError("a Gramian of the prior-driven system is zero");
    }

    Eigen::JacobiSVD<Matrix> svd(rq.transpose() * lp, Eigen::ComputeThinU | Eigen::ComputeThinV);
    Matrix u = svd.matrixU();
    Matrix z = svd.matrixV();
    const Vector& s = svd.singularValues();
    for (Eigen::Index j = 0; j < u.cols(); ++j) {
        Eigen::Index at = 0;
        u.col(j).cwiseAbs().maxCoeff(&at);
        if (u(at, j) < 0.0) {
            u.col(j) *= -1.0;
            z.col(j) *= -1.0;
        }
    }

    const double top = s.size() > 0 ? s(0) : 0.0;
    if (!(top > 0.0)) throw DegenerateSystemError("all Hankel singular values vanish");
    Eigen::Index m = 0;
    while (m < s.size() && s(m) > kHankelRankTol * top) ++m;
    discarded_ = static_cast<std::size_t>(s.size() - m);

    const Vector inv_sqrt = s.head(m).cwiseSqrt().cwiseInverse();
    v_ = rq * u.leftCols(m) * inv_sqrt.asDiagonal();
    w_ = lp * z.leftCols(m) * inv_sqrt.asDiagonal();
    hsv_.assign(s.data(), s.data() + m);
}

void Balancing::check_rank(std::size_t r) const {
    if (r < 1 || r > hankel_rank()) {
        throw RankError("rank " + std::to_string(r) + " is outside 1.." +
                            std::to_string(hankel_rank()) + " (numerical Hankel rank)",
                        hankel_rank());
    }
}

ReducedModel Balancing::reduce(std::size_t r) const {
    check_rank(r);
    const auto k = static_cast<Eigen::Index>(r);
    ReducedModel model;
    model.r = r;
    model.v_r = v_.leftCols(k);
    model.w_r = w_.leftCols(k);
    model.a_r = model.v_r.transpose() * a_ * model.w_r;
    model.c_r = c_ * model.w_r;
    model.l_pr_r = model.v_r.transpose() * l_pr_;
    model.hsv = hsv_;
    model.variant = variant_;
    return model;
}

TruncatedBundle Balancing::truncated(std::size_t r) const {
    check_rank(r);
    const auto k = static_cast<Eigen::Index>(r);
    const Eigen::Index rest = static_cast<Eigen::Index>(hankel_rank()) - k;
    TruncatedBundle bundle;
    bundle.sigma_bar = Eigen::Map<const Vector>(hsv_.data() + k, rest);
    bundle.v_bar = v_.rightCols(rest);
    bundle.w_bar = w_.rightCols(rest);
    bundle.l_pr_bar = bundle.v_bar.transpose() * l_pr_;
    bundle.a_bar = v_.leftCols(k).transpose() * a_ * bundle.w_bar;
    bundle.discarded = discarded_;
    return bundle;
}

BalancedTruncation balance_and_truncate(const LtiSystem& system, const PsdFactor& prior_factor,
                                        std::size_t r, Variant variant) {
    const Balancing bal(system, prior_factor, variant);
    return {bal.reduce(r), bal.truncated(r)};
}

BalancedTruncation balance_and_truncate(const LtiSystem& system, const Matrix& gamma_pr,
                                        std::size_t r, Variant variant) {
    return balance_and_truncate(system, psd_sqrt_factor(gamma_pr), r, variant);
}

Matrix reduced_forward_map(const ReducedModel& model, const ObservationGrid& grid) {
    const Eigen::Index p = model.c_r.rows();
    Matrix g(p * static_cast<Eigen::Index>(grid.size()), model.v_r.rows());
    for (std::size_t k = 0; k < grid.size(); ++k) {
        g.middleRows(static_cast<Eigen::Index>(k) * p, p) =
            (model.c_r * expm(model.a_r * grid.times()[k])) * model.v_r.transpose();
    }
    return g;
}

Matrix reduced_impulse_response(const ReducedModel& model, const Matrix& gamma_eps, double t) {
    if (gamma_eps.rows() != model.c_r.rows()) {
        throw DimensionError("Gamma_eps does not match the reduced output dimension");
    }
    if (!(t >= 0.0)) throw ArgumentError("impulse response time must be non-negative");
    return spd_inverse_sqrt(gamma_eps) * model.c_r * expm(model.a_r * t) * model.l_pr_r;
}

}  // namespace balred
