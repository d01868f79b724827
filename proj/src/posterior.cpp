#include "balred/posterior.hpp"

#include "balred/errors.hpp"

#include <Eigen/SVD>

#include <string>

namespace balred {

namespace {

constexpr double kRangeTol = 1e-8;

void check_conformal(const Matrix& g, const GaussianPrior& prior, const Matrix& gamma_obs,
                     const Vector& data) {
    if (g.cols() != prior.dim()) {
        throw DimensionError("forward map has " + std::to_string(g.cols()) +
                             " columns but the prior dimension is " +
                             std::to_string(prior.dim()));
    }
    if (gamma_obs.rows() != g.rows() || gamma_obs.cols() != g.rows()) {
        throw DimensionError("observation covariance must be " + std::to_string(g.rows()) +
                             "x" + std::to_string(g.rows()));
    }
    if (data.size() != g.rows()) {
        throw DimensionError("data vector has length " + std::to_string(data.size()) +
                             ", expected " + std::to_string(g.rows()));
    }
}

}  // namespace

GaussianPrior::GaussianPrior(Vector mean, PsdFactor cov_factor)
    : mean_(std::move(mean)), cov_factor_(std::move(cov_factor)) {
    if (mean_.size() != cov_factor_.dim()) {
        throw DimensionError("prior mean has length " + std::to_string(mean_.size()) +
                             " but the covariance factor has " +
                             std::to_string(cov_factor_.dim()) + " rows");
    }
    const double norm = mean_.norm();
    if (norm > 0.0) {
        const Matrix& l = cov_factor_.factor();
        const Vector projected = l * (pinv(l) * mean_);
        if ((projected - mean_).norm() > kRangeTol * norm) {
            throw HypothesisError("prior mean is not in the range of the covariance factor");
        }
    }
}

GaussianPrior::GaussianPrior(PsdFactor cov_factor)
    : mean_(Vector::Zero(cov_factor.dim())), cov_factor_(std::move(cov_factor)) {}

GaussianPrior GaussianPrior::scaled(double lambda) const {
    return GaussianPrior(mean_, cov_factor_.scaled(std::sqrt(lambda)));
}

GaussianPosterior whitened_posterior(const Matrix& b, const GaussianPrior& prior,
                                     const Vector& whitened_residual) {
    const Matrix& l = prior.factor();
    if (l.cols() == 0 || b.rows() == 0) {
        return {prior.mean(), prior.covariance()};
    }
    // I + B B^T = U (I + S^2) U^T on range(B), identity elsewhere. Then
    //   Gamma_pr G^T (Gamma_obs + G Gamma_pr G^T)^{-1} G Gamma_pr
    //     = (L V) diag(s^2 / (1 + s^2)) (L V)^T
    //   Gamma_pr G^T (Gamma_obs + G Gamma_pr G^T)^{-1} r
    //     = (L V) diag(s / (1 + s^2)) U^T Gamma_obs^{-1/2} r
    Eigen::JacobiSVD<Matrix, Eigen::ColPivHouseholderQRPreconditioner> svd(
        b, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& s = svd.singularValues();
    const Vector s2 = s.cwiseProduct(s);
    const Vector ones = Vector::Ones(s.size());
    const Vector shrink = s2.cwiseQuotient(ones + s2);
    const Vector gain = s.cwiseQuotient(ones + s2);

    const Matrix lv = l * svd.matrixV();
    Matrix cov = prior.covariance() - lv * shrink.asDiagonal() * lv.transpose();
    Vector mean = prior.mean() + lv * (gain.asDiagonal() * (svd.matrixU().transpose() *
                                                            whitened_residual));
    return {std::move(mean), symmetrized(cov)};
}

GaussianPosterior posterior(const Matrix& g, const GaussianPrior& prior, const Matrix& gamma_obs,
                            const Vector& data) {
    check_conformal(g, prior, gamma_obs, data);
    const Matrix whiten = spd_inverse_sqrt(gamma_obs);
    const Matrix b = whiten * (g * prior.factor());
    const Vector residual = whiten * (data - g * prior.mean());
    return whitened_posterior(b, prior, residual);
}

GaussianPosterior approx_posterior(const Matrix& g_hat, const GaussianPrior& prior,
                                   const Matrix& gamma_obs, const Vector& data) {
    return posterior(g_hat, prior, gamma_obs, data);
}

Matrix pph_sqrt(const Matrix& g, const GaussianPrior& prior, const Matrix& gamma_obs) {
    if (g.cols() != prior.dim() || gamma_obs.rows() != g.rows()) {
        throw DimensionError("pph_sqrt operands are not conformal");
    }
    return spd_inverse_sqrt(gamma_obs) * (g * prior.factor());
}

PosteriorError posterior_error(const GaussianPosterior& exact, const GaussianPosterior& approx) {
    if (exact.mean.size() != approx.mean.size() || exact.cov.rows() != approx.cov.rows()) {
        throw DimensionError("posteriors have different dimensions");
    }
    return {(exact.mean - approx.mean).norm(), (exact.cov - approx.cov).norm()};
}

}  // namespace balred
