#pragma once

// Exact and approximate Gaussian posteriors of a linear inverse problem
// m = G p + noise with a possibly singular Gaussian prior.

#include "balred/linalg.hpp"

namespace balred {

/// N(mean, L L^T) with L = cov_factor.
///
/// A non-zero mean must lie in range(L): ||L L^+ mean - mean|| <= 1e-8 ||mean||.
class GaussianPrior {
public:
    GaussianPrior(Vector mean, PsdFactor cov_factor);

    /// Zero-mean prior.
    explicit GaussianPrior(PsdFactor cov_factor);

    const Vector& mean() const noexcept { return mean_; }
    const PsdFactor& cov_factor() const noexcept { return cov_factor_; }
    const Matrix& factor() const noexcept { return cov_factor_.factor(); }
    Eigen::Index dim() const noexcept { return cov_factor_.dim(); }
    Matrix covariance() const { return cov_factor_.represented(); }

    /// Prior with covariance scaled by lambda (factor scaled by sqrt(lambda)).
    GaussianPrior scaled(double lambda) const;

private:
    Vector mean_;
    PsdFactor cov_factor_;
};

struct GaussianPosterior {
    Vector mean;
    Matrix cov;
};

/// Posterior of m = G p + eps, eps ~ N(0, gamma_obs), through the
/// covariance-form update. The inner matrix gamma_obs + G Gamma_pr G^T is
/// handled in whitened form through its eigendecomposition.
GaussianPosterior posterior(const Matrix& g, const GaussianPrior& prior, const Matrix& gamma_obs,
                            const Vector& data);

/// Same update with an approximate forward map in place of G.
GaussianPosterior approx_posterior(const Matrix& g_hat, const GaussianPrior& prior,
                                   const Matrix& gamma_obs, const Vector& data);

/// Square root of the prior-preconditioned Hessian, gamma_obs^{-1/2} G L_pr.
Matrix pph_sqrt(const Matrix& g, const GaussianPrior& prior, const Matrix& gamma_obs);

struct PosteriorError {
    double mean_err;  // ||mu - mu_hat||_2
    double cov_err;   // ||Gamma - Gamma_hat||_F
};

PosteriorError posterior_error(const GaussianPosterior& exact, const GaussianPosterior& approx);

/// Posterior from an already whitened problem: b = gamma_obs^{-1/2} G L_pr and
/// residual = gamma_obs^{-1/2} (m - G mu_pr).
GaussianPosterior whitened_posterior(const Matrix& b, const GaussianPrior& prior,
                                     const Vector& whitened_residual);

}  // namespace balred
