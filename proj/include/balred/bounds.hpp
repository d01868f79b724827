#pragma once

// A priori certificates for the balanced-truncation posterior: impulse-response
// error terms, the constant kappa, the Lipschitz constants C and C' and the
// assembled posterior mean/covariance bounds.

#include "balred/balancing.hpp"
#include "balred/linalg.hpp"
#include "balred/lti.hpp"
#include "balred/posterior.hpp"

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace balred {

/// Right-hand side of an impulse-response error bound. `raw` is the value
/// before negative roundoff was clamped to zero.
struct TraceTerm {
    double value = 0.0;
    double raw = 0.0;
    bool clamped = false;
};

/// ||Gamma_obs^{-1/2} (G - G_hat) L_pr||_F from the assembled forward maps.
double pph_error_actual(const LtiSystem& system, const GaussianPrior& prior,
                        const ObservationGrid& grid, const ReducedModel& model);

/// Same quantity as sqrt(sum_k ||h(t_k) - h_r(t_k)||_F^2).
double pph_error_impulse(const LtiSystem& system, const GaussianPrior& prior,
                         const ObservationGrid& grid, const ReducedModel& model);

/// trace[(L_bar L_bar^T + 2 S_bar A_bar) Sigma_bar] with S solving
/// A^T S + S A_r + C^T Gamma_eps^{-1} C_r = 0 and S_bar = W_bar^T S.
/// Infinite-horizon models only; throws StabilityError for unstable A.
TraceTerm prop21_rhs(const LtiSystem& system, const GaussianPrior& prior,
                     const ReducedModel& model, const TruncatedBundle& bundle);

/// ||h - h_r||^2 over [0, T], assembled from the error state
/// e = V_r^T x - x_r and the residual state (I - W_r V_r^T) x.
/// With whitened output maps Y = Gamma_eps^{-1/2} C and Y_r = Gamma_eps^{-1/2} C_r,
///   ||h - h_r||^2 = tr(Y_r P_ee Y_r^T) + 2 tr(Y_r S K^T) + tr(K P_T K^T)
/// where K = Y - Y_r V_r^T, P_ee = int e e^T and S = int e x^T solve small
/// Lyapunov/Sylvester equations forced by G = V_r^T A - A_r V_r^T. The
/// identity holds for any reduced model. K and G are formed before
/// contracting with P_T, so the roundoff is relative to the error rather than
/// to tr(Y P_T Y^T). Results below 1e-6 tr(Y P_T Y^T) are recomputed with
/// long double residuals and iterative refinement of each solve, which
/// leaves an absolute error near 1e-19 tr(Y P_T Y^T).
///
/// GramianMethod::Quadrature, or a singular Sylvester operator, selects the
/// full/reduced/mixed Gramian form instead. Throws
/// NumericalInconsistencyError when the total is below -1e-10 times
/// tr(Y P_T Y^T).
TraceTerm prop22_rhs(const LtiSystem& system, const GaussianPrior& prior,
                     const ReducedModel& model, double horizon,
                     GramianMethod method = GramianMethod::Automatic);

struct KappaEstimate {
    double kappa = 0.0;                  // +inf when some interval integral vanishes alone
    std::vector<double> ratios;          // per interval, NaN where skipped
    std::size_t skipped = 0;
    std::vector<std::string> diagnostics;

    bool finite() const;
};

/// max_k ||e(t_k)||^2 / int_{t_{k-1}}^{t_k} ||e||^2 with t_0 = 0, for a
/// squared-error profile e2(t) = ||e(t)||^2. An interval whose integral is
/// below 1e-14 times its endpoint value gives kappa = +inf. Intervals where
/// both the endpoint value and the mean of e2 fall below 1e-14 are skipped.
KappaEstimate estimate_kappa(const std::function<double(double)>& e2,
                             const ObservationGrid& grid);

/// Same estimator for e = h - h_r. The vanishing threshold is 1e-24 times
/// the peak of ||h(t_k)||_F^2 over t_0 = 0, t_1, ..., t_n.
KappaEstimate estimate_kappa(const LtiSystem& system, const GaussianPrior& prior,
                             const ObservationGrid& grid, const ReducedModel& model);

/// Constant C of the covariance bound from b = Gamma_obs^{-1/2} G L_pr and
/// b_hat = Gamma_obs^{-1/2} G_hat L_pr.
double lipschitz_C_whitened(const Matrix& b, const Matrix& b_hat, const Matrix& l_pr);

double lipschitz_C(const Matrix& g, const Matrix& g_hat, const GaussianPrior& prior,
                   const Matrix& gamma_obs);

/// Constant C' of the mean bound. Throws HypothesisError when the prior mean
/// is outside range(L_pr).
double lipschitz_Cprime(const Matrix& g, const Matrix& g_hat, const GaussianPrior& prior,
                        const Matrix& gamma_obs, const Vector& data, double c);

struct BoundReport {
    Variant variant = Variant::pdbt();
    std::size_t rank = 0;
    std::size_t hankel_rank = 0;
    std::size_t discarded = 0;
    double kappa = 0.0;
    double lipschitz_C = 0.0;
    double lipschitz_Cprime = 0.0;
    double trace_term = 0.0;
    double pph_err_bound = 0.0;  // sqrt(kappa * trace_term)
    double cov_bound = 0.0;      // lipschitz_C * pph_err_bound
    double mean_bound = 0.0;     // lipschitz_Cprime * pph_err_bound
    double actual_cov_err = 0.0;
    double actual_mean_err = 0.0;
    double pph_err_actual = 0.0;
    double hsv_tail = 0.0;
    bool kappa_infinite = false;
    bool trace_clamped = false;
    /// pph_err_actual^2 <= kappa * trace_term (up to 1e-9 relative).
    bool chain_holds = true;
    /// How trace_term was assembled.
    std::string trace_form;
    std::vector<std::string> diagnostics;
};

/// Forward-model quantities shared by every rank of one problem.
struct ProblemOperators {
    Matrix g;              // forward map
    Matrix obs_inv_sqrt;   // Gamma_obs^{-1/2}
    Matrix wg;             // Gamma_obs^{-1/2} G
    Vector wm;             // Gamma_obs^{-1/2} m
    Matrix b;              // Gamma_obs^{-1/2} G L_pr
    GaussianPosterior exact;
};

ProblemOperators prepare_operators(const SmoothingProblem& problem);

BoundReport certify(const SmoothingProblem& problem, const ReducedModel& model,
                    const TruncatedBundle& bundle);

BoundReport certify(const SmoothingProblem& problem, const ProblemOperators& ops,
                    const ReducedModel& model, const TruncatedBundle& bundle);

}  // namespace balred
