#pragma once

// Linear time-invariant smoothing model
//   x' = A x,  x(0) = p,  m_k = C x(t_k) + eps_k,  eps_k ~ N(0, Gamma_eps)
// and the quantities it induces: forward map, observation covariance and the
// impulse response of the prior-driven system.

#include "balred/linalg.hpp"
#include "balred/posterior.hpp"

#include <optional>
#include <vector>

namespace balred {

class LtiSystem {
public:
    /// Throws DimensionError for non-conformal operands and NotPdError when
    /// gamma_eps is not symmetric positive definite.
    LtiSystem(Matrix a, Matrix c, Matrix gamma_eps);

    const Matrix& a() const noexcept { return a_; }
    const Matrix& c() const noexcept { return c_; }
    const Matrix& gamma_eps() const noexcept { return gamma_eps_; }
    const Matrix& gamma_eps_inv_sqrt() const noexcept { return gamma_eps_inv_sqrt_; }
    Matrix gamma_eps_inv() const { return gamma_eps_inv_sqrt_ * gamma_eps_inv_sqrt_; }

    Eigen::Index state_dim() const noexcept { return a_.rows(); }
    Eigen::Index output_dim() const noexcept { return c_.rows(); }

    /// C^T Gamma_eps^{-1} C.
    Matrix output_weight() const;

private:
    Matrix a_;
    Matrix c_;
    Matrix gamma_eps_;
    Matrix gamma_eps_inv_sqrt_;
};

/// Observation times 0 <= t_1 < ... < t_n, with an optional horizon T > t_n.
class ObservationGrid {
public:
    explicit ObservationGrid(std::vector<double> times, std::optional<double> horizon = {});

    /// t_k = k * dt for k = 1..n.
    static ObservationGrid equidistant(double dt, std::size_t n,
                                       std::optional<double> horizon = {});

    const std::vector<double>& times() const noexcept { return times_; }
    std::size_t size() const noexcept { return times_.size(); }
    double last() const { return times_.back(); }
    const std::optional<double>& horizon() const noexcept { return horizon_; }

private:
    std::vector<double> times_;
    std::optional<double> horizon_;
};

struct SmoothingProblem {
    SmoothingProblem(LtiSystem system, ObservationGrid grid, GaussianPrior prior, Vector data);

    LtiSystem system;
    ObservationGrid grid;
    GaussianPrior prior;
    Vector data;
};

/// Stacked blocks C e^{A t_k}, each exponential evaluated directly at A t_k.
Matrix forward_map(const LtiSystem& system, const ObservationGrid& grid);

struct ObsCovariance {
    Matrix cov;       // blkdiag(Gamma_eps, ..., Gamma_eps)
    Matrix inv_sqrt;  // blkdiag(Gamma_eps^{-1/2}, ...)
};

ObsCovariance obs_covariance(const LtiSystem& system, std::size_t n);

/// h(t) = Gamma_eps^{-1/2} C e^{A t} L_pr.
Matrix impulse_response(const LtiSystem& system, const PsdFactor& prior_factor, double t);

/// Noise-free outputs C e^{A t_k} p stacked over the grid.
Vector simulate_outputs(const LtiSystem& system, const ObservationGrid& grid, const Vector& p);

}  // namespace balred
