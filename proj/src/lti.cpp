#include "balred/lti.hpp"

#include "balred/errors.hpp"

#include <cmath>
#include <string>

namespace balred {

LtiSystem::LtiSystem(Matrix a, Matrix c, Matrix gamma_eps)
    : a_(std::move(a)), c_(std::move(c)), gamma_eps_(std::move(gamma_eps)) {
    require_square(a_, "A");
    require_square(gamma_eps_, "Gamma_eps");
    require_finite(a_, "A");
    require_finite(c_, "C");
    require_finite(gamma_eps_, "Gamma_eps");
    if (a_.rows() == 0) throw DimensionError("state dimension must be positive");
    if (c_.cols() != a_.rows()) {
        throw DimensionError("C has " + std::to_string(c_.cols()) + " columns, A is " +
                             std::to_string(a_.rows()) + "x" + std::to_string(a_.rows()));
    }
    if (c_.rows() == 0) throw DimensionError("output dimension must be positive");
    if (gamma_eps_.rows() != c_.rows()) {
        throw DimensionError("Gamma_eps is " + std::to_string(gamma_eps_.rows()) +
                             "x" + std::to_string(gamma_eps_.rows()) + " but C has " +
                             std::to_string(c_.rows()) + " rows");
    }
    gamma_eps_inv_sqrt_ = spd_inverse_sqrt(gamma_eps_);
}

Matrix LtiSystem::output_weight() const {
    const Matrix wc = gamma_eps_inv_sqrt_ * c_;
    return wc.transpose() * wc;
}

ObservationGrid::ObservationGrid(std::vector<double> times, std::optional<double> horizon)
    : times_(std::move(times)), horizon_(horizon) {
    if (times_.empty()) throw ArgumentError("observation grid is empty");
    for (std::size_t k = 0; k < times_.size(); ++k) {
        if (!std::isfinite(times_[k]) || times_[k] < 0.0) {
            throw ArgumentError("observation time " + std::to_string(times_[k]) +
                                " must be finite and non-negative");
        }
        if (k > 0 && !(times_[k] > times_[k - 1])) {
            throw ArgumentError("observation times must be strictly increasing");
        }
    }
    if (horizon_ && !(*horizon_ > times_.back())) {
        throw ArgumentError("horizon " + std::to_string(*horizon_) +
                            " must exceed the last observation time " +
                            std::to_string(times_.back()));
    }
}

ObservationGrid ObservationGrid::equidistant(double dt, std::size_t n,
                                             std::optional<double> horizon) {
    if (!(dt > 0.0)) throw ArgumentError("observation spacing must be positive");
    std::vector<double> t(n);
    for (std::size_t k = 0; k < n; ++k) t[k] = dt * static_cast<double>(k + 1);
    return ObservationGrid(std::move(t), horizon);
}

SmoothingProblem::SmoothingProblem(LtiSystem system_, ObservationGrid grid_,
                                   GaussianPrior prior_, Vector data_)
    : system(std::move(system_)),
      grid(std::move(grid_)),
      prior(std::move(prior_)),
      data(std::move(data_)) {
    const auto expected = static_cast<Eigen::Index>(grid.size()) * system.output_dim();
    if (data.size() != expected) {
        throw DimensionError("data vector has length " + std::to_string(data.size()) +
                             ", expected n * d_out = " + std::to_string(expected));
    }
    if (prior.dim() != system.state_dim()) {
        throw DimensionError("prior dimension " + std::to_string(prior.dim()) +
                             " does not match state dimension " +
                             std::to_string(system.state_dim()));
    }
}

Matrix forward_map(const LtiSystem& system, const ObservationGrid& grid) {
    const Eigen::Index p = system.output_dim();
    const Eigen::Index d = system.state_dim();
    Matrix g(p * static_cast<Eigen::Index>(grid.size()), d);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        g.middleRows(static_cast<Eigen::Index>(k) * p, p) =
            system.c() * expm(system.a() * grid.times()[k]);
    }
    return g;
}

ObsCovariance obs_covariance(const LtiSystem& system, std::size_t n) {
    if (n == 0) throw ArgumentError("observation count must be positive");
    return {block_diagonal(system.gamma_eps(), n),
            block_diagonal(system.gamma_eps_inv_sqrt(), n)};
}

Matrix impulse_response(const LtiSystem& system, const PsdFactor& prior_factor, double t) {
    if (prior_factor.dim() != system.state_dim()) {
        throw DimensionError("prior factor dimension does not match the state dimension");
    }
    if (!(t >= 0.0)) throw ArgumentError("impulse response time must be non-negative");
    return system.gamma_eps_inv_sqrt() * system.c() * expm(system.a() * t) *
           prior_factor.factor();
}

Vector simulate_outputs(const LtiSystem& system, const ObservationGrid& grid, const Vector& p) {
    if (p.size() != system.state_dim()) {
        throw DimensionError("initial state has length " + std::to_string(p.size()) +
                             ", expected " + std::to_string(system.state_dim()));
    }
    const Eigen::Index q = system.output_dim();
    Vector y(q * static_cast<Eigen::Index>(grid.size()));
    for (std::size_t k = 0; k < grid.size(); ++k) {
        y.segment(static_cast<Eigen::Index>(k) * q, q) =
            system.c() * (expm(system.a() * grid.times()[k]) * p);
    }
    return y;
}

}  // namespace balred
