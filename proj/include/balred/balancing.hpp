#pragma once

// Square-root balanced truncation of the prior-driven system.

#include "balred/gramians.hpp"
#include "balred/linalg.hpp"
#include "balred/lti.hpp"

#include <cstddef>
#include <vector>

namespace balred {

/// Hankel singular values at or below this fraction of sigma_1 are discarded.
inline constexpr double kHankelRankTol = 1e-12;

struct ReducedModel {
    std::size_t r = 0;
    Matrix a_r;     // r x r, V_r^T A W_r
    Matrix c_r;     // d_out x r, C W_r
    Matrix l_pr_r;  // r x s, V_r^T L_pr
    Matrix v_r;     // d x r
    Matrix w_r;     // d x r
    /// sigma_1 >= ... >= sigma_m over the numerical Hankel rank m.
    std::vector<double> hsv;
    Variant variant = Variant::pdbt();

    std::size_t hankel_rank() const noexcept { return hsv.size(); }
    /// Sum of sigma_{r+1..m}.
    double hsv_tail() const;
};

/// Truncated directions r+1..m.
struct TruncatedBundle {
    Vector sigma_bar;  // sigma_{r+1..m}
    Matrix l_pr_bar;   // (m-r) x s, V_bar^T L_pr
    Matrix a_bar;      // r x (m-r), V_r^T A W_bar
    Matrix v_bar;      // d x (m-r)
    Matrix w_bar;      // d x (m-r)
    /// Singular values of R^T L at or below the rank cutoff.
    std::size_t discarded = 0;
};

/// Balanced realization at the full numerical Hankel rank, sliced on demand.
class Balancing {
public:
    /// Throws DegenerateSystemError when either Gramian vanishes and
    /// StabilityError for PD-BT with unstable A.
    Balancing(const LtiSystem& system, const PsdFactor& prior_factor, Variant variant,
              GramianMethod method = GramianMethod::Automatic);

    std::size_t hankel_rank() const noexcept { return hsv_.size(); }
    const std::vector<double>& hsv() const noexcept { return hsv_; }
    std::size_t discarded() const noexcept { return discarded_; }
    const Variant& variant() const noexcept { return variant_; }
    const GramianPair& gramians() const noexcept { return gramians_; }

    /// Throws RankError unless 1 <= r <= hankel_rank().
    ReducedModel reduce(std::size_t r) const;
    TruncatedBundle truncated(std::size_t r) const;

private:
    void check_rank(std::size_t r) const;

    Matrix a_;
    Matrix c_;
    Matrix l_pr_;
    GramianPair gramians_;
    Variant variant_;
    Matrix v_;  // d x m
    Matrix w_;  // d x m
    std::vector<double> hsv_;
    std::size_t discarded_ = 0;
};

struct BalancedTruncation {
    ReducedModel model;
    TruncatedBundle bundle;
};

BalancedTruncation balance_and_truncate(const LtiSystem& system, const PsdFactor& prior_factor,
                                        std::size_t r, Variant variant);

/// Convenience overload factoring gamma_pr first.
BalancedTruncation balance_and_truncate(const LtiSystem& system, const Matrix& gamma_pr,
                                        std::size_t r, Variant variant);

/// Stacked blocks C_r e^{A_r t_k} V_r^T.
Matrix reduced_forward_map(const ReducedModel& model, const ObservationGrid& grid);

/// h_r(t) = Gamma_eps^{-1/2} C_r e^{A_r t} L_pr,r.
Matrix reduced_impulse_response(const ReducedModel& model, const Matrix& gamma_eps, double t);

}  // namespace balred
