#pragma once

// Reachability/observability Gramians of the prior-driven system
//   x' = A x + L_pr u,  y = Gamma_eps^{-1/2} C x
// over an infinite or a finite horizon.

#include "balred/linalg.hpp"
#include "balred/lti.hpp"

#include <string>

namespace balred {

struct ReducedModel;

/// Balancing flavour: infinite-horizon (PD-BT) or time-limited to [0, T] (PD-TLBT).
class Variant {
public:
    static Variant pdbt() { return Variant(0.0); }
    static Variant pdtlbt(double horizon);

    bool is_limited() const noexcept { return horizon_ > 0.0; }
    /// Horizon T of the time-limited variant; throws ArgumentError for PD-BT.
    double horizon() const;
    /// "pdbt" or "pdtlbt".
    std::string name() const { return is_limited() ? "pdtlbt" : "pdbt"; }

    friend bool operator==(const Variant&, const Variant&) = default;

private:
    explicit Variant(double horizon) : horizon_(horizon) {}
    double horizon_;
};

struct GramianPair {
    Matrix p;  // reachability
    Matrix q;  // observability
    Variant variant;
};

enum class GramianMethod { Automatic, Sylvester, Quadrature };

/// Max real eigenvalue part must be below -1e-10.
inline constexpr double kStabilityMargin = 1e-10;

bool is_stable(const Matrix& a);

/// Solves A P + P A^T + Gamma_pr = 0 and A^T Q + Q A + C^T Gamma_eps^{-1} C = 0.
/// Throws StabilityError for unstable A.
GramianPair gramians_infinite(const LtiSystem& system, const Matrix& gamma_pr);

/// P_T = int_0^T e^{At} Gamma_pr e^{A^T t} dt and Q_T likewise. Uses the
/// Sylvester identity A P_T + P_T A^T = e^{AT} Gamma_pr e^{A^T T} - Gamma_pr
/// unless an eigenvalue pair of A sums to (nearly) zero, in which case it
/// falls back to adaptive quadrature.
GramianPair gramians_limited(const LtiSystem& system, const Matrix& gamma_pr, double horizon,
                             GramianMethod method = GramianMethod::Automatic);

/// int_0^T e^{A1 t} W e^{A2^T t} dt.
Matrix limited_cross_gramian(const Matrix& a1, const Matrix& a2, const Matrix& w, double horizon,
                             GramianMethod method = GramianMethod::Automatic);

struct ReducedReachGramians {
    Matrix p_red;  // r x r, int e^{A_r t} L_r L_r^T e^{A_r^T t}
    Matrix p_mix;  // d x r, int e^{A t} L_pr L_r^T e^{A_r^T t}
};

ReducedReachGramians mixed_and_reduced_reach_gramians(
    const LtiSystem& system, const PsdFactor& prior_factor, const ReducedModel& model,
    double horizon, GramianMethod method = GramianMethod::Automatic);

}  // namespace balred
