#include "balred/bounds.hpp"

#include "balred/errors.hpp"
#include "balred/gramians.hpp"
#include "balred/quadrature.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <string>

namespace balred {

namespace {

constexpr double kVanishTol = 1e-14;
// Relative to the peak squared response at the observation times.
constexpr double kRelVanishTol = 1e-24;
constexpr double kProp22NegTol = 1e-10;
constexpr double kChainSlack = 1e-9;
constexpr double kRangeTol = 1e-8;
// Balanced error traces below this fraction of tr(Y P_T Y^T) are recomputed
// with extended-precision residuals.
constexpr double kRefineBelow = 1e-6;
constexpr int kRefineSweeps = 3;

using Wide = long double;
using MatrixL = Eigen::Matrix<Wide, Eigen::Dynamic, Eigen::Dynamic>;

MatrixL widen(const Matrix& m) { return m.cast<Wide>(); }

MatrixL expm_wide(const MatrixL& a) {
    const Eigen::Index n = a.rows();
    const MatrixL ident = MatrixL::Identity(n, n);
    const Wide norm = a.cwiseAbs().rowwise().sum().maxCoeff();
    int squarings = 0;
    if (norm > 0.25L) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.25L)));
    const MatrixL as = a / std::ldexp(Wide(1), squarings);
    MatrixL sum = ident;
    MatrixL term = ident;
    for (int k = 1; k <= 40; ++k) {
        term = (term * as) / Wide(k);
        sum += term;
        if (term.cwiseAbs().maxCoeff() <= 1e-24L * sum.cwiseAbs().maxCoeff()) break;
    }
    for (int k = 0; k < squarings; ++k) sum = sum * sum;
    return sum;
}

// Solves a1 X + X a2 + w = 0 by a double-precision solve followed by
// correction sweeps on long double residuals.
template <class Solve>
MatrixL refined_solve(const MatrixL& a1, const MatrixL& a2, const MatrixL& w, Solve solve) {
    MatrixL x = widen(solve(w.template cast<double>()));
    for (int k = 0; k < kRefineSweeps; ++k) {
        const MatrixL res = a1 * x + x * a2 + w;
        x += widen(solve(res.template cast<double>()));
    }
    return x;
}

double trace_of(const MatrixL& m) { return static_cast<double>(m.trace()); }

// Same three terms as prop22_rhs, carried in long double.
double projected_trace_wide(const LtiSystem& system, const GaussianPrior& prior,
                           const ReducedModel& model, double horizon) {
    const Matrix& a_d = system.a();
    const Matrix& ar_d = model.a_r;
    const MatrixL a = widen(a_d);
    const MatrixL ar = widen(ar_d);
    const MatrixL l = widen(prior.factor());
    const MatrixL vr = widen(model.v_r);
    const MatrixL y = widen(system.gamma_eps_inv_sqrt()) * widen(system.c());
    const MatrixL yr = widen(system.gamma_eps_inv_sqrt()) * widen(model.c_r);
    const Wide t = horizon;

    const MatrixL x_end = expm_wide(a * t) * l;
    const MatrixL lr = widen(model.l_pr_r);
    const MatrixL e_end = vr.transpose() * x_end - expm_wide(ar * t) * lr;
    const MatrixL e_start = vr.transpose() * l - lr;
    const MatrixL p_t = refined_solve(
        a, a.transpose(), l * l.transpose() - x_end * x_end.transpose(),
        [&](const Matrix& w) { return solve_lyapunov(a_d, w, LyapunovForm::Reachability); });
    const MatrixL g = vr.transpose() * a - ar * vr.transpose();
    const MatrixL k = y - yr * vr.transpose();
    const MatrixL s = refined_solve(
        ar, a.transpose(), g * p_t - e_end * x_end.transpose() + e_start * l.transpose(),
        [&](const Matrix& w) { return solve_sylvester(ar_d.transpose(), a_d.transpose(), w); });
    MatrixL forcing = g * s.transpose() + s * g.transpose() - e_end * e_end.transpose() +
                      e_start * e_start.transpose();
    forcing = (Wide(0.5) * (forcing + forcing.transpose())).eval();
    const MatrixL p_ee = refined_solve(ar, ar.transpose(), forcing, [&](const Matrix& w) {
        return solve_lyapunov(ar_d, w, LyapunovForm::Reachability);
    });
    return trace_of(yr * p_ee * yr.transpose()) + 2.0 * trace_of(yr * s * k.transpose()) +
           trace_of(k * p_t * k.transpose());
}

void check_model(const LtiSystem& system, const GaussianPrior& prior, const ReducedModel& model) {
    if (prior.dim() != system.state_dim() || model.v_r.rows() != system.state_dim() ||
        model.c_r.rows() != system.output_dim() || model.l_pr_r.cols() != prior.factor().cols()) {
        throw DimensionError("reduced model is not consistent with the system and prior");
    }
}

// Largest s / (1 + s^2) over the singular values of b, which is the spectral
// norm of (I + b b^T)^{-1} b.
double damped_norm(const Matrix& b) {
    if (b.size() == 0) return 0.0;
    const Vector s = Eigen::JacobiSVD<Matrix>(b).singularValues();
    double best = 0.0;
    for (Eigen::Index i = 0; i < s.size(); ++i) best = std::max(best, s(i) / (1.0 + s(i) * s(i)));
    return best;
}

std::string describe(double x) {
    std::ostringstream os;
    os.precision(6);
    os << x;
    return os.str();
}

struct IntervalTerms {
    std::vector<double> numerators;
    std::vector<double> integrals;
    std::vector<double> lengths;
    // An endpoint value below vanish_floor together with an integral below
    // vanish_floor * length is skipped as roundoff.
    double vanish_floor = kVanishTol;
};

KappaEstimate kappa_from(const IntervalTerms& terms) {
    KappaEstimate out;
    const std::size_t n = terms.numerators.size();
    out.ratios.assign(n, std::numeric_limits<double>::quiet_NaN());
    for (std::size_t k = 0; k < n; ++k) {
        const double num = terms.numerators[k];
        const double den = terms.integrals[k];
        const bool num_zero = num <= terms.vanish_floor;
        const bool den_zero = den <= terms.vanish_floor * terms.lengths[k];
        const bool den_vanishes = den < kVanishTol * (num + 1e-300);
        if (num_zero && (den_zero || den_vanishes)) {
            ++out.skipped;
            continue;
        }
        if (den_vanishes) {
            out.ratios[k] = std::numeric_limits<double>::infinity();
            out.kappa = std::numeric_limits<double>::infinity();
            out.diagnostics.push_back("interval " + std::to_string(k + 1) +
                                      ": error integral " + describe(den) +
                                      " vanishes while the endpoint error is " + describe(num));
            continue;
        }
        out.ratios[k] = num / den;
        out.kappa = std::max(out.kappa, out.ratios[k]);
    }
    return out;
}

// e^{M tau} X for the offsets visited by the interval quadratures. Offsets
// repeat exactly across intervals of equal length.
class PropagatorCache {
public:
    PropagatorCache(const Matrix& m, const Matrix& x) : m_(m), x_(x) {}

    const Matrix& at(double tau) {
        auto it = cache_.find(tau);
        if (it == cache_.end()) it = cache_.emplace(tau, expm(m_ * tau) * x_).first;
        return it->second;
    }

private:
    const Matrix& m_;
    const Matrix& x_;
    std::map<double, Matrix> cache_;
};

// wg_blocks: rows Gamma_eps^{-1/2} C e^{A t_k}, stacked over the grid.
KappaEstimate kappa_impl(const LtiSystem& system, const GaussianPrior& prior,
                         const ObservationGrid& grid, const ReducedModel& model,
                         const Matrix& wg) {
    const Eigen::Index p = system.output_dim();
    const Matrix& l = prior.factor();
    const Matrix& lr = model.l_pr_r;
    const Matrix wc_r = system.gamma_eps_inv_sqrt() * model.c_r;
    const std::size_t n = grid.size();

    // Output maps at t_0 = 0, t_1, ..., t_n.
    std::vector<Matrix> y(n + 1);
    std::vector<Matrix> yr(n + 1);
    y[0] = system.gamma_eps_inv_sqrt() * system.c();
    yr[0] = wc_r;
    for (std::size_t k = 0; k < n; ++k) {
        y[k + 1] = wg.middleRows(static_cast<Eigen::Index>(k) * p, p);
        yr[k + 1] = wc_r * expm(model.a_r * grid.times()[k]);
    }

    PropagatorCache full(system.a(), l);
    PropagatorCache reduced(model.a_r, lr);
    IntervalTerms terms;
    terms.numerators.resize(n);
    terms.integrals.resize(n);
    terms.lengths.resize(n);
    double peak = 0.0;
    for (const Matrix& yk : y) peak = std::max(peak, (yk * l).squaredNorm());
    terms.vanish_floor = kRelVanishTol * peak;
    double prev_time = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double len = grid.times()[k] - prev_time;
        terms.lengths[k] = len;
        prev_time = grid.times()[k];
        terms.numerators[k] = (y[k + 1] * l - yr[k + 1] * lr).squaredNorm();
        if (len == 0.0) {
            terms.integrals[k] = 0.0;
            continue;
        }
        const Matrix& y0 = y[k];
        const Matrix& yr0 = yr[k];
        auto e2 = [&](double tau) {
            return (y0 * full.at(tau) - yr0 * reduced.at(tau)).squaredNorm();
        };
        quad::Options opts;
        opts.abs_tol = 1e-16 * len *
                       ((y[k] * l).squaredNorm() + (y[k + 1] * l).squaredNorm());
        terms.integrals[k] = quad::integrate(e2, 0.0, len, opts);
    }
    return kappa_from(terms);
}

double cprime_impl(const Matrix& wg, const Matrix& wg_hat, const GaussianPrior& prior,
                   const Vector& wm, const Matrix& cov_hat, double c) {
    const Matrix& l = prior.factor();
    const Vector& mu = prior.mean();
    const Matrix l_pinv = pinv(l);
    const double mu_norm = mu.norm();
    if (mu_norm > 0.0 && (l * (l_pinv * mu) - mu).norm() > kRangeTol * mu_norm) {
        throw HypothesisError("prior mean is not in the range of L_pr");
    }
    const double first = c * (wg.transpose() * (wm - wg * mu)).norm();
    const double second = spectral_norm(cov_hat * wg.transpose()) * (l_pinv * mu).norm();
    const double third =
        spectral_norm(cov_hat * l_pinv.transpose()) * (wm - wg_hat * mu).norm();
    return first + second + third;
}

TraceTerm three_gramian_trace(const LtiSystem& system, const GaussianPrior& prior,
                              const ReducedModel& model, double horizon, GramianMethod method) {
    const Matrix y = system.gamma_eps_inv_sqrt() * system.c();
    const Matrix yr = system.gamma_eps_inv_sqrt() * model.c_r;
    const Matrix& l = prior.factor();
    const Matrix p_t = limited_cross_gramian(system.a(), system.a(), l * l.transpose(), horizon,
                                             method);
    const ReducedReachGramians red =
        mixed_and_reduced_reach_gramians(system, prior.cov_factor(), model, horizon, method);
    const double first = (y * p_t * y.transpose()).trace();
    const double second = (yr * red.p_red * yr.transpose()).trace();
    const double mixed = (y * red.p_mix * yr.transpose()).trace();
    const double raw = first + second - 2.0 * mixed;
    if (raw >= 0.0) return {raw, raw, false};
    if (raw >= -kProp22NegTol * first) return {0.0, raw, true};
    throw NumericalInconsistencyError("time-limited error trace " + describe(raw) +
                                      " is negative beyond roundoff (full term " +
                                      describe(first) + ")");
}

}  // namespace

bool KappaEstimate::finite() const { return std::isfinite(kappa); }

double pph_error_actual(const LtiSystem& system, const GaussianPrior& prior,
                        const ObservationGrid& grid, const ReducedModel& model) {
    check_model(system, prior, model);
    const Matrix w = obs_covariance(system, grid.size()).inv_sqrt;
    const Matrix diff = forward_map(system, grid) - reduced_forward_map(model, grid);
    return (w * diff * prior.factor()).norm();
}

double pph_error_impulse(const LtiSystem& system, const GaussianPrior& prior,
                         const ObservationGrid& grid, const ReducedModel& model) {
    check_model(system, prior, model);
    double total = 0.0;
    for (double t : grid.times()) {
        total += (impulse_response(system, prior.cov_factor(), t) -
                  reduced_impulse_response(model, system.gamma_eps(), t))
                     .squaredNorm();
    }
    return std::sqrt(total);
}

TraceTerm prop21_rhs(const LtiSystem& system, const GaussianPrior& prior,
                     const ReducedModel& model, const TruncatedBundle& bundle) {
    check_model(system, prior, model);
    if (model.variant.is_limited()) {
        throw ArgumentError("prop21_rhs applies to infinite-horizon balancing only");
    }
    if (!is_stable(system.a())) {
        throw StabilityError("A is not stable; use the time-limited variant (pdtlbt) instead");
    }
    if (bundle.sigma_bar.size() == 0) return {};
    const Matrix rhs = system.c().transpose() * system.gamma_eps_inv() * model.c_r;
    const Matrix s = solve_sylvester(system.a(), model.a_r, rhs);
    const Matrix s_bar = bundle.w_bar.transpose() * s;
    const auto sigma = bundle.sigma_bar.asDiagonal();
    const double raw = (bundle.l_pr_bar * bundle.l_pr_bar.transpose() * sigma).trace() +
                       2.0 * (s_bar * bundle.a_bar * sigma).trace();
    if (raw < 0.0) return {0.0, raw, true};
    return {raw, raw, false};
}

TraceTerm prop22_rhs(const LtiSystem& system, const GaussianPrior& prior,
                     const ReducedModel& model, double horizon, GramianMethod method) {
    check_model(system, prior, model);
    if (method == GramianMethod::Quadrature) {
        return three_gramian_trace(system, prior, model, horizon, method);
    }
    const Matrix& a = system.a();
    const Matrix& l = prior.factor();
    const Matrix y = system.gamma_eps_inv_sqrt() * system.c();
    const Matrix yr = system.gamma_eps_inv_sqrt() * model.c_r;
    const Matrix p_t = limited_cross_gramian(a, a, l * l.transpose(), horizon, method);
    // V_r^T A (I - W_r V_r^T) and Y (I - W_r V_r^T), formed before contracting with P_T.
    const Matrix g = model.v_r.transpose() * a - model.a_r * model.v_r.transpose();
    const Matrix k = y - yr * model.v_r.transpose();
    const Matrix x_end = expm(a * horizon) * l;
    const Matrix e_end = model.v_r.transpose() * x_end - expm(model.a_r * horizon) * model.l_pr_r;
    // Roundoff in L_r = V_r^T L.
    const Matrix e_start = model.v_r.transpose() * l - model.l_pr_r;

    Matrix s;
    Matrix p_ee;
    try {
        // A_r S + S A^T + G P_T - e(T) x(T)^T + e(0) x(0)^T = 0, S = int e x^T
        s = solve_sylvester(model.a_r.transpose(), a.transpose(),
                            g * p_t - e_end * x_end.transpose() + e_start * l.transpose());
        const Matrix forcing = g * s.transpose() + s * g.transpose() -
                               e_end * e_end.transpose() + e_start * e_start.transpose();
        p_ee = solve_lyapunov(model.a_r, symmetrized(forcing), LyapunovForm::Reachability);
    } catch (const SingularEquationError&) {
        return three_gramian_trace(system, prior, model, horizon, method);
    }
    const double reduced_part = (yr * p_ee * yr.transpose()).trace();
    const double cross_part = 2.0 * (yr * s * k.transpose()).trace();
    const double truncated_part = (k * p_t * k.transpose()).trace();
    const double scale = (y * p_t * y.transpose()).trace();
    double raw = reduced_part + cross_part + truncated_part;
    if (raw < kRefineBelow * scale) {
        try {
            raw = projected_trace_wide(system, prior, model, horizon);
        } catch (const SingularEquationError&) {
        }
    }
    if (raw >= 0.0) return {raw, raw, false};
    if (raw >= -kProp22NegTol * scale) return {0.0, raw, true};
    throw NumericalInconsistencyError("time-limited error trace " + describe(raw) +
                                      " is negative beyond roundoff (full term " +
                                      describe(scale) + ")");
}

KappaEstimate estimate_kappa(const std::function<double(double)>& e2,
                             const ObservationGrid& grid) {
    IntervalTerms terms;
    double prev = 0.0;
    for (double t : grid.times()) {
        terms.numerators.push_back(e2(t));
        terms.integrals.push_back(t > prev ? quad::integrate(e2, prev, t) : 0.0);
        terms.lengths.push_back(t - prev);
        prev = t;
    }
    return kappa_from(terms);
}

KappaEstimate estimate_kappa(const LtiSystem& system, const GaussianPrior& prior,
                             const ObservationGrid& grid, const ReducedModel& model) {
    check_model(system, prior, model);
    const Matrix wg = obs_covariance(system, grid.size()).inv_sqrt * forward_map(system, grid);
    return kappa_impl(system, prior, grid, model, wg);
}

double lipschitz_C_whitened(const Matrix& b, const Matrix& b_hat, const Matrix& l_pr) {
    const double nl = spectral_norm(l_pr);
    const double nb = spectral_norm(b);
    const double nbh = spectral_norm(b_hat);
    return nl * nl * (damped_norm(b) + nbh * nb * (nb + nbh) + damped_norm(b_hat));
}

double lipschitz_C(const Matrix& g, const Matrix& g_hat, const GaussianPrior& prior,
                   const Matrix& gamma_obs) {
    if (g.rows() != g_hat.rows() || g.cols() != g_hat.cols() || g.cols() != prior.dim() ||
        gamma_obs.rows() != g.rows()) {
        throw DimensionError("lipschitz_C operands are not conformal");
    }
    const Matrix w = spd_inverse_sqrt(gamma_obs);
    return lipschitz_C_whitened(w * g * prior.factor(), w * g_hat * prior.factor(),
                                prior.factor());
}

double lipschitz_Cprime(const Matrix& g, const Matrix& g_hat, const GaussianPrior& prior,
                        const Matrix& gamma_obs, const Vector& data, double c) {
    if (g.rows() != g_hat.rows() || g.cols() != g_hat.cols() || g.cols() != prior.dim() ||
        gamma_obs.rows() != g.rows() || data.size() != g.rows()) {
        throw DimensionError("lipschitz_Cprime operands are not conformal");
    }
    const Matrix w = spd_inverse_sqrt(gamma_obs);
    const Matrix wg = w * g;
    const Matrix wg_hat = w * g_hat;
    const Vector wm = w * data;
    const GaussianPosterior approx =
        whitened_posterior(wg_hat * prior.factor(), prior, wm - wg_hat * prior.mean());
    return cprime_impl(wg, wg_hat, prior, wm, approx.cov, c);
}

ProblemOperators prepare_operators(const SmoothingProblem& problem) {
    ProblemOperators ops;
    ops.g = forward_map(problem.system, problem.grid);
    ops.obs_inv_sqrt = obs_covariance(problem.system, problem.grid.size()).inv_sqrt;
    ops.wg = ops.obs_inv_sqrt * ops.g;
    ops.wm = ops.obs_inv_sqrt * problem.data;
    ops.b = ops.wg * problem.prior.factor();
    ops.exact = whitened_posterior(ops.b, problem.prior, ops.wm - ops.wg * problem.prior.mean());
    return ops;
}

BoundReport certify(const SmoothingProblem& problem, const ReducedModel& model,
                    const TruncatedBundle& bundle) {
    return certify(problem, prepare_operators(problem), model, bundle);
}

BoundReport certify(const SmoothingProblem& problem, const ProblemOperators& ops,
                    const ReducedModel& model, const TruncatedBundle& bundle) {
    const LtiSystem& system = problem.system;
    const GaussianPrior& prior = problem.prior;
    check_model(system, prior, model);

    BoundReport rep;
    rep.variant = model.variant;
    rep.rank = model.r;
    rep.hankel_rank = model.hankel_rank();
    rep.discarded = bundle.discarded;
    rep.hsv_tail = model.hsv_tail();

    const Matrix wg_hat = ops.obs_inv_sqrt * reduced_forward_map(model, problem.grid);
    const Matrix b_hat = wg_hat * prior.factor();
    const GaussianPosterior approx =
        whitened_posterior(b_hat, prior, ops.wm - wg_hat * prior.mean());
    const PosteriorError err = posterior_error(ops.exact, approx);
    rep.actual_mean_err = err.mean_err;
    rep.actual_cov_err = err.cov_err;
    rep.pph_err_actual = (ops.b - b_hat).norm();

    TraceTerm trace;
    if (model.variant.is_limited()) {
        const double horizon = model.variant.horizon();
        if (horizon < problem.grid.last()) {
            throw ArgumentError("horizon " + describe(horizon) +
                                " precedes the last observation time " +
                                describe(problem.grid.last()));
        }
        trace = prop22_rhs(system, prior, model, horizon);
        rep.trace_form = "time-limited error Gramian of the projected error state";
    } else {
        trace = prop21_rhs(system, prior, model, bundle);
        rep.trace_form = "truncated-HSV trace, S_bar = W_bar^T S with S in original coordinates";
    }
    rep.trace_term = trace.value;
    rep.trace_clamped = trace.clamped;
    if (trace.clamped) {
        rep.diagnostics.push_back("negative trace term " + describe(trace.raw) +
                                  " clamped to 0");
    }

    const KappaEstimate kappa = kappa_impl(system, prior, problem.grid, model, ops.wg);
    rep.kappa = kappa.kappa;
    rep.kappa_infinite = !kappa.finite();
    rep.diagnostics.insert(rep.diagnostics.end(), kappa.diagnostics.begin(),
                           kappa.diagnostics.end());

    rep.lipschitz_C = lipschitz_C_whitened(ops.b, b_hat, prior.factor());
    rep.lipschitz_Cprime = cprime_impl(ops.wg, wg_hat, prior, ops.wm, approx.cov,
                                       rep.lipschitz_C);

    if (rep.kappa_infinite) {
        const double inf = std::numeric_limits<double>::infinity();
        rep.pph_err_bound = inf;
        rep.cov_bound = inf;
        rep.mean_bound = inf;
        rep.diagnostics.push_back("kappa is infinite; bounds are not informative");
    } else {
        rep.pph_err_bound = std::sqrt(rep.kappa * rep.trace_term);
        rep.cov_bound = rep.lipschitz_C * rep.pph_err_bound;
        rep.mean_bound = rep.lipschitz_Cprime * rep.pph_err_bound;
    }

    const double lhs = rep.pph_err_actual * rep.pph_err_actual;
    const double rhs = rep.kappa * rep.trace_term;
    rep.chain_holds = lhs <= rhs * (1.0 + kChainSlack) + kChainSlack * ops.b.squaredNorm();
    if (!rep.chain_holds) {
        rep.diagnostics.push_back("sampled error " + describe(lhs) + " exceeds kappa * trace " +
                                  describe(rhs));
    }
    return rep;
}

}  // namespace balred
