// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include "balred/balancing.hpp"
#include "balred/bench.hpp"
#include "balred/bounds.hpp"
#include "balred/cli.hpp"
#include "balred/gramians.hpp"
#include "balred/posterior.hpp"
#include "support.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

using namespace balred;
using support::Rng;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances.
constexpr double kDominanceSlack = 1e-9;      // criteria 1, 2, 10 (relative)
constexpr double kImpulseTol = 1e-12;         // criterion 3
constexpr double kLimitedIdentityTol = 1e-8;  // criterion 4
constexpr double kInfiniteSlack = 1e-8;       // criterion 5 (times ||h||^2)
constexpr double kClosedFormTol = 1e-10;      // criterion 6
constexpr double kHorizonConsistencyTol = 1e-8;
constexpr double kRecoveryTol = 1e-6;         // criterion 7
constexpr double kSpearmanMax = -0.9;         // criterion 8
constexpr double kMonotoneFraction = 0.8;

// Runtime limits in seconds.
constexpr double kLimit1 = 30.0;
constexpr double kLimitSweep = 300.0;

const double kInf = std::numeric_limits<double>::infinity();

struct Outcome {
    bool pass = false;
    std::string detail;
};

double norm_p(const Matrix& m, double p) {
    return std::isinf(p) ? support::spec_norm_oracle(m) : m.norm();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

// ---------------------------------------------------------------------------

Outcome lipschitz_dominance() {
    Rng rng(1001);
    int checks = 0, failures = 0;
    double worst = -kInf;
    for (int problem = 0; problem < 100; ++problem) {
        const int d = rng.integer(2, 20);
        const int d_obs = rng.integer(1, 15);
        const bool singular = problem % 2 == 0;
        const int s = singular ? rng.integer(1, d - 1) : d;
        const Matrix g = rng.randn(d_obs, d) * rng.uniform(0.1, 3.0);
        const Matrix l = rng.randn(d, s) * rng.uniform(0.2, 2.0);
        const Vector mu = l * rng.randn(s, 1);
        const Matrix gamma_obs = support::random_spd(rng, d_obs, 0.05);
        const Vector m = g * mu + rng.randn(d_obs, 1);
        const GaussianPrior prior(mu, PsdFactor(l));
        const GaussianPosterior exact = posterior(g, prior, gamma_obs, m);
        const Matrix w = support::inv_sqrt_oracle(gamma_obs);
        for (int k = 0; k < 3; ++k) {
            const Matrix g_hat = g + rng.randn(d_obs, d) * std::pow(10.0, rng.uniform(-5.0, 0.0));
            const GaussianPosterior approx = approx_posterior(g_hat, prior, gamma_obs, m);
            const double c = lipschitz_C(g, g_hat, prior, gamma_obs);
            const double cp = lipschitz_Cprime(g, g_hat, prior, gamma_obs, m, c);
            const Matrix db = w * (g - g_hat) * l;
            for (double p : {2.0, kInf}) {
                const double cov_lhs = norm_p(exact.cov - approx.cov, p);
                const double mean_lhs = (exact.mean - approx.mean).norm();
                const double cov_rhs = c * norm_p(db, p);
                const double mean_rhs = cp * norm_p(db, p);
                for (auto [lhs, rhs] : {std::pair{cov_lhs, cov_rhs}, std::pair{mean_lhs, mean_rhs}}) {
                    ++checks;
                    if (rhs > 0.0) worst = std::max(worst, lhs / rhs - 1.0);
                    if (!(lhs <= rhs * (1.0 + kDominanceSlack))) ++failures;
                }
            }
        }
    }
    return {failures == 0, std::to_string(checks) + " checks, " + std::to_string(failures) +
                               " violations, max lhs/rhs - 1 = " + fmt("%.3g", worst)};
}

// ---------------------------------------------------------------------------

BenchConfig benchmark_config(std::uint64_t seed) {
    BenchConfig cfg;
    cfg.d = 30;
    cfg.d_out = 3;
    cfg.n_obs = 80;
    cfg.dt = 0.1;
    cfg.t_end = 8.0;
    cfg.T_horizon = 8.5;
    cfg.prior_samples = 11;
    cfg.lambda_grid = {0.01, 1.0, 100.0};
    cfg.ranks.clear();
    for (std::size_t r = 1; r <= 29; ++r) cfg.ranks.push_back(r);
    cfg.seed = seed;
    return cfg;
}

struct SweepRuns {
    std::vector<SweepResult> results;
    double seconds = 0.0;
};

SweepRuns run_benchmark_sweeps() {
    SweepRuns runs;
    const auto t0 = std::chrono::steady_clock::now();
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        runs.results.push_back(run_sweep(benchmark_config(seed)));
    }
    runs.seconds = seconds_since(t0);
    return runs;
}

Outcome sweep_dominance(const SweepRuns& runs) {
    std::size_t rows = 0, failures = 0;
    for (const SweepResult& res : runs.results) {
        for (const SweepRow& r : res.rows) {
            ++rows;
            const double scale = std::max({1.0, r.cov_bound, r.mean_bound});
            const bool cov_ok = r.cov_err <= r.cov_bound * (1 + kDominanceSlack) + kDominanceSlack * scale;
            const bool mean_ok = r.mean_err <= r.mean_bound * (1 + kDominanceSlack) + kDominanceSlack * scale;
            if (!cov_ok || !mean_ok) ++failures;
        }
    }
    const bool in_time = runs.seconds < kLimitSweep;
    return {failures == 0 && in_time && rows == 5 * 3 * 2 * 29,
            std::to_string(rows) + " rows over 5 seeds, " + std::to_string(failures) +
                " violations, " + fmt("%.1f", runs.seconds) + " s"};
}

std::vector<double> average_ranks(const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(v.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
        for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = 0.5 * static_cast<double>(i + j) + 1.0;
        i = j + 1;
    }
    return ranks;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    const std::vector<double> rx = average_ranks(x), ry = average_ranks(y);
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) mx += rx[i], my += ry[i];
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    return (sxx == 0 || syy == 0) ? 0.0 : sxy / std::sqrt(sxx * syy);
}

double safe_log(double x) { return std::log(std::max(x, 1e-300)); }

Outcome qualitative_trends(const SweepRuns& runs) {
    double worst_rho = -1.0;
    std::string worst_at;
    std::size_t groups = 0;
    std::size_t monotone = 0, total = 0;
    for (std::size_t s = 0; s < runs.results.size(); ++s) {
        const SweepResult& res = runs.results[s];
        std::map<std::pair<double, std::string>, std::vector<const SweepRow*>> by_group;
        std::map<std::pair<std::string, std::size_t>, std::map<double, const SweepRow*>> by_rank;
        for (const SweepRow& r : res.rows) {
            by_group[{r.lambda, r.variant}].push_back(&r);
            by_rank[{r.variant, r.rank}][r.lambda] = &r;
        }
        for (const auto& [key, rows] : by_group) {
            ++groups;
            std::vector<double> rank;
            std::vector<std::vector<double>> series(4);
            for (const SweepRow* r : rows) {
                rank.push_back(static_cast<double>(r->rank));
                series[0].push_back(safe_log(r->mean_err));
                series[1].push_back(safe_log(r->cov_err));
                series[2].push_back(safe_log(r->mean_bound));
                series[3].push_back(safe_log(r->cov_bound));
            }
            static const char* names[] = {"mean_err", "cov_err", "mean_bound", "cov_bound"};
            for (int k = 0; k < 4; ++k) {
                const double rho = spearman(rank, series[k]);
                if (rho > worst_rho) {
                    worst_rho = rho;
                    worst_at = std::string(names[k]) + " seed " + std::to_string(s) + " lambda " +
                               format_double(key.first) + " " + key.second;
                }
            }
        }
        for (const auto& [key, per_lambda] : by_rank) {
            ++total;
            bool ok = true;
            const SweepRow* prev = nullptr;
            for (const auto& [lambda, row] : per_lambda) {
                if (prev && (row->mean_err < prev->mean_err || row->cov_err < prev->cov_err)) ok = false;
                prev = row;
            }
            if (ok) ++monotone;
        }
    }
    const double fraction = total ? static_cast<double>(monotone) / static_cast<double>(total) : 0.0;
    const bool in_time = runs.seconds < kLimitSweep;
    return {worst_rho <= kSpearmanMax && fraction >= kMonotoneFraction && in_time,
            std::to_string(groups) + " (seed, lambda, variant) groups, max Spearman " +
                fmt("%.4f", worst_rho) + " (" + worst_at + "), lambda-monotone " +
                std::to_string(monotone) + "/" + std::to_string(total) + " = " +
                fmt("%.3f", fraction)};
}

// ---------------------------------------------------------------------------

Outcome impulse_identity() {
    Rng rng(1003);
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
        const int d = rng.integer(2, 12);
        const int q = rng.integer(1, 4);
        const LtiSystem sys = support::random_system(rng, d, q);
        const PsdFactor l = support::random_factor(rng, d, rng.integer(1, d));
        const std::size_t n = static_cast<std::size_t>(rng.integer(1, 15));
        const ObservationGrid grid = ObservationGrid::equidistant(rng.uniform(0.05, 0.5), n);
        Matrix g(static_cast<Eigen::Index>(n) * q, d);
        for (std::size_t i = 0; i < n; ++i) {
            g.middleRows(static_cast<Eigen::Index>(i) * q, q) =
                sys.c() * support::expm_oracle(sys.a() * grid.times()[i]);
        }
        const Matrix gamma_obs = block_diagonal(sys.gamma_eps(), n);
        const Matrix b = support::inv_sqrt_oracle(gamma_obs) * g * l.factor();
        Matrix stacked(b.rows(), b.cols());
        for (std::size_t i = 0; i < n; ++i) {
            stacked.middleRows(static_cast<Eigen::Index>(i) * q, q) =
                impulse_response(sys, l, grid.times()[i]);
        }
        worst = std::max(worst, (stacked - b).norm() / b.norm());
    }
    return {worst <= kImpulseTol, "20 systems, max relative difference " + fmt("%.3g", worst)};
}

// ---------------------------------------------------------------------------

struct TraceCase {
    LtiSystem sys;
    GaussianPrior prior;
    double horizon;
};

std::vector<TraceCase> trace_cases() {
    Rng rng(1004);
    std::vector<TraceCase> out;
    for (int k = 0; k < 10; ++k) {
        const int d = rng.integer(4, 10);
        const int q = rng.integer(1, 3);
        const LtiSystem sys = support::random_system(rng, d, q, rng.uniform(0.2, 1.0));
        const int s = k % 2 == 0 ? d : rng.integer(1, d - 1);
        out.push_back({sys, GaussianPrior(support::random_factor(rng, d, s)), rng.uniform(1.0, 4.0)});
    }
    return out;
}

Outcome limited_trace_identity(const std::vector<TraceCase>& cases) {
    double worst = 0.0;
    std::string worst_at;
    int checks = 0;
    for (const TraceCase& tc : cases) {
        const Balancing bal(tc.sys, tc.prior.cov_factor(), Variant::pdtlbt(tc.horizon));
        const std::size_t d = static_cast<std::size_t>(tc.sys.state_dim());
        for (std::size_t r : {std::size_t{1}, d / 2}) {
            const std::size_t used = std::min(r, bal.hankel_rank());
            const ReducedModel model = bal.reduce(used);
            const double oracle = support::l2_error_limited(tc.sys, tc.prior.factor(), model, tc.horizon);
            const double rhs = prop22_rhs(tc.sys, tc.prior, model, tc.horizon).value;
            const double diff = support::rel_diff(rhs, oracle);
            if (diff > worst) {
                worst = diff;
                worst_at = "case " + std::to_string(&tc - cases.data()) + " r=" + std::to_string(used) +
                           " of m=" + std::to_string(bal.hankel_rank()) + ", quadrature " +
                           fmt("%.6g", oracle) + ", prop22_rhs " + fmt("%.6g", rhs);
            }
            ++checks;
        }
    }
    return {worst <= kLimitedIdentityTol,
            std::to_string(checks) + " comparisons, max relative difference " + fmt("%.3g", worst) +
                (worst_at.empty() ? "" : " (" + worst_at + ")")};
}

Outcome infinite_trace_dominance(const std::vector<TraceCase>& cases) {
    double worst = -kInf;
    int checks = 0;
    for (const TraceCase& tc : cases) {
        const Balancing bal(tc.sys, tc.prior.cov_factor(), Variant::pdbt());
        const double scale = (tc.sys.output_weight() * bal.gramians().p).trace();
        const std::size_t d = static_cast<std::size_t>(tc.sys.state_dim());
        for (std::size_t r : {std::size_t{1}, d / 2}) {
            const std::size_t used = std::min(r, bal.hankel_rank());
            const ReducedModel model = bal.reduce(used);
            const double quad = support::l2_error_infinite(tc.sys, tc.prior.factor(), model);
            const double rhs = prop21_rhs(tc.sys, tc.prior, model, bal.truncated(used)).value;
            worst = std::max(worst, (quad - rhs) / scale);
            ++checks;
        }
    }
    return {worst <= kInfiniteSlack, std::to_string(checks) + " comparisons, max (quadrature - rhs)/||h||^2 = " +
                                         fmt("%.3g", worst)};
}

// ---------------------------------------------------------------------------

Outcome gramian_oracles() {
    double worst_closed = 0.0;
    Matrix a = Matrix::Zero(2, 2);
    a.diagonal() << -1.0, -2.0;
    const LtiSystem diag(a, Matrix::Ones(1, 2), Matrix::Ones(1, 1));
    const GramianPair inf = gramians_infinite(diag, Matrix::Identity(2, 2));
    Matrix p_expected = Matrix::Zero(2, 2);
    p_expected.diagonal() << 0.5, 0.25;
    Matrix q_expected(2, 2);
    q_expected << 0.5, 1.0 / 3.0, 1.0 / 3.0, 0.25;
    worst_closed = std::max(worst_closed, (inf.p - p_expected).cwiseAbs().maxCoeff());
    worst_closed = std::max(worst_closed, (inf.q - q_expected).cwiseAbs().maxCoeff());
    const GramianPair ones = gramians_infinite(diag, Matrix::Ones(2, 2));
    worst_closed = std::max(worst_closed, (ones.p - q_expected).cwiseAbs().maxCoeff());
    for (double t : {0.5, 1.0, 3.0}) {
        const GramianPair lim = gramians_limited(diag, Matrix::Identity(2, 2), t);
        Matrix expected = Matrix::Zero(2, 2);
        expected.diagonal() << (1 - std::exp(-2 * t)) / 2, (1 - std::exp(-4 * t)) / 4;
        worst_closed = std::max(worst_closed, (lim.p - expected).cwiseAbs().maxCoeff());
    }
    const LtiSystem zero(Matrix::Zero(2, 2), Matrix::Ones(1, 2), Matrix::Ones(1, 1));
    worst_closed = std::max(
        worst_closed,
        (gramians_limited(zero, Matrix::Identity(2, 2), 2.0).p - 2.0 * Matrix::Identity(2, 2))
            .cwiseAbs()
            .maxCoeff());

    Rng rng(1006);
    double worst_consistency = 0.0;
    for (int k = 0; k < 10; ++k) {
        const int d = rng.integer(2, 8);
        const LtiSystem sys = support::random_system(rng, d, rng.integer(1, 3));
        const Matrix gamma_pr = support::random_factor(rng, d, rng.integer(1, d)).represented();
        const double horizon = 50.0 / std::abs(support::spectral_abscissa_oracle(sys.a()));
        const GramianPair gi = gramians_infinite(sys, gamma_pr);
        const GramianPair gl = gramians_limited(sys, gamma_pr, horizon);
        worst_consistency = std::max({worst_consistency, support::rel_diff(gi.p, gl.p),
                                      support::rel_diff(gi.q, gl.q)});
    }
    return {worst_closed <= kClosedFormTol && worst_consistency <= kHorizonConsistencyTol,
            "closed-form max error " + fmt("%.3g", worst_closed) +
                ", infinite/limited max relative difference " + fmt("%.3g", worst_consistency)};
}

// ---------------------------------------------------------------------------

Outcome exact_recovery() {
    Rng rng(1007);
    double worst_mean = 0.0, worst_cov = 0.0;
    int deficient = 0;
    for (int k = 0; k < 10; ++k) {
        const int d = rng.integer(3, 10);
        const int q = rng.integer(1, 3);
        const LtiSystem sys = support::random_system(rng, d, q);
        const int s = k % 2 == 0 ? d : rng.integer(1, d - 1);
        if (s < d) ++deficient;
        const Matrix l = support::random_factor(rng, d, s).factor();
        const GaussianPrior prior(l * rng.randn(s, 1), PsdFactor(l));
        const ObservationGrid grid = ObservationGrid::equidistant(rng.uniform(0.1, 0.4), 12);
        const Matrix g = forward_map(sys, grid);
        const Matrix gamma_obs = obs_covariance(sys, grid.size()).cov;
        const Vector m = g * (l * rng.randn(s, 1)) + 0.05 * rng.randn(g.rows(), 1);
        const GaussianPosterior exact = posterior(g, prior, gamma_obs, m);
        for (const Variant& v : {Variant::pdbt(), Variant::pdtlbt(grid.times().back() + 0.5)}) {
            const Balancing bal(sys, prior.cov_factor(), v);
            const ReducedModel model = bal.reduce(bal.hankel_rank());
            const GaussianPosterior approx =
                approx_posterior(reduced_forward_map(model, grid), prior, gamma_obs, m);
            worst_mean = std::max(worst_mean, (exact.mean - approx.mean).norm() / exact.mean.norm());
            worst_cov = std::max(worst_cov, (exact.cov - approx.cov).norm() / exact.cov.norm());
        }
    }
    return {worst_mean <= kRecoveryTol && worst_cov <= kRecoveryTol,
            "10 systems (" + std::to_string(deficient) + " rank-deficient priors), both variants, max mean " +
                fmt("%.3g", worst_mean) + ", max cov " + fmt("%.3g", worst_cov)};
}

// ---------------------------------------------------------------------------

Outcome sweep_determinism() {
    const fs::path dir = fs::temp_directory_path() / "balred_acceptance_determinism";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const fs::path cfg = dir / "bench.cfg";
    {
        std::ofstream out(cfg);
        out << format_bench_config(benchmark_config(11));
    }
    std::string csv[2];
    for (int k = 0; k < 2; ++k) {
        cli::SweepArgs args;
        args.config = cfg;
        args.out_dir = dir / ("run" + std::to_string(k));
        std::ostringstream out, err;
        if (cli::cmd_sweep(args, out, err) != cli::kExitOk) {
            fs::remove_all(dir);
            return {false, "cmd_sweep failed: " + err.str()};
        }
        std::ifstream in(args.out_dir / "sweep.csv", std::ios::binary);
        std::ostringstream os;
        os << in.rdbuf();
        csv[k] = os.str();
    }
    fs::remove_all(dir);
    const bool same = !csv[0].empty() && csv[0] == csv[1];
    return {same, std::to_string(csv[0].size()) + " bytes, " + (same ? "identical" : "different")};
}

// ---------------------------------------------------------------------------

Outcome perturbation_properties() {
    Rng rng(1010);
    int inverse_fail = 0, damped_fail = 0;
    double worst = -kInf;
    for (int trial = 0; trial < 200; ++trial) {
        const int n = rng.integer(1, 10);
        const Matrix a1 = rng.randn(n, n) + rng.uniform(0.5, 3.0) * Matrix::Identity(n, n);
        const Matrix a2 = a1 + rng.randn(n, n) * std::pow(10.0, rng.uniform(-4.0, 0.0));
        const Matrix i1 = a1.inverse(), i2 = a2.inverse();
        for (double p : {2.0, kInf}) {
            const double lhs = norm_p(i1 - i2, p);
            const double rhs = spectral_norm(i1) * spectral_norm(i2) * norm_p(a1 - a2, p);
            worst = std::max(worst, lhs / rhs - 1.0);
            if (!(lhs <= rhs * (1.0 + kDominanceSlack))) ++inverse_fail;
        }
    }
    for (int trial = 0; trial < 200; ++trial) {
        const int rows = rng.integer(1, 10), cols = rng.integer(1, 10);
        const Matrix b1 = rng.randn(rows, cols) * rng.uniform(0.1, 3.0);
        const Matrix b2 = b1 + rng.randn(rows, cols) * std::pow(10.0, rng.uniform(-4.0, 0.5));
        const Matrix id = Matrix::Identity(rows, rows);
        const Matrix m1 = (id + b1 * b1.transpose()).inverse();
        const Matrix m2 = (id + b2 * b2.transpose()).inverse();
        const double dconst = lipschitz_C_whitened(b1, b2, Matrix::Identity(cols, cols));
        for (double p : {2.0, kInf}) {
            const double lhs = norm_p(b1.transpose() * m1 * b1 - b2.transpose() * m2 * b2, p);
            const double rhs = dconst * norm_p(b1 - b2, p);
            worst = std::max(worst, lhs / rhs - 1.0);
            if (!(lhs <= rhs * (1.0 + kDominanceSlack))) ++damped_fail;
        }
    }
    return {inverse_fail == 0 && damped_fail == 0,
            "inverse perturbation 200 instances (" + std::to_string(inverse_fail) +
                " violations), damped Gram 200 instances (" + std::to_string(damped_fail) +
                " violations), max lhs/rhs - 1 = " + fmt("%.3g", worst)};
}

}  // namespace

int main() {
    struct Entry {
        int id;
        const char* name;
        std::function<Outcome()> run;
    };
    SweepRuns sweeps;
    bool sweeps_done = false;
    auto shared_sweeps = [&]() -> const SweepRuns& {
        if (!sweeps_done) {
            sweeps = run_benchmark_sweeps();
            sweeps_done = true;
        }
        return sweeps;
    };
    const std::vector<TraceCase> cases = trace_cases();

    const std::vector<Entry> entries = {
        {1, "posterior Lipschitz dominance, 100 problems x 3 perturbations",
         [] {
             const auto t0 = std::chrono::steady_clock::now();
             Outcome o = lipschitz_dominance();
             const double s = seconds_since(t0);
             o.pass = o.pass && s < kLimit1;
             o.detail += ", " + fmt("%.2f", s) + " s";
             return o;
         }},
        {2, "sweep bound dominance, d=30 benchmark, 5 seeds", [&] { return sweep_dominance(shared_sweeps()); }},
        {3, "stacked impulse responses equal whitened G L_pr", impulse_identity},
        {4, "time-limited trace equals error-integral quadrature", [&] { return limited_trace_identity(cases); }},
        {5, "infinite-horizon trace dominates error-integral quadrature",
         [&] { return infinite_trace_dominance(cases); }},
        {6, "Gramian closed forms and horizon consistency", gramian_oracles},
        {7, "exact recovery at the numerical Hankel rank", exact_recovery},
        {8, "downward rank trends and lambda ordering", [&] { return qualitative_trends(shared_sweeps()); }},
        {9, "cmd_sweep determinism", sweep_determinism},
        {10, "inverse and damped-Gram perturbation properties", perturbation_properties},
    };

    int failed = 0;
    for (const Entry& e : entries) {
        Outcome o;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            o = e.run();
        } catch (const std::exception& ex) {
            o = {false, std::string("exception: ") + ex.what()};
        }
        if (!o.pass) ++failed;
        std::printf("%s %2d  %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", e.id, e.name,
                    o.detail.c_str(), seconds_since(t0));
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
