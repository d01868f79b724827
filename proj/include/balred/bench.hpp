#pragma once

// Synthetic benchmark harness: seeded stable systems, rank-deficient
// empirical priors, noisy data and rank sweeps emitted as CSV.

#include "balred/errors.hpp"
#include "balred/linalg.hpp"
#include "balred/lti.hpp"
#include "balred/posterior.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace balred {

struct BenchConfig {
    std::size_t d = 30;
    std::size_t d_out = 3;
    std::size_t n_obs = 80;
    double dt = 0.1;
    double t_end = 8.0;
    double T_horizon = 8.5;
    std::size_t prior_samples = 11;
    std::vector<double> lambda_grid{0.01, 1.0, 100.0};
    std::vector<std::size_t> ranks;
    std::uint64_t seed = 0;
    bool pdbt = true;
    bool pdtlbt = true;

    /// Throws ConfigError describing the first violated invariant.
    void validate() const;
};

/// Parses flat `key = value` text; '#' starts a comment. Unknown keys and
/// malformed values raise ConfigError.
BenchConfig parse_bench_config(const std::string& text);

/// Applies one `key = value` assignment.
void apply_config_value(BenchConfig& cfg, const std::string& key, const std::string& value);

/// Resolved configuration as `key = value` lines in a fixed key order.
std::string format_bench_config(const BenchConfig& cfg);

struct SweepRow {
    double lambda = 0.0;
    std::string variant;
    std::size_t rank = 0;
    double mean_err = 0.0;
    double cov_err = 0.0;
    double mean_bound = 0.0;
    double cov_bound = 0.0;
    double pph_err = 0.0;
    double pph_bound = 0.0;
    double kappa = 0.0;
    double C = 0.0;
    double Cprime = 0.0;
    double hsv_tail = 0.0;

    friend bool operator==(const SweepRow&, const SweepRow&) = default;
};

/// Per (lambda, variant) balancing facts.
struct SweepMeta {
    double lambda = 0.0;
    std::string variant;
    std::size_t hankel_rank = 0;
    std::size_t discarded = 0;
};

struct SweepResult {
    std::vector<SweepRow> rows;  // sorted by lambda, variant, rank
    std::vector<SweepMeta> meta;
};

/// A constituent failure with the (lambda, rank, variant) it occurred at.
class SweepError : public Error {
public:
    enum class Kind { Config, Numerical };

    SweepError(const std::string& what, Kind kind, double lambda, std::size_t rank,
               std::string variant)
        : Error(what), kind_(kind), lambda_(lambda), rank_(rank), variant_(std::move(variant)) {}

    Kind kind() const noexcept { return kind_; }
    double lambda() const noexcept { return lambda_; }
    std::size_t rank() const noexcept { return rank_; }
    const std::string& variant() const noexcept { return variant_; }

private:
    Kind kind_;
    double lambda_;
    std::size_t rank_;
    std::string variant_;
};

/// A = M - (|lambda_max((M + M^T)/2)| + 0.5) I with M ~ N(0, 1/d) entrywise,
/// C ~ N(0, 1), Gamma_eps diagonal with standard deviations log-uniform in
/// [5e-4, 2.5e-3].
LtiSystem gen_stable_system(std::size_t d, std::size_t d_out, std::uint64_t seed);

/// n_samples draws from N(0, P), A P + P A^T + B B^T = 0, B ~ N(0, 1) of
/// size d x 3, one per column.
Matrix draw_prior_samples(const LtiSystem& system, std::size_t n_samples, std::uint64_t seed);

/// Zero-mean prior whose covariance is the centered empirical covariance of
/// draw_prior_samples. The factor has min(n_samples - 1, d) columns.
GaussianPrior gen_empirical_prior(const LtiSystem& system, std::size_t n_samples,
                                  std::uint64_t seed);

/// G p + noise_scale * eps with eps_k ~ N(0, Gamma_eps) i.i.d.
Vector gen_data(const LtiSystem& system, const ObservationGrid& grid, const Vector& true_p,
                std::uint64_t seed, double noise_scale = 1.0);

/// Ranks above the numerical Hankel rank m are evaluated at m and reported
/// under the requested rank. threads = 0 uses the hardware concurrency.
SweepResult run_sweep(const BenchConfig& cfg, unsigned threads = 0);

inline constexpr const char* kSweepCsvHeader =
    "lambda,variant,rank,mean_err,cov_err,mean_bound,cov_bound,pph_err,pph_bound,kappa,C,"
    "Cprime,hsv_tail";

/// Shortest round-trip decimal; "inf"/"-inf"/"nan" for non-finite values.
std::string format_double(double x);

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);
std::string sweep_csv(const std::vector<SweepRow>& rows);

/// Inverse of write_sweep_csv. Throws ConfigError on malformed input.
std::vector<SweepRow> parse_sweep_csv(std::istream& is);

}  // namespace balred
