#include "balred/bench.hpp"

#include "balred/balancing.hpp"
#include "balred/bounds.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

namespace balred {

namespace {

enum StreamTag : std::uint32_t {
    kSystemStream = 1,
    kPriorStream = 2,
    kNoiseStream = 3,
    kTruthStream = 4,
    kSweepNoiseStream = 5,
};

std::mt19937_64 make_rng(std::uint64_t seed, std::uint32_t tag, std::uint32_t index = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                      static_cast<std::uint32_t>(seed >> 32), tag, index};
    return std::mt19937_64(seq);
}

Matrix randn(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
        for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
    }
    return m;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(s);
    while (std::getline(is, item, sep)) out.push_back(trim(item));
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

double parse_real(const std::string& key, const std::string& text) {
    double v = 0.0;
    const char* first = text.data();
    const char* last = first + text.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) {
        throw ConfigError("key '" + key + "': '" + text + "' is not a number");
    }
    return v;
}

std::uint64_t parse_count(const std::string& key, const std::string& text) {
    std::uint64_t v = 0;
    const char* first = text.data();
    const char* last = first + text.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) {
        throw ConfigError("key '" + key + "': '" + text + "' is not a non-negative integer");
    }
    return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
    if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
    if (text == "false" || text == "0" || text == "no" || text == "off") return false;
    throw ConfigError("key '" + key + "': '" + text + "' is not a boolean");
}

std::vector<std::size_t> parse_ranks(const std::string& key, const std::string& text) {
    std::vector<std::size_t> ranks;
    for (const std::string& item : split(text, ',')) {
        if (item.empty()) throw ConfigError("key '" + key + "': empty list entry");
        const auto dots = item.find("..");
        if (dots == std::string::npos) {
            ranks.push_back(parse_count(key, item));
            continue;
        }
        const auto lo = parse_count(key, trim(item.substr(0, dots)));
        const auto hi = parse_count(key, trim(item.substr(dots + 2)));
        if (hi < lo) throw ConfigError("key '" + key + "': empty range '" + item + "'");
        for (auto r = lo; r <= hi; ++r) ranks.push_back(r);
    }
    return ranks;
}

std::string join_ranks(const std::vector<std::size_t>& ranks) {
    std::string out;
    for (std::size_t i = 0; i < ranks.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(ranks[i]);
    }
    return out;
}

SweepError::Kind classify(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const DimensionError*>(&e) ||
        dynamic_cast<const ArgumentError*>(&e) || dynamic_cast<const RankError*>(&e)) {
        return SweepError::Kind::Config;
    }
    return SweepError::Kind::Numerical;
}

int variant_order(const std::string& v) { return v == "pdbt" ? 0 : 1; }

}  // namespace

void BenchConfig::validate() const {
    if (d < 2) throw ConfigError("d must be at least 2");
    if (d_out < 1) throw ConfigError("d_out must be at least 1");
    if (n_obs < 1) throw ConfigError("n_obs must be at least 1");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt must be positive");
    if (std::abs(static_cast<double>(n_obs) * dt - t_end) > 1e-12 * std::max(1.0, t_end)) {
        throw ConfigError("n_obs * dt = " + format_double(static_cast<double>(n_obs) * dt) +
                          " does not match t_end = " + format_double(t_end));
    }
    if (!(T_horizon > t_end) || !std::isfinite(T_horizon)) {
        throw ConfigError("T_horizon must exceed t_end");
    }
    if (prior_samples < 2) throw ConfigError("prior_samples must be at least 2");
    if (lambda_grid.empty()) throw ConfigError("lambda_grid is empty");
    for (double l : lambda_grid) {
        if (!(l > 0.0) || !std::isfinite(l)) throw ConfigError("lambda values must be positive");
    }
    if (ranks.empty()) throw ConfigError("ranks is empty");
    for (std::size_t r : ranks) {
        if (r < 1 || r > d) {
            throw ConfigError("rank " + std::to_string(r) + " is outside 1.." +
                              std::to_string(d));
        }
    }
    if (!pdbt && !pdtlbt) throw ConfigError("no variant enabled");
}

void apply_config_value(BenchConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "d") {
        cfg.d = parse_count(key, value);
    } else if (key == "d_out") {
        cfg.d_out = parse_count(key, value);
    } else if (key == "n_obs") {
        cfg.n_obs = parse_count(key, value);
    } else if (key == "dt") {
        cfg.dt = parse_real(key, value);
    } else if (key == "t_end") {
        cfg.t_end = parse_real(key, value);
    } else if (key == "T_horizon") {
        cfg.T_horizon = parse_real(key, value);
    } else if (key == "prior_samples") {
        cfg.prior_samples = parse_count(key, value);
    } else if (key == "lambda_grid") {
        cfg.lambda_grid.clear();
        for (const std::string& item : split(value, ',')) {
            cfg.lambda_grid.push_back(parse_real(key, item));
        }
    } else if (key == "ranks") {
        cfg.ranks = parse_ranks(key, value);
    } else if (key == "seed") {
        cfg.seed = parse_count(key, value);
    } else if (key == "pdbt") {
        cfg.pdbt = parse_bool(key, value);
    } else if (key == "pdtlbt") {
        cfg.pdtlbt = parse_bool(key, value);
    } else {
        throw ConfigError("unknown configuration key '" + key + "'");
    }
}

BenchConfig parse_bench_config(const std::string& text) {
    BenchConfig cfg;
    std::istringstream is(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        }
        apply_config_value(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
}

std::string format_bench_config(const BenchConfig& cfg) {
    std::ostringstream os;
    os << "d = " << cfg.d << '\n'
       << "d_out = " << cfg.d_out << '\n'
       << "n_obs = " << cfg.n_obs << '\n'
       << "dt = " << format_double(cfg.dt) << '\n'
       << "t_end = " << format_double(cfg.t_end) << '\n'
       << "T_horizon = " << format_double(cfg.T_horizon) << '\n'
       << "prior_samples = " << cfg.prior_samples << '\n'
       << "lambda_grid = ";
    for (std::size_t i = 0; i < cfg.lambda_grid.size(); ++i) {
        os << (i ? "," : "") << format_double(cfg.lambda_grid[i]);
    }
    os << '\n'
       << "ranks = " << join_ranks(cfg.ranks) << '\n'
       << "seed = " << cfg.seed << '\n'
       << "pdbt = " << (cfg.pdbt ? "true" : "false") << '\n'
       << "pdtlbt = " << (cfg.pdtlbt ? "true" : "false") << '\n';
    return os.str();
}

LtiSystem gen_stable_system(std::size_t d, std::size_t d_out, std::uint64_t seed) {
    if (d < 2 || d_out < 1) throw ArgumentError("gen_stable_system needs d >= 2 and d_out >= 1");
    auto rng = make_rng(seed, kSystemStream);
    const auto n = static_cast<Eigen::Index>(d);
    const auto p = static_cast<Eigen::Index>(d_out);
    const Matrix m = randn(rng, n, n) / std::sqrt(static_cast<double>(d));
    const double top = Eigen::SelfAdjointEigenSolver<Matrix>(symmetrized(m), Eigen::EigenvaluesOnly)
                           .eigenvalues()
                           .maxCoeff();
    const Matrix a = m - (std::abs(top) + 0.5) * Matrix::Identity(n, n);
    const Matrix c = randn(rng, p, n);
    std::uniform_real_distribution<double> unif(std::log(5e-4), std::log(2.5e-3));
    Vector sd(p);
    for (Eigen::Index i = 0; i < p; ++i) sd(i) = std::exp(unif(rng));
    return LtiSystem(a, c, Matrix(sd.cwiseProduct(sd).asDiagonal()));
}

Matrix draw_prior_samples(const LtiSystem& system, std::size_t n_samples, std::uint64_t seed) {
    if (n_samples < 2) throw ArgumentError("an empirical prior needs at least two samples");
    const Matrix& a = system.a();
    if (spectral_abscissa(a) >= 0.0) {
        throw StabilityError("empirical prior generation requires a stable A");
    }
    auto rng = make_rng(seed, kPriorStream);
    const Eigen::Index d = a.rows();
    const Matrix b = randn(rng, d, 3);
    const Matrix p = solve_lyapunov(a, b * b.transpose(), LyapunovForm::Reachability);
    const Matrix lp = psd_sqrt_factor(p).factor();
    return lp * randn(rng, lp.cols(), static_cast<Eigen::Index>(n_samples));
}

GaussianPrior gen_empirical_prior(const LtiSystem& system, std::size_t n_samples,
                                  std::uint64_t seed) {
    const Matrix x = draw_prior_samples(system, n_samples, seed);
    const Eigen::Index d = x.rows();
    const Eigen::Index ns = x.cols();
    const Vector mean = x.rowwise().mean();
    const Matrix centered =
        (x.colwise() - mean) / std::sqrt(static_cast<double>(n_samples - 1));
    Eigen::JacobiSVD<Matrix> svd(centered, Eigen::ComputeThinU);
    const Eigen::Index s = std::min<Eigen::Index>(ns - 1, d);
    Matrix factor = svd.matrixU().leftCols(s) * svd.singularValues().head(s).asDiagonal();
    for (Eigen::Index j = 0; j < s; ++j) {
        Eigen::Index at = 0;
        factor.col(j).cwiseAbs().maxCoeff(&at);
        if (factor(at, j) < 0.0) factor.col(j) *= -1.0;
    }
    return GaussianPrior(PsdFactor(std::move(factor)));
}

Vector gen_data(const LtiSystem& system, const ObservationGrid& grid, const Vector& true_p,
                std::uint64_t seed, double noise_scale) {
    Vector m = forward_map(system, grid) * true_p;
    if (noise_scale == 0.0) return m;
    auto rng = make_rng(seed, kNoiseStream);
    const Eigen::LLT<Matrix> llt(system.gamma_eps());
    const Matrix root = llt.matrixL();
    const Eigen::Index p = system.output_dim();
    for (std::size_t k = 0; k < grid.size(); ++k) {
        m.segment(static_cast<Eigen::Index>(k) * p, p) += noise_scale * (root * randn(rng, p, 1));
    }
    return m;
}

SweepResult run_sweep(const BenchConfig& cfg, unsigned threads) {
    cfg.validate();
    const LtiSystem system = gen_stable_system(cfg.d, cfg.d_out, cfg.seed);
    const GaussianPrior base = gen_empirical_prior(system, cfg.prior_samples, cfg.seed);
    const ObservationGrid grid = ObservationGrid::equidistant(cfg.dt, cfg.n_obs, cfg.T_horizon);

    std::vector<std::string> variants;
    if (cfg.pdbt) variants.emplace_back("pdbt");
    if (cfg.pdtlbt) variants.emplace_back("pdtlbt");

    struct LambdaCase {
        double lambda;
        SmoothingProblem problem;
        ProblemOperators ops;
    };
    std::vector<LambdaCase> cases;
    cases.reserve(cfg.lambda_grid.size());
    for (std::size_t i = 0; i < cfg.lambda_grid.size(); ++i) {
        const double lambda = cfg.lambda_grid[i];
        GaussianPrior prior = base.scaled(lambda);
        auto rng = make_rng(cfg.seed, kTruthStream, static_cast<std::uint32_t>(i));
        const Vector truth = prior.factor() * randn(rng, prior.factor().cols(), 1);
        const std::uint64_t noise_seed =
            cfg.seed ^ (std::uint64_t{kSweepNoiseStream} << 56) ^ (std::uint64_t{i} << 40);
        Vector data = gen_data(system, grid, truth, noise_seed);
        SmoothingProblem problem(system, grid, std::move(prior), std::move(data));
        ProblemOperators ops = prepare_operators(problem);
        cases.push_back({lambda, std::move(problem), std::move(ops)});
    }

    struct Task {
        std::size_t lambda_index;
        std::string variant;
        std::vector<SweepRow> rows;
        SweepMeta meta;
        std::exception_ptr error;
    };
    std::vector<Task> tasks;
    for (std::size_t i = 0; i < cases.size(); ++i) {
        for (const std::string& v : variants) tasks.push_back({i, v, {}, {}, nullptr});
    }

    auto run_task = [&](Task& task) {
        const LambdaCase& lc = cases[task.lambda_index];
        std::size_t current_rank = 0;
        try {
            const Variant variant =
                task.variant == "pdbt" ? Variant::pdbt() : Variant::pdtlbt(cfg.T_horizon);
            const Balancing bal(system, lc.problem.prior.cov_factor(), variant);
            task.meta = {lc.lambda, task.variant, bal.hankel_rank(), bal.discarded()};
            for (std::size_t r : cfg.ranks) {
                current_rank = r;
                const std::size_t used = std::min(r, bal.hankel_rank());
                const ReducedModel model = bal.reduce(used);
                const TruncatedBundle bundle = bal.truncated(used);
                const BoundReport rep = certify(lc.problem, lc.ops, model, bundle);
                task.rows.push_back({lc.lambda, task.variant, r, rep.actual_mean_err,
                                     rep.actual_cov_err, rep.mean_bound, rep.cov_bound,
                                     rep.pph_err_actual, rep.pph_err_bound, rep.kappa,
                                     rep.lipschitz_C, rep.lipschitz_Cprime, rep.hsv_tail});
            }
        } catch (const std::exception& e) {
            task.error = std::make_exception_ptr(
                SweepError(std::string(e.what()) + " (lambda=" + format_double(lc.lambda) +
                               ", rank=" + std::to_string(current_rank) +
                               ", variant=" + task.variant + ")",
                           classify(e), lc.lambda, current_rank, task.variant));
        }
    };

    unsigned workers = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, static_cast<unsigned>(tasks.size()));
    if (workers <= 1) {
        for (Task& t : tasks) run_task(t);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < tasks.size(); i = next++) run_task(tasks[i]);
            });
        }
        for (std::thread& t : pool) t.join();
    }

    SweepResult result;
    for (Task& t : tasks) {
        if (t.error) std::rethrow_exception(t.error);
        result.rows.insert(result.rows.end(), t.rows.begin(), t.rows.end());
        result.meta.push_back(t.meta);
    }
    std::stable_sort(result.rows.begin(), result.rows.end(),
                     [](const SweepRow& x, const SweepRow& y) {
                         if (x.lambda != y.lambda) return x.lambda < y.lambda;
                         if (x.variant != y.variant) {
                             return variant_order(x.variant) < variant_order(y.variant);
                         }
                         return x.rank < y.rank;
                     });
    std::stable_sort(result.meta.begin(), result.meta.end(),
                     [](const SweepMeta& x, const SweepMeta& y) {
                         if (x.lambda != y.lambda) return x.lambda < y.lambda;
                         return variant_order(x.variant) < variant_order(y.variant);
                     });
    return result;
}

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, ptr);
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
    os << kSweepCsvHeader << '\n';
    for (const SweepRow& r : rows) {
        os << format_double(r.lambda) << ',' << r.variant << ',' << r.rank << ','
           << format_double(r.mean_err) << ',' << format_double(r.cov_err) << ','
           << format_double(r.mean_bound) << ',' << format_double(r.cov_bound) << ','
           << format_double(r.pph_err) << ',' << format_double(r.pph_bound) << ','
           << format_double(r.kappa) << ',' << format_double(r.C) << ','
           << format_double(r.Cprime) << ',' << format_double(r.hsv_tail) << '\n';
    }
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream os;
    write_sweep_csv(os, rows);
    return os.str();
}

std::vector<SweepRow> parse_sweep_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || trim(line) != kSweepCsvHeader) {
        throw ConfigError("sweep CSV header does not match");
    }
    std::vector<SweepRow> rows;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto f = split(trim(line), ',');
        if (f.size() != 13) {
            throw ConfigError("sweep CSV line " + std::to_string(lineno) + " has " +
                              std::to_string(f.size()) + " fields");
        }
        if (f[1] != "pdbt" && f[1] != "pdtlbt") {
            throw ConfigError("sweep CSV line " + std::to_string(lineno) + ": unknown variant");
        }
        SweepRow r;
        r.lambda = parse_real("lambda", f[0]);
        r.variant = f[1];
        r.rank = parse_count("rank", f[2]);
        r.mean_err = parse_real("mean_err", f[3]);
        r.cov_err = parse_real("cov_err", f[4]);
        r.mean_bound = parse_real("mean_bound", f[5]);
        r.cov_bound = parse_real("cov_bound", f[6]);
        r.pph_err = parse_real("pph_err", f[7]);
        r.pph_bound = parse_real("pph_bound", f[8]);
        r.kappa = parse_real("kappa", f[9]);
        r.C = parse_real("C", f[10]);
        r.Cprime = parse_real("Cprime", f[11]);
        r.hsv_tail = parse_real("hsv_tail", f[12]);
        rows.push_back(std::move(r));
    }
    return rows;
}

}  // namespace balred
