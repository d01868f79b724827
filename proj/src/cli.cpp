#include "balred/cli.hpp"

#include "balred/balancing.hpp"
#include "balred/errors.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace balred::cli {

namespace fs = std::filesystem;

namespace {

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path.string() + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

Variant parse_variant(const std::string& name, const std::optional<double>& horizon) {
    if (name == "pdbt") return Variant::pdbt();
    if (name == "pdtlbt") {
        if (!horizon) throw ConfigError("--variant pdtlbt requires --horizon");
        return Variant::pdtlbt(*horizon);
    }
    throw ConfigError("unknown variant '" + name + "' (expected pdbt or pdtlbt)");
}

int exit_for(const std::exception& e, std::ostream& err) {
    err << "error: " << e.what() << '\n';
    if (const auto* sweep = dynamic_cast<const SweepError*>(&e)) {
        return sweep->kind() == SweepError::Kind::Config ? kExitConfig : kExitNumerical;
    }
    if (dynamic_cast<const StabilityError*>(&e)) return kExitUnstable;
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const DimensionError*>(&e) ||
        dynamic_cast<const ArgumentError*>(&e) || dynamic_cast<const RankError*>(&e) ||
        dynamic_cast<const HypothesisError*>(&e) || dynamic_cast<const NotPdError*>(&e) ||
        dynamic_cast<const NotPsdError*>(&e)) {
        return kExitConfig;
    }
    return kExitNumerical;
}

struct LoadedSystem {
    LtiSystem system;
    GaussianPrior prior;
    std::vector<fs::path> inputs;
};

LoadedSystem load_system(const SystemFiles& files) {
    Matrix a = read_matrix_market(files.a);
    Matrix c = read_matrix_market(files.c);
    Matrix geps = read_matrix_market(files.gamma_eps);
    Matrix lpr = read_matrix_market(files.l_pr);
    LtiSystem system(std::move(a), std::move(c), std::move(geps));
    if (lpr.rows() != system.state_dim()) {
        throw DimensionError("L_pr has " + std::to_string(lpr.rows()) +
                             " rows, state dimension is " + std::to_string(system.state_dim()));
    }
    std::vector<fs::path> inputs{files.a, files.c, files.gamma_eps, files.l_pr};
    if (files.mu_pr) {
        Vector mu = read_vector(*files.mu_pr);
        inputs.push_back(*files.mu_pr);
        return {std::move(system), GaussianPrior(std::move(mu), PsdFactor(std::move(lpr))),
                std::move(inputs)};
    }
    return {std::move(system), GaussianPrior(PsdFactor(std::move(lpr))), std::move(inputs)};
}

using ReportField = std::pair<std::string, std::string>;

std::vector<ReportField> report_fields(const BoundReport& rep) {
    auto flag = [](bool b) { return std::string(b ? "true" : "false"); };
    return {
        {"variant", rep.variant.name()},
        {"horizon", rep.variant.is_limited() ? format_double(rep.variant.horizon()) : "inf"},
        {"rank", std::to_string(rep.rank)},
        {"hankel_rank", std::to_string(rep.hankel_rank)},
        {"discarded_hsv", std::to_string(rep.discarded)},
        {"hsv_tail", format_double(rep.hsv_tail)},
        {"trace_term", format_double(rep.trace_term)},
        {"trace_clamped", flag(rep.trace_clamped)},
        {"trace_form", rep.trace_form},
        {"kappa", format_double(rep.kappa)},
        {"kappa_infinite", flag(rep.kappa_infinite)},
        {"C", format_double(rep.lipschitz_C)},
        {"Cprime", format_double(rep.lipschitz_Cprime)},
        {"pph_err_bound", format_double(rep.pph_err_bound)},
        {"pph_err_actual", format_double(rep.pph_err_actual)},
        {"chain_holds", flag(rep.chain_holds)},
        {"cov_bound", format_double(rep.cov_bound)},
        {"actual_cov_err", format_double(rep.actual_cov_err)},
        {"mean_bound", format_double(rep.mean_bound)},
        {"actual_mean_err", format_double(rep.actual_mean_err)},
    };
}

}  // namespace

Matrix parse_matrix_market(std::istream& is, const std::string& origin) {
    std::string line;
    if (!std::getline(is, line)) throw ConfigError(origin + ": empty Matrix Market file");
    std::istringstream banner(line);
    std::string tag, object, format, field, symmetry;
    banner >> tag >> object >> format >> field >> symmetry;
    if (tag != "%%MatrixMarket" || lower(object) != "matrix") {
        throw ConfigError(origin + ": missing %%MatrixMarket matrix banner");
    }
    format = lower(format);
    field = lower(field);
    symmetry = lower(symmetry);
    if (field != "real" && field != "integer" && field != "double") {
        throw ConfigError(origin + ": unsupported field '" + field + "'");
    }
    if (symmetry != "general" && symmetry != "symmetric") {
        throw ConfigError(origin + ": unsupported symmetry '" + symmetry + "'");
    }
    const bool symmetric = symmetry == "symmetric";
    while (std::getline(is, line)) {
        const std::string t = trim(line);
        if (!t.empty() && t[0] != '%') break;
    }
    std::istringstream size_line(line);
    long rows = 0, cols = 0, nnz = 0;
    if (!(size_line >> rows >> cols) || rows < 1 || cols < 1) {
        throw ConfigError(origin + ": malformed size line");
    }
    Matrix m = Matrix::Zero(rows, cols);
    if (format == "array") {
        for (long j = 0; j < cols; ++j) {
            for (long i = symmetric ? j : 0; i < rows; ++i) {
                double v = 0.0;
                if (!(is >> v)) throw ConfigError(origin + ": too few array entries");
                m(i, j) = v;
                if (symmetric) m(j, i) = v;
            }
        }
    } else if (format == "coordinate") {
        if (!(size_line >> nnz) || nnz < 0) throw ConfigError(origin + ": missing entry count");
        for (long k = 0; k < nnz; ++k) {
            long i = 0, j = 0;
            double v = 0.0;
            if (!(is >> i >> j >> v)) throw ConfigError(origin + ": too few coordinate entries");
            if (i < 1 || i > rows || j < 1 || j > cols) {
                throw ConfigError(origin + ": entry index out of range");
            }
            m(i - 1, j - 1) = v;
            if (symmetric) m(j - 1, i - 1) = v;
        }
    } else {
        throw ConfigError(origin + ": unsupported format '" + format + "'");
    }
    if (!m.allFinite()) throw ConfigError(origin + ": non-finite entries");
    return m;
}

Matrix read_matrix_market(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path.string() + "'");
    return parse_matrix_market(in, path.string());
}

void write_matrix_market(const fs::path& path, const Matrix& m) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    out << "%%MatrixMarket matrix array real general\n" << m.rows() << ' ' << m.cols() << '\n';
    out << std::setprecision(17);
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        for (Eigen::Index i = 0; i < m.rows(); ++i) out << m(i, j) << '\n';
    }
}

Vector read_vector(const fs::path& path) {
    std::istringstream in(read_text(path));
    std::vector<double> values;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        std::istringstream is(t);
        double v = 0.0;
        std::string rest;
        if (!(is >> v) || (is >> rest)) {
            throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected one number");
        }
        values.push_back(v);
    }
    return Eigen::Map<Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

std::string sha256_file(const fs::path& path) {
    const std::string data = read_text(path);
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw Error("SHA-256 digest failed");
    }
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i) {
        os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
    }
    return os.str();
}

std::string format_manifest(const RunManifest& m) {
    std::ostringstream os;
    os << "subcommand = " << m.subcommand << '\n'
       << "tool_version = " << m.tool_version << '\n'
       << "seed = " << m.seed << '\n';
    for (const auto& [k, v] : m.config) os << "config." << k << " = " << v << '\n';
    for (const auto& [path, digest] : m.inputs) os << "input = " << path << " sha256:" << digest << '\n';
    return os.str();
}

RunManifest parse_manifest(const std::string& text) {
    RunManifest m;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        if (trim(line).empty()) continue;
        const auto eq = line.find(" = ");
        if (eq == std::string::npos) throw ConfigError("malformed manifest line '" + line + "'");
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 3);
        if (key == "subcommand") {
            m.subcommand = value;
        } else if (key == "tool_version") {
            m.tool_version = value;
        } else if (key == "seed") {
            m.seed = std::stoull(value);
        } else if (key.rfind("config.", 0) == 0) {
            m.config.emplace_back(key.substr(7), value);
        } else if (key == "input") {
            const auto at = value.rfind(" sha256:");
            if (at == std::string::npos) throw ConfigError("manifest input lacks a digest");
            m.inputs.emplace_back(value.substr(0, at), value.substr(at + 8));
        } else {
            throw ConfigError("unknown manifest key '" + key + "'");
        }
    }
    return m;
}

bool verify_manifest(const RunManifest& m, std::vector<std::string>* mismatches) {
    bool ok = true;
    for (const auto& [path, digest] : m.inputs) {
        std::string actual;
        try {
            actual = sha256_file(path);
        } catch (const Error&) {
            actual = "<missing>";
        }
        if (actual != digest) {
            ok = false;
            if (mismatches) mismatches->push_back(path);
        }
    }
    return ok;
}

unsigned threads_from_env() {
    const char* raw = std::getenv("BALRED_THREADS");
    if (!raw || !*raw) return 0;
    char* end = nullptr;
    const unsigned long v = std::strtoul(raw, &end, 10);
    if (*end != '\0' || v > 4096) {
        throw ConfigError(std::string("BALRED_THREADS='") + raw + "' is not a thread count");
    }
    return static_cast<unsigned>(v);
}

int cmd_sweep(const SweepArgs& args, std::ostream& out, std::ostream& err) {
    try {
        if (!fs::exists(args.config)) {
            throw ConfigError("config file '" + args.config.string() + "' does not exist");
        }
        BenchConfig cfg = parse_bench_config(read_text(args.config));
        for (const auto& [k, v] : args.overrides) apply_config_value(cfg, k, v);
        cfg.validate();
        const unsigned threads = threads_from_env();
        const SweepResult result = run_sweep(cfg, threads);

        fs::create_directories(args.out_dir);
        const fs::path csv = args.out_dir / "sweep.csv";
        {
            std::ofstream os(csv, std::ios::binary);
            if (!os) throw ConfigError("cannot write '" + csv.string() + "'");
            write_sweep_csv(os, result.rows);
        }
        RunManifest manifest;
        manifest.subcommand = "sweep";
        manifest.seed = cfg.seed;
        std::istringstream resolved(format_bench_config(cfg));
        std::string line;
        while (std::getline(resolved, line)) {
            const auto eq = line.find(" = ");
            manifest.config.emplace_back(line.substr(0, eq), line.substr(eq + 3));
        }
        for (const SweepMeta& meta : result.meta) {
            manifest.config.emplace_back("hankel_rank[" + format_double(meta.lambda) + "," +
                                             meta.variant + "]",
                                         std::to_string(meta.hankel_rank));
        }
        manifest.inputs.emplace_back(args.config.string(), sha256_file(args.config));
        {
            std::ofstream os(args.out_dir / "manifest.txt", std::ios::binary);
            os << format_manifest(manifest);
        }
        out << "wrote " << result.rows.size() << " rows to " << csv.string() << '\n';
        return kExitOk;
    } catch (const std::exception& e) {
        return exit_for(e, err);
    }
}

int cmd_certify(const CertifyArgs& args, std::ostream& out, std::ostream& err) {
    try {
        const Variant variant = parse_variant(args.variant, args.horizon);
        LoadedSystem loaded = load_system(args.files);
        if (args.n == 0) throw ConfigError("--n must be positive");
        ObservationGrid grid = ObservationGrid::equidistant(args.dt, args.n, args.horizon);
        Vector data = read_vector(args.data);
        const SmoothingProblem problem(loaded.system, std::move(grid), loaded.prior,
                                       std::move(data));
        const Balancing bal(problem.system, problem.prior.cov_factor(), variant);
        const ReducedModel model = bal.reduce(args.rank);
        const TruncatedBundle bundle = bal.truncated(args.rank);
        const BoundReport rep = certify(problem, model, bundle);
        for (const std::string& d : rep.diagnostics) err << "warning: " << d << '\n';
        out << (args.json ? format_report_json(rep) : format_report(rep));
        return kExitOk;
    } catch (const std::exception& e) {
        return exit_for(e, err);
    }
}

int cmd_hsv(const HsvArgs& args, std::ostream& out, std::ostream& err) {
    try {
        const Variant variant = parse_variant(args.variant, args.horizon);
        LoadedSystem loaded = load_system(args.files);
        const Balancing bal(loaded.system, loaded.prior.cov_factor(), variant);
        std::ostringstream os;
        os << std::scientific << std::setprecision(16);
        for (double s : bal.hsv()) os << s << '\n';
        out << os.str();
        return kExitOk;
    } catch (const std::exception& e) {
        return exit_for(e, err);
    }
}

std::string format_report(const BoundReport& rep) {
    std::ostringstream os;
    for (const auto& [k, v] : report_fields(rep)) os << k << " = " << v << '\n';
    return os.str();
}

std::string format_report_json(const BoundReport& rep) {
    nlohmann::ordered_json j;
    for (const auto& [k, v] : report_fields(rep)) {
        if (v == "true" || v == "false") {
            j[k] = v == "true";
        } else if (k == "variant" || k == "trace_form" || v == "inf" || v == "nan") {
            j[k] = v;
        } else if (k == "rank" || k == "hankel_rank" || k == "discarded_hsv") {
            j[k] = std::stoull(v);
        } else {
            j[k] = std::stod(v);
        }
    }
    return j.dump(2) + "\n";
}

}  // namespace balred::cli
