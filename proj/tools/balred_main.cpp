#include "balred/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

void add_system_options(CLI::App* app, balred::cli::SystemFiles& files) {
    app->add_option("--A", files.a, "state matrix (Matrix Market)")->required();
    app->add_option("--C", files.c, "observation matrix (Matrix Market)")->required();
    app->add_option("--Geps", files.gamma_eps, "noise covariance (Matrix Market)")->required();
    app->add_option("--Lpr", files.l_pr, "prior covariance factor (Matrix Market)")->required();
    app->add_option("--mu", files.mu_pr, "prior mean, one value per line");
}

std::pair<std::string, std::string> split_assignment(const std::string& s) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw CLI::ValidationError("--set", "expected key=value");
    return {s.substr(0, eq), s.substr(eq + 1)};
}

}  // namespace

int main(int argc, char** argv) {
    using namespace balred::cli;

    CLI::App app{"Prior-driven balanced truncation for Bayesian smoothing"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);

    SweepArgs sweep;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> sets;
    auto* sweep_cmd = app.add_subcommand("sweep", "run the synthetic rank sweep");
    sweep_cmd->add_option("--config", sweep.config, "benchmark config file")->required();
    sweep_cmd->add_option("--out", sweep.out_dir, "output directory");
    sweep_cmd->add_option("--seed", seed, "override the configured seed");
    sweep_cmd->add_option("--set", sets, "override a config entry, key=value");

    CertifyArgs cert;
    auto* cert_cmd = app.add_subcommand("certify", "report error bounds for one reduced model");
    add_system_options(cert_cmd, cert.files);
    cert_cmd->add_option("--data", cert.data, "stacked observations, one value per line")
        ->required();
    cert_cmd->add_option("--dt", cert.dt, "observation spacing")->required();
    cert_cmd->add_option("--n", cert.n, "number of observation times")->required();
    cert_cmd->add_option("--rank", cert.rank, "reduced order")->required();
    cert_cmd->add_option("--variant", cert.variant, "pdbt or pdtlbt");
    cert_cmd->add_option("--horizon", cert.horizon, "time-limited horizon T");
    cert_cmd->add_flag("--json", cert.json, "emit JSON");

    HsvArgs hsv;
    auto* hsv_cmd = app.add_subcommand("hsv", "print the Hankel singular values");
    add_system_options(hsv_cmd, hsv.files);
    hsv_cmd->add_option("--variant", hsv.variant, "pdbt or pdtlbt");
    hsv_cmd->add_option("--horizon", hsv.horizon, "time-limited horizon T");

    try {
        app.parse(argc, argv);
        for (const std::string& s : sets) sweep.overrides.push_back(split_assignment(s));
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }
    if (seed) sweep.overrides.emplace_back("seed", std::to_string(*seed));

    if (*sweep_cmd) return cmd_sweep(sweep, std::cout, std::cerr);
    if (*cert_cmd) return cmd_certify(cert, std::cout, std::cerr);
    return cmd_hsv(hsv, std::cout, std::cerr);
}
