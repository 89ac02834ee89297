// Command-line driver: seed/solve Blaschke potentials, run the spectral
// deformation pipeline, re-verify stored reports, and re-export meshes.
// Exit codes: 0 pass, 1 gate/convergence failure, 2 usage or config error,
// 3 I/O failure.

#include <iostream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"

#include "lagsurf/pipeline.hpp"

namespace {

using lagsurf::RunConfig;

// every flag funnels through the same key=value channel as the config file;
// flags win over file entries
const std::vector<std::pair<std::string, std::string>> kFlagKeys = {
    {"--kind", "kind"},
    {"--c", "c"},
    {"--k", "k"},
    {"--a", "a"},
    {"--b", "b"},
    {"--grid", "grid"},
    {"--m-list", "m_list"},
    {"--scheme", "scheme"},
    {"--out", "out"},
    {"--potential-csv", "potential_csv"},
    {"--boundary-kind", "boundary_kind"},
    {"--boundary-csv", "boundary_csv"},
    {"--init-csv", "init_csv"},
    {"--tol", "tol"},
    {"--max-iter", "max_iter"},
};

struct SubOpts {
    std::string config_path;
    CLI::Option* config_opt = nullptr;
    std::map<std::string, std::string> values;
    std::map<std::string, CLI::Option*> opts;
};

void add_run_options(CLI::App* cmd, SubOpts& o) {
    o.config_opt =
        cmd->add_option("--config", o.config_path, "key=value config file");
    for (const auto& [flag, key] : kFlagKeys)
        o.opts[key] = cmd->add_option(flag, o.values[key]);
}

RunConfig build_config(const SubOpts& o) {
    RunConfig cfg;
    if (o.config_opt->count())
        lagsurf::load_config_file(cfg, o.config_path);
    for (const auto& [flag, key] : kFlagKeys)
        if (o.opts.at(key)->count())
            lagsurf::apply_config_entry(cfg, key, o.values.at(key));
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Laguerre-geometry surface laboratory"};
    app.require_subcommand(1);

    CLI::App* seed = app.add_subcommand(
        "seed", "evaluate an analytic potential on a grid");
    CLI::App* solve = app.add_subcommand(
        "solve", "solve the character equation from boundary data");
    CLI::App* deform = app.add_subcommand(
        "deform", "run the spectral deformation family and write reports");
    CLI::App* verify = app.add_subcommand(
        "verify", "re-check a completed deformation run");
    CLI::App* exp = app.add_subcommand(
        "export", "re-emit meshes from a stored frame field");

    SubOpts seed_o, solve_o, deform_o, verify_o;
    add_run_options(seed, seed_o);
    add_run_options(solve, solve_o);
    add_run_options(deform, deform_o);
    add_run_options(verify, verify_o);

    std::string frames_path, export_out = "export";
    exp->add_option("--frames", frames_path, "frames.csv from a deform run")
        ->required();
    exp->add_option("--out", export_out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (seed->parsed()) return lagsurf::cmd_seed(build_config(seed_o));
        if (solve->parsed()) return lagsurf::cmd_solve(build_config(solve_o));
        if (deform->parsed())
            return lagsurf::cmd_deform(build_config(deform_o));
        if (verify->parsed())
            return lagsurf::cmd_verify(build_config(verify_o));
        if (exp->parsed()) return lagsurf::cmd_export(frames_path, export_out);
    } catch (const lagsurf::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const lagsurf::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 3;
    } catch (const lagsurf::GateFailure& e) {
        std::cerr << "gate failure: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
