#include "goldstein/cli_io.hpp"
#include "goldstein/errors.hpp"

#include "CLI11.hpp"

#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

using namespace goldstein;

namespace {

/// One string flag per config key; applied on top of --config after parsing.
struct ConfigFlags {
    std::string file;
    std::map<std::string, std::string> values;

    void attach(CLI::App* app, bool with_file = true) {
        if (with_file) app->add_option("--config", file, "key = value config file")->check(CLI::ExistingFile);
        for (const auto& [key, def] : config_entries(RunConfig{}))
            app->add_option("--" + key, values[key], "default " + def);
    }

    RunConfig build(const CLI::App* app) const {
        RunConfig c = file.empty() ? RunConfig{} : load_config(file);
        for (const auto& [key, v] : values)
            if (app->count("--" + key)) set_config_value(c, key, v);
        c.validate();
        return c;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Goldstein separation: exact algebra, von Mises marching and audits"};
    app.require_subcommand(1);

    auto* verify = app.add_subcommand("verify-algebra", "exact rational certificate");
    std::string cert_dir = ".";
    std::string a4;
    verify->add_option("--out", cert_dir, "directory for certificate.json");
    verify->add_option("--a4", a4, "replace a4 in the U2 check (fault injection), e.g. 1/47");

    auto* simulate = app.add_subcommand("simulate", "march one trajectory to separation");
    ConfigFlags sim_flags;
    sim_flags.attach(simulate);

    auto* audit = app.add_subcommand("audit", "energies and inequality audits of a run directory");
    std::string run_dir;
    std::map<std::string, bool> toggles;
    audit->add_option("dir", run_dir, "run directory")->required();
    for (const char* t : {"energy", "trace", "max_principle", "subsolution", "F_bound"})
        audit->add_option(std::string("--audit.") + t, toggles[t], "override the run's toggle");

    auto* sweep = app.add_subcommand("sweep", "x* against lambda0 over independent runs");
    std::vector<double> lambda0s;
    unsigned threads = 0;
    ConfigFlags sweep_flags;
    sweep->add_option("--lambda0s", lambda0s, "at least two values")->delimiter(',')->required();
    sweep->add_option("--threads", threads, "worker threads, 0 for all cores");
    sweep_flags.attach(sweep);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (*verify) {
            std::optional<Rational> override;
            if (!a4.empty()) {
                try {
                    override = Rational(a4);
                } catch (const std::exception&) {
                    throw ConfigError("--a4: not a rational '" + a4 + "'");
                }
            }
            return cmd_verify_algebra(cert_dir, std::cout, override);
        }
        if (*simulate) return cmd_simulate(sim_flags.build(simulate), std::cout);
        if (*audit) {
            std::optional<AuditToggles> t;
            if (audit->count("--audit.energy") + audit->count("--audit.trace") + audit->count("--audit.max_principle") +
                    audit->count("--audit.subsolution") + audit->count("--audit.F_bound") >
                0) {
                AuditToggles base;
                try {
                    base = load_config(std::filesystem::path(run_dir) / "config.txt").audits;
                } catch (const Error&) {
                }
                auto pick = [&](const char* name, bool& field) {
                    if (audit->count(std::string("--audit.") + name)) field = toggles[name];
                };
                pick("energy", base.energy);
                pick("trace", base.trace);
                pick("max_principle", base.max_principle);
                pick("subsolution", base.subsolution);
                pick("F_bound", base.F_bound);
                t = base;
            }
            return cmd_audit(run_dir, std::cout, t);
        }
        if (*sweep) return cmd_sweep(lambda0s, sweep_flags.build(sweep), std::cout, threads);
    } catch (const ConfigError& e) {
        std::cout << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const MissingInput& e) {
        std::cout << "missing input: " << e.what() << '\n';
        return kExitMissingInput;
    }
    return kExitConfig;
}
