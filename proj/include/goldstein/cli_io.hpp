#pragma once

#include "goldstein/certificate.hpp"
#include "goldstein/energy.hpp"
#include "goldstein/rescaled.hpp"
#include "goldstein/von_mises.hpp"

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace goldstein {

/// Stable exit codes of the command-line tool.
enum ExitCode : int {
    kExitPass = 0,
    kExitCheckFailed = 1,  ///< an algebra identity or an enabled audit failed
    kExitSolverFailed = 2,
    kExitConfig = 3,
    kExitMissingInput = 4,
};

struct AuditToggles {
    bool energy = true;
    bool trace = true;
    bool max_principle = true;
    bool subsolution = true;
    bool F_bound = true;
};

struct RunConfig {
    double lambda0 = 0.05;
    double x0 = 1.0;         ///< pressure horizon
    double gradient = 1.0;   ///< G in u_E² = 2(x0 - G x); 0 is the zero-source run
    double perturbation = 0.0;

    std::size_t y_nodes = 20000;
    double y_first = 1e-8;
    double y_max = 30.0;

    std::size_t zeta_nodes = 1600;
    double zeta_first = 1e-7;
    double phi_max = 30.0;

    std::size_t Y_nodes = 2000;  ///< rescaled grid for the energies

    MarchConfig march;            ///< march.lambda_stop is overwritten by lambda0 / lambda_stop_ratio
    double lambda_stop_ratio = 50.0;

    WeightSet weights;
    AuditToggles audits;

    std::string output_dir = "run";
    int manifest_version = 1;

    /// Throws ConfigError naming the first field out of range.
    void validate() const;

    double lambda_stop() const { return lambda0 / lambda_stop_ratio; }
    MarchConfig march_config() const;
};

/// All keys with their canonical string values, sorted by key.
std::map<std::string, std::string> config_entries(const RunConfig& c);

/// Sets one key from its string form; throws ConfigError on unknown keys or bad values.
void set_config_value(RunConfig& c, const std::string& key, const std::string& value);

/// One "key = value" line per key in sorted order. Doubles use the shortest
/// representation that reads back to the same bits.
std::string serialize_config(const RunConfig& c);

/// Reads "key = value" lines; '#' starts a comment. Unset keys keep their
/// defaults. Throws ConfigError on unknown or repeated keys and on failed
/// validation.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

/// Lower-case hex SHA-256.
std::string sha256_hex(const std::string& data);
std::string sha256_file(const std::filesystem::path& path);

/// Hash of serialize_config(c).
std::string config_hash(const RunConfig& c);

/// Writes to a temporary sibling and renames it over `path`.
void atomic_write(const std::filesystem::path& path, const std::string& content);
/// Same, for writers that take a path. Works for files and directories.
void atomic_write_with(const std::filesystem::path& path,
                       const std::function<void(const std::filesystem::path&)>& writer);

struct ColumnSchema {
    std::string file;
    int version = 1;
    std::vector<std::string> columns;
};

/// Column layouts of every CSV the tool writes.
const std::vector<ColumnSchema>& csv_schemas();

struct SimulationSummary {
    int exit_code = kExitPass;
    bool separated = false;
    bool failed = false;
    std::string failure;
    std::optional<SingularityFit> fit;
    std::string fit_error;
    double s0 = 0.0;
    double b_envelope = 0.0;  ///< max |b s - 1| for s ≥ 5 s0
    std::size_t samples = 0, snapshots = 0;
};

/// Runs one trajectory and writes config.txt, trajectory.csv, modulation.csv,
/// snapshots/, fit.json and manifest.json into dir.
SimulationSummary run_simulation(const RunConfig& c, const std::filesystem::path& dir);

struct AuditSummary {
    int exit_code = kExitPass;
    std::vector<std::string> failed;  ///< names of enabled audits that failed
    std::string error;
};

/// Reads a run directory, writes energy.csv and audit.json there.
AuditSummary run_audit(const std::filesystem::path& dir, const std::optional<AuditToggles>& toggles = {});

struct SweepRow {
    double lambda0 = 0.0;
    double x_star = 0.0, ratio = 0.0, exponent = 0.0;
    bool ok = false;
    std::string status;
};

struct SweepSummary {
    int exit_code = kExitPass;
    std::vector<SweepRow> rows;  ///< in the order of the input list
    double ratio_spread = 0.0;   ///< (max - min)/min of x*/λ0² over successful rows
};

/// One trajectory per λ0 in dir/lambda0_<value>, run concurrently on up to
/// `threads` workers (0: hardware concurrency). Writes sweep.csv and sweep.json.
SweepSummary run_sweep(const std::vector<double>& lambda0s, const RunConfig& c, const std::filesystem::path& dir,
                       unsigned threads = 0);

/// The cmd_ functions print a report to `out` and return an ExitCode; they do not throw.
/// Malformed run directories count as missing input.
int cmd_verify_algebra(const std::filesystem::path& out_dir, std::ostream& out,
                       const std::optional<Rational>& a4_override = {});
int cmd_simulate(const RunConfig& c, std::ostream& out);
int cmd_audit(const std::filesystem::path& dir, std::ostream& out, const std::optional<AuditToggles>& toggles = {});
int cmd_sweep(const std::vector<double>& lambda0s, const RunConfig& c, std::ostream& out, unsigned threads = 0);

}  // namespace goldstein
