// cli.hpp
// Command-line orchestration: ingest -> losses -> bootstrap -> report, plus
// the synthetic-data, oracle-validation and weight-curve subcommands.

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "futrisk/bootstrap.hpp"
#include "futrisk/ingest.hpp"
#include "futrisk/synthetic.hpp"

namespace futrisk::cli {

enum ExitCode : int {
    kSuccess = 0,
    kFailure = 1,    ///< Failed cell or failed oracle check.
    kInputError = 2, ///< Bad flags, bad configuration, unreadable data.
};

enum class OutputFormat { Text, Csv, KeyValue };

/// Environment variable consulted when --seed is not given.
inline constexpr const char* kSeedEnvVar = "FUTRISK_SEED";
inline constexpr std::uint64_t kDefaultSeed = 1234567;

struct RunConfig {
    std::vector<std::filesystem::path> inputs;
    ColumnMapping mapping;
    bool include_long = true;
    bool include_short = true;
    MeasureSelection measures;
    std::vector<double> alphas{0.90, 0.95, 0.99};
    std::vector<double> ks{5, 10, 20, 40, 80};
    BootstrapConfig bootstrap;
    std::string seed_source = "default";
    OutputFormat format = OutputFormat::Text;
    std::optional<std::filesystem::path> out_dir;
    bool excess_kurtosis = false;

    /// Every problem found, not just the first.
    std::vector<std::string> problems() const;
};

struct SynthConfig {
    SyntheticSpec spec;
    std::filesystem::path out;
};

struct ValidateConfig {
    MeasureSelection measures;
    std::size_t n = 500000;
    std::uint64_t seed = kDefaultSeed;
    double alpha = 0.99;
    std::vector<double> ks{5, 20, 80};
    /// Multiplies every tolerance; 0 forces failure.
    double tolerance_scale = 1.0;
};

struct OracleCheck {
    std::string name;
    double observed = 0.0;
    double expected = 0.0;
    double relative_delta = 0.0;
    double tolerance = 0.0;
    bool passed = false;
};

struct FigureConfig {
    std::vector<double> ks{5, 10, 20, 40, 80};
    std::size_t grid_points = 201;
    std::optional<std::filesystem::path> out;
};

int cmd_estimate(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_synth(const SynthConfig& config, std::ostream& out, std::ostream& err);
std::vector<OracleCheck> run_oracle_checks(const ValidateConfig& config);
int cmd_validate(const ValidateConfig& config, std::ostream& out, std::ostream& err);
int cmd_figure(const FigureConfig& config, std::ostream& out, std::ostream& err);

/// Writes a return series as "date,return" CSV (the ingest schema).
std::string render_series_csv(const ReturnSeries& series);

/// Parses argv (argv[0] is the program name) and dispatches a subcommand.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace futrisk::cli
