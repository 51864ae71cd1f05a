#include "futrisk/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>

#include "futrisk/report.hpp"

namespace futrisk::cli {

namespace {

void write_file(const std::filesystem::path& path, const std::string& content)
{
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file)
        throw std::runtime_error(fmt::format("cannot open '{}' for writing", path.string()));
    file << content;
    if (!file)
        throw std::runtime_error(fmt::format("failed writing '{}'", path.string()));
}

std::string join_reals(const std::vector<double>& values)
{
    std::vector<std::string> parts;
    for (double v : values)
        parts.push_back(fmt::format("{}", v));
    return fmt::format("{}", fmt::join(parts, ","));
}

Metadata run_metadata(const RunConfig& config)
{
    std::vector<std::string> inputs;
    for (const auto& p : config.inputs)
        inputs.push_back(p.filename().string());
    std::vector<std::string> measures;
    for (MeasureKind kind : {MeasureKind::VaR, MeasureKind::ES, MeasureKind::SRM}) {
        if (config.measures.includes(kind))
            measures.emplace_back(to_string(kind));
    }
    std::string positions = config.include_long && config.include_short ? "both"
                            : config.include_long                      ? "long"
                                                                       : "short";
    return {
        {"seed", fmt::format("{}", config.bootstrap.master_seed)},
        {"seed_source", config.seed_source},
        {"resamples", fmt::format("{}", config.bootstrap.resamples)},
        {"ci_coverage", fmt::format("{}", config.bootstrap.ci_coverage)},
        {"quantile_method", std::string(to_string(config.bootstrap.quantile_method))},
        {"positions", positions},
        {"measures", fmt::format("{}", fmt::join(measures, ","))},
        {"alphas", join_reals(config.alphas)},
        {"ara", join_reals(config.ks)},
        {"inputs", fmt::format("{}", fmt::join(inputs, ","))},
    };
}

std::string metadata_text(const Metadata& metadata)
{
    std::string out;
    for (const auto& [key, value] : metadata)
        out += fmt::format("# {}: {}\n", key, value);
    return out;
}

std::string metadata_csv(const Metadata& metadata)
{
    std::string out = "key,value\n";
    for (const auto& [key, value] : metadata)
        out += fmt::format("{},\"{}\"\n", key, value);
    return out;
}

} // namespace

std::vector<std::string> RunConfig::problems() const
{
    std::vector<std::string> out;
    if (inputs.empty())
        out.emplace_back("at least one --input file is required");
    if (!include_long && !include_short)
        out.emplace_back("at least one position is required");
    if (!measures.any())
        out.emplace_back("at least one measure is required");
    if (measures.var || measures.es) {
        if (alphas.empty())
            out.emplace_back("--alpha list is empty but VaR/ES was requested");
        for (double a : alphas) {
            if (!(a > 0.0 && a < 1.0))
                out.push_back(fmt::format("confidence level {} is outside (0, 1)", a));
        }
    }
    if (measures.srm) {
        if (ks.empty())
            out.emplace_back("--ara list is empty but SRM was requested");
        for (double k : ks) {
            if (!(k >= kMinRiskAversion) || !std::isfinite(k))
                out.push_back(fmt::format("risk aversion {} must be finite and at least {}", k, kMinRiskAversion));
        }
    }
    if (bootstrap.resamples < 2)
        out.push_back(fmt::format("--resamples must be at least 2, got {}", bootstrap.resamples));
    if (!(bootstrap.ci_coverage > 0.0 && bootstrap.ci_coverage < 1.0))
        out.push_back(fmt::format("--ci coverage {} is outside (0, 1)", bootstrap.ci_coverage));
    std::set<std::string> labels;
    for (const auto& p : inputs) {
        if (!labels.insert(p.stem().string()).second)
            out.push_back(fmt::format("two inputs share the contract label '{}'", p.stem().string()));
    }
    return out;
}

int cmd_estimate(const RunConfig& config, std::ostream& out, std::ostream& err)
{
    if (const auto problems = config.problems(); !problems.empty()) {
        for (const auto& p : problems)
            err << "error: " << p << "\n";
        return kInputError;
    }

    std::vector<ContractStats> stats;
    std::vector<LossSample> samples;
    try {
        for (const auto& path : config.inputs) {
            const ReturnSeries series = load_series(path, config.mapping);
            stats.push_back({series.contract_label, summary_stats(series)});
            if (config.include_long)
                samples.push_back(to_losses(series, Position::Long));
            if (config.include_short)
                samples.push_back(to_losses(series, Position::Short));
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    }

    const GridResult grid = run_grid(samples, config.alphas, config.ks, config.bootstrap, config.measures);

    std::vector<ReportTable> tables;
    tables.push_back(build_summary_table(
        stats, config.excess_kurtosis ? KurtosisConvention::Excess : KurtosisConvention::Raw));
    for (MeasureKind kind : {MeasureKind::VaR, MeasureKind::ES, MeasureKind::SRM}) {
        if (config.measures.includes(kind))
            tables.push_back(build_measure_table(grid, kind, samples, config.bootstrap.ci_coverage));
    }

    const Metadata metadata = run_metadata(config);
    try {
        switch (config.format) {
        case OutputFormat::Text: {
            std::string text = metadata_text(metadata);
            for (const auto& t : tables)
                text += "\n" + render_text(t);
            if (config.out_dir) {
                std::filesystem::create_directories(*config.out_dir);
                write_file(*config.out_dir / "report.txt", text);
            } else {
                out << text;
            }
            break;
        }
        case OutputFormat::Csv:
            if (config.out_dir) {
                std::filesystem::create_directories(*config.out_dir);
                write_file(*config.out_dir / "metadata.csv", metadata_csv(metadata));
                for (const auto& t : tables)
                    write_file(*config.out_dir / (t.id + ".csv"), render_csv(t));
            } else {
                out << metadata_csv(metadata);
                for (const auto& t : tables)
                    out << "\n# table: " << t.id << "\n" << render_csv(t);
            }
            break;
        case OutputFormat::KeyValue: {
            const std::string doc = render_json(tables, metadata);
            if (config.out_dir) {
                std::filesystem::create_directories(*config.out_dir);
                write_file(*config.out_dir / "report.json", doc);
            } else {
                out << doc;
            }
            break;
        }
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kFailure;
    }

    if (grid.failed_count() > 0) {
        for (const auto& cell : grid.cells()) {
            if (!cell.ok())
                err << fmt::format("error: cell {} {} {}: {}\n", samples[cell.key.sample_index].source_label(),
                                   to_string(samples[cell.key.sample_index].position()),
                                   parameter_label(cell.key.measure, cell.parameter), cell.error);
        }
        return kFailure;
    }
    return kSuccess;
}

std::string render_series_csv(const ReturnSeries& series)
{
    std::string out = "date,return\n";
    for (const auto& obs : series.observations)
        out += fmt::format("{},{}\n", format_date(obs.date), obs.log_return);
    return out;
}

int cmd_synth(const SynthConfig& config, std::ostream& out, std::ostream& err)
{
    ReturnSeries series;
    try {
        const std::string label = config.out.empty() ? "synthetic" : config.out.stem().string();
        series = generate(config.spec, label);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    }
    const std::string text = render_series_csv(series);
    if (config.out.empty()) {
        out << text;
        return kSuccess;
    }
    try {
        if (config.out.has_parent_path())
            std::filesystem::create_directories(config.out.parent_path());
        write_file(config.out, text);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    }
    return kSuccess;
}

std::vector<OracleCheck> run_oracle_checks(const ValidateConfig& config)
{
    const SyntheticSpec spec{NormalParams{0.0, 1.0}, config.n, config.seed};
    const ReturnSeries series = generate(spec, "normal");
    // Losses of a symmetric law: the short side carries the draws unchanged.
    const LossSample sample = to_losses(series, Position::Short);

    std::vector<OracleCheck> checks;
    auto add = [&](std::string name, double observed, double expected, double tolerance) {
        OracleCheck c;
        c.name = std::move(name);
        c.observed = observed;
        c.expected = expected;
        c.relative_delta = std::abs(observed - expected) / std::abs(expected);
        c.tolerance = tolerance * config.tolerance_scale;
        c.passed = c.relative_delta <= c.tolerance && c.tolerance > 0.0;
        checks.push_back(std::move(c));
    };

    const ConfidenceLevel alpha(config.alpha);
    if (config.measures.var)
        add(fmt::format("VaR({}) vs normal quantile", config.alpha), value_at_risk(sample, alpha),
            normal_var_oracle(0.0, 1.0, config.alpha), 0.01);
    if (config.measures.es)
        add(fmt::format("ES({}) vs normal tail mean", config.alpha), expected_shortfall(sample, alpha),
            normal_es_oracle(0.0, 1.0, config.alpha), 0.015);
    if (config.measures.srm) {
        for (double kv : config.ks) {
            const RiskAversion k(kv);
            add(fmt::format("SRM(k={}) vs quadrature", kv), spectral_risk(sample, k),
                srm_quadrature_oracle(normal_quantile, k), 0.01);
        }
    }
    return checks;
}

int cmd_validate(const ValidateConfig& config, std::ostream& out, std::ostream& err)
{
    std::vector<OracleCheck> checks;
    try {
        checks = run_oracle_checks(config);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    }
    out << fmt::format("# oracle checks on N(0,1), n = {}, seed = {}\n", config.n, config.seed);
    bool all = true;
    for (const auto& c : checks) {
        out << fmt::format("{}  {:<32} observed={:.6f} expected={:.6f} rel_delta={:.3e} tolerance={:.3e}\n",
                           c.passed ? "PASS" : "FAIL", c.name, c.observed, c.expected, c.relative_delta,
                           c.tolerance);
        all = all && c.passed;
    }
    return all ? kSuccess : kFailure;
}

int cmd_figure(const FigureConfig& config, std::ostream& out, std::ostream& err)
{
    std::string text;
    try {
        text = render_curves_csv(figure1_data(config.ks, config.grid_points));
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    }
    if (!config.out) {
        out << text;
        return kSuccess;
    }
    try {
        write_file(*config.out, text);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    }
    return kSuccess;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Non-parametric VaR, expected shortfall and spectral risk measures with bootstrap precision"};
    app.require_subcommand(1);

    // estimate
    RunConfig run_config;
    std::string price_col, return_col, position = "both", quantile = "order", format = "text";
    std::vector<std::string> measures{"var", "es", "srm"};
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    auto* estimate = app.add_subcommand("estimate", "Estimate risk measures and bootstrap precision for input series");
    estimate->add_option("--input", run_config.inputs, "Input CSV file(s)")->delimiter(',')->required();
    estimate->add_option("--date-col", run_config.mapping.date_column, "Date column name")->capture_default_str();
    auto* price_opt = estimate->add_option("--price-col", price_col, "Price column name");
    auto* return_opt = estimate->add_option("--return-col", return_col, "Log-return column name");
    price_opt->excludes(return_opt);
    estimate->add_option("--date-format", run_config.mapping.date_format, "strptime-style date format")
        ->capture_default_str();
    estimate->add_flag("--drop-zero-returns", run_config.mapping.drop_zero_returns, "Drop padded zero-return days");
    estimate->add_option("--position", position, "long|short|both")
        ->check(CLI::IsMember({"long", "short", "both"}))
        ->capture_default_str();
    estimate->add_option("--measure", measures, "Measures: var,es,srm")
        ->delimiter(',')
        ->check(CLI::IsMember({"var", "es", "srm"}));
    estimate->add_option("--alpha", run_config.alphas, "Confidence levels")->delimiter(',');
    estimate->add_option("--ara", run_config.ks, "Absolute risk-aversion coefficients")->delimiter(',');
    estimate->add_option("--resamples", run_config.bootstrap.resamples, "Bootstrap resamples")->capture_default_str();
    estimate->add_option("--seed", seed, fmt::format("Master seed (else ${}, else {})", kSeedEnvVar, kDefaultSeed));
    estimate->add_option("--ci", run_config.bootstrap.ci_coverage, "Confidence-interval coverage")
        ->capture_default_str();
    estimate->add_option("--quantile-method", quantile, "order|interp")
        ->check(CLI::IsMember({"order", "interp"}))
        ->capture_default_str();
    estimate->add_option("--format", format, "text|csv|kv")
        ->check(CLI::IsMember({"text", "csv", "kv"}))
        ->capture_default_str();
    estimate->add_option("--out", out_dir, "Output directory (default: stdout)");
    estimate->add_option("--workers", run_config.bootstrap.workers, "Worker threads (0 = all cores)")
        ->capture_default_str();
    estimate->add_flag("--excess-kurtosis", run_config.excess_kurtosis, "Report kurtosis minus 3");

    // synth
    SynthConfig synth_config;
    std::string dist = "normal";
    double mu = 0.0, sigma = 1.0, dof = 4.0, scale = 1.0;
    SkewedMixParams mix;
    std::string synth_out;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic return series in the ingest CSV schema");
    synth->add_option("--dist", dist, "normal|t|mix")->check(CLI::IsMember({"normal", "t", "mix"}))->capture_default_str();
    synth->add_option("--mu", mu, "Normal mean")->capture_default_str();
    synth->add_option("--sigma", sigma, "Normal standard deviation")->capture_default_str();
    synth->add_option("--dof", dof, "Student-t degrees of freedom (> 2)")->capture_default_str();
    synth->add_option("--scale", scale, "Student-t scale")->capture_default_str();
    synth->add_option("--weight", mix.weight, "Mixture: probability of the first component")->capture_default_str();
    synth->add_option("--mu1", mix.mu1)->capture_default_str();
    synth->add_option("--sigma1", mix.sigma1)->capture_default_str();
    synth->add_option("--mu2", mix.mu2)->capture_default_str();
    synth->add_option("--sigma2", mix.sigma2)->capture_default_str();
    synth->add_option("--n", synth_config.spec.n, "Number of returns")->required();
    synth->add_option("--seed", synth_config.spec.seed, "Seed")->capture_default_str();
    synth->add_option("--out", synth_out, "Output CSV path (default: stdout)");

    // validate
    ValidateConfig validate_config;
    std::vector<std::string> validate_measures{"var", "es", "srm"};
    auto* validate = app.add_subcommand("validate", "Compare estimators against normal-distribution oracles");
    validate->add_option("--measure", validate_measures, "Measures: var,es,srm")
        ->delimiter(',')
        ->check(CLI::IsMember({"var", "es", "srm"}));
    validate->add_option("--n", validate_config.n, "Sample size")->capture_default_str();
    validate->add_option("--seed", validate_config.seed, "Seed")->capture_default_str();
    validate->add_option("--alpha", validate_config.alpha, "Confidence level for VaR/ES")->capture_default_str();
    validate->add_option("--ara", validate_config.ks, "Risk-aversion coefficients")->delimiter(',');
    validate->add_option("--tolerance-scale", validate_config.tolerance_scale, "Multiply all tolerances")
        ->capture_default_str();

    // figure
    FigureConfig figure_config;
    std::string figure_out;
    auto* figure = app.add_subcommand("figure", "Exponential risk-aversion weight curves over p in [0.8, 1]");
    figure->add_option("--ara", figure_config.ks, "Risk-aversion coefficients")->delimiter(',');
    figure->add_option("--points", figure_config.grid_points, "Grid points per curve")->capture_default_str();
    figure->add_option("--out", figure_out, "Output CSV path (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kSuccess;
    } catch (const CLI::ParseError& e) {
        std::ostringstream sink_out, sink_err;
        app.exit(e, sink_out, sink_err);
        out << sink_out.str();
        err << sink_err.str();
        return e.get_exit_code() == 0 ? kSuccess : kInputError;
    }

    if (*estimate) {
        if (!price_col.empty()) {
            run_config.mapping.value_column = price_col;
            run_config.mapping.kind = ValueKind::Price;
        } else if (!return_col.empty()) {
            run_config.mapping.value_column = return_col;
            run_config.mapping.kind = ValueKind::Return;
        }
        run_config.include_long = position != "short";
        run_config.include_short = position != "long";
        run_config.measures = {false, false, false};
        for (const auto& m : measures) {
            run_config.measures.var |= m == "var";
            run_config.measures.es |= m == "es";
            run_config.measures.srm |= m == "srm";
        }
        run_config.bootstrap.quantile_method =
            quantile == "interp" ? QuantileMethod::LinearInterpolation : QuantileMethod::OrderStatistic;
        run_config.format = format == "csv" ? OutputFormat::Csv : format == "kv" ? OutputFormat::KeyValue : OutputFormat::Text;
        if (!out_dir.empty())
            run_config.out_dir = out_dir;
        if (seed) {
            run_config.bootstrap.master_seed = *seed;
            run_config.seed_source = "flag";
        } else if (const char* env = std::getenv(kSeedEnvVar); env && *env) {
            try {
                run_config.bootstrap.master_seed = std::stoull(env);
            } catch (const std::exception&) {
                err << fmt::format("error: {}='{}' is not an unsigned integer\n", kSeedEnvVar, env);
                return kInputError;
            }
            run_config.seed_source = fmt::format("env:{}", kSeedEnvVar);
        } else {
            run_config.bootstrap.master_seed = kDefaultSeed;
        }
        return cmd_estimate(run_config, out, err);
    }
    if (*synth) {
        if (dist == "normal")
            synth_config.spec.distribution = NormalParams{mu, sigma};
        else if (dist == "t")
            synth_config.spec.distribution = StudentTParams{dof, scale};
        else
            synth_config.spec.distribution = mix;
        synth_config.out = synth_out;
        return cmd_synth(synth_config, out, err);
    }
    if (*validate) {
        validate_config.measures = {false, false, false};
        for (const auto& m : validate_measures) {
            validate_config.measures.var |= m == "var";
            validate_config.measures.es |= m == "es";
            validate_config.measures.srm |= m == "srm";
        }
        return cmd_validate(validate_config, out, err);
    }
    if (*figure) {
        if (!figure_out.empty())
            figure_config.out = figure_out;
        return cmd_figure(figure_config, out, err);
    }
    return kInputError;
}

} // namespace futrisk::cli
