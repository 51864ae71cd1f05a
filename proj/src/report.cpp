#include "futrisk/report.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>
#include <json.hpp>

#include "csv.hpp"

namespace futrisk {

namespace {

using nlohmann::json;

constexpr std::string_view kMeanColumn = "Mean";
constexpr std::string_view kOverallRow = "Overall mean";

std::string measure_noun(MeasureKind measure)
{
    switch (measure) {
    case MeasureKind::VaR:
        return "VaR";
    case MeasureKind::ES:
        return "ES";
    case MeasureKind::SRM:
        return "spectral risk measure";
    }
    return "?";
}

std::string percent(double fraction)
{
    return fmt::format("{:g}", std::round(fraction * 100.0 * 1e6) / 1e6);
}

std::string full_precision(double v)
{
    return fmt::format("{}", v);
}

double parse_exact(const std::string& text)
{
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw std::invalid_argument(fmt::format("cannot parse '{}' as a number", text));
    return v;
}

std::optional<Position> position_from_string(std::string_view text)
{
    if (text == "long")
        return Position::Long;
    if (text == "short")
        return Position::Short;
    if (text.empty())
        return std::nullopt;
    throw std::invalid_argument(fmt::format("unknown position '{}'", text));
}

std::string position_heading(Position position)
{
    return position == Position::Long ? "Long position" : "Short position";
}

void fill_means(ReportSection& section)
{
    std::vector<double> means;
    for (auto& group : section.groups) {
        for (auto& row : group.rows) {
            row.mean = row_mean(row);
            if (row.mean)
                means.push_back(*row.mean);
        }
    }
    if (!means.empty()) {
        double sum = 0.0;
        for (double m : means)
            sum += m;
        section.overall_mean = sum / static_cast<double>(means.size());
    }
}

std::string format_cell(const Cell& cell, SectionKind kind, const std::string& row_label)
{
    return std::visit(
        [&](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::monostate>) {
                return "";
            } else if constexpr (std::is_same_v<T, double>) {
                if (kind == SectionKind::Summary && row_label == "n")
                    return fmt::format("{:.0f}", v);
                if (kind == SectionKind::CoefficientsOfVariation)
                    return fmt::format("{:.2f}", v);
                return fmt::format("{:.4f}", v);
            } else {
                return fmt::format("[{:.4f} {:.4f}]", v.lower, v.upper);
            }
        },
        cell);
}

std::string format_mean(double v, SectionKind kind)
{
    return kind == SectionKind::CoefficientsOfVariation ? fmt::format("{:.2f}", v) : fmt::format("{:.4f}", v);
}

json cell_to_json(const Cell& cell)
{
    return std::visit(
        [](const auto& v) -> json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::monostate>)
                return nullptr;
            else if constexpr (std::is_same_v<T, double>)
                return v;
            else
                return json::array({v.lower, v.upper});
        },
        cell);
}

Cell cell_from_json(const json& j)
{
    if (j.is_null())
        return std::monostate{};
    if (j.is_array())
        return Interval{j.at(0).get<double>(), j.at(1).get<double>()};
    return j.get<double>();
}

json optional_to_json(const std::optional<double>& v)
{
    return v ? json(*v) : json(nullptr);
}

std::optional<double> optional_from_json(const json& j)
{
    if (j.is_null())
        return std::nullopt;
    return j.get<double>();
}

json table_to_json(const ReportTable& table)
{
    json sections = json::array();
    for (const auto& section : table.sections) {
        json groups = json::array();
        for (const auto& group : section.groups) {
            json rows = json::array();
            for (const auto& row : group.rows) {
                json cells = json::array();
                for (const auto& cell : row.cells)
                    cells.push_back(cell_to_json(cell));
                rows.push_back({{"label", row.label}, {"cells", cells}, {"mean", optional_to_json(row.mean)}});
            }
            groups.push_back({{"position", group.position ? json(std::string(to_string(*group.position))) : json(nullptr)},
                              {"rows", rows}});
        }
        sections.push_back({{"label", section.label},
                            {"kind", std::string(to_string(section.kind))},
                            {"groups", groups},
                            {"overall_mean", optional_to_json(section.overall_mean)}});
    }
    return {{"id", table.id},
            {"title", table.title},
            {"columns", table.columns},
            {"sections", sections},
            {"footnotes", table.footnotes}};
}

ReportTable table_from_json(const json& j)
{
    ReportTable table;
    table.id = j.at("id").get<std::string>();
    table.title = j.at("title").get<std::string>();
    table.columns = j.at("columns").get<std::vector<std::string>>();
    table.footnotes = j.at("footnotes").get<std::vector<std::string>>();
    for (const auto& js : j.at("sections")) {
        ReportSection section;
        section.label = js.at("label").get<std::string>();
        section.kind = section_kind_from_string(js.at("kind").get<std::string>());
        section.overall_mean = optional_from_json(js.at("overall_mean"));
        for (const auto& jg : js.at("groups")) {
            RowGroup group;
            if (!jg.at("position").is_null())
                group.position = position_from_string(jg.at("position").get<std::string>());
            for (const auto& jr : jg.at("rows")) {
                ReportRow row;
                row.label = jr.at("label").get<std::string>();
                row.mean = optional_from_json(jr.at("mean"));
                for (const auto& jc : jr.at("cells"))
                    row.cells.push_back(cell_from_json(jc));
                group.rows.push_back(std::move(row));
            }
            section.groups.push_back(std::move(group));
        }
        table.sections.push_back(std::move(section));
    }
    return table;
}

} // namespace

std::string_view to_string(SectionKind kind) noexcept
{
    switch (kind) {
    case SectionKind::Summary:
        return "summary";
    case SectionKind::Estimates:
        return "estimate";
    case SectionKind::StandardErrors:
        return "std_error";
    case SectionKind::CoefficientsOfVariation:
        return "coeff_variation";
    case SectionKind::ConfidenceIntervals:
        return "confidence_interval";
    }
    return "?";
}

SectionKind section_kind_from_string(std::string_view text)
{
    for (SectionKind kind : {SectionKind::Summary, SectionKind::Estimates, SectionKind::StandardErrors,
                             SectionKind::CoefficientsOfVariation, SectionKind::ConfidenceIntervals}) {
        if (to_string(kind) == text)
            return kind;
    }
    throw std::invalid_argument(fmt::format("unknown section kind '{}'", text));
}

std::optional<double> row_mean(const ReportRow& row)
{
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& cell : row.cells) {
        if (const double* v = std::get_if<double>(&cell)) {
            sum += *v;
            ++count;
        }
    }
    if (count == 0)
        return std::nullopt;
    return sum / static_cast<double>(count);
}

ReportTable build_summary_table(std::span<const ContractStats> contracts, KurtosisConvention kurtosis)
{
    if (contracts.empty())
        throw std::invalid_argument("summary table needs at least one contract");

    ReportTable table;
    table.id = "summary";
    table.title = "Summary statistics of daily log returns";
    ReportSection section;
    section.label = "Summary statistics";
    section.kind = SectionKind::Summary;
    RowGroup group;

    auto add_row = [&](std::string label, auto getter) {
        ReportRow row{std::move(label), {}, std::nullopt};
        for (const auto& c : contracts)
            row.cells.emplace_back(static_cast<double>(getter(c.stats)));
        group.rows.push_back(std::move(row));
    };
    for (const auto& c : contracts)
        table.columns.push_back(c.label);

    add_row("Mean", [](const SummaryStats& s) { return s.mean; });
    add_row("Std Dev", [](const SummaryStats& s) { return s.std_dev; });
    add_row("Skewness", [](const SummaryStats& s) { return s.skewness; });
    if (kurtosis == KurtosisConvention::Raw)
        add_row("Kurtosis", [](const SummaryStats& s) { return s.kurtosis; });
    else
        add_row("Excess kurtosis", [](const SummaryStats& s) { return s.excess_kurtosis(); });
    add_row("n", [](const SummaryStats& s) { return s.n; });
    add_row("Minimum", [](const SummaryStats& s) { return s.minimum; });
    add_row("Maximum", [](const SummaryStats& s) { return s.maximum; });

    // Undefined kurtosis (n < 4) renders blank.
    for (auto& row : group.rows) {
        for (auto& cell : row.cells) {
            if (const double* v = std::get_if<double>(&cell); v && std::isnan(*v))
                cell = std::monostate{};
        }
    }

    section.groups.push_back(std::move(group));
    table.sections.push_back(std::move(section));
    return table;
}

std::string parameter_label(MeasureKind measure, double parameter)
{
    if (measure == MeasureKind::SRM)
        return fmt::format("ARA = {:g}", parameter);
    return fmt::format("{}% {}", percent(parameter), to_string(measure));
}

ReportTable build_measure_table(const GridResult& grid, MeasureKind measure, std::span<const LossSample> samples,
                                double ci_coverage)
{
    if (!grid.measures().includes(measure))
        throw std::invalid_argument(fmt::format("grid has no {} cells", to_string(measure)));
    if (samples.size() != grid.sample_count())
        throw std::invalid_argument("sample list does not match the grid");

    ReportTable table;
    const std::string noun = measure_noun(measure);
    switch (measure) {
    case MeasureKind::VaR:
        table.id = "var";
        table.title = "Value-at-Risk estimates and their precision";
        break;
    case MeasureKind::ES:
        table.id = "es";
        table.title = "Expected shortfall estimates and their precision";
        break;
    case MeasureKind::SRM:
        table.id = "srm";
        table.title = "Spectral risk measure estimates and their precision (exponential risk aversion)";
        break;
    }

    // Columns: contract labels in first-seen order. Each (contract, position)
    // maps to at most one sample.
    std::map<std::pair<std::size_t, Position>, std::size_t> index;
    std::vector<Position> positions;
    for (std::size_t s = 0; s < samples.size(); ++s) {
        const auto& label = samples[s].source_label();
        auto it = std::find(table.columns.begin(), table.columns.end(), label);
        const auto col = static_cast<std::size_t>(it - table.columns.begin());
        if (it == table.columns.end())
            table.columns.push_back(label);
        if (!index.emplace(std::make_pair(col, samples[s].position()), s).second)
            throw std::invalid_argument(
                fmt::format("duplicate sample for contract '{}' ({})", label, to_string(samples[s].position())));
        if (std::find(positions.begin(), positions.end(), samples[s].position()) == positions.end())
            positions.push_back(samples[s].position());
    }
    std::sort(positions.begin(), positions.end()); // Long before Short

    const auto& params = grid.parameters(measure);
    const std::array<std::pair<SectionKind, std::string>, 4> layout{{
        {SectionKind::Estimates, fmt::format("(a) {} estimates", measure == MeasureKind::SRM ? "Spectral risk measure" : noun)},
        {SectionKind::StandardErrors, fmt::format("(b) Standard errors of {}", noun)},
        {SectionKind::CoefficientsOfVariation, fmt::format("(c) Coefficients of variation of {}", noun)},
        {SectionKind::ConfidenceIntervals, fmt::format("(d) {}% confidence intervals for {}", percent(ci_coverage), noun)},
    }};

    for (const auto& [kind, label] : layout) {
        ReportSection section{label, kind, {}, std::nullopt};
        for (Position pos : positions) {
            RowGroup group{pos, {}};
            for (std::size_t p = 0; p < params.size(); ++p) {
                ReportRow row{parameter_label(measure, params[p]), {}, std::nullopt};
                for (std::size_t col = 0; col < table.columns.size(); ++col) {
                    const auto it = index.find({col, pos});
                    const GridCell* cell = it == index.end() ? nullptr : grid.find(it->second, measure, p);
                    if (!cell || !cell->ok()) {
                        row.cells.emplace_back(std::monostate{});
                        continue;
                    }
                    const BootstrapResult& r = *cell->result;
                    switch (kind) {
                    case SectionKind::Estimates:
                        row.cells.emplace_back(r.point_estimate);
                        break;
                    case SectionKind::StandardErrors:
                        row.cells.emplace_back(r.std_error);
                        break;
                    case SectionKind::CoefficientsOfVariation:
                        row.cells.emplace_back(r.coeff_variation ? Cell{*r.coeff_variation} : Cell{std::monostate{}});
                        break;
                    case SectionKind::ConfidenceIntervals:
                        row.cells.emplace_back(r.ci_standardized ? Cell{*r.ci_standardized} : Cell{std::monostate{}});
                        break;
                    case SectionKind::Summary:
                        break;
                    }
                }
                group.rows.push_back(std::move(row));
            }
            section.groups.push_back(std::move(group));
        }
        if (kind != SectionKind::ConfidenceIntervals)
            fill_means(section);
        table.sections.push_back(std::move(section));
    }

    for (const auto& cell : grid.cells()) {
        if (cell.key.measure == measure && !cell.ok()) {
            const auto& sample = samples[cell.key.sample_index];
            table.footnotes.push_back(fmt::format("Blank cell {} {} {}: {}", sample.source_label(),
                                                  to_string(sample.position()),
                                                  parameter_label(measure, cell.parameter), cell.error));
        }
    }
    std::size_t resamples = 0;
    for (const auto& cell : grid.cells()) {
        if (cell.ok()) {
            resamples = cell.result->resamples;
            break;
        }
    }
    table.footnotes.push_back(fmt::format(
        "Estimates are means of {} bootstrap resamples; coefficient of variation is estimate / standard error; "
        "interval bounds are divided by the estimate.",
        resamples));
    return table;
}

std::vector<WeightCurve> figure1_data(std::span<const double> ks, std::size_t grid_points)
{
    if (ks.empty())
        throw std::invalid_argument("figure data needs at least one risk-aversion coefficient");
    if (grid_points < 2)
        throw std::invalid_argument("figure data needs at least 2 grid points");
    std::vector<WeightCurve> curves;
    for (double kv : ks) {
        const RiskAversion k(kv);
        WeightCurve curve{kv, {}};
        curve.points.reserve(grid_points);
        for (std::size_t i = 0; i < grid_points; ++i) {
            const double p = i + 1 == grid_points
                                 ? 1.0
                                 : 0.8 + 0.2 * static_cast<double>(i) / static_cast<double>(grid_points - 1);
            curve.points.push_back({p, exponential_weight(p, k)});
        }
        curves.push_back(std::move(curve));
    }
    return curves;
}

std::string render_curves_csv(std::span<const WeightCurve> curves)
{
    std::string out = "p,phi,k\n";
    for (const auto& curve : curves) {
        for (const auto& pt : curve.points)
            out += fmt::format("{},{},{}\n", full_precision(pt.p), full_precision(pt.phi), full_precision(curve.k));
    }
    return out;
}

std::string render_text(const ReportTable& table)
{
    bool has_mean = false;
    for (const auto& s : table.sections) {
        for (const auto& g : s.groups) {
            for (const auto& r : g.rows)
                has_mean = has_mean || r.mean.has_value();
        }
    }

    // Lines are first collected as cell strings, then padded to column widths.
    struct Line {
        std::vector<std::string> cells;
        bool heading = false;
    };
    std::vector<Line> lines;
    {
        Line header{{""}, false};
        for (const auto& c : table.columns)
            header.cells.push_back(c);
        if (has_mean)
            header.cells.emplace_back(kMeanColumn);
        lines.push_back(std::move(header));
    }
    for (const auto& section : table.sections) {
        lines.push_back({{section.label}, true});
        for (const auto& group : section.groups) {
            if (group.position)
                lines.push_back({{position_heading(*group.position)}, true});
            for (const auto& row : group.rows) {
                Line line{{row.label}, false};
                for (const auto& cell : row.cells)
                    line.cells.push_back(format_cell(cell, section.kind, row.label));
                if (has_mean)
                    line.cells.push_back(row.mean ? format_mean(*row.mean, section.kind) : "");
                lines.push_back(std::move(line));
            }
        }
        if (section.overall_mean) {
            Line line{{std::string(kOverallRow)}, false};
            line.cells.resize(table.columns.size() + 2);
            line.cells.back() = format_mean(*section.overall_mean, section.kind);
            lines.push_back(std::move(line));
        }
    }

    std::vector<std::size_t> widths;
    for (const auto& line : lines) {
        if (line.heading)
            continue;
        widths.resize(std::max(widths.size(), line.cells.size()), 0);
        for (std::size_t i = 0; i < line.cells.size(); ++i)
            widths[i] = std::max(widths[i], line.cells[i].size());
    }

    std::string out = table.title + "\n";
    for (const auto& line : lines) {
        if (line.heading) {
            out += line.cells.front() + "\n";
            continue;
        }
        std::string text = fmt::format("{:<{}}", line.cells[0], widths[0]);
        for (std::size_t i = 1; i < line.cells.size(); ++i)
            text += fmt::format("  {:>{}}", line.cells[i], widths[i]);
        while (!text.empty() && text.back() == ' ')
            text.pop_back();
        out += text + "\n";
    }
    for (const auto& note : table.footnotes)
        out += "Note: " + note + "\n";
    return out;
}

std::string render_csv(const ReportTable& table)
{
    std::string out = "section,kind,position,row,column,value,lower,upper\n";
    for (const auto& section : table.sections) {
        const std::string prefix = fmt::format("{},{}", csv::quote(section.label), to_string(section.kind));
        for (const auto& group : section.groups) {
            const std::string pos = group.position ? std::string(to_string(*group.position)) : "";
            for (const auto& row : group.rows) {
                for (std::size_t i = 0; i < row.cells.size(); ++i) {
                    const auto& cell = row.cells[i];
                    std::string values = ",,";
                    if (const double* v = std::get_if<double>(&cell))
                        values = full_precision(*v) + ",,";
                    else if (const Interval* iv = std::get_if<Interval>(&cell))
                        values = "," + full_precision(iv->lower) + "," + full_precision(iv->upper);
                    out += fmt::format("{},{},{},{},{}\n", prefix, pos, csv::quote(row.label),
                                       csv::quote(table.columns.at(i)), values);
                }
                if (row.mean)
                    out += fmt::format("{},{},{},{},{},,\n", prefix, pos, csv::quote(row.label), kMeanColumn,
                                       full_precision(*row.mean));
            }
        }
        if (section.overall_mean)
            out += fmt::format("{},,{},{},{},,\n", prefix, kOverallRow, kMeanColumn,
                               full_precision(*section.overall_mean));
    }
    return out;
}

ReportTable parse_csv_table(std::string_view text)
{
    ReportTable table;
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line) || line != "section,kind,position,row,column,value,lower,upper")
        throw std::invalid_argument("not a report CSV (unexpected header)");

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty())
            continue;
        const auto f = csv::split_record(line);
        if (f.size() != 8)
            throw std::invalid_argument(fmt::format("report CSV line {}: expected 8 fields", line_no));
        const auto& [section_label, kind, pos, row_label, column, value, lower, upper] =
            std::tie(f[0], f[1], f[2], f[3], f[4], f[5], f[6], f[7]);

        if (table.sections.empty() || table.sections.back().label != section_label)
            table.sections.push_back({section_label, section_kind_from_string(kind), {}, std::nullopt});
        auto& section = table.sections.back();

        if (row_label == kOverallRow && column == kMeanColumn && pos.empty()) {
            section.overall_mean = parse_exact(value);
            continue;
        }
        const auto position = position_from_string(pos);
        if (section.groups.empty() || section.groups.back().position != position)
            section.groups.push_back({position, {}});
        auto& group = section.groups.back();

        if (column == kMeanColumn) {
            if (group.rows.empty() || group.rows.back().label != row_label)
                throw std::invalid_argument(fmt::format("report CSV line {}: mean without its row", line_no));
            group.rows.back().mean = parse_exact(value);
            continue;
        }

        auto col_it = std::find(table.columns.begin(), table.columns.end(), column);
        const auto col = static_cast<std::size_t>(col_it - table.columns.begin());
        if (col_it == table.columns.end())
            table.columns.push_back(column);
        if (col == 0 || group.rows.empty() || group.rows.back().label != row_label)
            group.rows.push_back({row_label, {}, std::nullopt});
        auto& row = group.rows.back();
        if (row.cells.size() != col)
            throw std::invalid_argument(fmt::format("report CSV line {}: column '{}' out of order", line_no, column));

        if (!value.empty())
            row.cells.emplace_back(parse_exact(value));
        else if (!lower.empty())
            row.cells.emplace_back(Interval{parse_exact(lower), parse_exact(upper)});
        else
            row.cells.emplace_back(std::monostate{});
    }
    return table;
}

std::string render_json(std::span<const ReportTable> tables, const Metadata& metadata)
{
    json meta = json::object();
    for (const auto& [key, value] : metadata)
        meta[key] = value;
    json doc = {{"metadata", meta}, {"tables", json::array()}};
    for (const auto& table : tables)
        doc["tables"].push_back(table_to_json(table));
    return doc.dump(2) + "\n";
}

std::vector<ReportTable> parse_json_tables(std::string_view document)
{
    const json doc = json::parse(document);
    std::vector<ReportTable> tables;
    for (const auto& j : doc.at("tables"))
        tables.push_back(table_from_json(j));
    return tables;
}

} // namespace futrisk
