// report.hpp
// Table assembly and rendering.
//
// A measure table has four sections: (a) point estimates, (b) standard
// errors, (c) coefficients of variation, (d) standardized confidence
// intervals. Each section has a long-position row group followed by a
// short-position group, one row per conditioning parameter and one column
// per contract. Sections (a)-(c) carry a per-row mean and an overall mean
// (the mean of the row means); section (d) carries neither.

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "futrisk/bootstrap.hpp"
#include "futrisk/ingest.hpp"
#include "futrisk/measures.hpp"

namespace futrisk {

enum class SectionKind { Summary, Estimates, StandardErrors, CoefficientsOfVariation, ConfidenceIntervals };

std::string_view to_string(SectionKind kind) noexcept;
SectionKind section_kind_from_string(std::string_view text);

/// Blank (failed or undefined), scalar, or interval.
using Cell = std::variant<std::monostate, double, Interval>;

struct ReportRow {
    std::string label;
    std::vector<Cell> cells;
    std::optional<double> mean;
};

struct RowGroup {
    std::optional<Position> position;
    std::vector<ReportRow> rows;
};

struct ReportSection {
    std::string label;
    SectionKind kind = SectionKind::Estimates;
    std::vector<RowGroup> groups;
    std::optional<double> overall_mean;
};

struct ReportTable {
    std::string id;
    std::string title;
    std::vector<std::string> columns;
    std::vector<ReportSection> sections;
    std::vector<std::string> footnotes;
};

enum class KurtosisConvention { Raw, Excess };

struct ContractStats {
    std::string label;
    SummaryStats stats;
};

/// Rows Mean, Std Dev, Skewness, Kurtosis, n, Minimum, Maximum.
ReportTable build_summary_table(std::span<const ContractStats> contracts,
                                KurtosisConvention kurtosis = KurtosisConvention::Raw);

/// Assemble the four-section table for one measure. `samples` must be the
/// list the grid was run on; their labels define the columns and their
/// positions the row groups.
ReportTable build_measure_table(const GridResult& grid, MeasureKind measure, std::span<const LossSample> samples,
                                double ci_coverage = 0.90);

std::string parameter_label(MeasureKind measure, double parameter);

struct CurvePoint {
    double p = 0.0;
    double phi = 0.0;
};

struct WeightCurve {
    double k = 0.0;
    std::vector<CurvePoint> points;
};

/// phi_k evaluated on an even grid over p in [0.8, 1].
std::vector<WeightCurve> figure1_data(std::span<const double> ks, std::size_t grid_points);
/// "p,phi,k" rows.
std::string render_curves_csv(std::span<const WeightCurve> curves);

/// Aligned text: 4 decimals, 2 for coefficients of variation, bracketed intervals.
std::string render_text(const ReportTable& table);

/// Long-format CSV, one line per cell, full round-trip precision.
/// Header: section,kind,position,row,column,value,lower,upper
std::string render_csv(const ReportTable& table);
ReportTable parse_csv_table(std::string_view csv);

using Metadata = std::vector<std::pair<std::string, std::string>>;

/// Structured key-value (JSON) document holding metadata and tables.
std::string render_json(std::span<const ReportTable> tables, const Metadata& metadata);
std::vector<ReportTable> parse_json_tables(std::string_view document);

/// Mean of the scalar cells in a row; nullopt when there are none.
std::optional<double> row_mean(const ReportRow& row);

} // namespace futrisk
