// ingest.hpp
// Loading of settlement-price or return series from CSV, conversion to daily
// log returns, and the summary statistics reported for each contract.

#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace futrisk {

using Date = std::chrono::year_month_day;

/// Malformed or unusable input data (bad file, bad row, bad value).
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct PriceObservation {
    Date date;
    double price;
};

struct PriceSeries {
    std::string contract_label;
    std::vector<PriceObservation> observations;

    std::size_t size() const noexcept { return observations.size(); }
    /// Throws InputError unless dates strictly increase, prices are positive
    /// and finite, and there are at least two observations.
    void validate() const;
};

struct ReturnObservation {
    Date date;
    double log_return;
};

struct ReturnSeries {
    std::string contract_label;
    std::vector<ReturnObservation> observations;

    std::size_t size() const noexcept { return observations.size(); }
    bool empty() const noexcept { return observations.empty(); }
    std::vector<double> values() const;
    void validate() const;
};

/// First four moments plus extremes. Kurtosis is raw (normal = 3).
struct SummaryStats {
    std::size_t n = 0;
    double mean = 0.0;
    double std_dev = 0.0;
    double skewness = 0.0;
    double kurtosis = 0.0;
    double minimum = 0.0;
    double maximum = 0.0;

    double excess_kurtosis() const noexcept { return kurtosis - 3.0; }
};

enum class ValueKind { Price, Return, Auto };

/// How to read one CSV file. With ValueKind::Auto the value column is
/// taken from the header: a column named "price" wins over one named
/// "return" or "log_return".
struct ColumnMapping {
    std::string date_column = "date";
    std::string value_column;
    ValueKind kind = ValueKind::Auto;
    std::string date_format = "%Y-%m-%d";
    bool drop_zero_returns = false;
    std::string contract_label; // empty: use the file stem
};

/// Reads a price file. Rows are sorted by date if the file is unordered.
PriceSeries load_prices(const std::filesystem::path& path, const ColumnMapping& mapping);

/// Reads a pre-computed return file; no log transform is applied.
ReturnSeries load_returns(const std::filesystem::path& path, const ColumnMapping& mapping);

/// Reads either kind of file per the mapping and always yields returns.
ReturnSeries load_series(const std::filesystem::path& path, const ColumnMapping& mapping);

/// r_t = ln(P_t / P_{t-1}). A repeated (padded) price yields exactly 0.
ReturnSeries log_returns(const PriceSeries& prices);

ReturnSeries drop_zero_returns(ReturnSeries series);

SummaryStats summary_stats(std::span<const double> values);
SummaryStats summary_stats(const ReturnSeries& series);

Date parse_date(const std::string& text, const std::string& format);
std::string format_date(Date date);

} // namespace futrisk
