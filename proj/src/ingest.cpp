#include "futrisk/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>

#include <fmt/format.h>

#include "csv.hpp"

namespace futrisk {

namespace {

using csv::split_record;
using csv::trim;

std::optional<double> parse_real(const std::string& text)
{
    double value = 0.0;
    const char* begin = text.data();
    const char* end = text.data() + text.size();
    if (begin != end && *begin == '+')
        ++begin;
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end)
        return std::nullopt;
    return value;
}

struct RawRow {
    std::size_t line;
    Date date;
    double value;
};

struct RawFile {
    std::string label;
    std::string value_column;
    ValueKind kind;
    std::vector<RawRow> rows;
};

std::optional<std::size_t> find_column(const std::vector<std::string>& header, const std::string& name)
{
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name)
            return i;
    }
    return std::nullopt;
}

RawFile read_file(const std::filesystem::path& path, const ColumnMapping& mapping, ValueKind wanted)
{
    std::ifstream in(path);
    if (!in)
        throw InputError(fmt::format("{}: cannot open file", path.string()));

    std::string line;
    if (!std::getline(in, line))
        throw InputError(fmt::format("{}: file is empty (header row required)", path.string()));
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0)
        line.erase(0, 3);
    const auto header = split_record(line);

    const auto date_idx = find_column(header, mapping.date_column);
    if (!date_idx)
        throw InputError(fmt::format("{}: date column '{}' not found", path.string(), mapping.date_column));

    RawFile file;
    file.label = mapping.contract_label.empty() ? path.stem().string() : mapping.contract_label;
    file.kind = wanted;

    std::optional<std::size_t> value_idx;
    if (!mapping.value_column.empty()) {
        value_idx = find_column(header, mapping.value_column);
        file.value_column = mapping.value_column;
        if (file.kind == ValueKind::Auto)
            file.kind = ValueKind::Price;
    } else {
        const bool want_price = file.kind != ValueKind::Return;
        const bool want_return = file.kind != ValueKind::Price;
        for (const char* name : {"price", "return", "log_return"}) {
            const bool is_price = std::string_view(name) == "price";
            if ((is_price && !want_price) || (!is_price && !want_return))
                continue;
            if ((value_idx = find_column(header, name))) {
                file.value_column = name;
                file.kind = is_price ? ValueKind::Price : ValueKind::Return;
                break;
            }
        }
    }
    if (!value_idx)
        throw InputError(fmt::format("{}: value column '{}' not found", path.string(),
                                     mapping.value_column.empty() ? "price|return" : mapping.value_column));

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty())
            continue;
        const auto fields = split_record(line);
        if (fields.size() <= std::max(*date_idx, *value_idx))
            throw InputError(fmt::format("{}: row {}: expected at least {} fields, got {}", path.string(),
                                         line_no, std::max(*date_idx, *value_idx) + 1, fields.size()));
        Date date;
        try {
            date = parse_date(fields[*date_idx], mapping.date_format);
        } catch (const InputError& e) {
            throw InputError(fmt::format("{}: row {}: {}", path.string(), line_no, e.what()));
        }
        const auto value = parse_real(fields[*value_idx]);
        if (!value || !std::isfinite(*value))
            throw InputError(fmt::format("{}: row {}: cannot parse '{}' as a real number", path.string(), line_no,
                                         fields[*value_idx]));
        if (file.kind == ValueKind::Price && !(*value > 0.0))
            throw InputError(fmt::format("{}: row {}: non-positive price {}", path.string(), line_no, *value));
        file.rows.push_back({line_no, date, *value});
    }

    std::stable_sort(file.rows.begin(), file.rows.end(),
                     [](const RawRow& a, const RawRow& b) { return a.date < b.date; });
    for (std::size_t i = 1; i < file.rows.size(); ++i) {
        if (file.rows[i].date == file.rows[i - 1].date)
            throw InputError(fmt::format("{}: duplicate date {} (rows {} and {})", path.string(),
                                         format_date(file.rows[i].date), file.rows[i - 1].line, file.rows[i].line));
    }
    return file;
}

PriceSeries to_prices(RawFile file)
{
    PriceSeries series{std::move(file.label), {}};
    series.observations.reserve(file.rows.size());
    for (const auto& row : file.rows)
        series.observations.push_back({row.date, row.value});
    return series;
}

ReturnSeries to_returns(RawFile file)
{
    ReturnSeries series{std::move(file.label), {}};
    series.observations.reserve(file.rows.size());
    for (const auto& row : file.rows)
        series.observations.push_back({row.date, row.value});
    return series;
}

} // namespace

void PriceSeries::validate() const
{
    if (observations.size() < 2)
        throw InputError(fmt::format("{}: price series needs at least 2 observations, got {}", contract_label,
                                     observations.size()));
    for (std::size_t i = 0; i < observations.size(); ++i) {
        const auto& obs = observations[i];
        if (!std::isfinite(obs.price) || !(obs.price > 0.0))
            throw InputError(fmt::format("{}: non-positive or non-finite price at {}", contract_label,
                                         format_date(obs.date)));
        if (i > 0 && !(observations[i - 1].date < obs.date))
            throw InputError(fmt::format("{}: dates not strictly increasing at {}", contract_label,
                                         format_date(obs.date)));
    }
}

std::vector<double> ReturnSeries::values() const
{
    std::vector<double> out;
    out.reserve(observations.size());
    for (const auto& obs : observations)
        out.push_back(obs.log_return);
    return out;
}

void ReturnSeries::validate() const
{
    if (observations.empty())
        throw InputError(fmt::format("{}: return series is empty", contract_label));
    for (std::size_t i = 0; i < observations.size(); ++i) {
        if (!std::isfinite(observations[i].log_return))
            throw InputError(fmt::format("{}: non-finite return at {}", contract_label,
                                         format_date(observations[i].date)));
        if (i > 0 && !(observations[i - 1].date < observations[i].date))
            throw InputError(fmt::format("{}: dates not strictly increasing at {}", contract_label,
                                         format_date(observations[i].date)));
    }
}

PriceSeries load_prices(const std::filesystem::path& path, const ColumnMapping& mapping)
{
    if (mapping.kind == ValueKind::Return)
        throw InputError(fmt::format("{}: mapping describes a return column, not prices", path.string()));
    auto series = to_prices(read_file(path, mapping, ValueKind::Price));
    series.validate();
    return series;
}

ReturnSeries load_returns(const std::filesystem::path& path, const ColumnMapping& mapping)
{
    if (mapping.kind == ValueKind::Price)
        throw InputError(fmt::format("{}: mapping describes a price column, not returns", path.string()));
    auto series = to_returns(read_file(path, mapping, ValueKind::Return));
    if (mapping.drop_zero_returns)
        series = drop_zero_returns(std::move(series));
    series.validate();
    return series;
}

ReturnSeries load_series(const std::filesystem::path& path, const ColumnMapping& mapping)
{
    auto file = read_file(path, mapping, mapping.kind);
    ReturnSeries series;
    if (file.kind == ValueKind::Price) {
        auto prices = to_prices(std::move(file));
        prices.validate();
        series = log_returns(prices);
    } else {
        series = to_returns(std::move(file));
    }
    if (mapping.drop_zero_returns)
        series = drop_zero_returns(std::move(series));
    series.validate();
    return series;
}

ReturnSeries log_returns(const PriceSeries& prices)
{
    prices.validate();
    ReturnSeries out{prices.contract_label, {}};
    out.observations.reserve(prices.size() - 1);
    for (std::size_t t = 1; t < prices.size(); ++t) {
        const double prev = prices.observations[t - 1].price;
        const double curr = prices.observations[t].price;
        const double r = curr == prev ? 0.0 : std::log(curr / prev);
        out.observations.push_back({prices.observations[t].date, r});
    }
    return out;
}

ReturnSeries drop_zero_returns(ReturnSeries series)
{
    std::erase_if(series.observations, [](const ReturnObservation& obs) { return obs.log_return == 0.0; });
    return series;
}

SummaryStats summary_stats(std::span<const double> input)
{
    const std::size_t n = input.size();
    if (n < 2)
        throw std::invalid_argument(fmt::format("summary statistics need at least 2 observations, got {}", n));

    // Accumulate in sorted order so the result is independent of observation order.
    std::vector<double> values(input.begin(), input.end());
    std::sort(values.begin(), values.end());

    SummaryStats s;
    s.n = n;
    s.minimum = values.front();
    s.maximum = values.back();

    double sum = 0.0;
    for (double v : values)
        sum += v;
    s.mean = std::clamp(sum / static_cast<double>(n), s.minimum, s.maximum);

    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : values) {
        const double d = v - s.mean;
        const double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    if (m2 == 0.0)
        throw std::domain_error("summary statistics undefined for a constant series (zero variance)");

    const auto nd = static_cast<double>(n);
    s.std_dev = std::sqrt(m2 / (nd - 1.0));
    m2 /= nd;
    m3 /= nd;
    m4 /= nd;
    s.skewness = m3 / std::pow(m2, 1.5);
    s.kurtosis = n >= 4 ? m4 / (m2 * m2) : std::numeric_limits<double>::quiet_NaN();
    return s;
}

SummaryStats summary_stats(const ReturnSeries& series)
{
    const auto values = series.values();
    return summary_stats(values);
}

Date parse_date(const std::string& text, const std::string& format)
{
    std::tm tm{};
    std::istringstream in(text);
    in >> std::get_time(&tm, format.c_str());
    if (in.fail())
        throw InputError(fmt::format("cannot parse date '{}' with format '{}'", text, format));
    in >> std::ws;
    if (!in.eof())
        throw InputError(fmt::format("trailing characters in date '{}'", text));
    const Date date{std::chrono::year{tm.tm_year + 1900}, std::chrono::month{static_cast<unsigned>(tm.tm_mon + 1)},
                    std::chrono::day{static_cast<unsigned>(tm.tm_mday)}};
    if (!date.ok())
        throw InputError(fmt::format("invalid calendar date '{}'", text));
    return date;
}

std::string format_date(Date date)
{
    return fmt::format("{:04d}-{:02d}-{:02d}", static_cast<int>(date.year()), static_cast<unsigned>(date.month()),
                       static_cast<unsigned>(date.day()));
}

} // namespace futrisk
