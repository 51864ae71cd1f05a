#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "../support/generators.hpp"
#include "futrisk/report.hpp"

using namespace futrisk;
using Catch::Approx;

namespace {

SummaryStats stats_of(std::uint64_t seed, std::size_t n)
{
    std::mt19937_64 rng(seed);
    const auto v = testing::draw_losses(rng, n, testing::Family::StudentT, 0.01);
    return summary_stats(v);
}

std::vector<LossSample> contract_samples(std::size_t contracts, std::size_t n)
{
    std::vector<LossSample> out;
    for (std::size_t c = 0; c < contracts; ++c) {
        std::mt19937_64 rng(100 + c);
        const auto r = testing::draw_losses(rng, n, testing::Family::Contaminated, 0.01);
        const std::string label = "C" + std::to_string(c + 1);
        out.push_back(to_losses(r, Position::Long, label));
        out.push_back(to_losses(r, Position::Short, label));
    }
    return out;
}

BootstrapConfig quick()
{
    BootstrapConfig c;
    c.resamples = 100;
    c.master_seed = 3;
    return c;
}

const std::vector<double> kAlphas{0.90, 0.95, 0.99};
const std::vector<double> kKs{5, 10, 20, 40, 80};

std::vector<double> scalars(const ReportRow& row)
{
    std::vector<double> out;
    for (const auto& c : row.cells) {
        if (const double* v = std::get_if<double>(&c))
            out.push_back(*v);
    }
    return out;
}

void check_means(const ReportTable& table)
{
    for (const auto& section : table.sections) {
        if (section.kind == SectionKind::ConfidenceIntervals || section.kind == SectionKind::Summary) {
            CHECK_FALSE(section.overall_mean);
            continue;
        }
        double sum = 0.0;
        std::size_t count = 0;
        for (const auto& group : section.groups) {
            for (const auto& row : group.rows) {
                const auto v = scalars(row);
                if (v.empty())
                    continue;
                double s = 0.0;
                for (double x : v)
                    s += x;
                REQUIRE(row.mean);
                CHECK(std::abs(*row.mean - s / v.size()) <= 1e-10);
                sum += *row.mean;
                ++count;
            }
        }
        REQUIRE(section.overall_mean);
        CHECK(std::abs(*section.overall_mean - sum / count) <= 1e-10);
    }
}

void check_same_cells(const ReportTable& a, const ReportTable& b)
{
    REQUIRE(a.columns == b.columns);
    REQUIRE(a.sections.size() == b.sections.size());
    for (std::size_t s = 0; s < a.sections.size(); ++s) {
        const auto& sa = a.sections[s];
        const auto& sb = b.sections[s];
        CHECK(sa.label == sb.label);
        CHECK(sa.kind == sb.kind);
        CHECK(sa.overall_mean == sb.overall_mean);
        REQUIRE(sa.groups.size() == sb.groups.size());
        for (std::size_t g = 0; g < sa.groups.size(); ++g) {
            CHECK(sa.groups[g].position == sb.groups[g].position);
            REQUIRE(sa.groups[g].rows.size() == sb.groups[g].rows.size());
            for (std::size_t r = 0; r < sa.groups[g].rows.size(); ++r) {
                const auto& ra = sa.groups[g].rows[r];
                const auto& rb = sb.groups[g].rows[r];
                CHECK(ra.label == rb.label);
                CHECK(ra.mean == rb.mean);
                CHECK(ra.cells == rb.cells);
            }
        }
    }
}

} // namespace

TEST_CASE("summary table row order and width", "[report]")
{
    const std::vector<ContractStats> one{{"SP", stats_of(1, 500)}};
    const auto t = build_summary_table(one);
    CHECK(t.id == "summary");
    REQUIRE(t.columns == std::vector<std::string>{"SP"});
    REQUIRE(t.sections.size() == 1);
    const auto& rows = t.sections[0].groups.at(0).rows;
    const std::vector<std::string> expected{"Mean", "Std Dev", "Skewness", "Kurtosis", "n", "Minimum", "Maximum"};
    REQUIRE(rows.size() == expected.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].label == expected[i]);
        CHECK(rows[i].cells.size() == 1);
        CHECK_FALSE(rows[i].mean);
    }
    CHECK(std::get<double>(rows[4].cells[0]) == 500.0);

    const auto s = stats_of(2, 3392);
    const std::vector<ContractStats> twins{{"A", s}, {"B", s}};
    const auto tt = build_summary_table(twins);
    for (const auto& row : tt.sections[0].groups[0].rows)
        CHECK(row.cells[0] == row.cells[1]);

    const auto excess = build_summary_table(twins, KurtosisConvention::Excess);
    const auto& k = excess.sections[0].groups[0].rows[3];
    CHECK(k.label == "Excess kurtosis");
    CHECK(std::get<double>(k.cells[0]) == Approx(s.kurtosis - 3.0));

    CHECK_THROWS(build_summary_table(std::vector<ContractStats>{}));
}

TEST_CASE("undefined kurtosis renders blank", "[report]")
{
    const std::vector<double> three{-1, 0, 2};
    const std::vector<ContractStats> c{{"tiny", summary_stats(three)}};
    const auto t = build_summary_table(c);
    CHECK(std::holds_alternative<std::monostate>(t.sections[0].groups[0].rows[3].cells[0]));
    CHECK(render_text(t).find("nan") == std::string::npos);
}

TEST_CASE("measure tables have the four-section layout", "[report]")
{
    const auto samples = contract_samples(3, 300);
    const auto grid = run_grid(samples, kAlphas, kKs, quick());

    struct Expect {
        MeasureKind kind;
        std::string id;
        std::size_t rows;
    };
    for (const auto& e : {Expect{MeasureKind::VaR, "var", 3}, Expect{MeasureKind::ES, "es", 3},
                          Expect{MeasureKind::SRM, "srm", 5}}) {
        const auto t = build_measure_table(grid, e.kind, samples);
        CHECK(t.id == e.id);
        CHECK(t.columns == std::vector<std::string>{"C1", "C2", "C3"});
        REQUIRE(t.sections.size() == 4);
        CHECK(t.sections[0].label.rfind("(a)", 0) == 0);
        CHECK(t.sections[1].label.rfind("(b)", 0) == 0);
        CHECK(t.sections[2].label.rfind("(c)", 0) == 0);
        CHECK(t.sections[3].label.rfind("(d) 90%", 0) == 0);
        for (const auto& section : t.sections) {
            REQUIRE(section.groups.size() == 2);
            CHECK(section.groups[0].position == Position::Long);
            CHECK(section.groups[1].position == Position::Short);
            for (const auto& g : section.groups) {
                REQUIRE(g.rows.size() == e.rows);
                for (const auto& row : g.rows) {
                    CHECK(row.cells.size() == 3);
                    CHECK(row.mean.has_value() == (section.kind != SectionKind::ConfidenceIntervals));
                }
            }
        }
        CHECK(t.sections[0].groups[0].rows[0].label == parameter_label(e.kind, e.rows == 3 ? 0.90 : 5.0));
        check_means(t);
    }
    CHECK(parameter_label(MeasureKind::VaR, 0.9) == "90% VaR");
    CHECK(parameter_label(MeasureKind::ES, 0.995) == "99.5% ES");
    CHECK(parameter_label(MeasureKind::SRM, 40) == "ARA = 40");
}

TEST_CASE("grid of one cell gives a single-row table", "[report]")
{
    std::mt19937_64 rng(4);
    const std::vector<LossSample> samples{
        LossSample(testing::draw_losses(rng, 200, testing::Family::Normal), Position::Short, "X")};
    const std::vector<double> alphas{0.99};
    const auto grid = run_grid(samples, alphas, {}, quick(), MeasureSelection{false, true, false});
    const auto t = build_measure_table(grid, MeasureKind::ES, samples);
    const auto& sec = t.sections[0];
    REQUIRE(sec.groups.size() == 1);
    CHECK(sec.groups[0].position == Position::Short);
    REQUIRE(sec.groups[0].rows.size() == 1);
    const auto& row = sec.groups[0].rows[0];
    CHECK(*row.mean == std::get<double>(row.cells[0]));
    CHECK(*sec.overall_mean == *row.mean);
}

TEST_CASE("failed cells render blank with a footnote", "[report]")
{
    const auto samples = contract_samples(2, 100);
    const std::vector<double> ks{1e-9, 5};
    const auto grid = run_grid(samples, kAlphas, ks, quick());
    const auto t = build_measure_table(grid, MeasureKind::SRM, samples);
    const auto& first = t.sections[0].groups[0].rows[0];
    CHECK(std::holds_alternative<std::monostate>(first.cells[0]));
    CHECK(std::holds_alternative<std::monostate>(first.cells[1]));
    CHECK_FALSE(first.mean);
    CHECK(t.sections[0].groups[0].rows[1].mean);
    std::size_t blank_notes = 0;
    for (const auto& note : t.footnotes)
        blank_notes += note.rfind("Blank cell", 0) == 0;
    CHECK(blank_notes == 4);
    CHECK(t.footnotes.back().find("100 bootstrap resamples") != std::string::npos);
    check_means(t);
}

TEST_CASE("machine formats round-trip bit-exactly", "[report]")
{
    const auto samples = contract_samples(2, 250);
    const auto grid = run_grid(samples, kAlphas, kKs, quick());
    std::vector<ReportTable> tables;
    std::vector<ContractStats> stats{{"C1", stats_of(1, 250)}, {"C2", stats_of(2, 250)}};
    tables.push_back(build_summary_table(stats));
    for (auto kind : {MeasureKind::VaR, MeasureKind::ES, MeasureKind::SRM})
        tables.push_back(build_measure_table(grid, kind, samples));

    for (const auto& t : tables)
        check_same_cells(t, parse_csv_table(render_csv(t)));

    const Metadata meta{{"seed", "3"}, {"resamples", "100"}};
    const auto doc = render_json(tables, meta);
    const auto parsed = parse_json_tables(doc);
    REQUIRE(parsed.size() == tables.size());
    for (std::size_t i = 0; i < tables.size(); ++i) {
        CHECK(parsed[i].id == tables[i].id);
        CHECK(parsed[i].title == tables[i].title);
        CHECK(parsed[i].footnotes == tables[i].footnotes);
        check_same_cells(tables[i], parsed[i]);
    }
    CHECK(render_json(parsed, meta) == doc);
}

TEST_CASE("csv carries awkward labels and extreme values", "[report]")
{
    ReportTable t;
    t.id = "x";
    t.columns = {"a,b", "q\"uote"};
    ReportSection s{"(a) odd, \"label\"", SectionKind::Estimates, {}, 1.0 / 3.0};
    s.groups.push_back(RowGroup{Position::Long, {ReportRow{"r", {Cell{5e-324}, Cell{-0.1}}, 0.1 + 0.2}}});
    s.groups.push_back(RowGroup{Position::Short, {ReportRow{"r", {Cell{}, Cell{Interval{0.95, 1.1}}}, {}}}});
    t.sections.push_back(s);
    check_same_cells(t, parse_csv_table(render_csv(t)));
}

TEST_CASE("text rendering uses fixed decimals", "[report]")
{
    ReportTable t;
    t.id = "var";
    t.title = "T";
    t.columns = {"A"};
    ReportSection est{"(a) VaR estimates", SectionKind::Estimates, {}, 0.0123456};
    est.groups.push_back(RowGroup{Position::Long, {ReportRow{"90% VaR", {Cell{0.0123456}}, 0.0123456}}});
    ReportSection cv{"(c) Coefficients of variation of VaR", SectionKind::CoefficientsOfVariation, {}, 12.3456};
    cv.groups.push_back(RowGroup{Position::Long, {ReportRow{"90% VaR", {Cell{12.3456}}, 12.3456}}});
    ReportSection ci{"(d) 90% confidence intervals for VaR", SectionKind::ConfidenceIntervals, {}, {}};
    ci.groups.push_back(RowGroup{Position::Long, {ReportRow{"90% VaR", {Cell{Interval{0.91234, 1.08766}}}, {}}}});
    t.sections = {est, cv, ci};
    const auto text = render_text(t);
    CHECK(text.find("0.0123") != std::string::npos);
    CHECK(text.find("0.01235") == std::string::npos);
    CHECK(text.find("12.35") != std::string::npos);
    CHECK(text.find("[0.9123 1.0877]") != std::string::npos);
    CHECK(text.find("Overall mean") != std::string::npos);
    CHECK(text.find("Long position") != std::string::npos);
}

TEST_CASE("figure curves rise in p and in k", "[report]")
{
    const auto curves = figure1_data(kKs, 201);
    REQUIRE(curves.size() == 5);
    for (const auto& c : curves) {
        REQUIRE(c.points.size() == 201);
        CHECK(c.points.front().p == 0.8);
        CHECK(c.points.back().p == 1.0);
        for (std::size_t i = 1; i < c.points.size(); ++i) {
            REQUIRE(c.points[i].p > c.points[i - 1].p);
            REQUIRE(c.points[i].phi > c.points[i - 1].phi);
            REQUIRE(c.points[i].phi >= 0.0);
        }
    }
    for (std::size_t i = 1; i < curves.size(); ++i)
        CHECK(curves[i].points.back().phi > curves[i - 1].points.back().phi);

    const auto csv = render_curves_csv(curves);
    CHECK(csv.rfind("p,phi,k\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 5 * 201);

    CHECK_THROWS(figure1_data(std::vector<double>{}, 10));
    CHECK_THROWS(figure1_data(kKs, 1));
}
