#include "helpers.hpp"

#include "distress/features.hpp"

using namespace distress;

namespace {

FinancialRecord record(const std::string& firm, int year, double base, std::optional<Date> brupt = std::nullopt)
{
    FinancialRecord r;
    r.firm_id = firm;
    r.fiscal_year = year;
    r.filing_date = parse_date(std::to_string(year + 1) + "-03-15");
    r.wc = base;
    r.re = base * 2;
    r.ebit = -base;
    r.mve = base + 0.1;
    r.sale = 1.0 / 3.0 + base;
    r.bankruptcy_date = brupt;
    return r;
}

}  // namespace

TEST_CASE("bankruptcy label window is one to 365 days after the filing")
{
    const auto filed = parse_date("2019-03-15");
    CHECK(label_bankruptcy(filed, std::nullopt) == 0);
    CHECK(label_bankruptcy(filed, add_days(filed, 1)) == 1);
    CHECK(label_bankruptcy(filed, add_days(filed, 365)) == 1);
    CHECK(label_bankruptcy(filed, add_days(filed, 366)) == 0);
    CHECK_ERRC(label_bankruptcy(filed, add_days(filed, -1)), Errc::InvalidDateOrder);
}

TEST_CASE("variable set names and feature order")
{
    CHECK(parse_variable_set("FIN+DAPT") == VariableSet::FinDapt);
    CHECK(to_string(VariableSet::FinW2v) == "FIN+W2V");
    CHECK_ERRC(parse_variable_set("FIN+XYZ"), Errc::InvalidArgument);
    CHECK(feature_names(VariableSet::Fin).size() == 5);
    CHECK(feature_names(VariableSet::FinBert) ==
          std::vector<std::string>{"WC", "RE", "EBIT", "MVE", "SALE", "BERTPOS", "BERTNEG"});
    CHECK_FALSE(sentiment_family(VariableSet::Fin).has_value());
}

TEST_CASE("assembly joins on firm and year and reports missing scores")
{
    const std::vector<FinancialRecord> records = {record("A", 2018, 0.1),
                                                  record("B", 2018, 0.2, parse_date("2019-10-01"))};
    SentimentTables tables;
    tables[SentimentFamily::Dict][{"A", 2018}] = {0.05, 0.01};
    tables[SentimentFamily::Dict][{"B", 2018}] = {0.02, 0.04};
    const auto data = assemble(records, tables, VariableSet::FinDict);
    REQUIRE(data.size() == 2);
    CHECK(data.rows[1].brupt == 1);
    CHECK(data.rows[1].features.back() == 0.04);
    CHECK(assemble(records, tables, VariableSet::Fin).dimension() == 5);
    CHECK_ERRC(assemble(records, tables, VariableSet::FinBert), Errc::MissingSentiment);
    tables[SentimentFamily::Dict].erase({"B", 2018});
    CHECK_ERRC(assemble(records, tables, VariableSet::FinDict), Errc::MissingSentiment);
}

TEST_CASE("observation and financial CSVs round-trip exactly")
{
    const auto dir = testing::scratch("features");
    const std::vector<FinancialRecord> records = {record("A", 2017, 0.1), record("B", 2018, 1e-17, parse_date("2019-05-05"))};
    write_financial_csv(dir / "fin.csv", records);
    const auto back = read_financial_csv(dir / "fin.csv");
    REQUIRE(back.size() == 2);
    CHECK(back[0].sale == records[0].sale);
    CHECK(back[1].bankruptcy_date == records[1].bankruptcy_date);
    CHECK_FALSE(back[0].bankruptcy_date.has_value());

    const auto data = assemble(records, {}, VariableSet::Fin);
    write_observation_csv(dir / "obs.csv", data);
    const auto again = read_observation_csv(dir / "obs.csv");
    CHECK(again.feature_names == data.feature_names);
    REQUIRE(again.size() == 2);
    CHECK(again.rows[0].features == data.rows[0].features);
    CHECK(again.rows[1].filing_date == data.rows[1].filing_date);
    CHECK(again.rows[1].brupt == data.rows[1].brupt);
}

TEST_CASE("quantiles, winsorization and standardization")
{
    CHECK(quantile({1, 2, 3, 4}, 0.5) == 2.5);
    CHECK(quantile({5}, 0.01) == 5);
    CHECK_ERRC(quantile({}, 0.5), Errc::InsufficientData);

    Dataset data;
    data.feature_names = {"X", "C"};
    for (int i = 0; i <= 100; ++i) {
        data.rows.push_back({"F" + std::to_string(i), 2018, parse_date("2019-01-01"), 0, {static_cast<double>(i), 7.0}});
    }
    data.rows[0].features[0] = -1e6;
    const auto bounds = fit_winsor(data, 0.01);
    const auto w = apply_winsor(data, bounds);
    CHECK(w.rows[0].features[0] == doctest::Approx(bounds.bounds[0].first));
    CHECK(w.rows[50].features[0] == 50.0);
    CHECK_ERRC(fit_winsor(data, 0.6), Errc::InvalidArgument);

    const auto st = fit_standardizer(w);
    CHECK(st.dropped == std::vector<std::string>{"C"});
    const auto z = st.apply(w);
    CHECK(z.dimension() == 1);
    double mean = 0.0;
    for (const auto& r : z.rows) {
        mean += r.features[0];
    }
    CHECK(mean / 101.0 == doctest::Approx(0.0).epsilon(1e-12));
    const std::vector<std::size_t> idx = {3, 1};
    CHECK(data.subset(idx).rows[0].firm_id == "F3");
}
