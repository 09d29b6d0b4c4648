#include "helpers.hpp"

#include "distress/evaluation.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

using namespace distress;

namespace {

Dataset panel(int healthy_per_year, int bankrupt_per_year)
{
    Dataset d;
    d.feature_names = {"X"};
    int id = 0;
    for (int year = 2010; year <= 2020; ++year) {
        for (int i = 0; i < healthy_per_year + bankrupt_per_year; ++i) {
            Observation o;
            o.firm_id = "F" + std::to_string(id++);
            o.fiscal_year = year;
            o.filing_date = add_days(parse_date(std::to_string(year + 1) + "-01-01"), i);
            o.brupt = i < bankrupt_per_year ? 1 : 0;
            o.features = {static_cast<double>(i)};
            d.rows.push_back(o);
        }
    }
    return d;
}

}  // namespace

TEST_CASE("accuracy is one minus the error rates")
{
    const auto a = accuracy({100, 50, 80, 30});
    CHECK(a.a1 == doctest::Approx(1.0 - 20.0 / 100.0));
    CHECK(a.a2 == doctest::Approx(1.0 - 20.0 / 50.0));
    CHECK_ERRC(accuracy({0, 5, 0, 1}), Errc::EmptyClass);
    CHECK_ERRC(accuracy({5, 5, 6, 1}), Errc::InvalidArgument);
    const std::vector<int> truth = {1, 1, 0, 0, 0};
    const std::vector<int> pred = {1, 0, 0, 1, 0};
    const auto c = confusion(truth, pred);
    CHECK(c.b == 2);
    CHECK(c.cb == 1);
    CHECK(c.nb == 3);
    CHECK(c.cnb == 2);
}

TEST_CASE("pseudo R2 fixtures")
{
    const auto r = pseudo_r2(-10.0, -20.0, 20);
    CHECK(std::abs(r.cox_snell - (1.0 - std::exp(-1.0))) <= 1e-9);
    CHECK(std::abs(pseudo_r2(-9.0, -10.0, 10).cox_snell - (1.0 - std::exp(-0.2))) <= 1e-9);
    CHECK(r.nagelkerke == doctest::Approx(r.cox_snell / (1.0 - std::exp(-2.0))));
    CHECK(pseudo_r2(-5.0, -5.0, 10).cox_snell == 0.0);
    CHECK_ERRC(pseudo_r2(-11.0, -10.0, 10), Errc::InvalidLikelihoodOrder);
    CHECK_ERRC(pseudo_r2(-1.0, -2.0, 0), Errc::InvalidArgument);
}

TEST_CASE("welch t-test and stars")
{
    const std::vector<double> a = {1, 2, 3, 4};
    const std::vector<double> b = {1, 2, 3, 4};
    const auto same = univariate_ttest(a, b);
    CHECK(same.t_stat == 0.0);
    CHECK(same.p_value == doctest::Approx(1.0));
    const std::vector<double> c = {11, 12, 13, 14};
    const auto far = univariate_ttest(c, a);
    CHECK(far.diff == 10.0);
    CHECK(far.t_stat == doctest::Approx(10.0 / std::sqrt(2 * (5.0 / 3.0) / 4)));
    CHECK(far.stars == "***");
    CHECK(significance_stars(0.03) == "**");
    CHECK(significance_stars(0.07) == "*");
    CHECK(significance_stars(0.2).empty());
    CHECK_ERRC(univariate_ttest(std::vector<double>{1}, a), Errc::InsufficientData);
}

TEST_CASE("time based resampling keeps the latest bankrupt firms fixed")
{
    const auto data = panel(20, 4);
    SplitPlan plan;
    plan.n_bankrupt_test = 10;
    plan.repetitions = 5;
    plan.rng_seed = 3;
    const auto splits = time_based_resample(data, plan);
    REQUIRE(splits.size() == 5);
    for (const auto& s : splits) {
        CHECK(s.test.size() == 20);
        CHECK(std::equal(s.test.begin(), s.test.begin() + 10, splits[0].test.begin()));
        for (std::size_t i = 0; i < 10; ++i) {
            CHECK(data.rows[s.test[i]].brupt == 1);
            CHECK(data.rows[s.test[i]].fiscal_year >= 2018);
        }
        for (std::size_t i = 10; i < 20; ++i) {
            CHECK(data.rows[s.test[i]].brupt == 0);
        }
        std::set<std::size_t> all(s.test.begin(), s.test.end());
        all.insert(s.train.begin(), s.train.end());
        all.insert(s.val.begin(), s.val.end());
        CHECK(all.size() == data.size());
        CHECK(s.test.size() + s.train.size() + s.val.size() == data.size());
    }
    CHECK(data.rows[splits[0].test[0]].fiscal_year == 2020);
    CHECK(splits[0].test != splits[1].test);
    CHECK(time_based_resample(data, plan)[2].train == splits[2].train);

    plan.n_bankrupt_test = 13;
    CHECK_ERRC(time_based_resample(data, plan), Errc::WindowTooSparse);
    plan.val_fraction = 0.3;
    CHECK_ERRC(plan.validate(), Errc::InvalidArgument);
}

TEST_CASE("sweep keeps going past failures and prefers the smaller value on ties")
{
    const std::vector<double> grid = {1, 3, 5, 7};
    const auto r = hyperparameter_sweep(grid, [](double v) -> Accuracy {
        if (v == 3) {
            throw Error(Errc::Separation, "x");
        }
        return {0.5, v == 7 ? 0.6 : (v == 5 ? 0.8 : 0.8)};
    });
    REQUIRE(r.rows.size() == 4);
    CHECK_FALSE(r.rows[1].metrics.has_value());
    CHECK(r.rows[1].error == "Separation");
    REQUIRE(r.best.has_value());
    CHECK(*r.best == 0);

    const auto g = log_grid(1e-5, 1, 6);
    REQUIRE(g.size() == 6);
    CHECK(g.front() == doctest::Approx(1e-5));
    CHECK(g[1] == doctest::Approx(1e-4));
    CHECK(g.back() == doctest::Approx(1.0));
    const std::vector<double> v = {1, 3};
    CHECK(summarize(v).mean == 2.0);
    CHECK(summarize(v).sd == 1.0);
    CHECK(repetition_seed(1, 2) == repetition_seed(1, 2));
    CHECK(repetition_seed(1, 2) != repetition_seed(1, 3));
}
