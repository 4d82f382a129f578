#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>

#include "mar/estimation.hpp"
#include "mar/model.hpp"
#include "mar/numeric.hpp"
#include "mar/rng.hpp"
#include "mar/spline.hpp"
#include "mar/timeseries.hpp"

using namespace mar;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
    const auto path = (std::filesystem::temp_directory_path() / name).string();
    std::ofstream out(path);
    out << content;
    return path;
}

TimeSeries daily_series(Date start, int days, const std::function<double(int)>& f) {
    TimeSeries ts;
    Date d = start;
    for (int i = 0; i < days; ++i) {
        ts.timestamps.push_back(d);
        ts.values.push_back(f(i));
        if (d.day < Date::days_in_month(d.year, d.month)) {
            ++d.day;
        } else {
            d = Date{d.month == 12 ? d.year + 1 : d.year, d.month == 12 ? 1 : d.month + 1, 1};
        }
    }
    return ts;
}

TimeSeries monthly_series(int months, const std::function<double(int)>& f) {
    TimeSeries ts;
    const Date start{2010, 1, 31};
    for (int i = 0; i < months; ++i) {
        Date d = start.add_months(i);
        d.day = Date::days_in_month(d.year, d.month);
        ts.timestamps.push_back(d);
        ts.values.push_back(f(i));
    }
    return ts;
}

}  // namespace

TEST_CASE("date parsing and arithmetic") {
    const Date d = Date::parse("2020-02-29");
    CHECK(d.year == 2020);
    CHECK(d.month == 2);
    CHECK(d.day == 29);
    CHECK(d.to_string() == "2020-02-29");
    CHECK_THROWS_AS(Date::parse("2021-02-29"), ParseError);
    CHECK_THROWS_AS(Date::parse("2020/01/01"), ParseError);
    CHECK(Date{2020, 1, 31}.add_months(1) == Date{2020, 2, 29});
    CHECK(Date{2020, 1, 15}.add_months(-13) == Date{2018, 12, 15});
    CHECK(Date{1970, 1, 1}.serial() == 0);
    CHECK(Date{1970, 1, 2}.serial() == 1);
}

TEST_CASE("load_csv reads, sorts and validates") {
    const auto path = write_temp("ts_basic.csv",
                                 "date,value\n2020-01-31,10.0\n2020-02-29,11.0\n");
    const TimeSeries ts = load_csv(path);
    REQUIRE(ts.size() == 2);
    CHECK(ts.values[0] == 10.0);
    CHECK(ts.timestamps[1] == Date{2020, 2, 29});

    const auto dup = write_temp("ts_dup.csv",
                                "date,value\n2020-01-31,10.0\n2020-01-31,11.0\n");
    CHECK_THROWS_AS(load_csv(dup), ValidationError);

    const auto unsorted = write_temp(
        "ts_unsorted.csv", "date,value\n2020-03-31,3\n2020-01-31,1\n2020-02-29,2\n");
    const TimeSeries sorted = load_csv(unsorted);
    CHECK(sorted.values == std::vector<double>{1, 2, 3});

    const auto bad = write_temp("ts_bad.csv", "date,value\n2020-01-31,banana\n");
    try {
        load_csv(bad);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find(":2:") != std::string::npos);  // line number
    }

    CHECK_THROWS_AS(load_csv("/nonexistent/nope.csv"), ParseError);

    const auto cols = write_temp("ts_cols.csv", "day,price\n2020-01-31,5\n");
    CHECK(load_csv(cols, "day", "price").values[0] == 5.0);
    CHECK_THROWS_AS(load_csv(cols), ParseError);
}

TEST_CASE("csv round trip preserves values exactly") {
    TimeSeries ts = monthly_series(5, [](int i) { return std::sqrt(2.0) * (i + 1) / 7.0; });
    const auto path = (std::filesystem::temp_directory_path() / "ts_round.csv").string();
    save_csv(ts, path, "manifest.json");
    const TimeSeries back = load_csv(path);
    REQUIRE(back.size() == ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) {
        CHECK(back.values[i] == ts.values[i]);
        CHECK(back.timestamps[i] == ts.timestamps[i]);
    }
}

TEST_CASE("resample_monthly_last takes the last available day") {
    TimeSeries ts = daily_series(Date{2020, 1, 1}, 31, [](int i) { return i == 30 ? 7.7 : 1.0; });
    const TimeSeries m = resample_monthly_last(ts);
    REQUIRE(m.size() == 1);
    CHECK(m.values[0] == 7.7);
    CHECK(m.timestamps[0] == Date{2020, 1, 31});

    // Month ending on a gap: drop the last two days of February.
    TimeSeries feb = daily_series(Date{2020, 2, 1}, 27, [](int i) { return 100.0 + i; });
    const TimeSeries mf = resample_monthly_last(feb);
    REQUIRE(mf.size() == 1);
    CHECK(mf.values[0] == 126.0);  // Feb 27, the previous available day
    CHECK(mf.timestamps[0] == Date{2020, 2, 27});

    // Idempotence on already-monthly input.
    TimeSeries monthly = monthly_series(14, [](int i) { return i * 1.5; });
    const TimeSeries once = resample_monthly_last(monthly);
    const TimeSeries twice = resample_monthly_last(once);
    CHECK(once.values == monthly.values);
    CHECK(twice.values == once.values);
    CHECK(twice.timestamps == once.timestamps);
}

TEST_CASE("resample_monthly_last rejects an empty month inside the span") {
    TimeSeries ts;
    ts.timestamps = {Date{2020, 1, 31}, Date{2020, 3, 31}};
    ts.values = {1.0, 2.0};
    try {
        resample_monthly_last(ts);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("2020-02") != std::string::npos);
    }
}

TEST_CASE("spline_detrend reproduces polynomials") {
    // Exact cubic on a single knot segment.
    TimeSeries cubic = monthly_series(25, [](int i) {
        const double x = i / 24.0;
        return 2.0 - 3.0 * x + 0.5 * x * x + 4.0 * x * x * x;
    });
    const SplineDetrend fit = spline_detrend(cubic, 24);
    double scale = 0;
    for (double v : cubic.values) scale = std::max(scale, std::abs(v));
    for (double r : fit.residual.values) CHECK(std::abs(r) < 1e-8 * scale);

    // Exact straight line over many segments.
    TimeSeries line = monthly_series(120, [](int i) { return 5.0 - 0.25 * i; });
    const SplineDetrend lfit = spline_detrend(line, 24);
    for (double r : lfit.residual.values) CHECK(std::abs(r) < 1e-8 * 30.0);

    CHECK_THROWS_AS(spline_detrend(monthly_series(10, [](int i) { return double(i); }), 24),
                    ValidationError);
}

TEST_CASE("spline_detrend is a least-squares projection") {
    Rng rng(99);
    TimeSeries noisy = monthly_series(90, [&](int) { return rng.normal(); });
    const SplineDetrend fit = spline_detrend(noisy, 24);
    const double mean_y = mean(noisy.values);
    double raw_ss = 0, res_ss = 0;
    for (std::size_t i = 0; i < noisy.size(); ++i) {
        raw_ss += (noisy.values[i] - mean_y) * (noisy.values[i] - mean_y);
        res_ss += fit.residual.values[i] * fit.residual.values[i];
    }
    CHECK(res_ss <= raw_ss + 1e-12);
    for (std::size_t i = 0; i < noisy.size(); ++i)
        CHECK(fit.trend.values[i] + fit.residual.values[i] == doctest::Approx(noisy.values[i]));
}

TEST_CASE("detrending a trending simulation preserves the fit statistic") {
    // MAR(1,1) simulation plus a linear trend; the specification statistic
    // from a fit on the detrended series stays within 10% of the no-trend
    // fit's statistic.
    auto model = MarModel::mar11(0.3, 0.7, ErrorDist::student_t(3));
    TimeSeries sim = simulate(model, 240, 2024, 200);
    GcovOptions opts;
    opts.transforms = TransformSpec::powers({1, 2});
    opts.H = 2;
    opts.compute_covariance = false;

    std::vector<double> base = sim.values;
    const double mu = mean(base);
    for (double& v : base) v -= mu;
    const GcovFit fit0 = gcov_estimate(base, 1, 1, opts);
    const double stat0 = fit0.n * fit0.objective;

    TimeSeries trended = sim;
    for (std::size_t i = 0; i < trended.size(); ++i)
        trended.values[i] += 40.0 + 0.3 * static_cast<double>(i);
    const SplineDetrend det = spline_detrend(trended, 24);
    const GcovFit fit1 = gcov_estimate(det.residual.values, 1, 1, opts);
    const double stat1 = fit1.n * fit1.objective;

    CHECK(std::abs(stat1 - stat0) <= 0.10 * stat0);
}

TEST_CASE("rolling_variance values and properties") {
    TimeSeries c = monthly_series(8, [](int) { return 3.25; });
    for (double v : rolling_variance(c, 4).values) CHECK(v == 0.0);

    TimeSeries five = monthly_series(5, [](int i) { return double(i + 1); });
    const TimeSeries rv = rolling_variance(five, 5);
    REQUIRE(rv.size() == 1);
    CHECK(rv.values[0] == doctest::Approx(2.5));
    CHECK(rv.timestamps[0] == five.timestamps[4]);

    TimeSeries any = monthly_series(12, [](int i) { return std::sin(i * 0.7) * (i + 2); });
    const TimeSeries full = rolling_variance(any, 12);
    REQUIRE(full.size() == 1);
    CHECK(full.values[0] == doctest::Approx(sample_variance(any.values)));

    CHECK_THROWS_AS(rolling_variance(five, 6), ValidationError);
    CHECK_THROWS_AS(rolling_variance(five, 1), ValidationError);

    // Affine equivariance: var(a y + b) = a^2 var(y) elementwise.
    TimeSeries affine = any;
    for (double& v : affine.values) v = -2.5 * v + 7.0;
    const TimeSeries rv1 = rolling_variance(any, 5);
    const TimeSeries rv2 = rolling_variance(affine, 5);
    for (std::size_t i = 0; i < rv1.size(); ++i)
        CHECK(rv2.values[i] == doctest::Approx(6.25 * rv1.values[i]));
}

TEST_CASE("summary moments") {
    TimeSeries ts = monthly_series(4, [](int i) { return double(i); });
    const SummaryStats s = summary(ts);
    CHECK(s.n == 4);
    CHECK(s.mean == doctest::Approx(1.5));
    CHECK(s.min == 0.0);
    CHECK(s.max == 3.0);
    CHECK(s.sd == doctest::Approx(std::sqrt(5.0 / 3.0)));
    CHECK(s.min <= s.mean);
    CHECK(s.mean <= s.max);
    CHECK(s.skewness == doctest::Approx(0.0));

    TimeSeries flat = monthly_series(6, [](int) { return 2.0; });
    const SummaryStats sf = summary(flat);
    CHECK(sf.sd == 0.0);
    CHECK(std::isnan(sf.skewness));
    CHECK(std::isnan(sf.excess_kurtosis));
}

TEST_CASE("summary on a large normal sample") {
    Rng rng(7);
    TimeSeries ts;
    const int n = 1000000;
    ts.values.reserve(n);
    ts.timestamps.reserve(n);
    for (int i = 0; i < n; ++i) {
        ts.timestamps.push_back(Date{i / 336 + 1, 1 + (i / 28) % 12, 1 + i % 28});
        ts.values.push_back(rng.normal());
    }
    const SummaryStats s = summary(ts);
    CHECK(std::abs(s.mean) < 0.01);
    CHECK(s.sd == doctest::Approx(1.0).epsilon(0.01));
    CHECK(std::abs(s.skewness) < 0.01);
    CHECK(std::abs(s.excess_kurtosis) < 0.02);
}
