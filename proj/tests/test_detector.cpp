#include <doctest.h>

#include <cmath>

#include "mar/detector.hpp"
#include "mar/model.hpp"
#include "mar/numeric.hpp"
#include "mar/rng.hpp"

using namespace mar;

namespace {

FittedMar fitted_mixed(double phi, double psi, std::vector<double> omega, int n) {
    FittedMar f;
    f.r = 1;
    f.s = 1;
    f.phi = phi;
    f.psi = psi;
    f.omega = std::move(omega);
    f.n = n;
    return f;
}

TimeSeries wrap(std::vector<double> values) {
    TimeSeries ts;
    const Date start{2000, 1, 31};
    for (std::size_t i = 0; i < values.size(); ++i) {
        Date d = start.add_months(static_cast<int>(i));
        d.day = Date::days_in_month(d.year, d.month);
        ts.timestamps.push_back(d);
    }
    ts.values = std::move(values);
    return ts;
}

}  // namespace

TEST_CASE("xi statistic closed-form values") {
    const std::vector<double> y = {1.0, 2.0, 4.0, 8.0};
    const FittedMar f = fitted_mixed(0.3, 0.9, {0, 0, 0, 0}, 100);
    // (y1/y0 - phi)(1 - psi y1/y0) = (2 - 0.3)(1 - 1.8)
    CHECK(xi_stat(y, f, 0, 0) == doctest::Approx(1.7 * -0.8));
    // h = 1 conditional on t = 0: (y2/y0 - phi y1/y0)(y1/y0 - psi y2/y0)
    CHECK(xi_stat(y, f, 0, 1) == doctest::Approx((4.0 - 0.3 * 2.0) * (2.0 - 0.9 * 4.0)));

    // First factor vanishes when the next value moves exactly at phi.
    const std::vector<double> decline = {10.0, 3.0, 1.0};
    CHECK(xi_stat(decline, f, 0, 0) == doctest::Approx(0.0));

    // Pure model forms.
    FittedMar f01;
    f01.r = 0; f01.s = 1; f01.psi = 0.9; f01.omega = {1.0}; f01.n = 100;
    CHECK(xi_stat(y, f01, 0, 0) == doctest::Approx(1.0 - 0.9 * 2.0));
    FittedMar f10;
    f10.r = 1; f10.s = 0; f10.phi = 0.5; f10.omega = {1.0}; f10.n = 100;
    CHECK(xi_stat(y, f10, 0, 0) == doctest::Approx(2.0 - 0.5));

    CHECK_THROWS_AS(xi_stat(y, f, 3, 0), ValidationError);
    CHECK_THROWS_AS(xi_stat(y, f, 0, -1), ValidationError);
}

TEST_CASE("xi sigma reduces to the h=0 gradient") {
    const std::vector<double> y = {2.0, 3.0, 5.0, 4.0};
    const FittedMar f = fitted_mixed(0.4, 0.7, {0.5, -0.1, -0.1, 0.8}, 200);
    // h = 0 gradient: (v_t/y_t, y_{t+1} u_{t+1}/y_t^2)
    const double v0 = y[0] - 0.7 * y[1];
    const double u1 = y[1] - 0.4 * y[0];
    const double g1 = v0 / y[0];
    const double g2 = y[1] * u1 / (y[0] * y[0]);
    const double expected =
        std::sqrt(g1 * g1 * 0.5 + 2 * g1 * g2 * -0.1 + g2 * g2 * 0.8);
    CHECK(xi_sigma(y, f, 0, 0) == doctest::Approx(expected));

    // Degenerate covariance gives a zero-width band and the 0/0 convention.
    const FittedMar z = fitted_mixed(0.4, 0.7, {0, 0, 0, 0}, 200);
    const XiPoint p = xi_point(y, z, 0, 0);
    CHECK(p.sigma == 0.0);
    CHECK(p.band_halfwidth == 0.0);
    CHECK(p.rejected == (p.xi != 0.0));

    // xi = 0 and sigma = 0 is accepted by convention.
    const std::vector<double> exact = {10.0, 4.0, 1.0};
    FittedMar zf = fitted_mixed(0.4, 0.7, {0, 0, 0, 0}, 200);
    const XiPoint pz = xi_point(exact, zf, 0, 0);
    CHECK(pz.xi == doctest::Approx(0.0));
    CHECK_FALSE(pz.rejected);
}

TEST_CASE("xi point invariants") {
    auto model = MarModel::mar11(0.3, 0.9, ErrorDist::student_t(3));
    const TimeSeries sim = simulate(model, 200, 21, 200);
    const FittedMar f = fitted_mixed(0.3, 0.9, {0.4, -0.1, -0.1, 0.5}, 198);
    for (int t : {5, 50, 120}) {
        const XiPoint p = xi_point(sim.values, f, t, 0);
        if (p.excluded) continue;
        CHECK(p.band_halfwidth ==
              doctest::Approx(1.96 * p.sigma / std::sqrt(static_cast<double>(f.n))));
        const bool should_reject =
            p.sigma > 0 && std::abs(std::sqrt(static_cast<double>(f.n)) * p.xi / p.sigma) > 1.96;
        CHECK(p.rejected == should_reject);
    }
}

TEST_CASE("xi decisions are scale invariant") {
    auto model = MarModel::mar11(0.3, 0.9, ErrorDist::student_t(3));
    const TimeSeries sim = simulate(model, 300, 77, 200);
    const FittedMar f = fitted_mixed(0.31, 0.88, {0.3, -0.05, -0.05, 0.4}, 298);
    std::vector<double> scaled = sim.values;
    for (double& v : scaled) v *= 1000.0;
    for (int t = 0; t + 1 < 299; t += 7) {
        const XiPoint a = xi_point(sim.values, f, t, 0);
        const XiPoint b = xi_point(scaled, f, t, 0);
        CHECK(a.excluded == b.excluded);
        if (a.excluded) continue;
        CHECK(a.rejected == b.rejected);
        CHECK(std::abs(a.xi - b.xi) < 1e-12 * std::max(1.0, std::abs(a.xi)));
    }
}

TEST_CASE("the statistic and band depend only on the observation ratios") {
    // Two times with identical (y_{t+1}/y_t) produce bitwise-identical
    // xi and sigma even at very different levels.
    const FittedMar f = fitted_mixed(0.2, 0.8, {0.5, 0.1, 0.1, 0.7}, 400);
    const std::vector<double> a = {3.0, 4.5, 2.0};
    const std::vector<double> b = {300.0, 450.0, 17.0};
    CHECK(xi_stat(a, f, 0, 0) == xi_stat(b, f, 0, 0));
    CHECK(xi_sigma(a, f, 0, 0) == xi_sigma(b, f, 0, 0));
}

TEST_CASE("diagnose codes horizons and truncates") {
    auto model = MarModel::mar11(0.3, 0.9, ErrorDist::student_t(3));
    const TimeSeries sim = simulate(model, 60, 3, 200);
    const FittedMar f = fitted_mixed(0.3, 0.9, {0.4, 0, 0, 0.4}, 58);
    const DiagnoseResult d = diagnose(sim.values, f, 10, 10);
    CHECK(d.points.size() == 10);
    CHECK_FALSE(d.truncated);
    for (std::size_t i = 0; i < d.points.size(); ++i)
        CHECK(d.points[i].h == static_cast<int>(i) + 1);

    const DiagnoseResult trunc = diagnose(sim.values, f, 55, 10);
    CHECK(trunc.truncated);
    CHECK(trunc.points.size() < 10);
    CHECK_THROWS_AS(diagnose(sim.values, f, 0, 0), ValidationError);
}

TEST_CASE("diagnose decisions are monotone in the band width") {
    auto model = MarModel::mar11(0.3, 0.9, ErrorDist::student_t(3));
    const TimeSeries sim = simulate(model, 200, 41, 200);
    const FittedMar narrow = fitted_mixed(0.3, 0.9, {0.4, -0.1, -0.1, 0.5}, 198);
    FittedMar wide = narrow;
    for (double& v : wide.omega) v *= 4.0;  // inflate the covariance
    for (int t = 0; t < 150; t += 5) {
        const DiagnoseResult dn = diagnose(sim.values, narrow, t, 6);
        const DiagnoseResult dw = diagnose(sim.values, wide, t, 6);
        for (std::size_t i = 0; i < dn.points.size(); ++i) {
            if (!dn.points[i].rejected) CHECK_FALSE(dw.points[i].rejected);
        }
    }
}

TEST_CASE("delta_xi is exactly zero on a constant series") {
    const TimeSeries c = wrap(std::vector<double>(30, 5.0));
    const FittedMar f = fitted_mixed(0.3, 0.9, {0.1, 0, 0, 0.1}, 28);
    const TimeSeries d = delta_xi(c, f);
    REQUIRE(!d.empty());
    for (double v : d.values) CHECK(v == 0.0);
}

TEST_CASE("delta_xi stays flat inside a bubble and noisy outside") {
    auto model = MarModel::mar11(0.3, 0.9, ErrorDist::cauchy());
    // Search a window of seeds for a path with a clear single bubble.
    TimeSeries sim;
    int peak = -1;
    for (std::uint64_t seed = 1; seed < 60; ++seed) {
        sim = simulate(model, 400, seed, 200);
        const auto& y = sim.values;
        int arg = 0;
        for (int t = 0; t < 400; ++t)
            if (y[static_cast<std::size_t>(t)] > y[static_cast<std::size_t>(arg)]) arg = t;
        const double q = empirical_quantile(y, 0.975);
        if (arg > 30 && arg < 370 && y[static_cast<std::size_t>(arg)] > 4 * q) {
            peak = arg;
            break;
        }
    }
    REQUIRE(peak > 0);
    const FittedMar f = fitted_mixed(0.3, 0.9, {0.3, 0, 0, 0.3}, 398);
    const TimeSeries d = delta_xi(sim, f);
    // Map indices: delta at time t is stored with timestamp of t.
    double band = 0;
    {
        const XiPoint p = xi_point(sim.values, f, peak - 3, 0);
        band = 2 * p.band_halfwidth;
    }
    int inside = 0, total = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        // locate time index by timestamp offset
        const int t = (d.timestamps[i].year - 2000) * 12 + d.timestamps[i].month - 1;
        if (t >= peak - 4 && t <= peak - 1) {
            ++total;
            if (std::abs(d.values[i]) < band) ++inside;
        }
    }
    CHECK(total >= 3);
    CHECK(inside == total);  // flat during the growth phase
}

TEST_CASE("detect_episodes on flat and bubbled paths") {
    const FittedMar f = fitted_mixed(0.3, 0.9, {0.3, 0, 0, 0.3}, 398);
    // No exceedance above its own quantile -> threshold equals max -> empty.
    std::vector<double> flat(50);
    for (std::size_t i = 0; i < flat.size(); ++i) flat[i] = std::sin(i * 0.3);
    CHECK(detect_episodes(flat, f).empty());
    CHECK_THROWS_AS(detect_episodes(std::vector<double>(10, 1.0), f), ValidationError);

    auto model = MarModel::mar11(0.3, 0.9, ErrorDist::cauchy());
    const TimeSeries sim = simulate(model, 400, 13, 200);
    const auto& y = sim.values;
    int arg = 0;
    for (int t = 0; t < 400; ++t)
        if (y[static_cast<std::size_t>(t)] > y[static_cast<std::size_t>(arg)]) arg = t;
    const auto episodes = detect_episodes(y, f);
    REQUIRE(!episodes.empty());
    bool covered = false;
    for (const auto& e : episodes) {
        CHECK(e.start <= e.peak);
        CHECK(e.peak <= e.end);
        if (e.start <= arg && arg <= e.end) {
            covered = true;
            CHECK(e.peak == arg);
        }
    }
    CHECK(covered);
}

TEST_CASE("forward conditional probability") {
    std::vector<double> rising(40);
    for (std::size_t i = 0; i < rising.size(); ++i) rising[i] = 1.0 + 0.1 * i;
    CHECK(forward_conditional_prob(rising, 0.5).value() == doctest::Approx(1.0));

    // Pure noncausal t(3): P(continue growing | large) = psi^3.
    auto model = MarModel::mar01(0.9, ErrorDist::student_t(3));
    const TimeSeries sim = simulate(model, 100000, 11, 200);
    const auto p = forward_conditional_prob(sim.values, 0.975);
    REQUIRE(p.has_value());
    CHECK(std::abs(*p - std::pow(0.9, 3.0)) <= 0.1);
}

TEST_CASE("detection report serialization") {
    auto model = MarModel::mar11(0.3, 0.9, ErrorDist::cauchy());
    const TimeSeries sim = simulate(model, 120, 13, 200);
    const FittedMar f = fitted_mixed(0.3, 0.9, {0.3, 0, 0, 0.3}, 118);
    const DetectionReport rep = detection_report(sim.values, f);
    const std::string json = detection_report_json(rep, sim.timestamps);
    for (const char* key : {"\"points\"", "\"episodes\"", "\"forward_prob\"", "\"xi\"",
                            "\"sigma\"", "\"band\"", "\"rejected\"", "\"date\""})
        CHECK(json.find(key) != std::string::npos);
    const std::string csv = detection_report_csv(rep, sim);
    CHECK(csv.rfind("date,y,xi,band_lo,band_hi,in_episode\n", 0) == 0);
    // One row per reported point.
    std::size_t rows = 0;
    for (char c : csv)
        if (c == '\n') ++rows;
    CHECK(rows == rep.points.size() + 1);
}
