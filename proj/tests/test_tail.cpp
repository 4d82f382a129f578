#include <doctest.h>

#include <cmath>
#include <map>

#include "mar/numeric.hpp"
#include "mar/rng.hpp"
#include "mar/tail.hpp"

using namespace mar;

namespace {

const ErrorDist kDist = ErrorDist::student_t(3);

/// Brute-force pmf sum over |h| <= depth.
double pmf_sum(const MarModel& model, double alpha, int depth) {
    double s = 0;
    for (int h = -depth; h <= depth; ++h) s += n_pmf(model, alpha, h);
    return s;
}

double pmf_mean(const MarModel& model, double alpha, int depth) {
    double s = 0;
    for (int h = -depth; h <= depth; ++h) s += h * n_pmf(model, alpha, h);
    return s;
}

}  // namespace

TEST_CASE("peak-offset pmf closed forms") {
    CHECK(n_pmf(MarModel::mar01(0.9, kDist), 1.0, 0) == doctest::Approx(0.1));
    CHECK(n_pmf(MarModel::mar01(0.9, kDist), 1.0, 1) == 0.0);

    CHECK(n_pmf(MarModel::mar10(0.5, kDist), 1.0, 2) == doctest::Approx(0.125));
    CHECK(n_pmf(MarModel::mar10(0.5, kDist), 1.0, -1) == 0.0);

    auto m = MarModel::mar11(0.5, 0.5, kDist);
    CHECK(n_pmf(m, 1.0, 3) == doctest::Approx(n_pmf(m, 1.0, -3)));  // symmetric at phi = psi
    CHECK(pmf_sum(m, 1.0, 60) == doctest::Approx(1.0).epsilon(1e-10));

    CHECK_THROWS_AS(n_pmf(MarModel{0, 0, 0, 0, kDist, {}}, 1.0, 0), ValidationError);
    MarModel ar2{0, 0, 0, 0, kDist, {{0.4, 0.6}}};
    CHECK_THROWS_AS(n_pmf(ar2, 1.0, 0), ValidationError);
}

TEST_CASE("pmf normalizes across the parameter grid") {
    for (double phi : {0.1, 0.3, 0.5, 0.7, 0.9})
        for (double psi : {0.1, 0.3, 0.5, 0.7, 0.9})
            for (double alpha : {0.5, 1.0, 1.5}) {
                auto model = MarModel::mar11(phi, psi, kDist);
                const double peak = std::max(phi, psi);
                const int depth = std::max(
                    60, static_cast<int>(std::ceil(std::log(1e-13) / (alpha * std::log(peak)))));
                CHECK(pmf_sum(model, alpha, depth) == doctest::Approx(1.0).epsilon(1e-10));
            }
}

TEST_CASE("expected peak offset") {
    CHECK(expected_n(MarModel::mar11(0.4, 0.4, kDist), 1.7) == doctest::Approx(0.0));
    CHECK(expected_n(MarModel::mar01(0.9, kDist), 1.0) == doctest::Approx(-10.0));

    // Mixed model mean equals the truncated pmf sum.
    auto m = MarModel::mar11(0.3, 0.9, kDist);
    CHECK(expected_n(m, 1.3) == doctest::Approx(pmf_mean(m, 1.3, 500)).epsilon(1e-8));

    // The pure noncausal value reported is the time-to-peak (mean given
    // N <= -1); the unconditional pmf mean is smaller in magnitude.
    const TailLaw law(MarModel::mar01(0.9, kDist), 1.0);
    CHECK(law.mean_marginal() == doctest::Approx(-9.0));
    CHECK(law.mean_given_negative() == doctest::Approx(-10.0));
}

TEST_CASE("cdf and survival") {
    auto m01 = MarModel::mar01(0.9, kDist);
    CHECK(n_cdf(m01, 1.0, 0) == doctest::Approx(1.0));
    CHECK(n_cdf(m01, 1.0, -3) == doctest::Approx(0.729));

    auto m = MarModel::mar11(0.4, 0.8, kDist);
    for (int h : {-7, -2, 0, 1, 5}) {
        double tail = 0;
        for (int k = h + 1; k <= 600; ++k) tail += n_pmf(m, 1.2, k);
        CHECK(n_cdf(m, 1.2, h) + tail == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(n_survival(m, 1.2, h) == doctest::Approx(tail).epsilon(1e-8));
    }
    // cdf matches direct summation on the lower side too.
    double lower = 0;
    for (int k = -600; k <= -4; ++k) lower += n_pmf(m, 1.2, k);
    CHECK(n_cdf(m, 1.2, -4) == doctest::Approx(lower).epsilon(1e-8));
}

TEST_CASE("prediction interval, median and mode") {
    auto m01 = MarModel::mar01(0.9, kDist);
    const auto [lo, hi] = prediction_interval_n(m01, 1.0, 0.10);
    CHECK(lo == -29);
    CHECK(hi == 0);
    // Conservative coverage by pmf summation.
    double cover = 0;
    for (int h = lo; h <= hi; ++h) cover += n_pmf(m01, 1.0, h);
    CHECK(cover >= 0.90);

    CHECK(TailLaw(MarModel::mar01(0.5, kDist), 1.0).median() == -1);
    CHECK(TailLaw(m01, 1.0).mode() == 0);

    // Mixed model: outward rounding keeps coverage at or above the level.
    auto m = MarModel::mar11(0.6, 0.8, kDist);
    const auto [ml, mh] = prediction_interval_n(m, 1.1, 0.10);
    double mcover = 0;
    for (int h = ml; h <= mh; ++h) mcover += n_pmf(m, 1.1, h);
    CHECK(mcover >= 0.90);
    CHECK(ml < 0);
    CHECK(mh >= 0);

    CHECK_THROWS_AS(prediction_interval_n(m, 1.0, 0.8), ValidationError);
}

TEST_CASE("mixture law conditional geometries") {
    auto m = MarModel::mar11(0.45, 0.85, kDist);
    const double alpha = 1.4;
    const TailLaw law(m, alpha);
    const double q_phi = std::pow(0.45, alpha);
    const double q_psi = std::pow(0.85, alpha);
    const double p_nonneg = 1.0 - law.prob_negative();
    for (int h = 0; h <= 6; ++h)
        CHECK(law.pmf(h) / p_nonneg ==
              doctest::Approx((1 - q_phi) * std::pow(q_phi, h)).epsilon(1e-12));
    for (int mdx = 0; mdx <= 6; ++mdx) {
        const int h = -1 - mdx;
        CHECK(law.pmf(h) / law.prob_negative() ==
              doctest::Approx((1 - q_psi) * std::pow(q_psi, mdx)).epsilon(1e-12));
    }
}

TEST_CASE("expected time to peak is monotone in the noncausal coefficient") {
    double prev = 0;
    for (double psi : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        const double e = std::abs(expected_n(MarModel::mar01(psi, kDist), 1.5));
        CHECK(e > prev);
        prev = e;
    }
}

TEST_CASE("tail path sampler: anchors, exact recursion, closed form") {
    for (auto [phi, psi] : std::vector<std::pair<double, double>>{{0.3, 0.9}, {0.5, 0.5}}) {
        auto model = MarModel::mar11(phi, psi, kDist);
        const double inv_psi = 1.0 / psi;
        for (std::uint64_t seed = 1; seed <= 200; ++seed) {
            const TailPath path = sample_tail_path(model, 1.0, 12, seed);
            CHECK(path.at(0) == 1.0);
            // Exact recursion, checked with the generator's own operations.
            for (int h = 1; h <= path.H; ++h) {
                if (path.N <= -h)
                    CHECK(path.at(h) == inv_psi * path.at(h - 1));
                else
                    CHECK(path.at(h) == phi * path.at(h - 1));
            }
            for (int h = 0; h >= -path.H + 1; --h) {
                if (path.N <= -h)
                    CHECK(path.at(h - 1) == psi * path.at(h));
                else
                    CHECK(path.at(h - 1) == path.at(h) / phi);
            }
            // Combined-indicator closed form agrees to rounding.
            for (int h = -path.H; h <= path.H; ++h) {
                const double cf = tail_path_closed_form(model, path.N, h);
                CHECK(path.at(h) == doctest::Approx(cf).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("tail path for the pure noncausal model") {
    auto model = MarModel::mar01(0.9, kDist);
    int burst_seen = 0, growth_seen = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        const TailPath path = sample_tail_path(model, 1.0, 6, seed);
        CHECK(path.N <= 0);
        if (path.N <= -1) {
            CHECK(path.at(1) == doctest::Approx(1.0 / 0.9));
            ++growth_seen;
        } else {
            CHECK(path.at(1) == 0.0);  // vertical burst
            ++burst_seen;
        }
    }
    CHECK(burst_seen > 0);
    CHECK(growth_seen > 0);
}

TEST_CASE("sampled peak offsets match the analytic pmf") {
    auto model = MarModel::mar11(0.3, 0.9, kDist);
    const double alpha = 1.0;
    const int n = 100000;
    std::map<int, int> counts;
    for (int i = 0; i < n; ++i) {
        const TailPath p = sample_tail_path(model, alpha, 1, Rng::substream_seed(500, i));
        ++counts[p.N];
    }
    for (int h = -25; h <= 6; ++h) {
        const double p = n_pmf(model, alpha, h);
        if (p * n < 8) continue;  // skip cells with too little mass
        const double freq = counts.count(h) ? static_cast<double>(counts[h]) / n : 0.0;
        const double se = std::sqrt(p * (1 - p) / n);
        CHECK(std::abs(freq - p) <= 3 * se);
    }
}

TEST_CASE("hill estimator on exact Pareto data") {
    // Pareto(alpha = 1) via inverse transform.
    Rng rng(2020);
    const int n = 1000000;
    std::vector<double> z(n);
    for (auto& v : z) v = 1.0 / rng.uniform();
    const HillEstimate est = hill_estimate(z, 10000);
    CHECK(est.alpha_hat > 0.95);
    CHECK(est.alpha_hat < 1.05);
    CHECK(est.stderr_ == doctest::Approx(est.alpha_hat / 100.0));
}

TEST_CASE("hill estimator guards") {
    CHECK_THROWS_AS(hill_estimate(std::vector<double>(100, 2.0), 10), ValidationError);
    std::vector<double> few = {1, 2, 3};
    CHECK_THROWS_AS(hill_estimate(few, 5), ValidationError);
    CHECK_THROWS_AS(hill_estimate(few, 1), ValidationError);
    CHECK(default_hill_k(1000) == 100);
    CHECK(default_hill_k(50) == 10);
    CHECK(default_hill_k(11) == 10);
}

TEST_CASE("duration report reproduces the published green-index values") {
    // Mixed model with (phi, psi, alpha) = (0.24, 0.70, 1.3): expected time
    // to peak about 1.5 months and P[time to peak >= 3] about 0.232.
    auto renixx = MarModel::mar11(0.24, 0.70, kDist);
    const DurationReport r = time_to_peak_report(renixx, 1.3, {1, 2, 3, 4, 5});
    CHECK(std::abs(std::abs(r.e_n) - 1.5) <= 0.1);
    CHECK(std::abs(r.exceed_probs.at(3) - 0.232) <= 0.02);

    auto whetf = MarModel::mar11(0.07, 0.89, kDist);
    const DurationReport w = time_to_peak_report(whetf, 1.7, {1, 2, 3, 4, 5});
    CHECK(std::abs(std::abs(w.e_n) - 4.5) <= 0.1);
    CHECK(std::abs(w.exceed_probs.at(5) - 0.37) <= 0.02);

    // Symmetric bubble: zero expected offset in the marginal report.
    auto sym = MarModel::mar11(0.6, 0.6, kDist);
    CHECK(time_to_peak_report(sym, 1.2).e_n == doctest::Approx(0.0));
}

TEST_CASE("duration report JSON carries the fixed fields") {
    auto model = MarModel::mar11(0.24, 0.70, kDist);
    const std::string json = duration_report_json(time_to_peak_report(model, 1.3, {3}));
    for (const char* key : {"\"alpha\"", "\"E_N\"", "\"E_N_given_neg\"", "\"median\"", "\"mode\"",
                            "\"interval\"", "\"gamma\"", "\"lo\"", "\"hi\"", "\"exceed_probs\""})
        CHECK(json.find(key) != std::string::npos);
}

TEST_CASE("empirical growth frequency approaches the tail law") {
    // Among times with a large value, the share whose next ratio is near the
    // theoretical growth rate converges to psi^alpha.
    auto model = MarModel::mar01(0.9, ErrorDist::student_t(3));
    const TimeSeries sim = simulate(model, 100000, 404, 200);
    const auto& y = sim.values;
    const double q = empirical_quantile(y, 0.975);
    const double rate = 1.0 / 0.9;
    int total = 0, close = 0;
    for (std::size_t t = 0; t + 1 < y.size(); ++t) {
        if (!(y[t] > q)) continue;
        ++total;
        if (std::abs(y[t + 1] / y[t] - rate) <= 0.1 * rate) ++close;
    }
    REQUIRE(total > 100);
    const double frequency = static_cast<double>(close) / total;
    CHECK(std::abs(frequency - std::pow(0.9, 3.0)) <= 0.1);
}
