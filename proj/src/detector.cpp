#include "mar/detector.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <nlohmann/json.hpp>
#include <sstream>

#include "mar/numeric.hpp"

namespace mar {

namespace {

constexpr double kZeroGuardFactor = 1e-6;
constexpr double kCritical = 1.96;

double zero_guard_level(const std::vector<double>& y) {
    return kZeroGuardFactor * std::sqrt(sample_variance(y));
}

double quad_form(const std::vector<double>& omega, double g1, double g2, int dim) {
    if (dim == 1) return omega[0] * g1 * g1;
    return g1 * g1 * omega[0] + g1 * g2 * (omega[1] + omega[2]) + g2 * g2 * omega[3];
}

}  // namespace

FittedMar FittedMar::from_gcov(const GcovFit& fit) {
    FittedMar f;
    f.r = fit.r;
    f.s = fit.s;
    f.phi = fit.phi_hat();
    f.psi = fit.psi_hat();
    f.omega = fit.omega;
    f.n = fit.n;
    return f;
}

FittedMar FittedMar::from_ols(const OlsFit& fit) {
    FittedMar f;
    f.r = 0;
    f.s = 1;
    f.psi = fit.psi_hat;
    f.omega = {fit.omega};
    f.n = fit.n;
    return f;
}

double xi_stat(const std::vector<double>& y, const FittedMar& fit, int t, int h) {
    const int n = static_cast<int>(y.size());
    if (h < 0) throw ValidationError("xi_stat: horizon must be >= 0");
    if (t < 0 || t + h + 1 >= n) throw ValidationError("xi_stat: index out of range");
    const double yt = y[static_cast<std::size_t>(t)];
    const double ya = y[static_cast<std::size_t>(t + h)];
    const double yb = y[static_cast<std::size_t>(t + h + 1)];
    if (fit.r == 1 && fit.s == 1)
        return (yb / yt - fit.phi * ya / yt) * (ya / yt - fit.psi * yb / yt);
    if (fit.s == 1) return (ya - fit.psi * yb) / yt;
    if (fit.r == 1) return (yb - fit.phi * ya) / yt;
    throw ValidationError("xi_stat: model has no dynamics");
}

double xi_sigma(const std::vector<double>& y, const FittedMar& fit, int t, int h) {
    const int n = static_cast<int>(y.size());
    if (t < 0 || t + h + 1 >= n) throw ValidationError("xi_sigma: index out of range");
    if (fit.omega.empty()) throw ValidationError("xi_sigma: missing parameter covariance");
    const double yt = y[static_cast<std::size_t>(t)];
    const double ya = y[static_cast<std::size_t>(t + h)];
    const double yb = y[static_cast<std::size_t>(t + h + 1)];
    const double u_next = yb - fit.phi * ya;  // u_{t+h+1}
    const double v_here = ya - fit.psi * yb;  // v_{t+h}
    double s2 = 0;
    if (fit.r == 1 && fit.s == 1) {
        const double g_phi = ya * v_here / (yt * yt);
        const double g_psi = yb * u_next / (yt * yt);
        s2 = quad_form(fit.omega, g_phi, g_psi, 2);
    } else if (fit.s == 1) {
        const double g_psi = yb / yt;
        s2 = quad_form(fit.omega, g_psi, 0, 1);
    } else {
        const double g_phi = ya / yt;
        s2 = quad_form(fit.omega, g_phi, 0, 1);
    }
    return std::sqrt(std::max(0.0, s2));
}

XiPoint xi_point(const std::vector<double>& y, const FittedMar& fit, int t, int h) {
    XiPoint p;
    p.t = t;
    p.h = h;
    const double guard = zero_guard_level(y);
    if (std::abs(y[static_cast<std::size_t>(t)]) < guard) {
        p.excluded = true;
        return p;
    }
    p.xi = xi_stat(y, fit, t, h);
    p.sigma = xi_sigma(y, fit, t, h);
    const double sqrt_n = std::sqrt(static_cast<double>(fit.n));
    p.band_halfwidth = kCritical * p.sigma / sqrt_n;
    if (p.sigma > 0) {
        p.rejected = std::abs(sqrt_n * p.xi / p.sigma) > kCritical;
    } else {
        p.rejected = p.xi != 0.0;
    }
    return p;
}

DiagnoseResult diagnose(const std::vector<double>& y, const FittedMar& fit, int t, int h_max) {
    if (h_max < 1) throw ValidationError("diagnose: h_max must be >= 1");
    DiagnoseResult out;
    const int n = static_cast<int>(y.size());
    for (int h = 1; h <= h_max; ++h) {
        if (t + h + 1 >= n) {
            out.truncated = true;
            break;
        }
        out.points.push_back(xi_point(y, fit, t, h));
    }
    return out;
}

TimeSeries delta_xi(const TimeSeries& y, const FittedMar& fit) {
    if (y.size() < 3) throw ValidationError("delta_xi: need length >= 3");
    const int n = static_cast<int>(y.size());
    const double guard = zero_guard_level(y.values);
    std::vector<bool> valid(static_cast<std::size_t>(n), false);
    std::vector<double> xi(static_cast<std::size_t>(n), 0.0);
    for (int t = 0; t + 1 < n; ++t) {
        if (std::abs(y.values[static_cast<std::size_t>(t)]) < guard) continue;
        xi[static_cast<std::size_t>(t)] = xi_stat(y.values, fit, t, 0);
        valid[static_cast<std::size_t>(t)] = true;
    }
    TimeSeries out;
    out.label = y.label;
    for (int t = 1; t + 1 < n; ++t) {
        if (!valid[static_cast<std::size_t>(t)] || !valid[static_cast<std::size_t>(t - 1)]) continue;
        out.timestamps.push_back(y.timestamps[static_cast<std::size_t>(t)]);
        out.values.push_back(xi[static_cast<std::size_t>(t)] - xi[static_cast<std::size_t>(t - 1)]);
    }
    return out;
}

std::vector<BubbleEpisode> detect_episodes(const std::vector<double>& y, const FittedMar& fit,
                                           const DetectionOptions& opts) {
    const int n = static_cast<int>(y.size());
    if (n < 20) throw ValidationError("detect_episodes: need length >= 20");
    const double q = empirical_quantile(y, opts.threshold_q);

    // h = 0 decision per time; the last time has no forward observation.
    std::vector<int> state(static_cast<std::size_t>(n), -1);  // -1 invalid, 0 rejected, 1 accepted
    for (int t = 0; t + 1 < n; ++t) {
        const XiPoint p = xi_point(y, fit, t, 0);
        if (!p.excluded) state[static_cast<std::size_t>(t)] = p.rejected ? 0 : 1;
    }

    std::vector<std::pair<int, int>> runs;
    for (int t = 0; t < n; ++t) {
        if (!(y[static_cast<std::size_t>(t)] > q)) continue;
        if (state[static_cast<std::size_t>(t)] != 1) continue;
        int lo = t, hi = t;
        while (lo - 1 >= 0 && state[static_cast<std::size_t>(lo - 1)] == 1) --lo;
        while (hi + 1 < n && state[static_cast<std::size_t>(hi + 1)] == 1) ++hi;
        if (hi - lo + 1 >= opts.min_run) runs.emplace_back(lo, hi);
    }
    std::sort(runs.begin(), runs.end());
    runs.erase(std::unique(runs.begin(), runs.end()), runs.end());

    // Merge overlaps, then optionally bridge single rejected points.
    std::vector<std::pair<int, int>> merged;
    for (const auto& r : runs) {
        if (!merged.empty() && r.first <= merged.back().second + 1)
            merged.back().second = std::max(merged.back().second, r.second);
        else
            merged.push_back(r);
    }
    if (opts.merge_single_rejections) {
        std::vector<std::pair<int, int>> bridged;
        for (const auto& r : merged) {
            if (!bridged.empty() && r.first == bridged.back().second + 2 &&
                state[static_cast<std::size_t>(r.first - 1)] == 0)
                bridged.back().second = r.second;
            else
                bridged.push_back(r);
        }
        merged = std::move(bridged);
    }

    std::vector<BubbleEpisode> episodes;
    for (const auto& [lo, hi] : merged) {
        BubbleEpisode ep;
        ep.start = lo;
        ep.end = hi;
        ep.peak = lo;
        for (int t = lo; t <= hi; ++t)
            if (y[static_cast<std::size_t>(t)] > y[static_cast<std::size_t>(ep.peak)]) ep.peak = t;
        ep.threshold_q = opts.threshold_q;
        episodes.push_back(ep);
    }
    return episodes;
}

std::optional<double> forward_conditional_prob(const std::vector<double>& y, double threshold_q) {
    const int n = static_cast<int>(y.size());
    if (n < 2) throw ValidationError("forward_conditional_prob: series too short");
    const double q = empirical_quantile(y, threshold_q);
    int hits = 0, total = 0;
    for (int t = 0; t + 1 < n; ++t) {
        if (!(y[static_cast<std::size_t>(t)] > q)) continue;
        ++total;
        if (y[static_cast<std::size_t>(t + 1)] / y[static_cast<std::size_t>(t)] >= 1.0) ++hits;
    }
    if (total == 0) return std::nullopt;
    return static_cast<double>(hits) / total;
}

DetectionReport detection_report(const std::vector<double>& y, const FittedMar& fit,
                                 const DetectionOptions& opts) {
    DetectionReport rep;
    const int n = static_cast<int>(y.size());
    rep.points.reserve(static_cast<std::size_t>(n - 1));
    for (int t = 0; t + 1 < n; ++t) rep.points.push_back(xi_point(y, fit, t, 0));
    rep.episodes = detect_episodes(y, fit, opts);
    rep.forward_prob = forward_conditional_prob(y, opts.threshold_q);
    return rep;
}

std::string detection_report_json(const DetectionReport& report, const std::vector<Date>& dates) {
    nlohmann::json j;
    nlohmann::json points = nlohmann::json::array();
    for (const auto& p : report.points) {
        nlohmann::json pj;
        pj["t"] = p.t;
        pj["date"] = dates[static_cast<std::size_t>(p.t)].to_string();
        if (p.excluded) {
            pj["excluded"] = true;
        } else {
            pj["xi"] = p.xi;
            pj["sigma"] = p.sigma;
            pj["band"] = p.band_halfwidth;
            pj["rejected"] = p.rejected;
        }
        points.push_back(pj);
    }
    j["points"] = points;
    nlohmann::json eps = nlohmann::json::array();
    for (const auto& e : report.episodes) {
        eps.push_back({{"start_date", dates[static_cast<std::size_t>(e.start)].to_string()},
                       {"end_date", dates[static_cast<std::size_t>(e.end)].to_string()},
                       {"peak_date", dates[static_cast<std::size_t>(e.peak)].to_string()},
                       {"threshold_q", e.threshold_q}});
    }
    j["episodes"] = eps;
    if (report.forward_prob)
        j["forward_prob"] = *report.forward_prob;
    else
        j["forward_prob"] = nullptr;
    return j.dump(2);
}

std::string detection_report_csv(const DetectionReport& report, const TimeSeries& y) {
    std::ostringstream out;
    out << "date,y,xi,band_lo,band_hi,in_episode\n";
    std::vector<bool> in_ep(y.size(), false);
    for (const auto& e : report.episodes)
        for (int t = e.start; t <= e.end; ++t) in_ep[static_cast<std::size_t>(t)] = true;
    char buf[40];
    for (const auto& p : report.points) {
        const auto idx = static_cast<std::size_t>(p.t);
        out << y.timestamps[idx].to_string() << ',';
        std::snprintf(buf, sizeof(buf), "%.17g", y.values[idx]);
        out << buf << ',';
        if (p.excluded) {
            out << ",,";
        } else {
            // The null band is centered at zero; the decision is "xi inside
            // [band_lo, band_hi]".
            std::snprintf(buf, sizeof(buf), "%.17g", p.xi);
            out << buf << ',';
            std::snprintf(buf, sizeof(buf), "%.17g", -p.band_halfwidth);
            out << buf << ',';
            std::snprintf(buf, sizeof(buf), "%.17g", p.band_halfwidth);
            out << buf;
        }
        out << ',' << (in_ep[idx] ? 1 : 0) << '\n';
    }
    return out.str();
}

}  // namespace mar
