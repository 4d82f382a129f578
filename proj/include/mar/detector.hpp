#ifndef MAR_DETECTOR_HPP
#define MAR_DETECTOR_HPP

#include <optional>
#include <string>
#include <vector>

#include "mar/estimation.hpp"
#include "mar/timeseries.hpp"

namespace mar {

/// Fitted coefficients plus the parameter covariance needed by the
/// diagnostics: omega is Avar(sqrt(n)(theta_hat - theta)) row-major, in the
/// order phi (if r=1) then psi (if s=1); n is the fit's sample scale.
struct FittedMar {
    int r = 0, s = 0;
    double phi = 0, psi = 0;
    std::vector<double> omega;
    int n = 0;

    int dim() const { return r + s; }
    static FittedMar from_gcov(const GcovFit& fit);
    static FittedMar from_ols(const OlsFit& fit);
};

/// Per-time on-bubble statistic. band_halfwidth = 1.96 sigma / sqrt(n);
/// rejected <=> |sqrt(n) xi / sigma| > 1.96 (when sigma > 0; a degenerate
/// sigma = 0 point is rejected only if xi != 0). excluded marks times
/// caught by the zero-guard |y_t| < 1e-6 sd(y).
struct XiPoint {
    int t = 0;
    int h = 0;
    double xi = 0;
    double sigma = 0;
    double band_halfwidth = 0;
    bool rejected = false;
    bool excluded = false;
};

/// xi_hat_{t}(h): the normalized product u_{t+h+1} v_{t+h} / y_t^2 for the
/// mixed model, v_{t+h}/y_t for the pure noncausal one and u_{t+h+1}/y_t
/// for the pure causal one. Requires t+h+1 < n.
double xi_stat(const std::vector<double>& y, const FittedMar& fit, int t, int h);

/// Delta-method standard deviation of sqrt(n) xi_hat_t(h).
double xi_sigma(const std::vector<double>& y, const FittedMar& fit, int t, int h);

XiPoint xi_point(const std::vector<double>& y, const FittedMar& fit, int t, int h);

struct DiagnoseResult {
    std::vector<XiPoint> points;
    bool truncated = false;  ///< horizons past the series end were dropped
};

/// Horizon diagnostics 1..h_max conditional on time t; the decision is
/// "bubble-consistent" when not rejected.
DiagnoseResult diagnose(const std::vector<double>& y, const FittedMar& fit, int t, int h_max);

/// First difference of xi_hat_t(0) over valid (non-excluded) times; excluded
/// points produce gaps rather than entries.
TimeSeries delta_xi(const TimeSeries& y, const FittedMar& fit);

struct BubbleEpisode {
    int start = 0;
    int end = 0;
    int peak = 0;  ///< argmax of y within [start, end]
    double threshold_q = 0;
};

struct DetectionOptions {
    double threshold_q = 0.975;
    int min_run = 2;
    /// Merge runs separated by a single rejected point when both sides have
    /// at least min_run consecutive non-rejections.
    bool merge_single_rejections = true;
};

/// Threshold-triggered episode dating: around each time whose value exceeds
/// the empirical threshold_q quantile, the maximal run of consecutive
/// non-rejected h=0 points of length >= min_run becomes an episode;
/// overlapping episodes merge. No exceedances yield an empty list.
std::vector<BubbleEpisode> detect_episodes(const std::vector<double>& y, const FittedMar& fit,
                                           const DetectionOptions& opts = {});

/// Nonparametric forward estimator of P[y_{t+1}/y_t >= 1 | y_t > q] with q
/// the empirical threshold_q quantile; the last time is excluded. Empty when
/// there are no exceedances.
std::optional<double> forward_conditional_prob(const std::vector<double>& y, double threshold_q);

struct DetectionReport {
    std::vector<XiPoint> points;
    std::vector<BubbleEpisode> episodes;
    std::optional<double> forward_prob;
};

DetectionReport detection_report(const std::vector<double>& y, const FittedMar& fit,
                                 const DetectionOptions& opts = {});

/// JSON: points[{t,date,xi,sigma,band,rejected}], episodes[{start_date,
/// end_date,peak_date,threshold_q}], forward_prob.
std::string detection_report_json(const DetectionReport& report, const std::vector<Date>& dates);

/// CSV mirror for plotting: date,y,xi,band_lo,band_hi,in_episode.
std::string detection_report_csv(const DetectionReport& report, const TimeSeries& y);

}  // namespace mar

#endif
