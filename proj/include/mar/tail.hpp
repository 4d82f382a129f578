#ifndef MAR_TAIL_HPP
#define MAR_TAIL_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mar/model.hpp"

namespace mar {

/// Law of the peak-offset variable N of the spectral tail process:
/// P[N=h] proportional to c_h^alpha. Supports the three first-order model
/// shapes; the support is h <= 0 for the pure noncausal model, h >= 0 for
/// the pure causal one, and all integers for the mixed model.
///
/// The normalizer D = 1/(1-phi^alpha) + 1/(1-psi^alpha) - 1 is the sum of
/// c_h^alpha after scaling c_0 to 1 (the law is invariant to a common
/// positive factor on the coefficients).
class TailLaw {
  public:
    TailLaw(const MarModel& model, double alpha);

    double pmf(int h) const;
    double cdf(int h) const;       ///< P[N <= h], exact on both sides
    double survival(int h) const;  ///< P[N > h] = 1 - cdf(h)
    double normalizer() const { return norm_; }

    /// Marginal mean of N under the pmf (exact geometric-mixture sums).
    double mean_marginal() const;
    /// E[N | N <= -1] = -1 - psi^alpha/(1 - psi^alpha); NaN when P[N<0] = 0.
    double mean_given_negative() const;
    double prob_negative() const;  ///< P[N <= -1]

    int median() const;
    int mode() const { return 0; }

    const MarModel& model() const { return model_; }
    double alpha() const { return alpha_; }

  private:
    MarModel model_;
    double alpha_;
    double q_phi_;  ///< phi^alpha (0 when r = 0)
    double q_psi_;  ///< psi^alpha (0 when s = 0)
    double norm_;
};

/// P[N = h]; see TailLaw.
double n_pmf(const MarModel& model, double alpha, int h);

/// Expected value of N. Mixed model: the exact geometric-mixture mean
/// [phi^a/(1-phi^a)^2 - psi^a/(1-psi^a)^2] / D (zero when phi = psi). Pure
/// noncausal model: -1/(1-psi^alpha), the expected time to peak
/// E[N | N <= -1] (the unconditional pmf mean is -psi^a/(1-psi^a) and is
/// available from TailLaw::mean_marginal). Pure causal: phi^a/(1-phi^a).
double expected_n(const MarModel& model, double alpha);

double n_cdf(const MarModel& model, double alpha, int h);
double n_survival(const MarModel& model, double alpha, int h);

/// Equal-tailed prediction interval for N at two-sided level gamma,
/// endpoints rounded outward (conservative): continuous quantiles at
/// gamma/2 and 1-gamma/2 are floored / ceiled and clamped to the support.
std::pair<int, int> prediction_interval_n(const MarModel& model, double alpha, double gamma);

struct TailPath {
    int H = 0;
    int N = 0;  ///< drawn peak offset; the path peaks at index -N
    std::vector<double> x;  ///< values for h = -H..H

    double at(int h) const { return x[static_cast<std::size_t>(h + H)]; }
};

/// Draws N from its pmf and builds X_{-H..H} by the tail recursion
/// (growth steps scale by 1/psi, decline steps by phi), anchored at
/// X_0 = 1 exactly. Each adjacent pair satisfies the recursion in exact
/// floating point when recomputed the same way (growth edges below zero as
/// X_{h-1} = psi*X_h, decline edges below zero as X_{h-1} = X_h/phi).
TailPath sample_tail_path(const MarModel& model, double alpha, int H, std::uint64_t seed);

/// Closed-form X_h given N (the combined-indicator solution of the tail
/// recursion); used as a cross-check of sampled paths.
double tail_path_closed_form(const MarModel& model, int N, int h);

struct HillEstimate {
    double alpha_hat = 0;
    double stderr_ = 0;  ///< alpha_hat / sqrt(k)
    int k = 0;
    int n = 0;
};

/// Hill tail-index estimator on the top k order statistics of |values|:
/// alpha_hat = k / sum_{i=1..k} log(Z_(n-i+1) / Z_(n-k)). Requires k >= 2,
/// k < n, a positive threshold order statistic and untied top spacings.
HillEstimate hill_estimate(const std::vector<double>& values, int k);

/// Default k rule: floor(0.1 n) clipped to [10, n-1].
int default_hill_k(int n);

struct DurationReport {
    double alpha = 0;
    double e_n = 0;            ///< expected_n (see conventions above)
    double e_n_given_neg = 0;  ///< E[N | N <= -1]
    int median = 0;
    int mode = 0;
    double gamma = 0.10;
    int interval_lo = 0;
    int interval_hi = 0;
    /// P[N <= -m]: probability the time to peak is at least m periods
    /// (marginal law; this is the convention matching reported values).
    std::map<int, double> exceed_probs;
    /// Same probabilities conditioned on N <= -1.
    std::map<int, double> exceed_probs_given_neg;
};

DurationReport time_to_peak_report(const MarModel& model, double alpha,
                                   const std::vector<int>& horizons = {1, 2, 3, 4, 5, 6},
                                   double gamma = 0.10);

/// JSON with fixed field names:
/// alpha, E_N, E_N_given_neg, median, mode, interval{gamma,lo,hi}, exceed_probs{m: p}.
std::string duration_report_json(const DurationReport& report);

}  // namespace mar

#endif
