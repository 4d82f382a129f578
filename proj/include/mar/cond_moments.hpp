#ifndef MAR_COND_MOMENTS_HPP
#define MAR_COND_MOMENTS_HPP

#include "mar/timeseries.hpp"

namespace mar {

/// Markov order-2 conditioning state of the mixed model with Cauchy errors.
struct ConditionalState {
    double y_t = 0;
    double y_prev = 0;  ///< y_{t-1}
    double sigma = 1;   ///< error scale, > 0
};

struct ConditionalBlocks {
    double e_y_next = 0;     ///< E[y_{t+1} | y_t, y_{t-1}]
    double e_y_next_sq = 0;  ///< E[y_{t+1}^2 | y_t, y_{t-1}]
};

/// Conditional one-step moments for the Cauchy mixed model (psi != 0):
/// E[y_{t+1}|.] = (y_t - phi y_{t-1}) + phi y_t and the quadratic form
/// E[y_{t+1}^2|.] = a y_t^2 - 2 b y_t y_{t-1} + c y_{t-1}^2
///                  + sigma^2/(|psi|(1-|psi|)),
/// a = phi^2 + 2 phi sign(psi) + 1/|psi|, b = phi^2 sign(psi) + phi/|psi|,
/// c = phi^2/|psi|.
ConditionalBlocks cond_building_blocks(const ConditionalState& state, double phi, double psi);

/// Conditional covariance of the latent components, as printed:
/// y_t^2 (phi-1) phi psi + y_t y_{t-1} [2 phi - phi(1 - phi psi)]
/// - y_{t-1}^2 + sigma^2/(1-|psi|). Requires psi in (0,1). Known to diverge
/// from the composed form (see cond_cov_divergence); the composed form is
/// the validated one.
double cond_cov_uv(const ConditionalState& state, double phi, double psi);

/// Same quantity composed from the building blocks through the exact
/// identity E[u_{t+1} v_t|.] = -phi y_t^2 - psi E[y_{t+1}^2|.]
/// + (phi psi + 1) y_t E[y_{t+1}|.]. At the origin this equals
/// -sigma^2/(1-psi) exactly.
double cond_cov_uv_composed(const ConditionalState& state, double phi, double psi);

struct CondCovDivergence {
    double printed = 0;
    double composed = 0;
    double abs_diff = 0;
    bool diverges = false;  ///< forms disagree beyond rounding
};

CondCovDivergence cond_cov_divergence(const ConditionalState& state, double phi, double psi);

}  // namespace mar

#endif
