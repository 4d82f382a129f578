#include "mar/cond_moments.hpp"

#include <cmath>

namespace mar {

namespace {

void check(const ConditionalState& state, double psi, bool printed_form) {
    if (!(state.sigma > 0)) throw ValidationError("conditional moments: sigma must be positive");
    if (psi == 0) throw ValidationError("conditional moments: psi must be nonzero");
    if (printed_form && !(psi > 0 && psi < 1))
        throw ValidationError("conditional moments: printed form requires psi in (0,1)");
}

}  // namespace

ConditionalBlocks cond_building_blocks(const ConditionalState& state, double phi, double psi) {
    check(state, psi, false);
    const double apsi = std::abs(psi);
    const double sg = psi > 0 ? 1.0 : -1.0;
    const double a = phi * phi + 2.0 * phi * sg + 1.0 / apsi;
    const double b = phi * phi * sg + phi / apsi;
    const double c = phi * phi / apsi;
    ConditionalBlocks out;
    out.e_y_next = (state.y_t - phi * state.y_prev) + phi * state.y_t;
    out.e_y_next_sq = a * state.y_t * state.y_t - 2.0 * b * state.y_t * state.y_prev +
                      c * state.y_prev * state.y_prev +
                      state.sigma * state.sigma / (apsi * (1.0 - apsi));
    return out;
}

double cond_cov_uv(const ConditionalState& state, double phi, double psi) {
    check(state, psi, true);
    const double apsi = std::abs(psi);
    return state.y_t * state.y_t * ((phi - 1.0) * phi * psi) +
           state.y_t * state.y_prev * (2.0 * phi - phi * (1.0 - phi * psi)) -
           state.y_prev * state.y_prev + state.sigma * state.sigma / (1.0 - apsi);
}

double cond_cov_uv_composed(const ConditionalState& state, double phi, double psi) {
    const ConditionalBlocks blocks = cond_building_blocks(state, phi, psi);
    return -phi * state.y_t * state.y_t - psi * blocks.e_y_next_sq +
           (phi * psi + 1.0) * state.y_t * blocks.e_y_next;
}

CondCovDivergence cond_cov_divergence(const ConditionalState& state, double phi, double psi) {
    CondCovDivergence out;
    out.printed = cond_cov_uv(state, phi, psi);
    out.composed = cond_cov_uv_composed(state, phi, psi);
    out.abs_diff = std::abs(out.printed - out.composed);
    const double scale = std::max({1.0, std::abs(out.printed), std::abs(out.composed)});
    out.diverges = out.abs_diff > 1e-9 * scale;
    return out;
}

}  // namespace mar
