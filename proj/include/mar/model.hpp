#ifndef MAR_MODEL_HPP
#define MAR_MODEL_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mar/rng.hpp"
#include "mar/timeseries.hpp"

namespace mar {

/// Heavy-tailed error law. The tail index equals the degrees of freedom for
/// Student-t and 1 for Cauchy.
struct ErrorDist {
    enum class Kind { student_t, cauchy };
    Kind kind = Kind::student_t;
    double param = 3.0;  ///< degrees of freedom (student_t) or scale (cauchy)

    double tail_index() const { return kind == Kind::cauchy ? 1.0 : param; }
    double draw(Rng& rng) const;

    static ErrorDist student_t(double nu) { return {Kind::student_t, nu}; }
    static ErrorDist cauchy(double scale = 1.0) { return {Kind::cauchy, scale}; }

    std::string name() const;          ///< "t3", "t4.5", "cauchy1"
    static ErrorDist from_name(const std::string& s);
};

/// Mixed autoregressive model with one causal lag (phi) and/or one
/// noncausal lead (psi):  (1 - phi L)(1 - psi L^{-1}) y_t = eps_t.
/// The optional ar2 pair carries the pure second-order case with distinct
/// real root reciprocals, both inside (causal) or both outside (noncausal)
/// the unit circle; only its moving-average coefficients are supported.
struct MarModel {
    int r = 0;  ///< causal order, 0 or 1
    int s = 0;  ///< noncausal order, 0 or 1
    double phi = 0.0;
    double psi = 0.0;
    ErrorDist dist;
    std::optional<std::pair<double, double>> ar2;

    static MarModel mar11(double phi, double psi, ErrorDist d) { return {1, 1, phi, psi, d, {}}; }
    static MarModel mar01(double psi, ErrorDist d) { return {0, 1, 0.0, psi, d, {}}; }
    static MarModel mar10(double phi, ErrorDist d) { return {1, 0, phi, 0.0, d, {}}; }
};

/// Returns the model unchanged iff stationarity and order invariants hold;
/// otherwise throws ValidationError (|phi|,|psi| must be < 1; an ar2 pair
/// must have distinct real values with both moduli on the same side of 1
/// and both < 1 or both > 1).
MarModel validate(const MarModel& model);

/// Strictly stationary sample path of length T, reproducible given
/// (model, T, seed, burn): draws T + 2*burn errors, runs the forward causal
/// filter v_t = phi v_{t-1} + eps_t from v = 0, then the backward recursion
/// y_t = v_t + psi y_{t+1} from terminal y = 0, and keeps the middle T values.
/// Timestamps are synthetic month-ends starting 2000-01.
TimeSeries simulate(const MarModel& model, int T, std::uint64_t seed, int burn = 200);

/// Same filter on a caller-supplied error sequence of length T + 2*burn.
std::vector<double> simulate_with_errors(const MarModel& model, const std::vector<double>& eps,
                                         int burn);

struct LatentComponents {
    /// u[t] = y[t] - phi*y[t-1], defined for t >= 1 (index aligned with y;
    /// u[0] is NaN). v[t] = y[t] - psi*y[t+1], defined for t <= n-2 (v[n-1]
    /// is NaN).
    std::vector<double> u;
    std::vector<double> v;
};

/// Causal/noncausal decomposition at the given coefficients. The interior
/// reconstruction y_t = (phi v_{t-1} + u_t)/(1 - phi psi) holds exactly.
LatentComponents latent_components(const std::vector<double>& y, double phi, double psi);

/// Two-sided moving-average coefficients c_h for h in [h_min, h_max].
/// MAR(1,1): c_h = phi^h/(1-phi psi) for h >= 0 and psi^{-h}/(1-phi psi) for
/// h <= 0; pure models drop one side; the ar2 cases use the partial-fraction
/// forms for distinct real roots. 0^0 = 1.
std::vector<double> ma_coefficients(const MarModel& model, int h_min, int h_max);

/// Coefficients (phi_1..phi_p) of the all-lag autoregressive rewriting
/// y_t = phi_1 y_{t-1} + ... + phi_p y_{t-p} + e_t obtained by flipping the
/// lead polynomial: for MAR(1,1), phi_1 = phi + 1/psi, phi_2 = -phi/psi.
/// The rewritten error e_t is an iid scale of a lagged eps_t but is not an
/// innovation (it correlates with lagged observations).
std::vector<double> ar_representation(const MarModel& model);

/// Key-value text descriptor, fixed field names:
/// r, s, phi, psi, dist.kind, dist.param, seed, burn.
std::string model_descriptor(const MarModel& model, std::uint64_t seed, int burn);
struct ModelSpec {
    MarModel model;
    std::uint64_t seed = 0;
    int burn = 200;
};
ModelSpec parse_model_descriptor(const std::string& text);

}  // namespace mar

#endif
