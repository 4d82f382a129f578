#ifndef MAR_ESTIMATION_HPP
#define MAR_ESTIMATION_HPP

#include <optional>
#include <string>
#include <vector>

#include "mar/model.hpp"
#include "mar/timeseries.hpp"

namespace mar {

/// Nonlinear transformations of the residual sequence used by the GCov
/// objective. Power exponents apply as eps^p for integer p and |eps|^p
/// otherwise (fractional powers of absolute values keep moments finite for
/// heavy-tailed errors); log_abs_powers uses (log|eps|)^p.
struct TransformSpec {
    enum class Kind { powers, log_abs_powers };
    Kind kind = Kind::powers;
    std::vector<double> exponents = {1.0, 2.0};

    int K() const { return static_cast<int>(exponents.size()); }
    void validate() const;
    std::string to_string() const;

    static TransformSpec powers(std::vector<double> exps) {
        return {Kind::powers, std::move(exps)};
    }
    static TransformSpec log_abs_powers(std::vector<double> exps) {
        return {Kind::log_abs_powers, std::move(exps)};
    }
};

struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Model residuals eps_t = (1 - phi L)(1 - psi L^{-1}) y_t over the interior
/// index range; output length is n - r - s.
std::vector<double> residuals(const std::vector<double>& y, int r, int s, double phi, double psi);

/// Applies the transform list to a residual sequence; column k holds a_k(eps).
std::vector<std::vector<double>> apply_transforms(const std::vector<double>& eps,
                                                  const TransformSpec& transforms);

/// Portmanteau objective sum_{h=1..H} Tr[G(h) G(0)^-1 G(h)' G(0)^-1] where
/// G(h) are K x K sample autocovariances (1/n convention) of the demeaned
/// transformed residuals. Throws NumericalError naming the offending
/// transformation pair when G(0) is numerically singular, unless
/// diagonal_weighting is set (then G(0) is replaced by its diagonal).
double gcov_objective(const std::vector<double>& y, int r, int s, double phi, double psi,
                      const TransformSpec& transforms, int H, bool diagonal_weighting = false);

/// Parameter covariance estimator. `efficient` is the optimally-weighted
/// form (D'WD)^-1 implied by the estimator's semi-parametric efficiency;
/// `sandwich` is the robust J^-1 I J^-1 with I the outer-product mean of
/// per-t gradient contributions.
enum class CovarianceKind { efficient, sandwich };

struct GcovOptions {
    TransformSpec transforms;
    int H = 2;
    double grid_spacing = 0.1;    ///< multistart grid over the admissible box
    double box_limit = 0.999;     ///< proposals with any |theta_i| >= this are rejected
    double f_tol = 1e-10;
    double x_tol = 1e-8;
    int max_iter = 400;
    bool diagonal_weighting = false;
    bool compute_covariance = true;
    CovarianceKind covariance = CovarianceKind::sandwich;
    /// When set, the multistart grid is replaced by this single start plus
    /// a small local grid around it (used for bootstrap refits).
    std::optional<std::vector<double>> warm_start;
};

struct SpecTest {
    double statistic = 0;  ///< n * L_n(theta_hat, H)
    int df = 0;            ///< H K^2 - dim(theta)
    double pvalue = 1;
    bool reject_at_5pct = false;
};

struct GcovFit {
    int r = 0, s = 0;
    std::vector<double> theta;   ///< phi (if r=1) then psi (if s=1)
    std::vector<double> stderr_; ///< asymptotic standard errors, same order
    std::vector<double> omega;   ///< row-major dim x dim, Avar of sqrt(n)(theta_hat - theta)
    double objective = 0;
    std::vector<double> resid;
    int n = 0;                   ///< residual sample size used for scaling
    TransformSpec transforms;
    int H = 2;
    bool boundary_warning = false;
    bool omega_projected = false;  ///< sandwich clamped to PSD
    int starts_converged = 0;
    int starts_total = 0;
    int evaluations = 0;

    double phi_hat() const { return r == 1 ? theta[0] : 0.0; }
    double psi_hat() const { return s == 1 ? theta[static_cast<std::size_t>(r)] : 0.0; }
    int dim() const { return r + s; }
};

/// GCov estimate of a MAR(r,s) model, (r,s) in {(1,0),(0,1),(1,1)}; the
/// series must already be detrended/centered. Deterministic given opts:
/// Nelder-Mead restarts on a fixed grid over the open box and the best
/// terminal value wins. Throws NumericalError if no start converges.
GcovFit gcov_estimate(const std::vector<double>& y, int r, int s, const GcovOptions& opts = {});

/// Chi-square specification test from a fit: statistic n*L_n, df = H K^2 - dim.
SpecTest gcov_spec_test(const GcovFit& fit);

struct OlsFit {
    double psi_hat = 0;
    double stderr_ = 0;
    double omega = 0;  ///< Avar of sqrt(n)(psi_hat - psi)
    int n = 0;
    std::vector<double> resid;
};

/// Reverse-time AR(1) least squares: slope of y_t on y_{t+1}, no intercept
/// (the model carries no constant). Classical standard error.
OlsFit ols_noncausal(const std::vector<double>& y);

/// Parametric residual bootstrap of the fit's parameter covariance:
/// resamples centered residuals, re-simulates with the fitted coefficients
/// and refits (warm-started); returns Avar(sqrt(n) theta) estimate,
/// row-major. B is the number of bootstrap replications.
std::vector<double> bootstrap_covariance(const GcovFit& fit, int B, std::uint64_t seed,
                                         int burn = 200);

/// Serializes a fit report to JSON with fixed field names:
/// theta, stderr, omega, objective, test{stat,df,pvalue}, config{K,H,transforms}.
std::string fit_report_json(const GcovFit& fit);

}  // namespace mar

#endif
