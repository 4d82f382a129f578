#include "mar/estimation.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <nlohmann/json.hpp>

#include "mar/nelder_mead.hpp"
#include "mar/numeric.hpp"

namespace mar {

namespace {

using MatK = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 8, 8>;

constexpr double kLogFloor = 1e-300;

enum class PowKind { identity, square, cube, sqrt_abs, pow15_abs, int_pow, frac_abs_pow };

struct PowOp {
    PowKind kind;
    double p;
    int ip;
};

PowOp classify_power(double p) {
    if (p == 1.0) return {PowKind::identity, p, 1};
    if (p == 2.0) return {PowKind::square, p, 2};
    if (p == 3.0) return {PowKind::cube, p, 3};
    if (p == 0.5) return {PowKind::sqrt_abs, p, 0};
    if (p == 1.5) return {PowKind::pow15_abs, p, 0};
    if (p == std::floor(p) && std::abs(p) < 32) return {PowKind::int_pow, p, static_cast<int>(p)};
    return {PowKind::frac_abs_pow, p, 0};
}

inline double apply_power(const PowOp& op, double x) {
    switch (op.kind) {
        case PowKind::identity: return x;
        case PowKind::square: return x * x;
        case PowKind::cube: return x * x * x;
        case PowKind::sqrt_abs: return std::sqrt(std::abs(x));
        case PowKind::pow15_abs: {
            const double a = std::abs(x);
            return a * std::sqrt(a);
        }
        case PowKind::int_pow: {
            double out = 1.0, base = x;
            int e = op.ip;
            const bool neg = e < 0;
            e = std::abs(e);
            while (e) {
                if (e & 1) out *= base;
                base *= base;
                e >>= 1;
            }
            return neg ? 1.0 / out : out;
        }
        case PowKind::frac_abs_pow: return std::pow(std::abs(x), op.p);
    }
    return 0.0;
}

/// Holds the series and scratch buffers; evaluates residual transforms and
/// the GCov objective without reallocating.
class GcovWorkspace {
  public:
    GcovWorkspace(const std::vector<double>& y, int r, int s, const TransformSpec& transforms,
                  int H, bool diagonal_weighting)
        : y_(y), r_(r), s_(s), spec_(transforms), H_(H), diag_(diagonal_weighting) {
        spec_.validate();
        m_ = static_cast<int>(y.size()) - r - s;
        if (m_ <= H + 10)
            throw ValidationError("gcov: residual length must exceed H + 10");
        const int K = spec_.K();
        ops_.reserve(static_cast<std::size_t>(K));
        for (double p : spec_.exponents) ops_.push_back(classify_power(p));
        eps_.resize(static_cast<std::size_t>(m_));
        a_.assign(static_cast<std::size_t>(K), std::vector<double>(static_cast<std::size_t>(m_)));
        gammas_.assign(static_cast<std::size_t>(H + 1), MatK(K, K));
    }

    int m() const { return m_; }
    int K() const { return spec_.K(); }
    int H() const { return H_; }

    void compute_residuals(double phi, double psi) {
        const auto& y = y_;
        if (r_ == 1 && s_ == 1) {
            const double w = 1.0 + phi * psi;
            for (int t = 0; t < m_; ++t)
                eps_[static_cast<std::size_t>(t)] = w * y[static_cast<std::size_t>(t + 1)] -
                                                    phi * y[static_cast<std::size_t>(t)] -
                                                    psi * y[static_cast<std::size_t>(t + 2)];
        } else if (s_ == 1) {
            for (int t = 0; t < m_; ++t)
                eps_[static_cast<std::size_t>(t)] =
                    y[static_cast<std::size_t>(t)] - psi * y[static_cast<std::size_t>(t + 1)];
        } else if (r_ == 1) {
            for (int t = 0; t < m_; ++t)
                eps_[static_cast<std::size_t>(t)] =
                    y[static_cast<std::size_t>(t + 1)] - phi * y[static_cast<std::size_t>(t)];
        } else {
            std::copy(y.begin(), y.end(), eps_.begin());
        }
    }

    /// Transformed, demeaned residual columns for the current residuals.
    void compute_transforms() {
        const int K = spec_.K();
        for (int k = 0; k < K; ++k) {
            auto& col = a_[static_cast<std::size_t>(k)];
            if (spec_.kind == TransformSpec::Kind::powers) {
                const PowOp& op = ops_[static_cast<std::size_t>(k)];
                for (int t = 0; t < m_; ++t)
                    col[static_cast<std::size_t>(t)] = apply_power(op, eps_[static_cast<std::size_t>(t)]);
            } else {
                const PowOp& op = ops_[static_cast<std::size_t>(k)];
                for (int t = 0; t < m_; ++t) {
                    const double l = std::log(std::max(std::abs(eps_[static_cast<std::size_t>(t)]), kLogFloor));
                    col[static_cast<std::size_t>(t)] = apply_power(op, l);
                }
            }
            double mu = 0;
            for (double v : col) mu += v;
            mu /= m_;
            for (double& v : col) v -= mu;
        }
    }

    void compute_gammas() {
        const int K = spec_.K();
        for (int h = 0; h <= H_; ++h) {
            MatK& g = gammas_[static_cast<std::size_t>(h)];
            for (int i = 0; i < K; ++i) {
                const auto& ai = a_[static_cast<std::size_t>(i)];
                for (int j = 0; j < K; ++j) {
                    const auto& aj = a_[static_cast<std::size_t>(j)];
                    double acc = 0;
                    for (int t = h; t < m_; ++t)
                        acc += ai[static_cast<std::size_t>(t)] * aj[static_cast<std::size_t>(t - h)];
                    g(i, j) = acc / m_;
                }
            }
        }
    }

    /// Inverse of Gamma(0) (or of its diagonal); throws NumericalError naming
    /// the closest-to-collinear transformation pair when singular.
    MatK weight_inverse() const {
        const int K = spec_.K();
        const MatK& g0 = gammas_[0];
        if (diag_) {
            MatK a = MatK::Zero(K, K);
            for (int i = 0; i < K; ++i) {
                if (!(g0(i, i) > 0)) throw_singular(i, i);
                a(i, i) = 1.0 / g0(i, i);
            }
            return a;
        }
        for (int i = 0; i < K; ++i)
            if (!(g0(i, i) > 0)) throw_singular(i, i);
        Eigen::FullPivLU<MatK> lu(g0);
        lu.setThreshold(1e-12);
        if (!lu.isInvertible()) {
            // Report the most collinear pair.
            int bi = 0, bj = 1;
            double best = -1;
            for (int i = 0; i < K; ++i)
                for (int j = i + 1; j < K; ++j) {
                    const double rho = std::abs(g0(i, j)) / std::sqrt(g0(i, i) * g0(j, j));
                    if (rho > best) {
                        best = rho;
                        bi = i;
                        bj = j;
                    }
                }
            throw_singular(bi, bj);
        }
        return lu.inverse();
    }

    double objective_from_state() const {
        const MatK a = weight_inverse();
        double total = 0;
        for (int h = 1; h <= H_; ++h) {
            const MatK& g = gammas_[static_cast<std::size_t>(h)];
            const MatK p = g * a;
            const MatK q = g.transpose() * a;
            double tr = 0;
            for (int i = 0; i < p.rows(); ++i)
                for (int j = 0; j < p.cols(); ++j) tr += p(i, j) * q(j, i);
            total += tr;
        }
        return total;
    }

    double evaluate(double phi, double psi) {
        compute_residuals(phi, psi);
        compute_transforms();
        compute_gammas();
        return objective_from_state();
    }

    const std::vector<double>& current_residuals() const { return eps_; }
    const std::vector<std::vector<double>>& columns() const { return a_; }
    const MatK& gamma(int h) const { return gammas_[static_cast<std::size_t>(h)]; }

  private:
    [[noreturn]] void throw_singular(int i, int j) const {
        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      "gcov: Gamma(0) numerically singular (transformations %d and %d, exponents "
                      "%g and %g); consider diagonal weighting",
                      i + 1, j + 1, spec_.exponents[static_cast<std::size_t>(i)],
                      spec_.exponents[static_cast<std::size_t>(j)]);
        throw NumericalError(buf);
    }

    const std::vector<double>& y_;
    int r_, s_;
    TransformSpec spec_;
    int H_;
    bool diag_;
    int m_ = 0;
    std::vector<PowOp> ops_;
    std::vector<double> eps_;
    std::vector<std::vector<double>> a_;
    std::vector<MatK> gammas_;
};

std::pair<double, double> unpack_theta(const std::vector<double>& theta, int r, int s) {
    double phi = 0, psi = 0;
    if (r == 1) phi = theta[0];
    if (s == 1) psi = theta[static_cast<std::size_t>(r)];
    return {phi, psi};
}

/// Sandwich covariance J^{-1} I J^{-1} of sqrt(m)(theta_hat - theta): J is
/// the Gauss-Newton curvature 2 sum_h Tr[A dGamma_h' A dGamma_h] (the limit
/// of the objective Hessian at the optimum; a direct finite-difference
/// Hessian has no stable limit under fractional-power transforms, whose
/// kinks make the second difference diverge as the step shrinks), and I is
/// the outer-product mean of per-t gradient contributions through the lag-h
/// autocovariance moments.
struct SandwichResult {
    std::vector<double> omega;
    bool projected = false;
};

SandwichResult sandwich_covariance(GcovWorkspace& ws, const std::vector<double>& theta, int r,
                                   int s, CovarianceKind kind) {
    const int dim = static_cast<int>(theta.size());
    const int K = ws.K();
    const int H = ws.H();
    const int m = ws.m();

    std::vector<double> step(static_cast<std::size_t>(dim));
    for (int i = 0; i < dim; ++i)
        step[static_cast<std::size_t>(i)] = 1e-5 * std::max(1.0, std::abs(theta[static_cast<std::size_t>(i)]));

    // dGamma(h)/dtheta_i by central differences.
    std::vector<std::vector<MatK>> dgam(static_cast<std::size_t>(dim),
                                        std::vector<MatK>(static_cast<std::size_t>(H + 1)));
    for (int i = 0; i < dim; ++i) {
        auto thp = theta, thm = theta;
        thp[static_cast<std::size_t>(i)] += step[static_cast<std::size_t>(i)];
        thm[static_cast<std::size_t>(i)] -= step[static_cast<std::size_t>(i)];
        const auto [phip, psip] = unpack_theta(thp, r, s);
        ws.compute_residuals(phip, psip);
        ws.compute_transforms();
        ws.compute_gammas();
        std::vector<MatK> gp(static_cast<std::size_t>(H + 1));
        for (int h = 0; h <= H; ++h) gp[static_cast<std::size_t>(h)] = ws.gamma(h);
        const auto [phim, psim] = unpack_theta(thm, r, s);
        ws.compute_residuals(phim, psim);
        ws.compute_transforms();
        ws.compute_gammas();
        for (int h = 0; h <= H; ++h)
            dgam[static_cast<std::size_t>(i)][static_cast<std::size_t>(h)] =
                (gp[static_cast<std::size_t>(h)] - ws.gamma(h)) /
                (2.0 * step[static_cast<std::size_t>(i)]);
    }

    // State at theta_hat.
    const auto [phi0, psi0] = unpack_theta(theta, r, s);
    ws.compute_residuals(phi0, psi0);
    ws.compute_transforms();
    ws.compute_gammas();
    const MatK a = ws.weight_inverse();

    // P_h^i = A dGamma_h A; per-t gradient contribution
    // g_t[i] = 2 sum_h <P_h^i, col_t col_{t-h}'>.
    std::vector<std::vector<MatK>> p(static_cast<std::size_t>(dim),
                                     std::vector<MatK>(static_cast<std::size_t>(H)));
    for (int i = 0; i < dim; ++i)
        for (int h = 1; h <= H; ++h)
            p[static_cast<std::size_t>(i)][static_cast<std::size_t>(h - 1)] =
                a * dgam[static_cast<std::size_t>(i)][static_cast<std::size_t>(h)] * a;

    const auto& cols = ws.columns();
    const int t0 = H;
    const int nc = m - t0;
    Eigen::MatrixXd contrib(nc, dim);
    for (int t = t0; t < m; ++t) {
        for (int i = 0; i < dim; ++i) {
            double acc = 0;
            for (int h = 1; h <= H; ++h) {
                const MatK& ph = p[static_cast<std::size_t>(i)][static_cast<std::size_t>(h - 1)];
                for (int x = 0; x < K; ++x) {
                    const double at = cols[static_cast<std::size_t>(x)][static_cast<std::size_t>(t)];
                    for (int ycol = 0; ycol < K; ++ycol)
                        acc += ph(x, ycol) * at *
                               cols[static_cast<std::size_t>(ycol)][static_cast<std::size_t>(t - h)];
                }
            }
            contrib(t - t0, i) = 2.0 * acc;
        }
    }
    const Eigen::RowVectorXd gbar = contrib.colwise().mean();
    Eigen::MatrixXd info = (contrib.transpose() * contrib) / nc;
    info -= gbar.transpose() * gbar;

    Eigen::MatrixXd hess(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) {
            double acc = 0;
            for (int h = 1; h <= H; ++h) {
                const MatK& di = dgam[static_cast<std::size_t>(i)][static_cast<std::size_t>(h)];
                const MatK& dj = dgam[static_cast<std::size_t>(j)][static_cast<std::size_t>(h)];
                const MatK prod = di.transpose() * a * dj * a;
                acc += prod.trace();
            }
            hess(i, j) = 2.0 * acc;
        }

    Eigen::MatrixXd hinv = hess.completeOrthogonalDecomposition().pseudoInverse();
    Eigen::MatrixXd omega = kind == CovarianceKind::efficient ? Eigen::MatrixXd(2.0 * hinv)
                                                              : Eigen::MatrixXd(hinv * info * hinv);

    SandwichResult out;
    out.omega.assign(static_cast<std::size_t>(dim * dim), 0.0);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j)
            out.omega[static_cast<std::size_t>(i * dim + j)] = 0.5 * (omega(i, j) + omega(j, i));
    out.projected = !project_psd(out.omega, dim);
    return out;
}

}  // namespace

void TransformSpec::validate() const {
    if (exponents.size() < 2)
        throw ValidationError("transforms: need K >= 2 for identification");
    for (std::size_t i = 0; i < exponents.size(); ++i) {
        if (!(exponents[i] > 0)) throw ValidationError("transforms: exponents must be positive");
        for (std::size_t j = i + 1; j < exponents.size(); ++j)
            if (exponents[i] == exponents[j])
                throw ValidationError("transforms: exponents must be distinct");
    }
}

std::string TransformSpec::to_string() const {
    std::string out = kind == Kind::powers ? "powers(" : "log_abs_powers(";
    char buf[32];
    for (std::size_t i = 0; i < exponents.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%g", exponents[i]);
        if (i) out += ",";
        out += buf;
    }
    return out + ")";
}

std::vector<double> residuals(const std::vector<double>& y, int r, int s, double phi, double psi) {
    if (r < 0 || r > 1 || s < 0 || s > 1) throw ValidationError("residuals: orders must be 0 or 1");
    const int m = static_cast<int>(y.size()) - r - s;
    if (m < 1) throw ValidationError("residuals: series too short");
    std::vector<double> eps(static_cast<std::size_t>(m));
    if (r == 1 && s == 1) {
        const double w = 1.0 + phi * psi;
        for (int t = 0; t < m; ++t)
            eps[static_cast<std::size_t>(t)] = w * y[static_cast<std::size_t>(t + 1)] -
                                               phi * y[static_cast<std::size_t>(t)] -
                                               psi * y[static_cast<std::size_t>(t + 2)];
    } else if (s == 1) {
        for (int t = 0; t < m; ++t)
            eps[static_cast<std::size_t>(t)] =
                y[static_cast<std::size_t>(t)] - psi * y[static_cast<std::size_t>(t + 1)];
    } else if (r == 1) {
        for (int t = 0; t < m; ++t)
            eps[static_cast<std::size_t>(t)] =
                y[static_cast<std::size_t>(t + 1)] - phi * y[static_cast<std::size_t>(t)];
    } else {
        eps = y;
    }
    return eps;
}

std::vector<std::vector<double>> apply_transforms(const std::vector<double>& eps,
                                                  const TransformSpec& transforms) {
    transforms.validate();
    std::vector<std::vector<double>> out(static_cast<std::size_t>(transforms.K()));
    for (int k = 0; k < transforms.K(); ++k) {
        const PowOp op = classify_power(transforms.exponents[static_cast<std::size_t>(k)]);
        auto& col = out[static_cast<std::size_t>(k)];
        col.resize(eps.size());
        for (std::size_t t = 0; t < eps.size(); ++t) {
            const double v = transforms.kind == TransformSpec::Kind::powers
                                 ? eps[t]
                                 : std::log(std::max(std::abs(eps[t]), kLogFloor));
            col[t] = apply_power(op, v);
        }
    }
    return out;
}

double gcov_objective(const std::vector<double>& y, int r, int s, double phi, double psi,
                      const TransformSpec& transforms, int H, bool diagonal_weighting) {
    if (H < 1) throw ValidationError("gcov: H must be >= 1");
    GcovWorkspace ws(y, r, s, transforms, H, diagonal_weighting);
    return ws.evaluate(phi, psi);
}

GcovFit gcov_estimate(const std::vector<double>& y, int r, int s, const GcovOptions& opts) {
    if (!((r == 1 && s == 1) || (r == 1 && s == 0) || (r == 0 && s == 1)))
        throw ValidationError("gcov_estimate: (r,s) must be (1,0), (0,1) or (1,1)");
    if (opts.H < 1) throw ValidationError("gcov_estimate: H must be >= 1");
    const int dim = r + s;

    GcovWorkspace ws(y, r, s, opts.transforms, opts.H, opts.diagonal_weighting);

    const double box = opts.box_limit;
    auto objective = [&](const std::vector<double>& th) {
        for (double v : th)
            if (!(std::abs(v) < box)) return std::numeric_limits<double>::infinity();
        const auto [phi, psi] = unpack_theta(th, r, s);
        return ws.evaluate(phi, psi);
    };

    std::vector<std::vector<double>> starts;
    if (opts.warm_start) {
        if (static_cast<int>(opts.warm_start->size()) != dim)
            throw ValidationError("gcov_estimate: warm start dimension mismatch");
        starts.push_back(*opts.warm_start);
        for (int i = 0; i < dim; ++i) {
            for (double delta : {-0.05, 0.05}) {
                auto st = *opts.warm_start;
                st[static_cast<std::size_t>(i)] =
                    std::clamp(st[static_cast<std::size_t>(i)] + delta, -box + 1e-3, box - 1e-3);
                starts.push_back(st);
            }
        }
    } else {
        std::vector<double> axis;
        for (double v = -1.0 + opts.grid_spacing; v < 1.0 - opts.grid_spacing / 2;
             v += opts.grid_spacing)
            axis.push_back(v);
        if (dim == 1) {
            for (double v : axis) starts.push_back({v});
        } else {
            for (double v1 : axis)
                for (double v2 : axis) starts.push_back({v1, v2});
        }
    }

    GcovFit fit;
    fit.r = r;
    fit.s = s;
    fit.transforms = opts.transforms;
    fit.H = opts.H;
    fit.n = ws.m();
    fit.starts_total = static_cast<int>(starts.size());

    double best = std::numeric_limits<double>::infinity();
    std::vector<double> best_x;
    for (const auto& st : starts) {
        const SimplexResult res =
            nelder_mead(objective, st, 0.05, opts.f_tol, opts.x_tol, opts.max_iter);
        fit.evaluations += res.evaluations;
        if (res.converged) ++fit.starts_converged;
        if (res.value < best) {
            best = res.value;
            best_x = res.x;
        }
    }
    if (fit.starts_converged == 0)
        throw NumericalError("gcov_estimate: no multistart run converged (" +
                             std::to_string(fit.starts_total) + " starts, " +
                             std::to_string(fit.evaluations) + " evaluations)");
    if (best_x.empty() || !std::isfinite(best))
        throw NumericalError("gcov_estimate: objective not finite at any start");

    fit.theta = best_x;
    fit.objective = best;
    for (double v : fit.theta)
        if (std::abs(v) >= 0.9985) fit.boundary_warning = true;

    const auto [phi, psi] = unpack_theta(fit.theta, r, s);
    fit.resid = residuals(y, r, s, phi, psi);

    if (opts.compute_covariance) {
        SandwichResult sw = sandwich_covariance(ws, fit.theta, r, s, opts.covariance);
        fit.omega = sw.omega;
        fit.omega_projected = sw.projected;
        fit.stderr_.resize(static_cast<std::size_t>(dim));
        for (int i = 0; i < dim; ++i)
            fit.stderr_[static_cast<std::size_t>(i)] =
                std::sqrt(std::max(0.0, fit.omega[static_cast<std::size_t>(i * dim + i)]) / fit.n);
    }
    return fit;
}

SpecTest gcov_spec_test(const GcovFit& fit) {
    SpecTest test;
    const int K = fit.transforms.K();
    test.df = fit.H * K * K - fit.dim();
    if (test.df <= 0)
        throw ValidationError("gcov_spec_test: H K^2 must exceed dim(theta)");
    test.statistic = fit.n * fit.objective;
    test.pvalue = chi_square_sf(test.statistic, test.df);
    test.reject_at_5pct = test.pvalue < 0.05;
    return test;
}

OlsFit ols_noncausal(const std::vector<double>& y) {
    const int n = static_cast<int>(y.size());
    if (n < 10) throw ValidationError("ols_noncausal: need length >= 10");
    const int m = n - 1;
    double sxx = 0, sxy = 0, sx = 0;
    for (int t = 0; t < m; ++t) {
        const double x = y[static_cast<std::size_t>(t + 1)];
        sxx += x * x;
        sxy += x * y[static_cast<std::size_t>(t)];
        sx += x;
    }
    const double var_x = sxx / m - (sx / m) * (sx / m);
    if (!(var_x > 0)) throw ValidationError("ols_noncausal: zero-variance regressor");
    OlsFit fit;
    fit.n = m;
    fit.psi_hat = sxy / sxx;
    fit.resid.resize(static_cast<std::size_t>(m));
    double rss = 0;
    for (int t = 0; t < m; ++t) {
        const double e =
            y[static_cast<std::size_t>(t)] - fit.psi_hat * y[static_cast<std::size_t>(t + 1)];
        fit.resid[static_cast<std::size_t>(t)] = e;
        rss += e * e;
    }
    const double sigma2 = rss / (m - 1);
    fit.stderr_ = std::sqrt(sigma2 / sxx);
    fit.omega = m * fit.stderr_ * fit.stderr_;
    return fit;
}

std::vector<double> bootstrap_covariance(const GcovFit& fit, int B, std::uint64_t seed, int burn) {
    if (B < 2) throw ValidationError("bootstrap_covariance: need B >= 2");
    const int dim = fit.dim();
    const int T = fit.n + fit.r + fit.s;
    std::vector<double> centered = fit.resid;
    const double mu = mean(centered);
    for (double& e : centered) e -= mu;

    MarModel model;
    model.r = fit.r;
    model.s = fit.s;
    model.phi = fit.phi_hat();
    model.psi = fit.psi_hat();

    const int total = T + 2 * burn;
    std::vector<std::vector<double>> draws(static_cast<std::size_t>(B));
    for (int b = 0; b < B; ++b) {
        Rng rng(seed, static_cast<std::uint64_t>(b) + 1);
        std::vector<double> eps(static_cast<std::size_t>(total));
        for (auto& e : eps) {
            const auto idx = static_cast<std::size_t>(rng.uniform() * centered.size());
            e = centered[std::min(idx, centered.size() - 1)];
        }
        const std::vector<double> yb = simulate_with_errors(model, eps, burn);
        GcovOptions opts;
        opts.transforms = fit.transforms;
        opts.H = fit.H;
        opts.compute_covariance = false;
        opts.warm_start = fit.theta;
        try {
            const GcovFit refit = gcov_estimate(yb, fit.r, fit.s, opts);
            draws[static_cast<std::size_t>(b)] = refit.theta;
        } catch (const NumericalError&) {
            // Failed refits are skipped.
        }
    }

    std::vector<std::vector<double>> ok;
    for (auto& d : draws)
        if (!d.empty()) ok.push_back(std::move(d));
    if (static_cast<int>(ok.size()) < 2)
        throw NumericalError("bootstrap_covariance: too few successful refits");

    std::vector<double> meanv(static_cast<std::size_t>(dim), 0.0);
    for (const auto& d : ok)
        for (int i = 0; i < dim; ++i) meanv[static_cast<std::size_t>(i)] += d[static_cast<std::size_t>(i)];
    for (auto& v : meanv) v /= static_cast<double>(ok.size());

    std::vector<double> omega(static_cast<std::size_t>(dim * dim), 0.0);
    for (const auto& d : ok)
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j)
                omega[static_cast<std::size_t>(i * dim + j)] +=
                    (d[static_cast<std::size_t>(i)] - meanv[static_cast<std::size_t>(i)]) *
                    (d[static_cast<std::size_t>(j)] - meanv[static_cast<std::size_t>(j)]);
    for (auto& v : omega) v *= fit.n / static_cast<double>(ok.size() - 1);
    return omega;
}

std::string fit_report_json(const GcovFit& fit) {
    nlohmann::json j;
    j["theta"] = fit.theta;
    j["stderr"] = fit.stderr_;
    const int dim = fit.dim();
    nlohmann::json omega = nlohmann::json::array();
    for (int i = 0; i < dim; ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (int k = 0; k < dim; ++k)
            row.push_back(fit.omega.empty() ? 0.0 : fit.omega[static_cast<std::size_t>(i * dim + k)]);
        omega.push_back(row);
    }
    j["omega"] = omega;
    j["objective"] = fit.objective;
    const SpecTest test = gcov_spec_test(fit);
    j["test"] = {{"stat", test.statistic}, {"df", test.df}, {"pvalue", test.pvalue}};
    j["config"] = {{"K", fit.transforms.K()},
                   {"H", fit.H},
                   {"transforms", fit.transforms.to_string()}};
    return j.dump(2);
}

}  // namespace mar
