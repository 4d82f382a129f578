#include "mar/tail.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>

#include "mar/rng.hpp"

namespace mar {

namespace {

void require_first_order(const MarModel& model) {
    if (model.ar2)
        throw ValidationError("tail law: ar2 models are unsupported (coefficients only)");
    validate(model);
}

/// Geometric draw on {0,1,2,...} with parameter q = P(continue).
int geometric(Rng& rng, double q) {
    if (q <= 0.0) return 0;
    return static_cast<int>(std::floor(std::log(rng.uniform()) / std::log(q)));
}

}  // namespace

TailLaw::TailLaw(const MarModel& model, double alpha) : model_(model), alpha_(alpha) {
    require_first_order(model);
    if (!(alpha > 0)) throw ValidationError("tail law: alpha must be positive");
    if ((model.r == 1 && model.phi <= 0) || (model.s == 1 && model.psi <= 0))
        throw ValidationError("tail law: coefficients must be positive");
    if (model.r == 0 && model.s == 0)
        throw ValidationError("tail law: white noise has no tail dynamics");
    q_phi_ = model.r == 1 ? std::pow(model.phi, alpha) : 0.0;
    q_psi_ = model.s == 1 ? std::pow(model.psi, alpha) : 0.0;
    norm_ = 1.0 / (1.0 - q_phi_) + 1.0 / (1.0 - q_psi_) - 1.0;
}

double TailLaw::pmf(int h) const {
    if (h > 0 && model_.r == 0) return 0.0;
    if (h < 0 && model_.s == 0) return 0.0;
    const double w = h >= 0 ? std::pow(q_phi_, h) : std::pow(q_psi_, -h);
    return w / norm_;
}

double TailLaw::cdf(int h) const {
    if (h >= 0) {
        if (model_.r == 0) return 1.0;
        // 1 - P[N >= h+1]
        return 1.0 - std::pow(q_phi_, h + 1) / ((1.0 - q_phi_) * norm_);
    }
    if (model_.s == 0) return 0.0;
    return std::pow(q_psi_, -h) / ((1.0 - q_psi_) * norm_);
}

double TailLaw::survival(int h) const { return 1.0 - cdf(h); }

double TailLaw::prob_negative() const {
    if (model_.s == 0) return 0.0;
    return q_psi_ / ((1.0 - q_psi_) * norm_);
}

double TailLaw::mean_marginal() const {
    const double up = q_phi_ / ((1.0 - q_phi_) * (1.0 - q_phi_));
    const double dn = q_psi_ / ((1.0 - q_psi_) * (1.0 - q_psi_));
    return (up - dn) / norm_;
}

double TailLaw::mean_given_negative() const {
    if (model_.s == 0 || q_psi_ <= 0) return std::nan("");
    return -1.0 - q_psi_ / (1.0 - q_psi_);
}

int TailLaw::median() const {
    if (model_.r == 0) {
        // Integer part of log2 / (alpha log psi).
        return static_cast<int>(std::trunc(std::log(2.0) / std::log(q_psi_)));
    }
    // Smallest h with cdf(h) >= 1/2, located by scanning from 0 (the cdf
    // moves by geometric factors, so this terminates quickly).
    int h = 0;
    if (cdf(0) < 0.5) {
        while (cdf(h) < 0.5) ++h;
    } else {
        while (cdf(h - 1) >= 0.5) --h;
    }
    return h;
}

double n_pmf(const MarModel& model, double alpha, int h) {
    return TailLaw(model, alpha).pmf(h);
}

double expected_n(const MarModel& model, double alpha) {
    const TailLaw law(model, alpha);
    if (model.r == 1 && model.s == 1) return law.mean_marginal();
    if (model.s == 1) return -1.0 / (1.0 - std::pow(model.psi, alpha));
    return law.mean_marginal();
}

double n_cdf(const MarModel& model, double alpha, int h) {
    return TailLaw(model, alpha).cdf(h);
}

double n_survival(const MarModel& model, double alpha, int h) {
    return TailLaw(model, alpha).survival(h);
}

std::pair<int, int> prediction_interval_n(const MarModel& model, double alpha, double gamma) {
    if (!(gamma > 0 && gamma < 0.5))
        throw ValidationError("prediction_interval_n: gamma must be in (0, 0.5)");
    const TailLaw law(model, alpha);
    const double tail = gamma / 2.0;
    const double d = law.normalizer();
    const double q_psi = model.s == 1 ? std::pow(model.psi, alpha) : 0.0;
    const double q_phi = model.r == 1 ? std::pow(model.phi, alpha) : 0.0;

    // Continuous quantile of the psi (growth) tail: solves
    // P[N <= h] = psi^{-h a} / ((1-psi^a) D) = p.
    auto psi_side = [&](double p) {
        return std::log(p * (1.0 - q_psi) * d) / (-std::log(q_psi));
    };
    // Continuous quantile of the phi (decline) tail: solves
    // P[N >= h] = phi^{h a} / ((1-phi^a) D) = p.
    auto phi_side = [&](double p) {
        return std::log(p * (1.0 - q_phi) * d) / std::log(q_phi);
    };

    int lo, hi;
    if (model.r == 1 && model.s == 1) {
        lo = static_cast<int>(std::floor(psi_side(tail)));
        hi = std::max(0, static_cast<int>(std::ceil(phi_side(tail))));
    } else if (model.s == 1) {
        lo = static_cast<int>(std::floor(psi_side(tail)));
        hi = std::min(0, static_cast<int>(std::ceil(psi_side(1.0 - tail))));
    } else {
        lo = std::max(0, static_cast<int>(std::floor(phi_side(1.0 - tail))));
        hi = std::max(0, static_cast<int>(std::ceil(phi_side(tail))));
    }
    return {lo, hi};
}

TailPath sample_tail_path(const MarModel& model, double alpha, int H, std::uint64_t seed) {
    if (H < 1) throw ValidationError("sample_tail_path: H must be >= 1");
    const TailLaw law(model, alpha);
    Rng rng(seed);

    // Draw the side, then the geometric magnitude (matches the pmf exactly:
    // the law is a two-sided geometric mixture).
    const double p_neg = law.prob_negative();
    const double q_phi = model.r == 1 ? std::pow(model.phi, alpha) : 0.0;
    const double q_psi = model.s == 1 ? std::pow(model.psi, alpha) : 0.0;
    int n_draw;
    if (rng.uniform() < p_neg) {
        n_draw = -1 - geometric(rng, q_psi);
    } else {
        n_draw = geometric(rng, q_phi);
    }

    TailPath path;
    path.H = H;
    path.N = n_draw;
    path.x.assign(static_cast<std::size_t>(2 * H + 1), 0.0);
    auto set = [&](int h, double v) { path.x[static_cast<std::size_t>(h + H)] = v; };

    set(0, 1.0);
    const double inv_psi = model.s == 1 ? 1.0 / model.psi : 0.0;
    for (int h = 1; h <= H; ++h) {
        const double prev = path.at(h - 1);
        set(h, n_draw <= -h ? inv_psi * prev : model.phi * prev);
    }
    for (int h = -1; h >= -H; --h) {
        const double next = path.at(h + 1);
        // Edge (h, h+1): growth when N <= -(h+1), else decline.
        if (n_draw <= -(h + 1)) {
            set(h, model.psi * next);
        } else {
            set(h, next / model.phi);
        }
    }
    return path;
}

double tail_path_closed_form(const MarModel& model, int N, int h) {
    require_first_order(model);
    const double phi = model.phi, psi = model.psi;
    if (N > std::max(-h, 0)) return std::pow(phi, h);
    if (N > 0 && N <= -h) return std::pow(psi, -h - N) * std::pow(phi, -N);
    if (N > -h && N <= 0) return std::pow(phi, h + N) * std::pow(psi, N);
    return std::pow(psi, -h);
}

int default_hill_k(int n) {
    return std::clamp(n / 10, 10, n - 1);
}

HillEstimate hill_estimate(const std::vector<double>& values, int k) {
    const int n = static_cast<int>(values.size());
    if (k < 2) throw ValidationError("hill_estimate: k must be >= 2");
    if (k >= n) throw ValidationError("hill_estimate: k must be < n");
    std::vector<double> z(values.size());
    std::transform(values.begin(), values.end(), z.begin(), [](double v) { return std::abs(v); });
    std::sort(z.begin(), z.end());
    const double threshold = z[static_cast<std::size_t>(n - k - 1)];  // Z_(n-k)
    if (!(threshold > 0)) throw ValidationError("hill_estimate: threshold order statistic not positive");
    double acc = 0;
    for (int i = 0; i < k; ++i) acc += std::log(z[static_cast<std::size_t>(n - 1 - i)] / threshold);
    if (!(acc > 0)) throw ValidationError("hill_estimate: zero log-spacings (tied order statistics)");
    HillEstimate est;
    est.k = k;
    est.n = n;
    est.alpha_hat = k / acc;
    est.stderr_ = est.alpha_hat / std::sqrt(static_cast<double>(k));
    return est;
}

DurationReport time_to_peak_report(const MarModel& model, double alpha,
                                   const std::vector<int>& horizons, double gamma) {
    const TailLaw law(model, alpha);
    DurationReport rep;
    rep.alpha = alpha;
    rep.e_n = expected_n(model, alpha);
    rep.e_n_given_neg = law.mean_given_negative();
    rep.median = law.median();
    rep.mode = law.mode();
    rep.gamma = gamma;
    const auto [lo, hi] = prediction_interval_n(model, alpha, gamma);
    rep.interval_lo = lo;
    rep.interval_hi = hi;
    const double p_neg = law.prob_negative();
    for (int m : horizons) {
        if (m < 0) throw ValidationError("time_to_peak_report: horizons must be >= 0");
        const double p = law.cdf(-m);
        rep.exceed_probs[m] = p;
        rep.exceed_probs_given_neg[m] = p_neg > 0 ? p / p_neg : std::nan("");
    }
    return rep;
}

std::string duration_report_json(const DurationReport& report) {
    nlohmann::json j;
    j["alpha"] = report.alpha;
    j["E_N"] = report.e_n;
    j["E_N_given_neg"] = report.e_n_given_neg;
    j["median"] = report.median;
    j["mode"] = report.mode;
    j["interval"] = {{"gamma", report.gamma}, {"lo", report.interval_lo}, {"hi", report.interval_hi}};
    nlohmann::json probs;
    for (const auto& [m, p] : report.exceed_probs) probs[std::to_string(m)] = p;
    j["exceed_probs"] = probs;
    return j.dump(2);
}

}  // namespace mar
