#include "mar/numeric.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <stdexcept>

namespace mar {

double mean(std::span<const double> x) {
    if (x.empty()) throw std::invalid_argument("mean: empty sample");
    double s = 0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

double sample_variance(std::span<const double> x) {
    const std::size_t n = x.size();
    if (n < 2) throw std::invalid_argument("sample_variance: need n >= 2");
    const double m = mean(x);
    double ss = 0;
    for (double v : x) ss += (v - m) * (v - m);
    return ss / static_cast<double>(n - 1);
}

double empirical_quantile(std::span<const double> x, double q) {
    if (x.empty()) throw std::invalid_argument("empirical_quantile: empty sample");
    if (!(q > 0.0 && q <= 1.0)) throw std::invalid_argument("empirical_quantile: q outside (0,1]");
    std::vector<double> s(x.begin(), x.end());
    std::sort(s.begin(), s.end());
    const auto n = static_cast<double>(s.size());
    auto rank = static_cast<std::size_t>(std::ceil(q * n));
    if (rank < 1) rank = 1;
    if (rank > s.size()) rank = s.size();
    return s[rank - 1];
}

double sample_autocorr(std::span<const double> x, int lag) {
    const int n = static_cast<int>(x.size());
    if (lag < 0 || lag >= n) throw std::invalid_argument("sample_autocorr: bad lag");
    const double m = mean(x);
    double c0 = 0, ch = 0;
    for (int t = 0; t < n; ++t) c0 += (x[t] - m) * (x[t] - m);
    for (int t = lag; t < n; ++t) ch += (x[t] - m) * (x[t - lag] - m);
    if (c0 == 0) throw std::invalid_argument("sample_autocorr: zero variance");
    return ch / c0;
}

double sample_corr(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("sample_corr: size mismatch");
    const double mx = mean(x), my = mean(y);
    double sxx = 0, syy = 0, sxy = 0;
    for (std::size_t t = 0; t < x.size(); ++t) {
        sxx += (x[t] - mx) * (x[t] - mx);
        syy += (y[t] - my) * (y[t] - my);
        sxy += (x[t] - mx) * (y[t] - my);
    }
    if (sxx == 0 || syy == 0) throw std::invalid_argument("sample_corr: zero variance");
    return sxy / std::sqrt(sxx * syy);
}

double chi_square_sf(double x, int df) {
    if (df <= 0) throw std::invalid_argument("chi_square_sf: df must be positive");
    if (x <= 0) return 1.0;
    boost::math::chi_squared dist(static_cast<double>(df));
    return boost::math::cdf(boost::math::complement(dist, x));
}

double chi_square_quantile(double p, int df) {
    if (df <= 0) throw std::invalid_argument("chi_square_quantile: df must be positive");
    boost::math::chi_squared dist(static_cast<double>(df));
    return boost::math::quantile(dist, p);
}

bool project_psd(std::vector<double>& sym, int d) {
    if (static_cast<int>(sym.size()) != d * d)
        throw std::invalid_argument("project_psd: size mismatch");
    Eigen::MatrixXd m(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) m(i, j) = sym[i * d + j];
    // Symmetrize before the eigendecomposition.
    m = 0.5 * (m + m.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    Eigen::VectorXd ev = es.eigenvalues();
    bool was_psd = true;
    for (int i = 0; i < d; ++i) {
        if (ev(i) < 0) {
            ev(i) = 0;
            was_psd = false;
        }
    }
    if (!was_psd) {
        Eigen::MatrixXd p = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) sym[i * d + j] = p(i, j);
    }
    return was_psd;
}

}  // namespace mar
