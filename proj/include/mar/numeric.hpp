#ifndef MAR_NUMERIC_HPP
#define MAR_NUMERIC_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace mar {

double mean(std::span<const double> x);

/// Unbiased (n-1) sample variance; requires n >= 2.
double sample_variance(std::span<const double> x);

/// Order-statistic (inverse-cdf) quantile: the value of rank ceil(q*n)
/// in the ascending sort, q in (0, 1].
double empirical_quantile(std::span<const double> x, double q);

/// Sample autocorrelation at lag h, 1/n covariance convention.
double sample_autocorr(std::span<const double> x, int lag);

/// Pearson correlation of two equal-length samples.
double sample_corr(std::span<const double> x, std::span<const double> y);

/// Upper-tail probability of the chi-square distribution.
double chi_square_sf(double x, int df);

/// Quantile (inverse cdf) of the chi-square distribution.
double chi_square_quantile(double p, int df);

struct Matrix2 {
    double a11 = 0, a12 = 0, a21 = 0, a22 = 0;
};

/// Project a symmetric matrix (given as row-major flattened d x d) onto the
/// nearest positive semidefinite matrix by clamping negative eigenvalues.
/// Returns true if the input was already PSD (no clamping needed).
bool project_psd(std::vector<double>& sym, int d);

}  // namespace mar

#endif
