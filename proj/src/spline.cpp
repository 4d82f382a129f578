#include "mar/spline.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace mar {

namespace {

inline double pos_cube(double x) { return x > 0 ? x * x * x : 0.0; }

}  // namespace

SplineDetrend spline_detrend(const TimeSeries& ts, int knot_spacing_months) {
    ts.validate();
    if (knot_spacing_months < 1)
        throw ValidationError("spline_detrend: knot spacing must be >= 1 month");
    if (ts.size() < 2) throw ValidationError("spline_detrend: series too short");

    const Date first = ts.timestamps.front();
    const Date last = ts.timestamps.back();

    // In-sample knots every knot_spacing_months from the first timestamp.
    std::vector<Date> knots;
    for (int j = 0;; ++j) {
        const Date k = first.add_months(knot_spacing_months * j);
        if (k > last) break;
        knots.push_back(k);
    }
    if (knots.size() < 2)
        throw ValidationError("spline_detrend: series spans less than one knot interval");
    if (ts.size() < knots.size() + 4)
        throw ValidationError("spline_detrend: need length >= knots + 4");

    // Phantom boundary knots one spacing outside the sample.
    std::vector<Date> all;
    all.push_back(first.add_months(-knot_spacing_months));
    all.insert(all.end(), knots.begin(), knots.end());
    all.push_back(first.add_months(knot_spacing_months * static_cast<int>(knots.size())));

    const int total = static_cast<int>(all.size());
    const double x0 = static_cast<double>(first.serial());
    const double xs = static_cast<double>(last.serial()) - x0;
    auto coord = [&](const Date& d) { return (static_cast<double>(d.serial()) - x0) / xs; };

    std::vector<double> kx(static_cast<std::size_t>(total));
    for (int j = 0; j < total; ++j) kx[static_cast<std::size_t>(j)] = coord(all[static_cast<std::size_t>(j)]);

    // Natural cubic spline basis of dimension = number of knots:
    // {1, x, N_1..N_{total-2}} with N_j = d_j - d_{total-2},
    // d_j(x) = [(x-k_j)+^3 - (x-k_last)+^3] / (k_last - k_j).
    const double k_last = kx[static_cast<std::size_t>(total - 1)];
    const double k_pen = kx[static_cast<std::size_t>(total - 2)];
    auto dfun = [&](int j, double x) {
        const double kj = kx[static_cast<std::size_t>(j)];
        return (pos_cube(x - kj) - pos_cube(x - k_last)) / (k_last - kj);
    };

    const int n = static_cast<int>(ts.size());
    const int dim = total;
    Eigen::MatrixXd design(n, dim);
    for (int i = 0; i < n; ++i) {
        const double x = coord(ts.timestamps[static_cast<std::size_t>(i)]);
        design(i, 0) = 1.0;
        design(i, 1) = x;
        const double d_pen = (pos_cube(x - k_pen) - pos_cube(x - k_last)) / (k_last - k_pen);
        for (int j = 0; j < total - 2; ++j) design(i, 2 + j) = dfun(j, x) - d_pen;
    }

    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y(i) = ts.values[static_cast<std::size_t>(i)];
    Eigen::VectorXd beta = design.colPivHouseholderQr().solve(y);
    Eigen::VectorXd fit = design * beta;

    SplineDetrend out;
    out.knots = knots;
    out.trend.label = ts.label;
    out.residual.label = ts.label;
    out.trend.timestamps = ts.timestamps;
    out.residual.timestamps = ts.timestamps;
    out.trend.values.resize(ts.size());
    out.residual.values.resize(ts.size());
    for (int i = 0; i < n; ++i) {
        out.trend.values[static_cast<std::size_t>(i)] = fit(i);
        out.residual.values[static_cast<std::size_t>(i)] = y(i) - fit(i);
    }
    return out;
}

}  // namespace mar
