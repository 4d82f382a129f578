#ifndef MAR_NELDER_MEAD_HPP
#define MAR_NELDER_MEAD_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace mar {

struct SimplexResult {
    std::vector<double> x;
    double value = std::numeric_limits<double>::infinity();
    int evaluations = 0;
    bool converged = false;
};

/// Derivative-free Nelder-Mead simplex descent. Stops when both the spread
/// of simplex function values falls below f_tol and the simplex diameter
/// falls below x_tol, or after max_iter iterations. The objective may
/// return +inf to reject a point (box constraints).
inline SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                 const std::vector<double>& start, double step = 0.05,
                                 double f_tol = 1e-10, double x_tol = 1e-8, int max_iter = 400) {
    const int d = static_cast<int>(start.size());
    SimplexResult res;
    int evals = 0;
    auto eval = [&](const std::vector<double>& x) {
        ++evals;
        const double v = f(x);
        return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
    };

    std::vector<std::vector<double>> px(static_cast<std::size_t>(d + 1), start);
    std::vector<double> pf(static_cast<std::size_t>(d + 1));
    for (int i = 0; i < d; ++i) px[static_cast<std::size_t>(i + 1)][static_cast<std::size_t>(i)] += step;
    for (int i = 0; i <= d; ++i) pf[static_cast<std::size_t>(i)] = eval(px[static_cast<std::size_t>(i)]);

    auto order = [&] {
        std::vector<int> idx(static_cast<std::size_t>(d + 1));
        for (int i = 0; i <= d; ++i) idx[static_cast<std::size_t>(i)] = i;
        std::sort(idx.begin(), idx.end(), [&](int a, int b) {
            return pf[static_cast<std::size_t>(a)] < pf[static_cast<std::size_t>(b)];
        });
        std::vector<std::vector<double>> nx(static_cast<std::size_t>(d + 1));
        std::vector<double> nf(static_cast<std::size_t>(d + 1));
        for (int i = 0; i <= d; ++i) {
            nx[static_cast<std::size_t>(i)] = px[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
            nf[static_cast<std::size_t>(i)] = pf[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
        }
        px = std::move(nx);
        pf = std::move(nf);
    };

    for (int iter = 0; iter < max_iter; ++iter) {
        order();
        double diam = 0;
        for (int i = 1; i <= d; ++i)
            for (int k = 0; k < d; ++k)
                diam = std::max(diam, std::abs(px[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] -
                                               px[0][static_cast<std::size_t>(k)]));
        const double spread = pf[static_cast<std::size_t>(d)] - pf[0];
        if (spread < f_tol && diam < x_tol) {
            res.converged = true;
            break;
        }

        // Centroid of all but the worst vertex.
        std::vector<double> c(static_cast<std::size_t>(d), 0.0);
        for (int i = 0; i < d; ++i)
            for (int k = 0; k < d; ++k)
                c[static_cast<std::size_t>(k)] += px[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] / d;

        auto blend = [&](double coef) {
            std::vector<double> x(static_cast<std::size_t>(d));
            for (int k = 0; k < d; ++k)
                x[static_cast<std::size_t>(k)] =
                    c[static_cast<std::size_t>(k)] +
                    coef * (px[static_cast<std::size_t>(d)][static_cast<std::size_t>(k)] - c[static_cast<std::size_t>(k)]);
            return x;
        };

        const auto xr = blend(-1.0);  // reflection
        const double fr = eval(xr);
        if (fr < pf[0]) {
            const auto xe = blend(-2.0);  // expansion
            const double fe = eval(xe);
            if (fe < fr) {
                px[static_cast<std::size_t>(d)] = xe;
                pf[static_cast<std::size_t>(d)] = fe;
            } else {
                px[static_cast<std::size_t>(d)] = xr;
                pf[static_cast<std::size_t>(d)] = fr;
            }
        } else if (fr < pf[static_cast<std::size_t>(d - 1)]) {
            px[static_cast<std::size_t>(d)] = xr;
            pf[static_cast<std::size_t>(d)] = fr;
        } else {
            const bool outside = fr < pf[static_cast<std::size_t>(d)];
            const auto xc = blend(outside ? -0.5 : 0.5);
            const double fc = eval(xc);
            if (fc < std::min(fr, pf[static_cast<std::size_t>(d)])) {
                px[static_cast<std::size_t>(d)] = xc;
                pf[static_cast<std::size_t>(d)] = fc;
            } else {
                // Shrink toward the best vertex.
                for (int i = 1; i <= d; ++i) {
                    for (int k = 0; k < d; ++k)
                        px[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] =
                            0.5 * (px[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] +
                                   px[0][static_cast<std::size_t>(k)]);
                    pf[static_cast<std::size_t>(i)] = eval(px[static_cast<std::size_t>(i)]);
                }
            }
        }
    }
    order();
    res.x = px[0];
    res.value = pf[0];
    res.evaluations = evals;
    return res;
}

}  // namespace mar

#endif
