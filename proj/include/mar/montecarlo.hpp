#ifndef MAR_MONTECARLO_HPP
#define MAR_MONTECARLO_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "mar/estimation.hpp"
#include "mar/model.hpp"

namespace mar {

/// Size/power study configuration. The pure noncausal family is estimated
/// by reverse-time OLS; the mixed family by GCov with the given transforms
/// and lag depth. The phi grid is ignored for the pure family.
struct McConfig {
    enum class Family { mar01_ols, mar11_gcov };
    enum class Pick { first, last, max };

    Family family = Family::mar01_ols;
    std::vector<ErrorDist> dists = {ErrorDist::student_t(3)};
    std::vector<double> psi_grid = {0.5};
    std::vector<double> phi_grid = {};
    int T = 400;
    int R = 200;
    int burn = 200;
    double size_quantile = 0.975;
    double power_quantile = 0.525;
    std::uint64_t seed_base = 20240901;
    Pick pick = Pick::first;
    /// Size runs keep only exceedances followed by movement at a
    /// tail-process rate of the fitted model (growth 1/psi_hat, or decline
    /// phi_hat in the mixed family); bursts and spikes are not tail-process
    /// times. Paths with no such time retain the null. 0 disables the
    /// screen.
    double growth_screen_tol = 0.10;
    TransformSpec transforms = TransformSpec::powers({1.0, 2.0});
    int H = 4;
    int threads = 0;  ///< 0 = hardware concurrency

    void validate() const;
};

struct McCell {
    std::string dist;
    double psi = 0;
    double phi = 0;
    std::string metric;  ///< "size" or "power"
    double value = 0;    ///< rejection frequency among evaluable replications
    int R = 0;
    int failures = 0;  ///< estimation failures + replications with no valid conditioning time
    bool identification_warning = false;  ///< degenerate grid point (no dynamics)
};

struct McTable {
    std::vector<McCell> cells;

    std::string to_csv() const;   ///< columns: dist,psi,phi,metric,value,R,failures
    std::string to_text() const;  ///< aligned per-distribution rows over the psi/phi grid
};

McTable run_size(const McConfig& cfg);
McTable run_power(const McConfig& cfg);

}  // namespace mar

#endif
