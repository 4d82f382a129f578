#include "mar/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "mar/detector.hpp"
#include "mar/numeric.hpp"
#include "mar/parallel.hpp"
#include "mar/rng.hpp"

namespace mar {

namespace {

constexpr double kCritical = 1.96;

enum class RepOutcome { rejected, accepted, failed };

struct CellSpec {
    MarModel model;
    int cell_index = 0;
};

/// Conditioning times for a size run: exceedances of the empirical
/// size_quantile with room for the h=0 statistic, screened for movement at
/// a tail-process rate of the FITTED model (growth 1/psi_hat, or the
/// post-peak decline phi_hat in the mixed family). Peaks and spikes are not
/// tail-process times, so unscreened exceedances would rejectH0 regardless
/// of the test's quality.
std::vector<int> size_candidates(const std::vector<double>& y, const McConfig& cfg,
                                 const FittedMar& fit) {
    const int n = static_cast<int>(y.size());
    const double q = empirical_quantile(y, cfg.size_quantile);
    const double guard = 1e-6 * std::sqrt(sample_variance(y));
    std::vector<int> out;
    for (int t = 0; t + 1 < n; ++t) {
        if (!(y[static_cast<std::size_t>(t)] > q)) continue;
        if (std::abs(y[static_cast<std::size_t>(t)]) < guard) continue;
        if (cfg.growth_screen_tol > 0) {
            const double ratio =
                y[static_cast<std::size_t>(t + 1)] / y[static_cast<std::size_t>(t)];
            bool tail_like = false;
            if (fit.psi != 0) {
                const double rate = 1.0 / fit.psi;
                tail_like = std::abs(ratio - rate) <= cfg.growth_screen_tol * std::abs(rate);
            }
            if (!tail_like && fit.phi > 0)
                tail_like = std::abs(ratio - fit.phi) <= cfg.growth_screen_tol * fit.phi;
            if (!tail_like) continue;
        }
        out.push_back(t);
    }
    return out;
}

int pick_time(const std::vector<int>& candidates, const std::vector<double>& y,
              McConfig::Pick pick) {
    if (candidates.empty()) return -1;
    switch (pick) {
        case McConfig::Pick::first: return candidates.front();
        case McConfig::Pick::last: return candidates.back();
        case McConfig::Pick::max: {
            int best = candidates.front();
            for (int t : candidates)
                if (y[static_cast<std::size_t>(t)] > y[static_cast<std::size_t>(best)]) best = t;
            return best;
        }
    }
    return candidates.front();
}

/// Conditioning time for a power run: the observation at the power_quantile
/// order statistic, walked toward the median until the moderate-next-move
/// screen holds (next value at or below the size quantile, y_t nonzero).
int power_time(const std::vector<double>& y, const McConfig& cfg) {
    const int n = static_cast<int>(y.size());
    const double q_hi = empirical_quantile(y, cfg.size_quantile);
    const double guard = 1e-6 * std::sqrt(sample_variance(y));

    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return y[static_cast<std::size_t>(a)] < y[static_cast<std::size_t>(b)];
    });
    int rank = static_cast<int>(std::ceil(cfg.power_quantile * n)) - 1;
    rank = std::clamp(rank, 0, n - 1);
    for (int k = rank; k >= 0; --k) {
        const int t = order[static_cast<std::size_t>(k)];
        if (t + 1 >= n) continue;
        if (std::abs(y[static_cast<std::size_t>(t)]) < guard) continue;
        if (y[static_cast<std::size_t>(t + 1)] > q_hi) continue;
        return t;
    }
    return -1;
}

RepOutcome run_replication(const McConfig& cfg, const CellSpec& cell, int rep, bool size_run) {
    const std::uint64_t seed =
        Rng::substream_seed(cfg.seed_base, static_cast<std::uint64_t>(cell.cell_index) * 0x100000ULL +
                                               static_cast<std::uint64_t>(rep));
    const TimeSeries sim = simulate(cell.model, cfg.T, seed, cfg.burn);
    const std::vector<double>& y = sim.values;

    FittedMar fit;
    try {
        if (cfg.family == McConfig::Family::mar01_ols) {
            fit = FittedMar::from_ols(ols_noncausal(y));
        } else {
            GcovOptions opts;
            opts.transforms = cfg.transforms;
            opts.H = cfg.H;
            fit = FittedMar::from_gcov(gcov_estimate(y, 1, 1, opts));
        }
    } catch (const std::exception&) {
        return RepOutcome::failed;
    }

    int t = -1;
    if (size_run) {
        t = pick_time(size_candidates(y, cfg, fit), y, cfg.pick);
        // A path without a single tail-rate exceedance offers no bubble
        // evidence: the null is retained, not excluded.
        if (t < 0) return RepOutcome::accepted;
    } else {
        t = power_time(y, cfg);
        if (t < 0) return RepOutcome::failed;
    }

    const XiPoint p = xi_point(y, fit, t, 0);
    if (p.excluded) return RepOutcome::failed;
    return p.rejected ? RepOutcome::rejected : RepOutcome::accepted;
}

McTable run_metric(const McConfig& cfg, bool size_run) {
    cfg.validate();
    McTable table;
    std::vector<CellSpec> cells;
    const std::vector<double> phis =
        cfg.family == McConfig::Family::mar01_ols ? std::vector<double>{0.0} : cfg.phi_grid;
    int index = size_run ? 0 : 1000000;  // separate substreams for size and power
    for (const auto& dist : cfg.dists) {
        for (double phi : phis) {
            for (double psi : cfg.psi_grid) {
                CellSpec spec;
                spec.model = cfg.family == McConfig::Family::mar01_ols
                                 ? MarModel::mar01(psi, dist)
                                 : MarModel::mar11(phi, psi, dist);
                spec.cell_index = index++;
                cells.push_back(spec);
            }
        }
    }

    for (const auto& cell : cells) {
        std::vector<RepOutcome> outcomes(static_cast<std::size_t>(cfg.R));
        parallel_for(cfg.R, cfg.threads, [&](int rep) {
            outcomes[static_cast<std::size_t>(rep)] = run_replication(cfg, cell, rep, size_run);
        });
        int rejected = 0, failed = 0;
        for (const RepOutcome o : outcomes) {
            if (o == RepOutcome::failed)
                ++failed;
            else if (o == RepOutcome::rejected)
                ++rejected;
        }
        McCell out;
        out.dist = cell.model.dist.name();
        out.psi = cell.model.psi;
        out.phi = cell.model.phi;
        out.metric = size_run ? "size" : "power";
        const int evaluable = cfg.R - failed;
        out.value = evaluable > 0 ? static_cast<double>(rejected) / evaluable : 0.0;
        out.R = cfg.R;
        out.failures = failed;
        out.identification_warning = cell.model.psi == 0.0 && cell.model.phi == 0.0;
        if (cfg.family == McConfig::Family::mar01_ols && cell.model.psi == 0.0)
            out.identification_warning = true;
        table.cells.push_back(out);
    }
    return table;
}

}  // namespace

void McConfig::validate() const {
    if (R < 1) throw ValidationError("mc: R must be >= 1");
    if (T < 30) throw ValidationError("mc: T too small");
    if (dists.empty() || psi_grid.empty()) throw ValidationError("mc: empty grid");
    if (family == Family::mar11_gcov && phi_grid.empty())
        throw ValidationError("mc: mixed family needs a phi grid");
    if (!(size_quantile > 0 && size_quantile < 1) || !(power_quantile > 0 && power_quantile < 1))
        throw ValidationError("mc: quantile levels must be in (0,1)");
    for (double psi : psi_grid)
        if (!(std::abs(psi) < 1)) throw ValidationError("mc: |psi| must be < 1");
    for (double phi : phi_grid)
        if (!(std::abs(phi) < 1)) throw ValidationError("mc: |phi| must be < 1");
}

McTable run_size(const McConfig& cfg) { return run_metric(cfg, true); }
McTable run_power(const McConfig& cfg) { return run_metric(cfg, false); }

std::string McTable::to_csv() const {
    std::ostringstream out;
    out << "dist,psi,phi,metric,value,R,failures\n";
    char buf[64];
    for (const auto& c : cells) {
        std::snprintf(buf, sizeof(buf), "%s,%g,%g,%s,%.6f,%d,%d", c.dist.c_str(), c.psi, c.phi,
                      c.metric.c_str(), c.value, c.R, c.failures);
        out << buf << '\n';
    }
    return out.str();
}

std::string McTable::to_text() const {
    // One block per (metric, phi), rows by distribution, columns by psi.
    std::ostringstream out;
    std::map<std::pair<std::string, double>, std::map<std::string, std::map<double, const McCell*>>>
        blocks;
    std::vector<double> psis;
    for (const auto& c : cells) {
        blocks[{c.metric, c.phi}][c.dist][c.psi] = &c;
        if (std::find(psis.begin(), psis.end(), c.psi) == psis.end()) psis.push_back(c.psi);
    }
    std::sort(psis.begin(), psis.end());
    char buf[64];
    for (const auto& [key, rows] : blocks) {
        out << key.first;
        if (key.second != 0) {
            std::snprintf(buf, sizeof(buf), " (phi = %g)", key.second);
            out << buf;
        }
        out << "\n" << std::left;
        out << "  dist    ";
        for (double p : psis) {
            std::snprintf(buf, sizeof(buf), "psi=%-5g ", p);
            out << buf;
        }
        out << '\n';
        for (const auto& [dist, by_psi] : rows) {
            std::snprintf(buf, sizeof(buf), "  %-7s ", dist.c_str());
            out << buf;
            for (double p : psis) {
                const auto it = by_psi.find(p);
                if (it == by_psi.end()) {
                    out << "         ";
                    continue;
                }
                std::snprintf(buf, sizeof(buf), "%.3f%s   ", it->second->value,
                              it->second->identification_warning ? "!" : " ");
                out << buf;
            }
            out << '\n';
        }
    }
    return out.str();
}

}  // namespace mar
