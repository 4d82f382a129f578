// Command-line front end: simulation, estimation, detection, duration and
// Monte Carlo subcommands over CSV/JSON files. Every run writes a manifest
// describing the exact configuration; output files reference it.

#include <CLI11.hpp>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "mar/cond_moments.hpp"
#include "mar/detector.hpp"
#include "mar/estimation.hpp"
#include "mar/model.hpp"
#include "mar/montecarlo.hpp"
#include "mar/numeric.hpp"
#include "mar/spline.hpp"
#include "mar/tail.hpp"
#include "mar/timeseries.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

std::uint64_t fnv1a64_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw mar::ParseError("cannot open file: " + path);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[4096];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
        if (!in) break;
    }
    return h;
}

std::string timestamp_utc() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

struct RunContext {
    std::string command;
    std::vector<std::string> argv_echo;
    fs::path out_dir = ".";
    std::string name = "run";
    std::uint64_t seed = 1;
    int threads = 0;
    std::string format = "csv";
    json inputs = json::object();
    std::vector<std::string> outputs;

    fs::path path(const std::string& suffix) const { return out_dir / (name + suffix); }
    std::string manifest_name() const { return name + ".manifest.json"; }

    void record_input(const std::string& file) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "fnv1a64:%016llx",
                      static_cast<unsigned long long>(fnv1a64_file(file)));
        inputs[file] = buf;
    }

    void write_file(const std::string& suffix, const std::string& content) {
        const fs::path p = path(suffix);
        std::ofstream out(p);
        if (!out) throw mar::ParseError("cannot write file: " + p.string());
        out << content;
        outputs.push_back(p.filename().string());
    }

    void write_manifest(const json& config) {
        json m;
        m["tool"] = "marbubble";
        m["version"] = kVersion;
        m["command"] = command;
        m["args"] = argv_echo;
        m["config"] = config;
        m["seed"] = seed;
        m["threads"] = threads;
        m["generator"] = mar::Rng::kGeneratorId;
        m["inputs"] = inputs;
        m["outputs"] = outputs;
        m["timestamp"] = timestamp_utc();
        std::ofstream out(out_dir / manifest_name());
        if (!out) throw mar::ParseError("cannot write manifest in " + out_dir.string());
        out << m.dump(2) << "\n";
    }
};

mar::TransformSpec parse_transforms(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos)
        throw mar::ValidationError("transforms: expected KIND:e1,e2,... got '" + text + "'");
    const std::string kind = text.substr(0, colon);
    std::vector<double> exps;
    std::stringstream ss(text.substr(colon + 1));
    std::string tok;
    while (std::getline(ss, tok, ',')) exps.push_back(std::stod(tok));
    if (kind == "powers") return mar::TransformSpec::powers(exps);
    if (kind == "logabs") return mar::TransformSpec::log_abs_powers(exps);
    throw mar::ValidationError("transforms: unknown kind '" + kind + "'");
}

std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
    return out;
}

mar::TimeSeries load_input(RunContext& ctx, const std::string& path, const std::string& date_col,
                           const std::string& value_col) {
    ctx.record_input(path);
    return mar::load_csv(path, date_col, value_col);
}

std::vector<double> centered(const std::vector<double>& y) {
    const double m = mar::mean(y);
    std::vector<double> out = y;
    for (double& v : out) v -= m;
    return out;
}

std::string detrend_csv(const mar::TimeSeries& ts, const mar::SplineDetrend& fit,
                        const std::string& manifest_ref) {
    std::ostringstream out;
    out << "# manifest: " << manifest_ref << "\n";
    out << "date,value,trend,residual\n";
    char buf[40];
    for (std::size_t i = 0; i < ts.size(); ++i) {
        out << ts.timestamps[i].to_string() << ',';
        std::snprintf(buf, sizeof(buf), "%.17g", ts.values[i]);
        out << buf << ',';
        std::snprintf(buf, sizeof(buf), "%.17g", fit.trend.values[i]);
        out << buf << ',';
        std::snprintf(buf, sizeof(buf), "%.17g", fit.residual.values[i]);
        out << buf << '\n';
    }
    return out.str();
}

int cmd_simulate(RunContext& ctx, const mar::MarModel& model, int T, int burn) {
    const mar::TimeSeries ts = mar::simulate(model, T, ctx.seed, burn);
    mar::save_csv(ts, ctx.path(".csv").string(), ctx.manifest_name());
    ctx.outputs.push_back(ctx.path(".csv").filename().string());
    ctx.write_file(".model.txt", mar::model_descriptor(model, ctx.seed, burn));
    json cfg;
    cfg["r"] = model.r;
    cfg["s"] = model.s;
    cfg["phi"] = model.phi;
    cfg["psi"] = model.psi;
    cfg["dist"] = model.dist.name();
    cfg["T"] = T;
    cfg["burn"] = burn;
    ctx.write_manifest(cfg);
    std::cout << "wrote " << ctx.path(".csv").string() << " (" << T << " rows)\n";
    return kExitOk;
}

int cmd_stats(RunContext& ctx, const std::string& input, const std::string& date_col,
              const std::string& value_col, bool monthly, int rolling_window) {
    mar::TimeSeries ts = load_input(ctx, input, date_col, value_col);
    if (monthly) ts = mar::resample_monthly_last(ts);
    const mar::SummaryStats st = mar::summary(ts);
    json j;
    j["n"] = st.n;
    j["mean"] = st.mean;
    j["min"] = st.min;
    j["max"] = st.max;
    j["sd"] = st.sd;
    if (std::isnan(st.skewness)) {
        j["skewness"] = nullptr;
        j["excess_kurtosis"] = nullptr;
    } else {
        j["skewness"] = st.skewness;
        j["excess_kurtosis"] = st.excess_kurtosis;
    }
    if (ctx.format == "json") {
        ctx.write_file(".stats.json", j.dump(2) + "\n");
    } else {
        std::ostringstream out;
        out << "# manifest: " << ctx.manifest_name() << "\n";
        out << "n,mean,min,max,sd,skewness,excess_kurtosis\n";
        char buf[200];
        std::snprintf(buf, sizeof(buf), "%zu,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g\n", st.n, st.mean,
                      st.min, st.max, st.sd, st.skewness, st.excess_kurtosis);
        out << buf;
        ctx.write_file(".stats.csv", out.str());
    }
    if (rolling_window > 0) {
        const mar::TimeSeries rv = mar::rolling_variance(ts, rolling_window);
        mar::save_csv(rv, ctx.path(".rollvar.csv").string(), ctx.manifest_name());
        ctx.outputs.push_back(ctx.path(".rollvar.csv").filename().string());
    }
    json cfg;
    cfg["input"] = input;
    cfg["monthly"] = monthly;
    cfg["rolling_window"] = rolling_window;
    ctx.write_manifest(cfg);
    std::cout << j.dump(2) << "\n";
    return kExitOk;
}

int cmd_detrend(RunContext& ctx, const std::string& input, const std::string& date_col,
                const std::string& value_col, bool monthly, int knot_months) {
    mar::TimeSeries ts = load_input(ctx, input, date_col, value_col);
    if (monthly) ts = mar::resample_monthly_last(ts);
    const mar::SplineDetrend fit = mar::spline_detrend(ts, knot_months);
    ctx.write_file(".detrend.csv", detrend_csv(ts, fit, ctx.manifest_name()));
    json cfg;
    cfg["input"] = input;
    cfg["monthly"] = monthly;
    cfg["knot_spacing_months"] = knot_months;
    cfg["knots"] = fit.knots.size();
    ctx.write_manifest(cfg);
    std::cout << "wrote " << ctx.path(".detrend.csv").string() << " (" << fit.knots.size()
              << " knots)\n";
    return kExitOk;
}

struct FitArgs {
    int r = 1, s = 1;
    std::string transforms = "powers:1,2";
    int H = 2;
    std::string estimator = "gcov";  // or "ols" for (0,1)
    bool detrend = false;
    int knot_months = 24;
    bool center = true;
    bool monthly = false;
};

mar::FittedMar fit_series(const std::vector<double>& y, const FitArgs& args, mar::GcovFit* out_fit) {
    if (args.estimator == "ols") {
        if (!(args.r == 0 && args.s == 1))
            throw mar::ValidationError("estimator ols applies to (r,s) = (0,1) only");
        return mar::FittedMar::from_ols(mar::ols_noncausal(y));
    }
    mar::GcovOptions opts;
    opts.transforms = parse_transforms(args.transforms);
    opts.H = args.H;
    const mar::GcovFit fit = mar::gcov_estimate(y, args.r, args.s, opts);
    if (out_fit) *out_fit = fit;
    return mar::FittedMar::from_gcov(fit);
}

std::vector<double> prepare_series(const mar::TimeSeries& ts, const FitArgs& args,
                                   mar::TimeSeries* out_ts) {
    mar::TimeSeries work = ts;
    if (args.monthly) work = mar::resample_monthly_last(work);
    if (args.detrend) {
        const mar::SplineDetrend fit = mar::spline_detrend(work, args.knot_months);
        work = fit.residual;
    }
    std::vector<double> y = work.values;
    if (args.center) y = centered(y);
    if (out_ts) {
        out_ts->timestamps = work.timestamps;
        out_ts->values = y;
        out_ts->label = work.label;
    }
    return y;
}

int cmd_estimate(RunContext& ctx, const std::string& input, const std::string& date_col,
                 const std::string& value_col, const FitArgs& args) {
    const mar::TimeSeries ts = load_input(ctx, input, date_col, value_col);
    const std::vector<double> y = prepare_series(ts, args, nullptr);
    json cfg;
    cfg["input"] = input;
    cfg["r"] = args.r;
    cfg["s"] = args.s;
    cfg["estimator"] = args.estimator;
    cfg["transforms"] = args.transforms;
    cfg["H"] = args.H;
    cfg["detrend"] = args.detrend;
    cfg["center"] = args.center;
    if (args.estimator == "ols") {
        const mar::OlsFit fit = mar::ols_noncausal(y);
        json j;
        j["theta"] = {fit.psi_hat};
        j["stderr"] = {fit.stderr_};
        j["omega"] = {{fit.omega}};
        j["objective"] = nullptr;
        j["test"] = nullptr;
        j["config"] = {{"estimator", "ols"}};
        ctx.write_file(".fit.json", j.dump(2) + "\n");
        ctx.write_manifest(cfg);
        std::cout << j.dump(2) << "\n";
        return kExitOk;
    }
    mar::GcovFit fit;
    fit_series(y, args, &fit);
    const std::string report = mar::fit_report_json(fit);
    ctx.write_file(".fit.json", report + "\n");
    ctx.write_manifest(cfg);
    std::cout << report << "\n";
    return kExitOk;
}

int cmd_detect(RunContext& ctx, const std::string& input, const std::string& date_col,
               const std::string& value_col, const FitArgs& args,
               const mar::DetectionOptions& opts) {
    const mar::TimeSeries raw = load_input(ctx, input, date_col, value_col);
    mar::TimeSeries work;
    const std::vector<double> y = prepare_series(raw, args, &work);
    const mar::FittedMar fitted = fit_series(y, args, nullptr);
    const mar::DetectionReport report = mar::detection_report(y, fitted, opts);
    ctx.write_file(".detect.json", mar::detection_report_json(report, work.timestamps) + "\n");
    {
        std::string csv = "# manifest: " + ctx.manifest_name() + "\n";
        csv += mar::detection_report_csv(report, work);
        ctx.write_file(".detect.csv", csv);
    }
    json cfg;
    cfg["input"] = input;
    cfg["r"] = args.r;
    cfg["s"] = args.s;
    cfg["estimator"] = args.estimator;
    cfg["transforms"] = args.transforms;
    cfg["H"] = args.H;
    cfg["detrend"] = args.detrend;
    cfg["threshold_q"] = opts.threshold_q;
    cfg["min_run"] = opts.min_run;
    ctx.write_manifest(cfg);
    std::cout << "episodes: " << report.episodes.size() << "\n";
    for (const auto& e : report.episodes) {
        std::cout << "  " << work.timestamps[static_cast<std::size_t>(e.start)].to_string()
                  << " .. " << work.timestamps[static_cast<std::size_t>(e.end)].to_string()
                  << " (peak " << work.timestamps[static_cast<std::size_t>(e.peak)].to_string()
                  << ")\n";
    }
    if (report.forward_prob)
        std::cout << "forward conditional probability: " << *report.forward_prob << "\n";
    return kExitOk;
}

int cmd_duration(RunContext& ctx, double phi, double psi, double alpha, double gamma,
                 const std::vector<int>& horizons) {
    mar::MarModel model;
    if (phi != 0 && psi != 0)
        model = mar::MarModel::mar11(phi, psi, mar::ErrorDist::student_t(3));
    else if (psi != 0)
        model = mar::MarModel::mar01(psi, mar::ErrorDist::student_t(3));
    else if (phi != 0)
        model = mar::MarModel::mar10(phi, mar::ErrorDist::student_t(3));
    else
        throw mar::ValidationError("duration: need phi and/or psi nonzero");
    const mar::DurationReport report = mar::time_to_peak_report(model, alpha, horizons, gamma);
    const std::string out = mar::duration_report_json(report);
    ctx.write_file(".duration.json", out + "\n");
    json cfg;
    cfg["phi"] = phi;
    cfg["psi"] = psi;
    cfg["alpha"] = alpha;
    cfg["gamma"] = gamma;
    ctx.write_manifest(cfg);
    std::cout << out << "\n";
    return kExitOk;
}

int cmd_moments(RunContext& ctx, double phi, double psi, double sigma, double yt, double ytm1) {
    const mar::ConditionalState state{yt, ytm1, sigma};
    const mar::CondCovDivergence div = mar::cond_cov_divergence(state, phi, psi);
    const mar::ConditionalBlocks blocks = mar::cond_building_blocks(state, phi, psi);
    json j;
    j["printed"] = div.printed;
    j["composed"] = div.composed;
    j["abs_diff"] = div.abs_diff;
    j["diverges"] = div.diverges;
    j["E_y_next"] = blocks.e_y_next;
    j["E_y_next_sq"] = blocks.e_y_next_sq;
    ctx.write_file(".moments.json", j.dump(2) + "\n");
    json cfg;
    cfg["phi"] = phi;
    cfg["psi"] = psi;
    cfg["sigma"] = sigma;
    cfg["y_t"] = yt;
    cfg["y_prev"] = ytm1;
    ctx.write_manifest(cfg);
    std::cout << j.dump(2) << "\n";
    return kExitOk;
}

int cmd_mc(RunContext& ctx, mar::McConfig cfg, const std::string& metric) {
    cfg.seed_base = ctx.seed;
    cfg.threads = ctx.threads;
    mar::McTable table;
    if (metric == "size") {
        table = mar::run_size(cfg);
    } else if (metric == "power") {
        table = mar::run_power(cfg);
    } else {
        table = mar::run_size(cfg);
        const mar::McTable power = mar::run_power(cfg);
        table.cells.insert(table.cells.end(), power.cells.begin(), power.cells.end());
    }
    {
        std::string csv = "# manifest: " + ctx.manifest_name() + "\n";
        csv += table.to_csv();
        ctx.write_file(".mc.csv", csv);
    }
    ctx.write_file(".mc.txt", table.to_text());
    json mcfg;
    mcfg["family"] = cfg.family == mar::McConfig::Family::mar01_ols ? "mar01_ols" : "mar11_gcov";
    mcfg["metric"] = metric;
    mcfg["R"] = cfg.R;
    mcfg["T"] = cfg.T;
    ctx.write_manifest(mcfg);
    std::cout << table.to_text();
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mixed causal-noncausal bubble toolkit"};
    app.set_version_flag("--version", std::string("marbubble ") + kVersion);
    app.require_subcommand(1);
    app.fallthrough();

    RunContext ctx;
    for (int i = 0; i < argc; ++i) ctx.argv_echo.emplace_back(argv[i]);
    std::string out_dir = ".";
    app.add_option("--seed", ctx.seed, "base random seed");
    app.add_option("--threads", ctx.threads, "worker cap (0 = hardware)");
    app.add_option("--out-dir", out_dir, "output directory");
    app.add_option("--name", ctx.name, "output file stem");
    app.add_option("--format", ctx.format, "tabular output format")
        ->check(CLI::IsMember({"csv", "json"}));

    // simulate
    auto* sim = app.add_subcommand("simulate", "simulate a MAR path");
    int sim_r = 1, sim_s = 1, sim_T = 400, sim_burn = 200;
    double sim_phi = 0.3, sim_psi = 0.9;
    std::string sim_dist = "t3";
    sim->add_option("--r", sim_r, "causal order (0 or 1)");
    sim->add_option("--s", sim_s, "noncausal order (0 or 1)");
    sim->add_option("--phi", sim_phi, "causal coefficient");
    sim->add_option("--psi", sim_psi, "noncausal coefficient");
    sim->add_option("--dist", sim_dist, "error law (tNU or cauchySCALE)");
    sim->add_option("--T", sim_T, "path length");
    sim->add_option("--burn", sim_burn, "discarded observations per end");

    // estimate / detect share fit flags
    FitArgs fit_args;
    std::string input, date_col = "date", value_col = "value";
    auto add_fit_flags = [&](CLI::App* cmd) {
        cmd->add_option("--input", input, "input CSV")->required();
        cmd->add_option("--date-col", date_col, "date column name");
        cmd->add_option("--value-col", value_col, "value column name");
        cmd->add_option("--r", fit_args.r, "causal order");
        cmd->add_option("--s", fit_args.s, "noncausal order");
        cmd->add_option("--transforms", fit_args.transforms, "KIND:e1,e2,... (powers|logabs)");
        cmd->add_option("--H", fit_args.H, "autocovariance lag depth");
        cmd->add_option("--estimator", fit_args.estimator, "gcov or ols")
            ->check(CLI::IsMember({"gcov", "ols"}));
        cmd->add_flag("--monthly", fit_args.monthly, "resample to monthly (last day) first");
        cmd->add_flag("--detrend", fit_args.detrend, "spline-detrend before fitting");
        cmd->add_option("--knot-months", fit_args.knot_months, "knot spacing (months)");
        cmd->add_flag("!--no-center", fit_args.center, "skip mean-centering");
    };
    auto* est = app.add_subcommand("estimate", "fit a MAR model");
    add_fit_flags(est);

    auto* det = app.add_subcommand("detect", "fit, test and date bubble episodes");
    add_fit_flags(det);
    mar::DetectionOptions det_opts;
    det->add_option("--threshold", det_opts.threshold_q, "exceedance quantile");
    det->add_option("--min-run", det_opts.min_run, "minimum non-rejected run length");

    // duration
    auto* dur = app.add_subcommand("duration", "time-to-peak and duration report");
    double dur_phi = 0, dur_psi = 0, dur_alpha = 1.0, dur_gamma = 0.10;
    std::string dur_horizons = "1,2,3,4,5,6";
    dur->add_option("--phi", dur_phi, "causal coefficient");
    dur->add_option("--psi", dur_psi, "noncausal coefficient");
    dur->add_option("--alpha", dur_alpha, "tail index")->required();
    dur->add_option("--gamma", dur_gamma, "two-sided interval level");
    dur->add_option("--horizons", dur_horizons, "comma list of months");

    // moments
    auto* mom = app.add_subcommand("moments", "conditional latent-component moments");
    double mom_phi = 0.3, mom_psi = 0.9, mom_sigma = 1.0, mom_yt = 0.0, mom_ytm1 = 0.0;
    mom->add_option("--phi", mom_phi, "causal coefficient");
    mom->add_option("--psi", mom_psi, "noncausal coefficient");
    mom->add_option("--sigma", mom_sigma, "error scale");
    mom->add_option("--yt", mom_yt, "conditioning y_t");
    mom->add_option("--ytm1", mom_ytm1, "conditioning y_{t-1}");

    // mc
    auto* mc = app.add_subcommand("mc", "size/power Monte Carlo tables");
    mar::McConfig mc_cfg;
    std::string mc_family = "mar01_ols", mc_metric = "both", mc_dists = "t3,t4,t5";
    std::string mc_psis = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9", mc_phis = "";
    std::string mc_pick = "first", mc_transforms = "powers:1,2";
    mc->add_option("--family", mc_family, "mar01_ols or mar11_gcov")
        ->check(CLI::IsMember({"mar01_ols", "mar11_gcov"}));
    mc->add_option("--metric", mc_metric, "size, power or both")
        ->check(CLI::IsMember({"size", "power", "both"}));
    mc->add_option("--dists", mc_dists, "comma list of error laws");
    mc->add_option("--psis", mc_psis, "comma list of psi values");
    mc->add_option("--phis", mc_phis, "comma list of phi values (mixed family)");
    mc->add_option("--R", mc_cfg.R, "replications per cell");
    mc->add_option("--T", mc_cfg.T, "path length");
    mc->add_option("--burn", mc_cfg.burn, "discarded observations per end");
    mc->add_option("--pick", mc_pick, "exceedance choice: first, last or max")
        ->check(CLI::IsMember({"first", "last", "max"}));
    mc->add_option("--transforms", mc_transforms, "GCov transforms (mixed family)");
    mc->add_option("--H", mc_cfg.H, "GCov lag depth");
    mc->add_option("--growth-tol", mc_cfg.growth_screen_tol,
                   "growth-rate screen tolerance for pure-noncausal size runs");

    // detrend / stats
    auto* dtr = app.add_subcommand("detrend", "spline detrend to date,value,trend,residual");
    std::string dtr_input;
    int dtr_knots = 24;
    bool dtr_monthly = false;
    dtr->add_option("--input", dtr_input, "input CSV")->required();
    dtr->add_option("--date-col", date_col, "date column name");
    dtr->add_option("--value-col", value_col, "value column name");
    dtr->add_option("--knot-months", dtr_knots, "knot spacing (months)");
    dtr->add_flag("--monthly", dtr_monthly, "resample to monthly (last day) first");

    auto* sts = app.add_subcommand("stats", "summary statistics (and rolling variance)");
    std::string sts_input;
    bool sts_monthly = false;
    int sts_rolling = 0;
    sts->add_option("--input", sts_input, "input CSV")->required();
    sts->add_option("--date-col", date_col, "date column name");
    sts->add_option("--value-col", value_col, "value column name");
    sts->add_flag("--monthly", sts_monthly, "resample to monthly (last day) first");
    sts->add_option("--rolling", sts_rolling, "also write rolling variance with this window");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
        ctx.out_dir = out_dir;
        fs::create_directories(ctx.out_dir);
        if (sim->parsed()) {
            ctx.command = "simulate";
            mar::MarModel model;
            model.r = sim_r;
            model.s = sim_s;
            model.phi = sim_r == 1 ? sim_phi : 0.0;
            model.psi = sim_s == 1 ? sim_psi : 0.0;
            model.dist = mar::ErrorDist::from_name(sim_dist);
            mar::validate(model);
            return cmd_simulate(ctx, model, sim_T, sim_burn);
        }
        if (est->parsed()) {
            ctx.command = "estimate";
            return cmd_estimate(ctx, input, date_col, value_col, fit_args);
        }
        if (det->parsed()) {
            ctx.command = "detect";
            return cmd_detect(ctx, input, date_col, value_col, fit_args, det_opts);
        }
        if (dur->parsed()) {
            ctx.command = "duration";
            std::vector<int> horizons;
            for (double v : parse_grid(dur_horizons)) horizons.push_back(static_cast<int>(v));
            return cmd_duration(ctx, dur_phi, dur_psi, dur_alpha, dur_gamma, horizons);
        }
        if (mom->parsed()) {
            ctx.command = "moments";
            return cmd_moments(ctx, mom_phi, mom_psi, mom_sigma, mom_yt, mom_ytm1);
        }
        if (mc->parsed()) {
            ctx.command = "mc";
            mc_cfg.family = mc_family == "mar01_ols" ? mar::McConfig::Family::mar01_ols
                                                     : mar::McConfig::Family::mar11_gcov;
            mc_cfg.dists.clear();
            std::stringstream ss(mc_dists);
            std::string tok;
            while (std::getline(ss, tok, ',')) mc_cfg.dists.push_back(mar::ErrorDist::from_name(tok));
            mc_cfg.psi_grid = parse_grid(mc_psis);
            mc_cfg.phi_grid = mc_phis.empty() ? std::vector<double>{} : parse_grid(mc_phis);
            mc_cfg.pick = mc_pick == "first" ? mar::McConfig::Pick::first
                          : mc_pick == "last" ? mar::McConfig::Pick::last
                                              : mar::McConfig::Pick::max;
            mc_cfg.transforms = parse_transforms(mc_transforms);
            return cmd_mc(ctx, mc_cfg, mc_metric);
        }
        if (dtr->parsed()) {
            ctx.command = "detrend";
            return cmd_detrend(ctx, dtr_input, date_col, value_col, dtr_monthly, dtr_knots);
        }
        if (sts->parsed()) {
            ctx.command = "stats";
            return cmd_stats(ctx, sts_input, date_col, value_col, sts_monthly, sts_rolling);
        }
    } catch (const mar::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const mar::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const mar::NumericalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitValidation;
}
