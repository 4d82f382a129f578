#include "mar/model.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace mar {

double ErrorDist::draw(Rng& rng) const {
    return kind == Kind::cauchy ? rng.cauchy(param) : rng.student_t(param);
}

std::string ErrorDist::name() const {
    char buf[32];
    if (kind == Kind::cauchy) {
        std::snprintf(buf, sizeof(buf), "cauchy%g", param);
    } else {
        std::snprintf(buf, sizeof(buf), "t%g", param);
    }
    return buf;
}

ErrorDist ErrorDist::from_name(const std::string& s) {
    if (s.rfind("cauchy", 0) == 0) {
        const std::string rest = s.substr(6);
        return cauchy(rest.empty() ? 1.0 : std::stod(rest));
    }
    if (s.rfind('t', 0) == 0 && s.size() > 1) return student_t(std::stod(s.substr(1)));
    throw ValidationError("unknown error distribution: '" + s + "' (expected tNU or cauchySCALE)");
}

MarModel validate(const MarModel& model) {
    if (!(model.dist.param > 0)) throw ValidationError("error distribution parameter must be positive");
    if (model.ar2) {
        const auto [l1, l2] = *model.ar2;
        if (l1 == l2) throw ValidationError("ar2: root reciprocals must be distinct");
        const bool causal = std::abs(l1) < 1.0 && std::abs(l2) < 1.0;
        const bool noncausal = std::abs(l1) > 1.0 && std::abs(l2) > 1.0;
        if (!causal && !noncausal)
            throw ValidationError(
                "ar2: unsupported case (mixed-modulus or unit-modulus root reciprocals)");
        return model;
    }
    if (model.r < 0 || model.r > 1 || model.s < 0 || model.s > 1)
        throw ValidationError("orders r, s must be 0 or 1");
    if (model.r == 1 && !(std::abs(model.phi) < 1.0))
        throw ValidationError("stationarity violation: |phi| must be < 1");
    if (model.s == 1 && !(std::abs(model.psi) < 1.0))
        throw ValidationError("stationarity violation: |psi| must be < 1");
    if (model.r == 0 && model.phi != 0.0)
        throw ValidationError("phi given but causal order r = 0");
    if (model.s == 0 && model.psi != 0.0)
        throw ValidationError("psi given but noncausal order s = 0");
    return model;
}

std::vector<double> simulate_with_errors(const MarModel& model, const std::vector<double>& eps,
                                         int burn) {
    validate(model);
    if (model.ar2) throw ValidationError("simulate: ar2 models are coefficient-only");
    if (burn < 0) throw ValidationError("simulate: burn must be >= 0");
    const int total = static_cast<int>(eps.size());
    const int T = total - 2 * burn;
    if (T < 1) throw ValidationError("simulate: error sequence shorter than 2*burn + 1");

    // Forward causal filter, then backward noncausal recursion.
    std::vector<double> v(static_cast<std::size_t>(total));
    double prev = 0.0;
    for (int t = 0; t < total; ++t) {
        prev = model.phi * prev + eps[static_cast<std::size_t>(t)];
        v[static_cast<std::size_t>(t)] = prev;
    }
    std::vector<double> y(static_cast<std::size_t>(total));
    double next = 0.0;
    for (int t = total - 1; t >= 0; --t) {
        next = v[static_cast<std::size_t>(t)] + model.psi * next;
        y[static_cast<std::size_t>(t)] = next;
    }
    return {y.begin() + burn, y.begin() + burn + T};
}

TimeSeries simulate(const MarModel& model, int T, std::uint64_t seed, int burn) {
    if (T < 1) throw ValidationError("simulate: T must be >= 1");
    validate(model);
    Rng rng(seed);
    std::vector<double> eps(static_cast<std::size_t>(T + 2 * burn));
    for (auto& e : eps) e = model.dist.draw(rng);
    TimeSeries ts;
    ts.values = simulate_with_errors(model, eps, burn);
    ts.timestamps.reserve(static_cast<std::size_t>(T));
    const Date start{2000, 1, 31};
    for (int t = 0; t < T; ++t) {
        Date d = start.add_months(t);
        d.day = Date::days_in_month(d.year, d.month);
        ts.timestamps.push_back(d);
    }
    ts.label = "simulated " + std::to_string(model.r) + "," + std::to_string(model.s);
    return ts;
}

LatentComponents latent_components(const std::vector<double>& y, double phi, double psi) {
    if (y.size() < 3) throw ValidationError("latent_components: need length >= 3");
    if (phi * psi == 1.0) throw ValidationError("latent_components: phi*psi = 1 is degenerate");
    const std::size_t n = y.size();
    LatentComponents lc;
    lc.u.assign(n, std::nan(""));
    lc.v.assign(n, std::nan(""));
    for (std::size_t t = 1; t < n; ++t) lc.u[t] = y[t] - phi * y[t - 1];
    for (std::size_t t = 0; t + 1 < n; ++t) lc.v[t] = y[t] - psi * y[t + 1];
    return lc;
}

std::vector<double> ma_coefficients(const MarModel& model, int h_min, int h_max) {
    validate(model);
    if (h_min > h_max) throw ValidationError("ma_coefficients: h_min > h_max");
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(h_max - h_min + 1));

    if (model.ar2) {
        const auto [l1, l2] = *model.ar2;
        const bool causal = std::abs(l1) < 1.0;
        for (int h = h_min; h <= h_max; ++h) {
            double c = 0.0;
            if (causal) {
                if (h >= 0)
                    c = (std::pow(l2, h) + std::pow(l1, h)) / (l1 + l2);
            } else {
                if (h <= 0)
                    c = (std::pow(l2, h + 1) - std::pow(l1, h + 1)) / (l1 - l2);
            }
            out.push_back(c);
        }
        return out;
    }

    const double norm = 1.0 / (1.0 - model.phi * model.psi);
    for (int h = h_min; h <= h_max; ++h) {
        double c = 0.0;
        if (model.r == 1 && model.s == 1) {
            c = (h >= 0 ? std::pow(model.phi, h) : std::pow(model.psi, -h)) * norm;
        } else if (model.s == 1) {
            c = h <= 0 ? std::pow(model.psi, -h) : 0.0;
        } else if (model.r == 1) {
            c = h >= 0 ? std::pow(model.phi, h) : 0.0;
        } else {
            c = h == 0 ? 1.0 : 0.0;
        }
        out.push_back(c);
    }
    return out;
}

std::vector<double> ar_representation(const MarModel& model) {
    validate(model);
    if (model.ar2) throw ValidationError("ar_representation: ar2 models are coefficient-only");
    if (model.s == 1 && model.psi == 0.0)
        throw ValidationError("ar_representation: psi = 0 with s = 1 is degenerate");
    if (model.r == 1 && model.s == 1)
        return {model.phi + 1.0 / model.psi, -model.phi / model.psi};
    if (model.s == 1) return {1.0 / model.psi};
    if (model.r == 1) return {model.phi};
    return {};
}

std::string model_descriptor(const MarModel& model, std::uint64_t seed, int burn) {
    std::ostringstream out;
    char buf[40];
    out << "r = " << model.r << "\n";
    out << "s = " << model.s << "\n";
    std::snprintf(buf, sizeof(buf), "%.17g", model.phi);
    out << "phi = " << buf << "\n";
    std::snprintf(buf, sizeof(buf), "%.17g", model.psi);
    out << "psi = " << buf << "\n";
    out << "dist.kind = " << (model.dist.kind == ErrorDist::Kind::cauchy ? "cauchy" : "student_t")
        << "\n";
    std::snprintf(buf, sizeof(buf), "%.17g", model.dist.param);
    out << "dist.param = " << buf << "\n";
    out << "seed = " << seed << "\n";
    out << "burn = " << burn << "\n";
    return out.str();
}

ModelSpec parse_model_descriptor(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    ModelSpec spec;
    bool saw_r = false, saw_s = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError("model descriptor: missing '=' in: " + line);
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key == "r") {
            spec.model.r = std::stoi(val);
            saw_r = true;
        } else if (key == "s") {
            spec.model.s = std::stoi(val);
            saw_s = true;
        } else if (key == "phi") {
            spec.model.phi = std::stod(val);
        } else if (key == "psi") {
            spec.model.psi = std::stod(val);
        } else if (key == "dist.kind") {
            if (val == "cauchy")
                spec.model.dist.kind = ErrorDist::Kind::cauchy;
            else if (val == "student_t")
                spec.model.dist.kind = ErrorDist::Kind::student_t;
            else
                throw ParseError("model descriptor: unknown dist.kind '" + val + "'");
        } else if (key == "dist.param") {
            spec.model.dist.param = std::stod(val);
        } else if (key == "seed") {
            spec.seed = std::stoull(val);
        } else if (key == "burn") {
            spec.burn = std::stoi(val);
        } else {
            throw ParseError("model descriptor: unknown key '" + key + "'");
        }
    }
    if (!saw_r || !saw_s) throw ParseError("model descriptor: r and s are required");
    validate(spec.model);
    return spec;
}

}  // namespace mar
