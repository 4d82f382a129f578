#include "mar/rng.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mar {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t state = seed ^ (stream * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL);
    std::seed_seq seq{
        static_cast<std::uint32_t>(splitmix64(state)), static_cast<std::uint32_t>(splitmix64(state)),
        static_cast<std::uint32_t>(splitmix64(state)), static_cast<std::uint32_t>(splitmix64(state)),
        static_cast<std::uint32_t>(splitmix64(state)), static_cast<std::uint32_t>(splitmix64(state)),
        static_cast<std::uint32_t>(splitmix64(state)), static_cast<std::uint32_t>(splitmix64(state))};
    engine_.seed(seq);
}

std::uint64_t Rng::substream_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t state = seed ^ (stream * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL);
    return splitmix64(state);
}

double Rng::uniform() {
    // 53-bit mantissa shifted to the open interval (0,1).
    const std::uint64_t bits = engine_() >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double Rng::normal() {
    if (have_cached_normal_) {
        have_cached_normal_ = false;
        return cached_normal_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    cached_normal_ = r * std::sin(theta);
    have_cached_normal_ = true;
    return r * std::cos(theta);
}

double Rng::student_t(double nu) {
    if (!(nu > 0)) throw std::invalid_argument("student_t: degrees of freedom must be positive");
    boost::math::students_t dist(nu);
    return boost::math::quantile(dist, uniform());
}

double Rng::cauchy(double scale) {
    if (!(scale > 0)) throw std::invalid_argument("cauchy: scale must be positive");
    return scale * std::tan(std::numbers::pi * (uniform() - 0.5));
}

}  // namespace mar
