#ifndef MAR_RNG_HPP
#define MAR_RNG_HPP

#include <cstdint>
#include <random>
#include <string>

namespace mar {

/// Deterministic random stream with splittable substreams.
///
/// Generator id: "mt19937_64/splitmix64-keyed, v1". The engine is the
/// standard-specified mt19937_64 seeded from four splitmix64 words of
/// (seed, stream), so sequences are reproducible across platforms and
/// standard library implementations. Substreams with distinct `stream`
/// values are statistically independent for practical purposes.
///
/// Variates avoid std::*_distribution (whose algorithms are
/// implementation-defined): uniforms come from the top 53 bits of the raw
/// engine output, Student-t uses quantile inversion, Cauchy uses tangent
/// inversion, and the normal uses Box-Muller.
class Rng {
  public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

    static constexpr const char* kGeneratorId = "mt19937_64/splitmix64-keyed, v1";

    /// Uniform on the open interval (0, 1); never returns an endpoint.
    double uniform();

    double normal();
    double student_t(double nu);
    double cauchy(double scale = 1.0);

    /// Derives the seed of a substream without constructing it.
    static std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream);

  private:
    std::mt19937_64 engine_;
    bool have_cached_normal_ = false;
    double cached_normal_ = 0.0;
};

}  // namespace mar

#endif
