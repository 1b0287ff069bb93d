#include "sdlcsim/random.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace sdlcsim {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;
constexpr std::uint64_t kMixMul = 0xBF58476D1CE4E5B9ull;

std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

} // namespace

std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t master_seed,
                          std::initializer_list<std::uint64_t> path) {
    std::uint64_t s = master_seed;
    for (std::uint64_t w : path) {
        s = mix64(s ^ (w * kMixMul + kGolden));
    }
    return s;
}

RngStream::RngStream(std::uint64_t derived_seed) {
    // splitmix64 sequence seeded with the derived seed fills the state;
    // it cannot produce the all-zero state xoshiro must avoid.
    std::uint64_t sm = derived_seed;
    for (auto& word : state_) {
        sm += kGolden;
        word = mix64(sm);
    }
}

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t stream_id)
    : RngStream(derive_seed(master_seed, {stream_id})) {}

RngStream RngStream::from_path(std::uint64_t master_seed,
                               std::initializer_list<std::uint64_t> path) {
    return RngStream(derive_seed(master_seed, path));
}

std::uint64_t RngStream::next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

double RngStream::u01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

Triangular::Triangular(double min_, double mode_, double max_)
    : min(min_), mode(mode_), max(max_) {
    if (!(min <= mode && mode <= max && min < max)) {
        throw std::invalid_argument("triangular requires min <= mode <= max and min < max");
    }
}

Uniform::Uniform(double min_, double max_) : min(min_), max(max_) {
    if (!(min < max)) {
        throw std::invalid_argument("uniform requires min < max");
    }
}

Categorical::Categorical(std::vector<double> weights_) : weights(std::move(weights_)) {
    if (weights.empty()) {
        throw std::invalid_argument("categorical requires at least one weight");
    }
    double sum = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0 && w <= 1.0)) {
            throw std::invalid_argument("categorical weight outside [0,1]");
        }
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw std::invalid_argument("categorical weights sum to " + std::to_string(sum) +
                                    ", expected 1");
    }
}

Bernoulli::Bernoulli(double p_) : p(p_) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument("bernoulli p outside [0,1]");
    }
}

double quantile(const Triangular& d, double u) {
    const double span = d.max - d.min;
    const double cut = (d.mode - d.min) / span;
    if (u < cut) {
        return d.min + std::sqrt(u * span * (d.mode - d.min));
    }
    return d.max - std::sqrt((1.0 - u) * span * (d.max - d.mode));
}

double quantile(const Uniform& d, double u) {
    return d.min + u * (d.max - d.min);
}

std::size_t category_at(const Categorical& d, double u) {
    double cum = 0.0;
    for (std::size_t i = 0; i + 1 < d.weights.size(); ++i) {
        cum += d.weights[i];
        if (u < cum) {
            return i;
        }
    }
    return d.weights.size() - 1;
}

double sample(const Triangular& d, RngStream& rng) {
    return quantile(d, rng.u01());
}

double sample(const Uniform& d, RngStream& rng) {
    return quantile(d, rng.u01());
}

std::size_t sample(const Categorical& d, RngStream& rng) {
    return category_at(d, rng.u01());
}

bool sample(const Bernoulli& d, RngStream& rng) {
    return rng.u01() < d.p;
}

double sample_continuous(const Distribution& d, RngStream& rng) {
    if (const auto* tri = std::get_if<Triangular>(&d)) {
        return sample(*tri, rng);
    }
    if (const auto* uni = std::get_if<Uniform>(&d)) {
        return sample(*uni, rng);
    }
    throw UnsupportedDistribution("continuous sample requires triangular or uniform");
}

double pdf(const Triangular& d, double x) {
    if (x < d.min || x > d.max) {
        return 0.0;
    }
    const double span = d.max - d.min;
    if (x == d.mode) {
        return 2.0 / span;
    }
    if (x < d.mode) {
        return 2.0 * (x - d.min) / (span * (d.mode - d.min));
    }
    return 2.0 * (d.max - x) / (span * (d.max - d.mode));
}

double pdf(const Uniform& d, double x) {
    if (x < d.min || x > d.max) {
        return 0.0;
    }
    return 1.0 / (d.max - d.min);
}

double pdf(const Distribution& d, double x) {
    if (const auto* tri = std::get_if<Triangular>(&d)) {
        return pdf(*tri, x);
    }
    if (const auto* uni = std::get_if<Uniform>(&d)) {
        return pdf(*uni, x);
    }
    throw UnsupportedDistribution("pdf requires triangular or uniform");
}

double cdf(const Triangular& d, double x) {
    if (x <= d.min) {
        return 0.0;
    }
    if (x >= d.max) {
        return 1.0;
    }
    const double span = d.max - d.min;
    if (x < d.mode) {
        const double t = x - d.min;
        return t * t / (span * (d.mode - d.min));
    }
    const double t = d.max - x;
    return 1.0 - t * t / (span * (d.max - d.mode));
}

double cdf(const Uniform& d, double x) {
    if (x <= d.min) {
        return 0.0;
    }
    if (x >= d.max) {
        return 1.0;
    }
    return (x - d.min) / (d.max - d.min);
}

Moments moments(const Triangular& d) {
    const double a = d.min;
    const double b = d.max;
    const double c = d.mode;
    return {(a + b + c) / 3.0,
            (a * a + b * b + c * c - a * b - a * c - b * c) / 18.0};
}

Moments moments(const Uniform& d) {
    const double span = d.max - d.min;
    return {(d.min + d.max) / 2.0, span * span / 12.0};
}

Moments moments(const Distribution& d) {
    if (const auto* tri = std::get_if<Triangular>(&d)) {
        return moments(*tri);
    }
    if (const auto* uni = std::get_if<Uniform>(&d)) {
        return moments(*uni);
    }
    throw UnsupportedDistribution("moments require triangular or uniform");
}

} // namespace sdlcsim
