#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <variant>
#include <vector>

namespace sdlcsim {

/// Thrown by pdf()/moments() for distribution kinds they are not defined on.
class UnsupportedDistribution : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Stateless splitmix64 finalizer (Steele, Lea & Flood). Used both to derive
// stream seeds and to expand a seed into generator state.
std::uint64_t mix64(std::uint64_t z);

// Derives a substream seed from a master seed and a path of integer words.
// Scheme: s = master; for each word w: s = mix64(s ^ (w * 0xBF58476D1CE4E5B9
// + 0x9E3779B97F4A7C15)). Distinct paths give independent streams.
std::uint64_t derive_seed(std::uint64_t master_seed,
                          std::initializer_list<std::uint64_t> path);

/// Deterministic 64-bit random stream: xoshiro256++ (Blackman & Vigna),
/// state expanded from the derived seed via splitmix64. The same
/// (master seed, stream path) always reproduces the same sample sequence.
class RngStream {
public:
    RngStream(std::uint64_t master_seed, std::uint64_t stream_id);
    static RngStream from_path(std::uint64_t master_seed,
                               std::initializer_list<std::uint64_t> path);

    std::uint64_t next_u64();

    /// Uniform on [0,1) with 53 random bits; never returns 1.
    double u01();

private:
    explicit RngStream(std::uint64_t derived_seed);
    std::array<std::uint64_t, 4> state_;
};

struct Triangular {
    double min;
    double mode;
    double max;
    Triangular(double min_, double mode_, double max_);
    bool operator==(const Triangular&) const = default;
};

struct Uniform {
    double min;
    double max;
    Uniform(double min_, double max_);
    bool operator==(const Uniform&) const = default;
};

struct Categorical {
    std::vector<double> weights; // each in [0,1], sum to 1 within 1e-9
    explicit Categorical(std::vector<double> weights_);
    bool operator==(const Categorical&) const = default;
};

struct Bernoulli {
    double p;
    explicit Bernoulli(double p_);
    bool operator==(const Bernoulli&) const = default;
};

using Distribution = std::variant<Triangular, Uniform, Categorical, Bernoulli>;

// Inverse-CDF forms, exposed so tests can pin exact u -> value mappings.
double quantile(const Triangular& d, double u);
double quantile(const Uniform& d, double u);

// Index i such that u falls in [cum_{i-1}, cum_i); u exactly at a boundary
// selects the next category. u >= total weight clamps to the last index.
std::size_t category_at(const Categorical& d, double u);

double sample(const Triangular& d, RngStream& rng);
double sample(const Uniform& d, RngStream& rng);
std::size_t sample(const Categorical& d, RngStream& rng);
bool sample(const Bernoulli& d, RngStream& rng);

/// Draws from a continuous (Triangular/Uniform) law; throws
/// UnsupportedDistribution for the discrete kinds.
double sample_continuous(const Distribution& d, RngStream& rng);

double pdf(const Triangular& d, double x);
double pdf(const Uniform& d, double x);
double pdf(const Distribution& d, double x); // UnsupportedDistribution for discrete kinds

double cdf(const Triangular& d, double x);
double cdf(const Uniform& d, double x);

struct Moments {
    double mean;
    double variance;
};

Moments moments(const Triangular& d);
Moments moments(const Uniform& d);
Moments moments(const Distribution& d); // UnsupportedDistribution for discrete kinds

} // namespace sdlcsim
