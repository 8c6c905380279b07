#include "rng.hpp"

#include <cmath>
#include <numbers>

namespace rctadjust {

namespace {

inline std::uint64_t rotl64(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

// splitmix64 output finalizer: bijective 64-bit mix.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// splitmix64 step: advances state and returns a mixed output.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  state += kGolden;
  return mix64(state);
}

}  // namespace

Rng::Rng(std::uint64_t seed) : seed_(seed) {
  std::uint64_t sm = seed;
  for (auto& word : state_) word = splitmix64_next(sm);
  // xoshiro256++ requires a nonzero state; splitmix64 cannot emit four
  // consecutive zeros, but guard anyway so the invariant is local.
  if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
}

std::uint64_t Rng::derive_seed(std::uint64_t base, std::uint64_t tag) {
  return mix64(mix64(base + kGolden) ^ (tag + 0xD1B54A32D192ED03ULL));
}

Rng Rng::for_replication(std::uint64_t master_seed, std::uint64_t rep_index) {
  return Rng(derive_seed(master_seed, rep_index));
}

std::uint64_t Rng::next_u64() {
  const std::uint64_t result = rotl64(state_[0] + state_[3], 23) + state_[0];
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl64(state_[3], 45);
  return result;
}

double Rng::uniform01() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double a, double b) {
  if (!(a < b)) throw_invalid("uniform bounds require a < b");
  return a + (b - a) * uniform01();
}

double Rng::normal(double mean, double sd) {
  if (!(sd > 0.0)) throw_invalid("normal sd must be positive");
  // Box-Muller, cosine branch only: exactly two uniform draws per variate,
  // so consumption per call is fixed and streams stay alignment-stable.
  const double u1 = 1.0 - uniform01();  // (0, 1]: keeps log() finite
  const double u2 = uniform01();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  return mean + sd * radius * std::cos(2.0 * std::numbers::pi * u2);
}

double Rng::exponential(double rate) {
  if (!(rate > 0.0)) throw_invalid("exponential rate must be positive");
  return -std::log(1.0 - uniform01()) / rate;
}

double Rng::gamma(double shape, double rate) {
  if (!(shape > 0.0)) throw_invalid("gamma shape must be positive");
  if (!(rate > 0.0)) throw_invalid("gamma rate must be positive");
  if (shape < 1.0) {
    // Boost to shape + 1, then scale by U^(1/shape).
    const double boosted = gamma(shape + 1.0, rate);
    const double u = 1.0 - uniform01();  // (0, 1]
    return boosted * std::pow(u, 1.0 / shape);
  }
  // Marsaglia-Tsang squeeze method.
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x;
    double v;
    do {
      x = normal(0.0, 1.0);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform01();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v / rate;
    if (u > 0.0 && std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) {
      return d * v / rate;
    }
  }
}

double Rng::bernoulli(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw_invalid("bernoulli p must lie in [0, 1]");
  return uniform01() < p ? 1.0 : 0.0;
}

DistSpec DistSpec::make_uniform(double a, double b) {
  if (!(a < b)) throw_invalid("uniform bounds require a < b");
  return {Kind::Uniform, a, b};
}

DistSpec DistSpec::make_normal(double mean, double sd) {
  if (!(sd > 0.0)) throw_invalid("normal sd must be positive");
  return {Kind::Normal, mean, sd};
}

DistSpec DistSpec::make_exponential(double rate) {
  if (!(rate > 0.0)) throw_invalid("exponential rate must be positive");
  return {Kind::Exponential, rate, 0.0};
}

DistSpec DistSpec::make_gamma(double shape, double rate) {
  if (!(shape > 0.0)) throw_invalid("gamma shape must be positive");
  if (!(rate > 0.0)) throw_invalid("gamma rate must be positive");
  return {Kind::Gamma, shape, rate};
}

DistSpec DistSpec::make_bernoulli(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw_invalid("bernoulli p must lie in [0, 1]");
  return {Kind::Bernoulli, p, 0.0};
}

double DistSpec::mean() const {
  switch (kind) {
    case Kind::Uniform: return 0.5 * (p1 + p2);
    case Kind::Normal: return p1;
    case Kind::Exponential: return 1.0 / p1;
    case Kind::Gamma: return p1 / p2;
    case Kind::Bernoulli: return p1;
  }
  throw Error(ErrorCode::Internal, "unknown distribution kind");
}

double DistSpec::variance() const {
  switch (kind) {
    case Kind::Uniform: {
      const double w = p2 - p1;
      return w * w / 12.0;
    }
    case Kind::Normal: return p2 * p2;
    case Kind::Exponential: return 1.0 / (p1 * p1);
    case Kind::Gamma: return p1 / (p2 * p2);
    case Kind::Bernoulli: return p1 * (1.0 - p1);
  }
  throw Error(ErrorCode::Internal, "unknown distribution kind");
}

double DistSpec::fourth_central_moment() const {
  switch (kind) {
    case Kind::Uniform: {
      const double w = p2 - p1;
      return w * w * w * w / 80.0;
    }
    case Kind::Normal: {
      const double v = p2 * p2;
      return 3.0 * v * v;
    }
    case Kind::Exponential: {
      const double r2 = p1 * p1;
      return 9.0 / (r2 * r2);
    }
    case Kind::Gamma: {
      const double r2 = p2 * p2;
      return 3.0 * p1 * (p1 + 2.0) / (r2 * r2);
    }
    case Kind::Bernoulli: {
      const double pq = p1 * (1.0 - p1);
      return pq * (1.0 - 3.0 * pq);
    }
  }
  throw Error(ErrorCode::Internal, "unknown distribution kind");
}

double sample(Rng& rng, const DistSpec& dist) {
  switch (dist.kind) {
    case DistSpec::Kind::Uniform: return rng.uniform(dist.p1, dist.p2);
    case DistSpec::Kind::Normal: return rng.normal(dist.p1, dist.p2);
    case DistSpec::Kind::Exponential: return rng.exponential(dist.p1);
    case DistSpec::Kind::Gamma: return rng.gamma(dist.p1, dist.p2);
    case DistSpec::Kind::Bernoulli: return rng.bernoulli(dist.p1);
  }
  throw Error(ErrorCode::Internal, "unknown distribution kind");
}

}  // namespace rctadjust
