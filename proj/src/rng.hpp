#pragma once

#include <cstdint>
#include <string>

#include "error.hpp"

namespace rctadjust {

/// Deterministic seeded generator (xoshiro256++ core, splitmix64 seeding).
/// Identical seeds produce bitwise-identical streams on every platform.
/// Instances are single-owner: replication-level parallelism obtains
/// independence by deriving one Rng per work unit from (master seed, index).
class Rng {
public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t seed() const noexcept { return seed_; }

  /// Deterministic child seed for a named substream of `base`.
  static std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag);

  /// Generator for one replication of a seeded study.
  static Rng for_replication(std::uint64_t master_seed, std::uint64_t rep_index);

  /// Child generator on an independent substream.
  Rng derive(std::uint64_t tag) const { return Rng(derive_seed(seed_, tag)); }

  std::uint64_t next_u64();

  /// Uniform draw in [0, 1) with 53-bit resolution.
  double uniform01();

  double uniform(double a, double b);
  double normal(double mean, double sd);
  double exponential(double rate);
  double gamma(double shape, double rate);
  double bernoulli(double p);

private:
  std::uint64_t seed_;
  std::uint64_t state_[4];
};

/// Parametric distribution description for the sampling kernel.
struct DistSpec {
  enum class Kind { Uniform, Normal, Exponential, Gamma, Bernoulli };

  Kind kind;
  double p1 = 0.0;
  double p2 = 0.0;

  static DistSpec make_uniform(double a, double b);
  static DistSpec make_normal(double mean, double sd);
  static DistSpec make_exponential(double rate);
  static DistSpec make_gamma(double shape, double rate);
  static DistSpec make_bernoulli(double p);

  double mean() const;
  double variance() const;
  /// Fourth central moment; used by the moment-checking tests.
  double fourth_central_moment() const;
};

double sample(Rng& rng, const DistSpec& dist);

}  // namespace rctadjust
