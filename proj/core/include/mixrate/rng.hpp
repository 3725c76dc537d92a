#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace mixrate {

// Counter-based generator (Philox4x32-10).  A (seed, stream) pair fully
// determines the output sequence, so every period, claim, bootstrap
// replicate or Monte Carlo batch can own an addressable substream that
// survives refactors of draw order elsewhere.
class SplitRng {
 public:
  // stream convention used across the engine: (purpose_tag << 56) | index
  SplitRng(std::uint64_t seed, std::uint64_t stream) : pos_(4) {
    key_[0] = static_cast<std::uint32_t>(seed);
    key_[1] = static_cast<std::uint32_t>(seed >> 32);
    ctr_[0] = 0;
    ctr_[1] = 0;
    ctr_[2] = static_cast<std::uint32_t>(stream);
    ctr_[3] = static_cast<std::uint32_t>(stream >> 32);
  }

  static SplitRng substream(std::uint64_t seed, std::uint64_t tag,
                            std::uint64_t index) {
    return SplitRng(seed, (tag << 56) | index);
  }

  std::uint32_t next_u32() {
    if (pos_ == 4) {
      block_ = philox_block();
      pos_ = 0;
      if (++ctr_[0] == 0) ++ctr_[1];  // 64-bit block counter
    }
    return block_[pos_++];
  }

  std::uint64_t next_u64() {
    std::uint64_t lo = next_u32();
    std::uint64_t hi = next_u32();
    return (hi << 32) | lo;
  }

  // uniform on the open interval (0,1); never returns 0 or 1
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1p-53;
  }

  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  double exponential(double rate) {
    return -std::log(uniform()) / rate;
  }

  // Lomax draw by inverse transform: sigma * (U^{-1/delta} - 1)
  double pareto(double delta, double sigma) {
    return sigma * (std::pow(uniform(), -1.0 / delta) - 1.0);
  }

  // Marsaglia-Tsang squeeze-rejection; shape < 1 boosted via Gamma(shape+1)
  double gamma(double shape, double rate) {
    if (!(shape > 0.0) || !(rate > 0.0)) {
      throw std::domain_error("SplitRng::gamma: shape and rate must be > 0");
    }
    if (shape < 1.0) {
      double g = gamma(shape + 1.0, rate);
      return g * std::pow(uniform(), 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      double u = uniform();
      double x2 = x * x;
      if (u < 1.0 - 0.0331 * x2 * x2) return d * v / rate;
      if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v / rate;
    }
  }

  long long poisson(double lambda) {
    if (!(lambda >= 0.0)) throw std::domain_error("SplitRng::poisson: lambda must be >= 0");
    if (lambda == 0.0) return 0;
    if (lambda < 10.0) return poisson_knuth(lambda);
    return poisson_ptrd(lambda);
  }

 private:
  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> ctr_;
  std::array<std::uint32_t, 4> block_{};
  int pos_;

  static void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                      std::uint32_t& lo) {
    std::uint64_t prod = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(prod >> 32);
    lo = static_cast<std::uint32_t>(prod);
  }

  std::array<std::uint32_t, 4> philox_block() const {
    std::array<std::uint32_t, 4> c = ctr_;
    std::uint32_t k0 = key_[0], k1 = key_[1];
    for (int round = 0; round < 10; ++round) {
      std::uint32_t hi0, lo0, hi1, lo1;
      mulhilo(0xD2511F53u, c[0], hi0, lo0);
      mulhilo(0xCD9E8D57u, c[2], hi1, lo1);
      c = {hi1 ^ c[1] ^ k0, lo1, hi0 ^ c[3] ^ k1, lo0};
      k0 += 0x9E3779B9u;
      k1 += 0xBB67AE85u;
    }
    return c;
  }

  // product method, cost O(lambda); only used for small lambda
  long long poisson_knuth(double lambda) {
    double limit = std::exp(-lambda);
    double prod = uniform();
    long long k = 0;
    while (prod > limit) {
      prod *= uniform();
      ++k;
    }
    return k;
  }

  // Hoermann's PTRD transformed rejection, valid for lambda >= 10
  long long poisson_ptrd(double lambda) {
    const double smu = std::sqrt(lambda);
    const double b = 0.931 + 2.53 * smu;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    const double log_lambda = std::log(lambda);
    for (;;) {
      double u = uniform() - 0.5;
      double v = uniform();
      double us = 0.5 - std::fabs(u);
      double kf = std::floor((2.0 * a / us + b) * u + lambda + 0.43);
      if (us >= 0.07 && v <= vr) return static_cast<long long>(kf);
      if (kf < 0.0 || (us < 0.013 && v > us)) continue;
      double k = kf;
      double lhs = std::log(v * inv_alpha / (a / (us * us) + b));
      double rhs = k * log_lambda - lambda - std::lgamma(k + 1.0);
      if (lhs <= rhs) return static_cast<long long>(kf);
    }
  }
};

}  // namespace mixrate
