#ifndef CHEBDIR_COMMON_HPP_
#define CHEBDIR_COMMON_HPP_

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace chebdir {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct ZeroGradient : Error {
  explicit ZeroGradient(const std::string& msg) : Error(msg) {}
};
struct WrongArity : Error {
  explicit WrongArity(const std::string& msg) : Error(msg) {}
};
struct UnsupportedNorm : Error {
  explicit UnsupportedNorm(const std::string& msg) : Error(msg) {}
};
struct DimensionMismatch : Error {
  explicit DimensionMismatch(const std::string& msg) : Error(msg) {}
};
struct DimensionCapExceeded : Error {
  explicit DimensionCapExceeded(const std::string& msg) : Error(msg) {}
};
struct DegenerateDirection : Error {
  explicit DegenerateDirection(const std::string& msg) : Error(msg) {}
};
struct DegenerateBisector : Error {
  explicit DegenerateBisector(const std::string& msg) : Error(msg) {}
};
struct SingularSystem : Error {
  explicit SingularSystem(const std::string& msg) : Error(msg) {}
};
struct Infeasible : Error {
  explicit Infeasible(const std::string& msg) : Error(msg) {}
};
struct ZeroReference : Error {
  explicit ZeroReference(const std::string& msg) : Error(msg) {}
};
struct ConfigError : Error {
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// Counter-based deterministic RNG (xoshiro256++ seeded via splitmix64).
// Distributions are generated from raw bits directly so streams are
// bit-identical across standard libraries and platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) { seed_state(seed); }
  // Independent stream for a (seed, index) pair, e.g. per training step.
  Rng(std::uint64_t seed, std::uint64_t stream) {
    seed_state(seed ^ (0x9e3779b97f4a7c15ULL + splitmix(stream + 1)));
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Box-Muller; consumes exactly two uniforms per draw.
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  Vec normal_vec(int n) {
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = normal();
    return v;
  }

  int uniform_int(int lo, int hi) {  // inclusive bounds
    return lo + static_cast<int>(next_u64() % static_cast<std::uint64_t>(hi - lo + 1));
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  static std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }
  void seed_state(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& s : s_) {
      x = splitmix(x);
      s = x;
    }
    if (s_[0] == 0 && s_[1] == 0 && s_[2] == 0 && s_[3] == 0) s_[0] = 1;
  }

  std::uint64_t s_[4];
};

inline bool all_finite(const Vec& v) { return v.allFinite(); }

}  // namespace chebdir

#endif  // CHEBDIR_COMMON_HPP_
