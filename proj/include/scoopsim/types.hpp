#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace scoopsim {

// One value per joint: theta1..theta7 plus the gripper (index 7).
// Depending on role a JointVector holds angles [rad], velocities [rad/s]
// or torques [N·m].
inline constexpr int kNumJoints = 8;
using JointVector = Eigen::Matrix<double, kNumJoints, 1>;

// Control runs at 500 Hz, model inference at 50 Hz.
inline constexpr double kControlDt = 0.002;
inline constexpr int kControlHz = 500;
inline constexpr int kModelHz = 50;
inline constexpr int kStepsPerInference = kControlHz / kModelHz;  // 10

// Joint indices (0-based). Paper numbering is 1-based.
inline constexpr int kJointSweep = 0;   // theta1, base sweep
inline constexpr int kJointReach = 1;   // theta2, reach
inline constexpr int kJointFixed = 2;   // theta3, held by position control
inline constexpr int kJointElbow = 3;   // theta4
inline constexpr int kJointWristYaw = 5;   // theta6, horizontal wrist snap
inline constexpr int kJointWristPitch = 6; // theta7, vertical wrist snap
inline constexpr int kJointGripper = 7;

inline bool all_finite(const JointVector& v) { return v.allFinite(); }

inline void require_finite(const JointVector& v, const char* what) {
  if (!v.allFinite()) {
    throw std::invalid_argument(std::string("non-finite ") + what);
  }
}

// Deterministic RNG, fully specified here so output bytes never depend on the
// standard library implementation. splitmix64 core with a Box-Muller normal.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  int uniform_int(int n) {  // in [0, n)
    return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n));
  }

 private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Stateless mixing of stream identifiers into child seeds, so every trial,
// cell and retry draws from its own reproducible stream.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                          std::uint64_t b = 0, std::uint64_t c = 0);

}  // namespace scoopsim
