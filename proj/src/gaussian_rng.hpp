// Internal: deterministic Gaussian stream shared by the acquisition model
// and the Monte Carlo validation suites.  Not installed.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace pulsecap::detail {

inline constexpr double kTwoPiRng = 6.283185307179586476925286766559;

// Box-Muller on mt19937_64 with a fixed bit-to-double mapping, so streams
// are reproducible across standard libraries.  Uniforms take the top 53
// bits, shifted into (0, 1] for the log branch.
class GaussianRng {
  public:
    explicit GaussianRng(std::uint64_t seed) : eng_(seed) {}

    double next() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 =
            (static_cast<double>(eng_() >> 11) + 1.0) * 0x1p-53;  // (0, 1]
        const double u2 = static_cast<double>(eng_() >> 11) * 0x1p-53;  // [0, 1)
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = kTwoPiRng * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    // Uniform in [lo, hi) from the same engine.
    double uniform(double lo, double hi) {
        const double u = static_cast<double>(eng_() >> 11) * 0x1p-53;
        return lo + (hi - lo) * u;
    }

  private:
    std::mt19937_64 eng_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace pulsecap::detail
