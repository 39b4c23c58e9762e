#pragma once

#include "prep/common.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace prep {

/// Seedable PRNG with the handful of draws the model needs.
///
/// All transforms are written out explicitly (instead of the std::
/// distribution adaptors, whose algorithms are implementation-defined) so a
/// seed pins the byte-exact stream on any toolchain.
class Rng {
  public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Uniform on (0, 1] — safe to feed into log().
    double uniform_pos() { return 1.0 - uniform(); }

    double exponential(double rate) { return -std::log(uniform_pos()) / rate; }

    /// Marsaglia polar method; one spare value cached.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        have_spare_ = true;
        return u * m;
    }

    /// Gamma(shape, 1) via Marsaglia–Tsang squeeze-rejection; shapes < 1 use
    /// the usual U^{1/shape} boost of a (shape+1) draw.
    double gamma(double shape) {
        if (shape <= 0.0)
            throw ValidationError("gamma sampler: shape must be positive");
        if (shape < 1.0) {
            double u = uniform_pos();
            return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        while (true) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform_pos();
            if (u < 1.0 - 0.0331 * x * x * x * x)
                return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v)))
                return d * v;
        }
    }

    /// Symmetric Dirichlet of the given order; concentration 1 gives the
    /// uniform distribution over the simplex.
    std::vector<double> dirichlet(int order, double concentration) {
        std::vector<double> x(static_cast<size_t>(order));
        double total = 0.0;
        for (double& xi : x) {
            xi = gamma(concentration);
            total += xi;
        }
        for (double& xi : x)
            xi /= total;
        return x;
    }

    uint64_t raw() { return engine_(); }

  private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace prep
