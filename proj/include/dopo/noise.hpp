#pragma once

// Complex white-noise source for the signal Langevin equation.
//
// Each draw is circular: xi = (u + i w) / sqrt(2 dx dt) with u, w independent
// standard normals, so <xi_j xi_m^*> = delta_jm / (dx dt) and <xi_j xi_m> = 0.

#include "dopo/params.hpp"
#include "dopo/spectral.hpp"

#include <cmath>
#include <cstdint>
#include <boost/random/mersenne_twister.hpp>

#include <random>
#include <span>
#include <string>

namespace dopo {

/// Seeded normal-variate stream. The engine (64-bit Mersenne twister) and the ziggurat
/// normal sampler are both fully specified, so draws are reproducible across
/// platforms and the state can be checkpointed.
class NoiseSource {
public:
    /// Independent streams are derived from (seed, stream) through seed_seq.
    explicit NoiseSource(std::uint64_t seed, std::uint64_t stream = 0);

    double normal();
    /// Fills `out` with u + i w, u and w standard normal.
    void fill_circular(std::span<Complex> out);
    /// Fills `out` with scale * (u + i w).
    void fill_circular(std::span<Complex> out, double scale);

    std::string save_state() const;
    void load_state(const std::string& state);

private:
    boost::random::mt19937_64 engine_;
};

/// Noise amplitude per step for the signal, eps * dt * xi = eps * sqrt(dt/(2 dx)) (u + i w).
inline double noise_step_scale(double epsilon, double dx, double dt) {
    return epsilon * std::sqrt(dt / (2.0 * dx));
}

/// One discrete white-noise field, normalized as xi above.
ComplexVector sample_noise(const Grid& grid, double dt, NoiseSource& rng);

}  // namespace dopo
