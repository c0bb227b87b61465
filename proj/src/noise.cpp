#include "dopo/noise.hpp"

#include <boost/random/normal_distribution.hpp>

#include <cmath>
#include <sstream>

namespace dopo {

namespace {
// The ziggurat sampler is stateless, so one instance serves every engine.
const boost::random::normal_distribution<double> kStandardNormal(0.0, 1.0);
}  // namespace

NoiseSource::NoiseSource(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                      0x444f504fu};
    engine_.seed(seq);
}

double NoiseSource::normal() {
    auto dist = kStandardNormal;
    return dist(engine_);
}

void NoiseSource::fill_circular(std::span<Complex> out) {
    auto dist = kStandardNormal;
    for (auto& z : out) {
        const double u = dist(engine_);
        const double w = dist(engine_);
        z = Complex(u, w);
    }
}

void NoiseSource::fill_circular(std::span<Complex> out, double scale) {
    auto dist = kStandardNormal;
    for (auto& z : out) {
        const double u = dist(engine_);
        const double w = dist(engine_);
        z = Complex(scale * u, scale * w);
    }
}

std::string NoiseSource::save_state() const {
    std::ostringstream os;
    // Trailing newline: boost reads one token past the last word.
    os << engine_ << '\n';
    return os.str();
}

void NoiseSource::load_state(const std::string& state) {
    std::istringstream is(state);
    is >> engine_;
    if (!is) throw Error("corrupt random-number state");
}

ComplexVector sample_noise(const Grid& grid, double dt, NoiseSource& rng) {
    if (!(dt > 0.0)) throw Error("noise time step must be positive");
    ComplexVector xi(grid.size());
    rng.fill_circular(xi, 1.0 / std::sqrt(2.0 * grid.dx() * dt));
    return xi;
}

}  // namespace dopo
