#include "doctest.h"

#include "dopo/noise.hpp"
#include "dopo/spectral.hpp"
#include "dopo/stability.hpp"

#include <cmath>

using namespace dopo;

namespace {

// Naive unitary DFT with the e^{-i k x} forward sign.
ComplexVector naive_forward(const ComplexVector& f) {
    const std::size_t n = f.size();
    ComplexVector out(n);
    for (std::size_t m = 0; m < n; ++m) {
        Complex s{};
        for (std::size_t j = 0; j < n; ++j)
            s += f[j] * std::polar(1.0, -2.0 * M_PI * static_cast<double>(j * m % n) / static_cast<double>(n));
        out[m] = s / std::sqrt(static_cast<double>(n));
    }
    return out;
}

ComplexVector random_field(std::size_t n, std::uint64_t seed) {
    NoiseSource rng(seed);
    ComplexVector f(n);
    rng.fill_circular(f);
    return f;
}

double max_abs_diff(const ComplexVector& a, const ComplexVector& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

TEST_CASE("grid wavenumbers follow transform order") {
    Grid g(8, 0.5);
    const double dk = 2.0 * M_PI / 4.0;
    CHECK(g.dk() == doctest::Approx(dk));
    CHECK(g.k()[0] == 0.0);
    CHECK(g.k()[1] == doctest::Approx(dk));
    CHECK(g.k()[3] == doctest::Approx(3 * dk));
    CHECK(g.k()[4] == doctest::Approx(-4 * dk));
    CHECK(g.k()[7] == doctest::Approx(-dk));
    CHECK(g.mirror_index(1).value() == 7);
    CHECK(g.mirror_index(0).value() == 0);
    CHECK_FALSE(g.mirror_index(4).has_value());
    CHECK(g.nearest_index(1.02 * dk) == 1);
    CHECK(g.nearest_index(-1.02 * dk) == 7);
    // The Nyquist bin is never chosen.
    CHECK(g.nearest_index(-4 * dk) != 4);
    CHECK_THROWS_AS(Grid(12, 1.0), Error);
}

TEST_CASE("k_c snaps to bin 51 on the default grid") {
    Grid g(512, 1.7678);
    const auto j = g.nearest_index(critical_wavenumber(-0.25));
    CHECK(j == 51);
    CHECK(std::abs(g.k()[j] - critical_wavenumber(-0.25)) < 0.5 * g.dk());
    CHECK(g.mirror_index(j).value() == 512 - 51);
}

TEST_CASE("forward transform of a constant field") {
    Grid g(8, 1.0);
    const Complex c(0.3, -1.2);
    ComplexVector f(8, c);
    const auto s = forward(g, f);
    CHECK(std::abs(s[0] - std::sqrt(8.0) * c) < 1e-14);
    for (std::size_t j = 1; j < 8; ++j) CHECK(std::abs(s[j]) < 1e-14);
}

TEST_CASE("pure mode maps to a single bin") {
    Grid g(64, 0.7);
    ComplexVector f(64);
    for (std::size_t j = 0; j < 64; ++j) f[j] = std::polar(1.0, g.k()[5] * g.x()[j]);
    const auto s = forward(g, f);
    CHECK(std::abs(s[5] - std::sqrt(64.0)) < 1e-12);
    for (std::size_t j = 0; j < 64; ++j)
        if (j != 5) CHECK(std::abs(s[j]) < 1e-12);
}

TEST_CASE("forward transform agrees with the direct sum") {
    Grid g(32, 1.3);
    const auto f = random_field(32, 11);
    CHECK(max_abs_diff(forward(g, f), naive_forward(f)) < 1e-12);
}

TEST_CASE("Parseval holds to 1e-12 relative") {
    Grid g(512, 1.7678);
    const auto f = random_field(512, 3);
    const auto s = forward(g, f);
    double ef = 0.0, es = 0.0;
    for (const auto& z : f) ef += std::norm(z);
    for (const auto& z : s) es += std::norm(z);
    CHECK(std::abs(ef - es) / ef < 1e-12);
}

TEST_CASE("inverse undoes forward") {
    Grid g(256, 0.9);
    const auto f = random_field(256, 5);
    CHECK(max_abs_diff(inverse(g, forward(g, f)), f) < 1e-12);
    const ComplexVector zero(256);
    for (const auto& z : inverse(g, zero)) CHECK(z == Complex{});
}

TEST_CASE("single k_c mode inverts to a plane wave of modulus 1/sqrt(n)") {
    Grid g(512, 1.7678);
    ComplexVector s(512);
    s[51] = 1.0;
    const auto f = inverse(g, s);
    for (std::size_t j = 0; j < 512; ++j) {
        const Complex expect = std::polar(1.0 / std::sqrt(512.0), g.k()[51] * g.x()[j]);
        CHECK(std::abs(f[j] - expect) < 1e-14);
    }
}

TEST_CASE("transform object handles spans and raw buffers") {
    Transform t(16);
    CHECK(t.size() == 16);
    const auto f = random_field(16, 9);
    ComplexVector s(16), back(16);
    t.forward(f, s);
    t.inverse(s, back);
    CHECK(max_abs_diff(back, f) < 1e-13);
    auto buf = t.buffer();
    std::copy(f.begin(), f.end(), buf.begin());
    t.forward_raw();
    t.inverse_raw();
    for (std::size_t j = 0; j < 16; ++j) CHECK(std::abs(buf[j] / 16.0 - f[j]) < 1e-13);
    ComplexVector wrong(8);
    CHECK_THROWS_AS(t.forward(wrong, s), Error);
}

TEST_CASE("linear symbols and propagator") {
    Grid g(512, 1.7678);
    {
        const auto s = make_symbols(g, 0.0, 0.0, 0.0);
        const auto p = linear_propagator(s.signal, 0.025);
        CHECK(std::abs(p[0] - std::exp(-0.025)) < 1e-15);
    }
    const auto s = make_symbols(g, 0.0, -0.25, 0.42);
    const auto p = linear_propagator(s.signal, 0.025);
    // Re L1 = -1 for every k.
    for (const auto& z : p) CHECK(std::abs(z) == doctest::Approx(std::exp(-0.025)).epsilon(1e-14));
    CHECK(std::abs(p[51]) == doctest::Approx(0.97531).epsilon(1e-5));
    // Pump symbol: -(1 + i d0) - i k^2.
    const auto s0 = make_symbols(g, 0.5, -0.25, 0.42);
    CHECK(std::abs(s0.pump[7] - Complex(-1.0, -0.5 - g.k()[7] * g.k()[7])) < 1e-15);
    // Reference symbol: no walk-off.
    const auto r = reference_symbol(g, -0.25);
    CHECK(std::abs(r[51] - Complex(-1.0, 0.25 - 2.0 * g.k()[51] * g.k()[51])) < 1e-15);
    CHECK_THROWS_AS(linear_propagator(s.signal, 0.0), Error);
}

TEST_CASE("one linear step on exp(i k_c x) matches the closed-form solution") {
    // Linearized noise-free signal equation without pump coupling:
    // d_t a = -(1 + i d1) a + 2 i a'' + v a', a(x, 0) = e^{i k x}
    // has a(x, t) = exp[(-(1 + i d1) - 2 i k^2 + i v k) t] e^{i k x}.
    Grid g(512, 1.7678);
    const double d1 = -0.25, v = 0.42, dt = 0.025;
    const double k = g.k()[51];
    ComplexVector f(512);
    for (std::size_t j = 0; j < 512; ++j) f[j] = std::polar(1.0, k * g.x()[j]);
    auto s = forward(g, f);
    const auto p = linear_propagator(make_symbols(g, 0.0, d1, v).signal, dt);
    for (std::size_t j = 0; j < 512; ++j) s[j] *= p[j];
    const auto out = inverse(g, s);
    const Complex growth = std::exp(Complex(-1.0, -d1 - 2.0 * k * k + v * k) * dt);
    double err = 0.0;
    for (std::size_t j = 0; j < 512; ++j) err = std::max(err, std::abs(out[j] - growth * f[j]));
    CHECK(err < 1e-12);
}

TEST_CASE("propagator semigroup: N steps equal one step of N dt") {
    Grid g(128, 1.1);
    const auto sym = make_symbols(g, 0.0, -0.25, 0.42).signal;
    const auto small = linear_propagator(sym, 0.025);
    const auto big = linear_propagator(sym, 0.025 * 40);
    auto a = forward(g, random_field(128, 21));
    auto b = a;
    for (int n = 0; n < 40; ++n)
        for (std::size_t j = 0; j < a.size(); ++j) a[j] *= small[j];
    for (std::size_t j = 0; j < b.size(); ++j) b[j] *= big[j];
    CHECK(max_abs_diff(a, b) < 1e-12);
}

TEST_CASE("parity: a real field has a Hermitian spectrum") {
    Grid g(64, 1.0);
    auto f = random_field(64, 4);
    for (auto& z : f) z = z.real();
    const auto s = forward(g, f);
    for (std::size_t j = 1; j < 64; ++j)
        if (auto m = g.mirror_index(j)) CHECK(std::abs(s[j] - std::conj(s[*m])) < 1e-13);
}
