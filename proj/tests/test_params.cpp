#include "doctest.h"

#include "dopo/params.hpp"
#include "dopo/stability.hpp"

#include <cmath>

using namespace dopo;

namespace {

bool has_error(const ValidationReport& r, const std::string& text) {
    for (const auto& e : r.errors())
        if (e == text) return true;
    return false;
}

}  // namespace

TEST_CASE("published parameter set validates cleanly") {
    SimParams p;
    p.delta0 = 0.0;
    p.delta1 = -0.25;
    p.v = 0.42;
    p.n_points = 512;
    p.dx = 1.7678;
    p.dt = 0.025;
    const auto r = validate(p);
    CHECK(r.ok());
    CHECK(r.errors().empty());
    CHECK(r.warnings().empty());
    CHECK_NOTHROW(r.throw_if_invalid());
}

TEST_CASE("rule violations are reported with their message") {
    SimParams p;
    p.n_points = 500;
    CHECK(has_error(validate(p), "grid size not power of two"));

    SimParams q;
    q.dt = -0.1;
    CHECK(has_error(validate(q), "nonpositive time step"));
    CHECK_THROWS_AS(validate(q).throw_if_invalid(), Error);

    SimParams e;
    e.epsilon = -1.0;
    CHECK_FALSE(validate(e).ok());

    SimParams o;
    o.pump.order = 3;
    CHECK_FALSE(validate(o).ok());
}

TEST_CASE("nonnegative signal detuning is a warning, not an error") {
    SimParams p;
    p.delta1 = 0.5;
    const auto r = validate(p);
    CHECK(r.ok());
    CHECK(r.warnings().size() == 1);
}

TEST_CASE("effective drive inverts the scaled pump definition") {
    CHECK(effective_drive(1.0, 0.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(effective_drive(1.025, 0.0) == doctest::Approx(1.025).epsilon(1e-15));
    CHECK(effective_drive(1.0, 1.0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    // |E0 / (1 + i d0)| = F for any detuning.
    for (double d0 : {-2.0, -0.3, 0.0, 0.7, 3.0}) {
        const double f = 1.037;
        CHECK(std::abs(steady_state(effective_drive(f, d0), d0)) == doctest::Approx(f).epsilon(1e-14));
    }
}

TEST_CASE("pump profiles") {
    SimParams p;
    p.F = 1.1;
    p.pump.kind = PumpKind::Flat;
    for (double e : pump_values(p)) CHECK(e == doctest::Approx(1.1).epsilon(1e-15));

    p.pump.kind = PumpKind::Supergaussian;
    const auto e0 = pump_values(p);
    const double L = p.system_size();
    CHECK(p.pump_width() == doctest::Approx(0.3 * L));
    // Plateau at the centre, essentially zero at the domain edge.
    CHECK(e0[p.n_points / 2] == doctest::Approx(1.1).epsilon(1e-12));
    CHECK(e0[0] < 1e-10);
    // Symmetric about the centre.
    for (std::size_t j = 1; j < p.n_points / 2; ++j)
        CHECK(e0[p.n_points / 2 - j] == doctest::Approx(e0[p.n_points / 2 + j]).epsilon(1e-12));
    // Half height at x - c = w ln(2)^(1/m).
    const double x_half = p.pump_center() + p.pump_width() * std::pow(std::log(2.0), 1.0 / p.pump.order);
    CHECK(evaluate_pump(p.pump, 1.0, x_half, p.pump_center(), p.pump_width()) == doctest::Approx(0.5));
}

TEST_CASE("pump kind names round trip") {
    for (auto k : {PumpKind::Flat, PumpKind::Supergaussian}) CHECK(pump_kind_from_string(to_string(k)) == k);
    CHECK_THROWS_AS(pump_kind_from_string("gaussian"), Error);
}

TEST_CASE("field state helpers") {
    FieldState s(8);
    CHECK(s.size() == 8);
    CHECK(s.all_finite());
    CHECK(s.max_modulus() == 0.0);
    s.signal[3] = {3.0, 4.0};
    CHECK(s.max_modulus() == doctest::Approx(5.0));
    s.pump[1] = {std::nan(""), 0.0};
    CHECK_FALSE(s.all_finite());
}

TEST_CASE("power of two") {
    CHECK(is_power_of_two(1));
    CHECK(is_power_of_two(512));
    CHECK_FALSE(is_power_of_two(0));
    CHECK_FALSE(is_power_of_two(500));
}
