#include "doctest.h"

#include "dopo/analysis.hpp"
#include "dopo/binary_io.hpp"
#include "dopo/dynamics.hpp"
#include "dopo/stability.hpp"
#include "dopo/statistics.hpp"

#include <cmath>
#include <filesystem>

using namespace dopo;

namespace {

SimParams base() {
    SimParams p;
    p.seed = 77;
    return p;
}

FieldState stationary_pump(const SimParams& p) {
    FieldState s(p.n_points);
    const auto e0 = pump_values(p);
    for (std::size_t j = 0; j < s.size(); ++j) s.pump[j] = steady_state(e0[j], p.delta0);
    return s;
}

double max_signal(const FieldState& s) {
    double m = 0.0;
    for (const auto& z : s.signal) m = std::max(m, std::abs(z));
    return m;
}

bool same_state(const FieldState& a, const FieldState& b) {
    return a.t == b.t && a.pump == b.pump && a.signal == b.signal;
}

bool same_series(const std::vector<ModeSeries>& a, const std::vector<ModeSeries>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i].k_index != b[i].k_index || a[i].times != b[i].times || a[i].amplitudes != b[i].amplitudes)
            return false;
    return true;
}

// Per-mode variance of s <- p s + n, E|n|^2 = eps^2 dt / dx, summed term by term.
double discrete_ou_variance(double eps, double dx, double dt) {
    const double q = std::exp(-2.0 * dt);
    double sum = 0.0, term = 1.0;
    for (int i = 0; i < 100000 && term > 1e-18; ++i) {
        sum += term;
        term *= q;
    }
    return eps * eps * dt / dx * sum;
}

}  // namespace

TEST_CASE("undepleted flat pump relaxes to E0 / (1 + i d0)") {
    auto p = base();
    p.pump.kind = PumpKind::Flat;
    p.epsilon = 0.0;
    p.delta0 = 0.3;
    TrajectoryRecorder rec;
    RunControl ctl;
    ctl.initial = FieldState(p.n_points);
    const auto out = run_trajectory(p, 25.0, rec, ctl).final_state;
    const Complex target = steady_state(effective_drive(p), p.delta0);
    double err = 0.0;
    for (const auto& z : out.pump) err = std::max(err, std::abs(z - target));
    CHECK(err < 1e-10);
    CHECK(max_signal(out) == 0.0);
}

TEST_CASE("stationary pump is a fixed point of the noise-free step") {
    auto p = base();
    p.epsilon = 0.0;
    const auto s0 = stationary_pump(p);
    Stepper stepper(p);
    NoiseSource rng(1);
    auto s = s0;
    for (int i = 0; i < 400; ++i) stepper.step(s, rng);
    // The supergaussian profile is not an eigenfunction of diffraction, so the
    // pump drifts slightly at the edges; the plateau stays put.
    CHECK(std::abs(s.pump[p.n_points / 2] - s0.pump[p.n_points / 2]) < 1e-8);
    CHECK(max_signal(s) == 0.0);
}

TEST_CASE("zero pump leaves a k_c plane wave on the exact linear solution") {
    auto p = base();
    p.F = 0.0;
    p.epsilon = 0.0;
    p.pump.kind = PumpKind::Flat;
    Grid g(p);
    const std::size_t j = g.nearest_index(critical_wavenumber(p.delta1));
    const double k = g.k()[j];
    FieldState s(p.n_points);
    for (std::size_t m = 0; m < s.size(); ++m) s.signal[m] = 1e-6 * std::polar(1.0, k * g.x()[m]);
    TrajectoryRecorder rec;
    RunControl ctl;
    ctl.initial = s;
    const auto out = run_trajectory(p, 10.0, rec, ctl).final_state;
    const Complex growth = std::exp(Complex(-1.0, -p.delta1 - 2.0 * k * k + p.v * k) * out.t);
    double err = 0.0;
    for (std::size_t m = 0; m < s.size(); ++m) err = std::max(err, std::abs(out.signal[m] - growth * s.signal[m]));
    CHECK(out.t == doctest::Approx(10.0));
    CHECK(err / (1e-6 * std::abs(growth)) < 1e-9);
}

TEST_CASE("homogeneous growth rate matches lambda_+ at k_c") {
    auto p = base();
    p.F = 1.05;
    p.epsilon = 0.0;
    p.pump.kind = PumpKind::Flat;
    Grid g(p);
    const std::size_t j = g.nearest_index(critical_wavenumber(p.delta1));
    const double k = g.k()[j];
    auto s = stationary_pump(p);
    for (std::size_t m = 0; m < s.size(); ++m) s.signal[m] = 1e-9 * std::cos(k * g.x()[m]);
    TrajectoryRecorder rec;
    RunControl ctl;
    ctl.initial = s;
    const auto out = run_trajectory(p, 40.0, rec, ctl).final_state;
    // After the decaying branch is gone, |a| grows at Re lambda_+(k).
    const double rate = dispersion(k, p.F, p.delta1, p.v).lambda_plus.real();
    TrajectoryRecorder rec2;
    ctl.initial = out;
    const auto out2 = run_trajectory(p, 80.0, rec2, ctl).final_state;
    const double measured = std::log(max_signal(out2) / max_signal(out)) / 40.0;
    CHECK(measured == doctest::Approx(rate).epsilon(0.01));
}

TEST_CASE("noise-free perturbation: convective decay, absolute persistence") {
    auto run = [](double F) {
        auto p = base();
        p.F = F;
        p.epsilon = 0.0;
        Grid g(p);
        auto s = stationary_pump(p);
        const double c = p.pump_center();
        for (std::size_t m = 0; m < s.size(); ++m) {
            const double d = (g.x()[m] - c) / 10.0;
            s.signal[m] = 1e-3 * std::exp(-d * d);
        }
        TrajectoryRecorder rec;
        RunControl ctl;
        ctl.initial = s;
        return max_signal(run_trajectory(p, 5000.0, rec, ctl).final_state);
    };
    CHECK(run(1.025) < 1e-7);
    CHECK(run(1.05) > 1e-2);
}

TEST_CASE("fixed seed and stream give identical trajectories") {
    auto p = base();
    p.F = 1.025;
    RecorderConfig cfg;
    cfg.target_wavenumbers = {critical_wavenumber(p.delta1)};
    TrajectoryRecorder a(cfg), b(cfg), c(cfg);
    const auto ra = run_trajectory(p, 50.0, a);
    const auto rb = run_trajectory(p, 50.0, b);
    RunControl other;
    other.stream = 1;
    const auto rc = run_trajectory(p, 50.0, c, other);
    CHECK(same_state(ra.final_state, rb.final_state));
    CHECK(same_series(a.series(), b.series()));
    CHECK_FALSE(same_state(ra.final_state, rc.final_state));
}

TEST_CASE("checkpoint resume is bit-exact") {
    auto p = base();
    p.F = 1.025;
    p.t_transient = 20.0;
    RecorderConfig cfg;
    cfg.t_transient = p.t_transient;
    cfg.target_wavenumbers = {critical_wavenumber(p.delta1)};
    cfg.record_dominant = true;
    cfg.spacetime_interval = 5.0;

    TrajectoryRecorder full(cfg);
    std::optional<RunState> saved;
    std::optional<TrajectoryRecorder> saved_rec;
    const auto path = std::filesystem::temp_directory_path() / "dopo_test_checkpoint.bin";
    RunControl ctl;
    ctl.checkpoint_every = 1000;
    ctl.on_checkpoint = [&](const RunState& rs, const TrajectoryRecorder& r) {
        if (rs.step == 1000) {
            saved = rs;
            saved_rec = r;
            write_checkpoint(path, {{"command", "test"}}, false, rs, r);
        }
    };
    const auto ref = run_trajectory(p, 60.0, full, ctl);
    REQUIRE(saved);

    SUBCASE("in memory") {
        RunControl resume;
        resume.resume = *saved;
        auto rec = *saved_rec;
        const auto out = run_trajectory(p, 60.0, rec, resume);
        CHECK(out.steps == ref.steps);
        CHECK(same_state(out.final_state, ref.final_state));
        CHECK(same_series(rec.series(), full.series()));
        CHECK(rec.frames().size() == full.frames().size());
        CHECK(rec.dominant_index() == full.dominant_index());
    }
    SUBCASE("through a file") {
        const auto cp = read_checkpoint(path);
        CHECK_FALSE(cp.reference);
        CHECK(cp.step == 1000);
        TrajectoryRecorder rec(cfg);
        cp.restore(rec);
        RunControl resume;
        resume.resume = cp.run_state(p);
        const auto out = run_trajectory(p, 60.0, rec, resume);
        CHECK(same_state(out.final_state, ref.final_state));
        CHECK(same_series(rec.series(), full.series()));
        CHECK(rec.mean_far_field_power() == full.mean_far_field_power());
        CHECK(rec.dominant_index() == full.dominant_index());
        REQUIRE(rec.frames().size() == full.frames().size());
        for (std::size_t i = 0; i < rec.frames().size(); ++i) CHECK(rec.frames()[i].signal == full.frames()[i].signal);
    }
    std::filesystem::remove(path);
}

TEST_CASE("reference checkpoint resume is bit-exact") {
    auto p = base();
    RecorderConfig cfg;
    cfg.target_wavenumbers = {critical_wavenumber(p.delta1)};
    TrajectoryRecorder full(cfg);
    std::optional<RunState> saved;
    std::optional<TrajectoryRecorder> saved_rec;
    RunControl ctl;
    ctl.checkpoint_every = 700;
    ctl.on_checkpoint = [&](const RunState& rs, const TrajectoryRecorder& r) {
        if (!saved) {
            saved = rs;
            saved_rec = r;
        }
    };
    const auto ref = run_reference(p, 40.0, full, ctl);
    RunControl resume;
    resume.resume = *saved;
    auto rec = *saved_rec;
    const auto out = run_reference(p, 40.0, rec, resume);
    CHECK(same_state(out.final_state, ref.final_state));
    CHECK(same_series(rec.series(), full.series()));
}

TEST_CASE("empty-cavity reference reproduces the discrete OU variance") {
    auto p = base();
    RecorderConfig cfg;
    cfg.target_wavenumbers = {critical_wavenumber(p.delta1)};
    auto mean_power = [&](const SimParams& q, double* se) {
        TrajectoryRecorder rec(cfg);
        run_reference(q, 5000.0, rec);
        std::vector<double> x;
        for (const auto& s : rec.series())
            for (const auto& z : s.amplitudes) x.push_back(std::norm(z));
        const auto m = moments(x);
        if (se) *se = std::sqrt(m.variance() * autocorrelation_time(x) / static_cast<double>(x.size()));
        return m.mean();
    };
    const double oracle = discrete_ou_variance(p.epsilon, p.dx, p.dt);
    CHECK(reference_mode_variance(p) == doctest::Approx(oracle).epsilon(1e-12));
    CHECK(reference_mode_variance_continuum(p) == doctest::Approx(p.epsilon * p.epsilon / (2.0 * p.dx)));

    double se = 0.0;
    const double v = mean_power(p, &se);
    CHECK(std::abs(v - oracle) < 3.0 * se);

    SUBCASE("independent of the signal detuning") {
        auto q = p;
        q.delta1 = -1.3;
        q.seed = 78;
        double se2 = 0.0;
        const double v2 = mean_power(q, &se2);
        CHECK(std::abs(v2 - oracle) < 3.0 * se2);
    }
    SUBCASE("scales as eps^2") {
        auto q = p;
        q.epsilon = 2.0 * p.epsilon;
        CHECK(mean_power(q, nullptr) == doctest::Approx(4.0 * v).epsilon(1e-12));
    }
    SUBCASE("shot level is the same at every quadrature angle") {
        TrajectoryRecorder rec(cfg);
        run_reference(p, 5000.0, rec);
        const auto& s = rec.series();
        REQUIRE(s.size() == 2);
        for (double th : {-1.2, 0.0, 0.4, 1.0}) {
            const auto shot = shot_noise_level(s[0], s[1], th);
            // Var Re[(s_k - s_-k) e^{i th}] = <|s_k|^2> for a circular pair.
            CHECK(std::abs(shot.level - oracle) < 3.0 * shot.standard_error);
        }
    }
}

TEST_CASE("blow-up is reported with the time") {
    auto p = base();
    FieldState s = stationary_pump(p);
    s.signal[3] = Complex(std::nan(""), 0.0);
    TrajectoryRecorder rec;
    RunControl ctl;
    ctl.initial = s;
    CHECK_THROWS_AS(run_trajectory(p, 1.0, rec, ctl), BlowUpError);

    s.signal[3] = 2.0 * kBlowUpModulus;
    ctl.initial = s;
    TrajectoryRecorder rec2;
    try {
        run_trajectory(p, 1.0, rec2, ctl);
        FAIL("expected blow-up");
    } catch (const BlowUpError& e) {
        CHECK(e.time() <= p.dt + 1e-12);
        CHECK(e.max_modulus() > kBlowUpModulus);
    }
}

TEST_CASE("mismatched initial state is rejected") {
    auto p = base();
    TrajectoryRecorder rec;
    RunControl ctl;
    ctl.initial = FieldState(16);
    CHECK_THROWS_AS(run_trajectory(p, 1.0, rec, ctl), Error);
}

TEST_CASE("ensemble members use distinct streams") {
    auto p = base();
    p.n_points = 64;
    RecorderConfig cfg;
    cfg.target_wavenumbers = {critical_wavenumber(p.delta1)};
    const auto ens = run_ensemble(p, 10.0, cfg, 3, 2);
    REQUIRE(ens.size() == 3);
    TrajectoryRecorder solo(cfg);
    RunControl ctl;
    ctl.stream = 2;
    run_trajectory(p, 10.0, solo, ctl);
    CHECK(same_series(ens[2].series(), solo.series()));
    CHECK_FALSE(same_series(ens[0].series(), ens[1].series()));
}
