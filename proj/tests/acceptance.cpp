// Acceptance run: one PASS/FAIL line per criterion on stdout, progress on
// stderr. Exit status is nonzero when any criterion fails.
//
// Long trajectories are shared between criteria. All of them use the default
// parameter set (n=512, dt=0.025, default noise strength) unless noted.

#include "dopo/analysis.hpp"
#include "dopo/dynamics.hpp"
#include "dopo/noise.hpp"
#include "dopo/spectral.hpp"
#include "dopo/stability.hpp"
#include "dopo/statistics.hpp"
#include "dopo/wigner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

using namespace dopo;

namespace {

constexpr double kLong = 1e5;      // time units for squeezing estimates
constexpr double kAbsolute = 4e4;  // F=1.05 Wigner run
constexpr std::size_t kThetaPoints = 128;

int failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
    if (!pass) ++failures;
    std::printf("criterion %d %s: %s | %s\n", id, pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
    std::fflush(stdout);
}

std::string fmt(double x, int prec = 4) {
    std::ostringstream os;
    os.precision(prec);
    os << x;
    return os.str();
}

class Progress {
public:
    explicit Progress(const std::string& what) : what_(what) { std::cerr << "[acceptance] " << what << " ..." << std::flush; }
    ~Progress() {
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        std::cerr << " " << fmt(s, 3) << " s\n";
    }

private:
    std::string what_;
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

struct Run {
    SimParams params;
    TrajectoryRecorder rec;
};

Run simulate(double F, PumpKind pump, double duration, double dt = 0.025, bool dominant = false) {
    Run r;
    r.params.F = F;
    r.params.pump.kind = pump;
    r.params.dt = dt;
    const double kc = critical_wavenumber(r.params.delta1);
    RecorderConfig cfg;
    cfg.sample_interval = r.params.sample_interval;
    cfg.t_transient = r.params.t_transient;
    cfg.target_wavenumbers = {kc, 1.04 * kc};
    cfg.record_dominant = dominant;
    r.rec = TrajectoryRecorder(cfg);
    Progress p("trajectory F=" + fmt(F) + (pump == PumpKind::Flat ? " flat" : " supergaussian") + " dt=" + fmt(dt) +
               " for " + fmt(duration) + " t.u.");
    run_trajectory(r.params, duration, r.rec, RunControl{});
    return r;
}

Run reference(double duration, const std::vector<double>& ks, double dt = 0.025, std::uint64_t stream = 0) {
    Run r;
    r.params.dt = dt;
    RecorderConfig cfg;
    cfg.sample_interval = r.params.sample_interval;
    cfg.t_transient = r.params.t_transient;
    cfg.target_wavenumbers = ks;
    r.rec = TrajectoryRecorder(cfg);
    RunControl ctl;
    ctl.stream = stream;
    Progress p("reference stream " + std::to_string(stream) + " dt=" + fmt(dt) + " for " + fmt(duration) + " t.u.");
    run_reference(r.params, duration, r.rec, ctl);
    return r;
}

std::pair<const ModeSeries*, const ModeSeries*> pair_at(const Run& r, std::size_t j) {
    const Grid g(r.params);
    const auto* a = r.rec.find(j);
    const auto* b = r.rec.find(*g.mirror_index(j));
    if (!a || !b) throw Error("bin " + std::to_string(j) + " was not recorded");
    return {a, b};
}

PairAnalysis analyze(const Run& traj, const Run& ref, std::size_t j) {
    const auto [a, b] = pair_at(traj, j);
    const auto [ra, rb] = pair_at(ref, j);
    return analyze_pair(*a, *b, *ra, *rb, traj.params.v, kThetaPoints);
}

// Samples rotated so the principal axes lie along Re (major) and Im (minor).
ComplexVector rotate_to_axes(const ComplexVector& z) {
    const auto ax = principal_axes(z);
    const Complex rot = std::polar(1.0, -ax.angle_major);
    ComplexVector out(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) out[i] = z[i] * rot;
    return out;
}

// ---------------------------------------------------------------------------

void criterion1() {
    SimParams p;
    const double kc = critical_wavenumber(p.delta1);
    const double h = 1e-7;
    double best = -1e300, kbest = 0.0;
    for (std::size_t i = 0; i <= 10000000; ++i) {
        const double k = h * static_cast<double>(i);
        const double re = dispersion(k, 1.0, p.delta1, p.v).lambda_plus.real();
        if (re > best) {
            best = re;
            kbest = k;
        }
    }
    report(1, "threshold exactness", std::abs(best) <= 1e-12 && std::abs(kbest - kc) < h,
           "max Re lambda+ = " + fmt(best, 3) + " at k = " + fmt(kbest, 9) + ", k_c = " + fmt(kc, 9) +
               ", grid step " + fmt(h, 2));
}

void criterion2() {
    const double fc = absolute_threshold(0.42, -0.25).f_c;
    bool ordered = true;
    std::string worst;
    for (int i = 0; i < 10; ++i) {
        const double d1 = -1.0 + 0.9 * i / 9.0;
        const double a = absolute_threshold(0.2, d1).f_c;
        const double b = absolute_threshold(0.42, d1).f_c;
        const double c = absolute_threshold(0.6, d1).f_c;
        if (!(a < b && b < c)) {
            ordered = false;
            worst = " (violated at delta1=" + fmt(d1) + ")";
        }
    }
    const double f0 = absolute_threshold(0.0, -0.25).f_c;
    report(2, "absolute threshold", fc >= 1.025 && fc <= 1.045 && ordered && std::abs(f0 - 1.0) <= 1e-6,
           "F_c(0.42, -0.25) = " + fmt(fc, 6) + ", v ordering at 10 detunings " + (ordered ? "holds" : "fails") +
               worst + ", F_c(v=0) - 1 = " + fmt(f0 - 1.0, 3));
}

void criterion3() {
    // Supergaussian pump: on a periodic domain a flat pump feeds the advected
    // packet back in, so no finite-size decay exists.
    auto run = [](double F) {
        SimParams p;
        p.F = F;
        p.epsilon = 0.0;
        const Grid g(p);
        FieldState s(p.n_points);
        const auto e0 = pump_values(p);
        for (std::size_t m = 0; m < s.size(); ++m) {
            s.pump[m] = steady_state(e0[m], p.delta0);
            const double d = (g.x()[m] - p.pump_center()) / 10.0;
            s.signal[m] = 1e-3 * std::exp(-d * d);
        }
        TrajectoryRecorder rec;
        RunControl ctl;
        ctl.initial = s;
        Progress pr("noise-free seed F=" + fmt(F) + " to t=5000");
        const auto out = run_trajectory(p, 5000.0, rec, ctl).final_state;
        double m = 0.0;
        for (const auto& z : out.signal) m = std::max(m, std::abs(z));
        return m;
    };
    const double low = run(1.025), high = run(1.1);
    report(3, "convective/absolute dichotomy", low < 1e-6 && high > 0.1,
           "max|a1|(t=5000): F=1.025 -> " + fmt(low, 3) + ", F=1.1 -> " + fmt(high, 3) +
               " (supergaussian pump, eps=0)");
}

void criterion9(const Run& flat, const Run& ref, std::size_t jc) {
    SimParams p;
    const Grid g(p);
    std::vector<std::string> parts;
    bool pass = true;

    {  // noise correlator
        NoiseSource rng(11);
        double self = 0.0, pseudo_re = 0.0, pseudo_im = 0.0, neigh = 0.0;
        const std::size_t rounds = 2000;
        for (std::size_t r = 0; r < rounds; ++r) {
            const auto xi = sample_noise(g, p.dt, rng);
            for (std::size_t m = 0; m < xi.size(); ++m) {
                self += std::norm(xi[m]);
                const Complex sq = xi[m] * xi[m];
                pseudo_re += sq.real();
                pseudo_im += sq.imag();
                neigh += (xi[m] * std::conj(xi[(m + 1) % xi.size()])).real();
            }
        }
        const double n = static_cast<double>(rounds * g.size()), s = p.dx * p.dt / n;
        const double c0 = self * s, c2 = std::hypot(pseudo_re, pseudo_im) * s, c1 = neigh * s;
        const bool ok = std::abs(c0 - 1.0) < 0.01 && c2 < 0.01 && std::abs(c1) < 0.01;
        pass &= ok;
        parts.push_back("noise <xi xi*> dx dt = " + fmt(c0, 5) + ", |<xi xi>| = " + fmt(c2, 2) + ", neighbour " +
                        fmt(c1, 2));
    }
    {  // Parseval
        NoiseSource rng(12);
        ComplexVector f(g.size());
        rng.fill_circular(f);
        const auto s = forward(g, f);
        double a = 0.0, b = 0.0;
        for (std::size_t m = 0; m < f.size(); ++m) {
            a += std::norm(f[m]);
            b += std::norm(s[m]);
        }
        const double rel = std::abs(a - b) / a;
        pass &= rel < 1e-12;
        parts.push_back("Parseval rel err " + fmt(rel, 2));
    }
    {  // linear step against the closed form
        SimParams q;
        q.F = 0.0;
        q.epsilon = 0.0;
        q.pump.kind = PumpKind::Flat;
        const double k = g.k()[jc];
        FieldState s(q.n_points);
        for (std::size_t m = 0; m < s.size(); ++m) s.signal[m] = 1e-6 * std::polar(1.0, k * g.x()[m]);
        TrajectoryRecorder rec;
        RunControl ctl;
        ctl.initial = s;
        const auto out = run_trajectory(q, 10.0, rec, ctl).final_state;
        const Complex growth = std::exp(Complex(-1.0, -q.delta1 - 2.0 * k * k + q.v * k) * out.t);
        double err = 0.0;
        for (std::size_t m = 0; m < s.size(); ++m) err = std::max(err, std::abs(out.signal[m] - growth * s.signal[m]));
        const double rel = err / (1e-6 * std::abs(growth));
        pass &= rel < 1e-9;
        parts.push_back("linear step rel err " + fmt(rel, 2));
    }
    {  // OU reference variance
        const auto [a, b] = pair_at(ref, jc);
        const auto shot = shot_noise_level(*a, *b, 0.0);
        const double oracle = reference_mode_variance(ref.params);
        const double z = (shot.level - oracle) / shot.standard_error;
        pass &= std::abs(z) <= 3.0;
        parts.push_back("OU variance " + fmt(shot.level, 5) + " vs " + fmt(oracle, 5) + " (" + fmt(z, 2) + " sigma)");
    }
    {  // dt halving on the flat-pump X-(0) ratio
        const auto full = analyze(flat, ref, jc).x_minus;
        const auto flat_half = simulate(0.999, PumpKind::Flat, kLong, 0.0125);
        const auto ref_half = reference(kLong, {g.k()[jc]}, 0.0125);
        const auto half = analyze(flat_half, ref_half, jc).x_minus;
        const double drift = std::abs(half.ratio - full.ratio) / full.ratio;
        const double sigma = std::hypot(half.standard_error, full.standard_error) / full.ratio;
        pass &= drift < 0.02;
        parts.push_back("dt-halving ratio " + fmt(full.ratio, 4) + " -> " + fmt(half.ratio, 4) + ", drift " +
                        fmt(100.0 * drift, 3) + "% (1 sigma " + fmt(100.0 * sigma, 2) + "%)");
    }
    std::string detail;
    for (const auto& s : parts) detail += (detail.empty() ? "" : "; ") + s;
    report(9, "numerical hygiene", pass, detail);
}

}  // namespace

int main() {
    try {
        criterion1();
        criterion2();
        criterion3();

        SimParams defaults;
        const Grid grid(defaults);
        const double kc = critical_wavenumber(defaults.delta1);
        const std::size_t jc = grid.nearest_index(kc);
        const std::size_t j104 = grid.nearest_index(1.04 * kc);

        const auto flat = simulate(0.999, PumpKind::Flat, kLong);
        const auto below = simulate(0.999, PumpKind::Supergaussian, kLong);
        const auto f1001 = simulate(1.001, PumpKind::Supergaussian, kLong);
        const auto f1010 = simulate(1.01, PumpKind::Supergaussian, kLong);
        const auto f1025 = simulate(1.025, PumpKind::Supergaussian, kLong);
        const auto f1050 = simulate(1.05, PumpKind::Supergaussian, kAbsolute, 0.025, true);
        const std::size_t jm = *f1050.rec.dominant_index();

        // One reference covers every pair: the empty cavity does not see the pump.
        std::set<std::size_t> bins{jc, j104, jm};
        std::vector<double> ks;
        for (auto j : bins) ks.push_back(grid.k()[j]);
        const auto ref = reference(kLong, ks);

        // 4
        const auto a_flat = analyze(flat, ref, jc);
        const auto a_below = analyze(below, ref, jc);
        report(4, "below-threshold squeezing",
               std::abs(a_flat.x_minus.ratio - 0.50) <= 0.07 && a_below.x_minus.ratio > 0.55 &&
                   a_below.x_minus.ratio < 0.75,
               "Var X-(0)/shot at k_c: flat " + fmt(a_flat.x_minus.ratio) + " +- " +
                   fmt(a_flat.x_minus.standard_error, 2) + ", supergaussian " + fmt(a_below.x_minus.ratio) + " +- " +
                   fmt(a_below.x_minus.standard_error, 2) + " (" + fmt(kLong) + " t.u.)");

        // 5
        const auto a1001 = analyze(f1001, ref, jc);
        const auto a1010 = analyze(f1010, ref, jc);
        const auto a1025 = analyze(f1025, ref, jc);
        const double r1 = a1001.x_minus.ratio, r2 = a1010.x_minus.ratio, r3 = a1025.x_minus.ratio;
        report(5, "squeezing loss ordering", r1 < 1.0 && 1.0 < r2 && r2 < r3 && r3 > 10.0,
               "Var X-(0)/shot at k_c: F=1.001 " + fmt(r1) + " +- " + fmt(a1001.x_minus.standard_error, 2) +
                   ", F=1.01 " + fmt(r2) + " +- " + fmt(a1010.x_minus.standard_error, 2) + ", F=1.025 " + fmt(r3) +
                   " +- " + fmt(a1025.x_minus.standard_error, 2) + " (eps=" + fmt(defaults.epsilon) + ")");

        // 6
        const double grid_step = M_PI / static_cast<double>(kThetaPoints);
        const double below_argmin = a_below.scan.argmin_theta;
        report(6, "angle scan", std::abs(below_argmin) <= M_PI / 64.0 && a1025.scan.exact_argmin < 0.0,
               "F=0.999 grid argmin " + fmt(below_argmin, 3) + " (step " + fmt(grid_step, 3) + "), F=1.025 argmin " +
                   fmt(a1025.scan.exact_argmin, 3) + " (grid " + fmt(a1025.scan.argmin_theta, 3) + ")");

        // 7
        const auto ref2 = reference(kLong, {kc}, 0.025, 1);
        const auto [qa, qb] = pair_at(ref2, jc);
        const auto id_ref = intensity_difference(*qa, *qb, a1001.shot.mode_variance);
        const auto& id1 = a1001.twin;
        const auto& id2 = a1010.twin;
        report(7, "twin-beam sign pattern",
               id1.value + 3.0 * id1.standard_error < 0.0 &&
                   std::abs(id_ref.value) <= 3.0 * id_ref.standard_error &&
                   id2.value - 3.0 * id2.standard_error > 0.0,
               "<:dn^2:>/se: F=1.001 " + fmt(id1.value / id1.standard_error, 3) + ", reference " +
                   fmt(id_ref.value / id_ref.standard_error, 3) + ", F=1.01 " +
                   fmt(id2.value / id2.standard_error, 3) + " (normalized " + fmt(id1.normalized, 3) + ", " +
                   fmt(id_ref.normalized, 3) + ", " + fmt(id2.normalized, 3) + ")");

        // 8
        {
            // Below threshold: sum superposition at k_c.
            const auto [a, b] = pair_at(below, jc);
            const auto z = rotate_to_axes(superposition_samples(demodulate(*a, defaults.v), demodulate(*b, defaults.v),
                                                                Superposition::Sum));
            const auto ax = principal_axes(z);
            const auto h = accumulate_wigner(z);
            const double kre = distribution_kurtosis(h.centers_re(), h.marginal_re());
            const double kim = distribution_kurtosis(h.centers_im(), h.marginal_im());
            const bool ok_below = ax.var_major / ax.var_minor > 4.0 && kre >= 2.7 && kre <= 3.3 && kim >= 2.7 &&
                                  kim <= 3.3;

            // Convective: sum superposition at 1.04 k_c, undamped = major axis.
            const auto [c, d] = pair_at(f1025, j104);
            const auto w = rotate_to_axes(superposition_samples(demodulate(*c, defaults.v), demodulate(*d, defaults.v),
                                                                Superposition::Sum));
            const double excess = moments(project(w, 0.0)).kurtosis() - 3.0;
            const auto coarse = accumulate_wigner(w, {32, 32, std::nullopt, 5.0});
            const auto [mr, mi] = coarse.mode();
            const bool at_origin = coarse.touches_origin(mr, mi);
            const bool ok_conv = excess > 1.0 && at_origin;

            // Absolute: single mode at k_M, cut through Im = 0 on coarse bins.
            const auto s = demodulate(*f1050.rec.find(jm), defaults.v);
            const auto hm = accumulate_wigner(s.demodulated, {32, 32, std::nullopt, 5.0});
            const auto cut = hm.cut_re();
            const auto cen = hm.centers_re();
            const std::size_t half = cut.size() / 2;
            std::size_t pl = 0, pr = half;
            for (std::size_t i = 0; i < half; ++i)
                if (cut[i] > cut[pl]) pl = i;
            for (std::size_t i = half; i < cut.size(); ++i)
                if (cut[i] > cut[pr]) pr = i;
            const double centre = std::max(cut[half - 1], cut[half]);
            const double lo = std::min(cut[pl], cut[pr]), hi = std::max(cut[pl], cut[pr]);
            const double asym = std::abs(cen[pl] + cen[pr]) / (std::abs(cen[pl]) + std::abs(cen[pr]));
            const bool away = pl + 1 < half && pr > half;
            const bool ok_abs = away && centre < 0.8 * lo && lo >= 0.5 * hi && asym <= 0.25;

            report(8, "Wigner morphology", ok_below && ok_conv && ok_abs,
                   std::string("below ") + (ok_below ? "ok" : "fails") + " (axis ratio " +
                       fmt(ax.var_major / ax.var_minor, 3) + ", marginal kurtosis " + fmt(kre, 3) + "/" +
                       fmt(kim, 3) + "); convective " + (ok_conv ? "ok" : "fails") + " (1.04 k_c excess kurtosis " +
                       fmt(excess, 3) + ", mode at origin " + (at_origin ? "yes" : "no") + "); absolute " +
                       (ok_abs ? "ok" : "fails") + " (k_M bin " + std::to_string(jm) + ", cut peaks at " +
                       fmt(cen[pl], 3) + " and " + fmt(cen[pr], 3) + ", heights " + fmt(cut[pl], 3) + "/" +
                       fmt(cut[pr], 3) + ", centre " + fmt(centre, 3) + ")");
        }

        // 9
        criterion9(flat, ref, jc);
    } catch (const std::exception& e) {
        std::printf("acceptance aborted: %s\n", e.what());
        return 2;
    }
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
