#include "dopo/stability.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

namespace dopo {

Complex steady_state(double e0, double delta0) { return e0 / Complex(1.0, delta0); }

Complex steady_state(const SimParams& params) {
    return steady_state(effective_drive(params), params.delta0);
}

DispersionBranch dispersion(double k, double F, double delta1, double v) {
    const double q = delta1 + 2.0 * k * k;
    const Complex root = std::sqrt(Complex(F * F - q * q, 0.0));
    const Complex base(-1.0, v * k);
    return {k, base + root, base - root};
}

double critical_wavenumber(double delta1) { return delta1 < 0.0 ? std::sqrt(-delta1 / 2.0) : 0.0; }

InstabilityPhases instability_phase(double k, double delta1, Complex pump_ss) {
    if (pump_ss == Complex{}) throw Error("instability direction undefined for zero pump");
    const double q = delta1 + 2.0 * k * k;
    const Complex root = std::sqrt(Complex(std::norm(pump_ss) - q * q, 0.0));
    const Complex iq(0.0, q);
    return {-(iq - root) / pump_ss, (iq + root) / pump_ss};
}

// ---------------------------------------------------------------------------
// Saddle-point search.
//
// With S = lambda_+ + 1 - i v k the dispersion relation is polynomial,
//   S^2 + q^2 - F^2 = 0,   q = delta1 + 2 k^2,
// so the square-root branch is followed by continuity through S rather than
// fixed by a principal value. The saddle condition d lambda/dk = 0 becomes
//   i v S - 4 k q = 0,
// and the absolute threshold adds Re lambda = -1 - v Im(k) + Re(S) = 0.

namespace {

struct SaddlePoint {
    Complex k;
    Complex s;
    double F = 1.0;
};

constexpr int kMaxNewton = 100;

// Dense solve by partial pivoting; returns false on a singular matrix.
template <std::size_t N>
bool solve_linear(std::array<std::array<double, N>, N> a, std::array<double, N>& b) {
    for (std::size_t c = 0; c < N; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < N; ++r)
            if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
        if (std::abs(a[piv][c]) < 1e-300) return false;
        std::swap(a[c], a[piv]);
        std::swap(b[c], b[piv]);
        for (std::size_t r = c + 1; r < N; ++r) {
            const double f = a[r][c] / a[c][c];
            for (std::size_t cc = c; cc < N; ++cc) a[r][cc] -= f * a[c][cc];
            b[r] -= f * b[c];
        }
    }
    for (std::size_t c = N; c-- > 0;) {
        for (std::size_t cc = c + 1; cc < N; ++cc) b[c] -= a[c][cc] * b[cc];
        b[c] /= a[c][c];
    }
    return true;
}

// Residuals: Re/Im of the dispersion polynomial, Re/Im of the saddle
// condition, and (when solving for F) the growth rate.
struct System {
    double v;
    double delta1;
    bool solve_f;

    std::size_t size() const { return solve_f ? 5 : 4; }

    std::array<double, 5> residual(const SaddlePoint& x) const {
        const Complex q = delta1 + 2.0 * x.k * x.k;
        const Complex disp = x.s * x.s + q * q - x.F * x.F;
        const Complex saddle = Complex(0.0, v) * x.s - 4.0 * x.k * q;
        const double growth = -1.0 - v * x.k.imag() + x.s.real();
        return {disp.real(), disp.imag(), saddle.real(), saddle.imag(), growth};
    }

    // Columns: Re k, Im k, Re S, Im S, F.
    std::array<std::array<double, 5>, 5> jacobian(const SaddlePoint& x) const {
        const Complex q = delta1 + 2.0 * x.k * x.k;
        const Complex disp_k = 8.0 * x.k * q;
        const Complex disp_s = 2.0 * x.s;
        const Complex saddle_k = -4.0 * q - 16.0 * x.k * x.k;
        const Complex saddle_s(0.0, v);
        std::array<std::array<double, 5>, 5> j{};
        auto fill = [&](std::size_t row, Complex dk, Complex ds) {
            // For analytic f: df/d(Re z) = f', df/d(Im z) = i f'.
            j[row] = {dk.real(), -dk.imag(), ds.real(), -ds.imag(), 0.0};
            j[row + 1] = {dk.imag(), dk.real(), ds.imag(), ds.real(), 0.0};
        };
        fill(0, disp_k, disp_s);
        fill(2, saddle_k, saddle_s);
        j[0][4] = -2.0 * x.F;
        j[4] = {0.0, -v, 1.0, 0.0, 0.0};
        return j;
    }
};

double norm_inf(const std::array<double, 5>& r, std::size_t n) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::abs(r[i]));
    return m;
}

// Damped Newton. Returns true on convergence; `x` holds the last iterate.
bool newton(const System& sys, SaddlePoint& x, int& iterations) {
    const std::size_t n = sys.size();
    auto r = sys.residual(x);
    double rn = norm_inf(r, n);
    for (int it = 0; it < kMaxNewton; ++it) {
        ++iterations;
        if (rn < 1e-14) return true;
        const auto jf = sys.jacobian(x);
        std::array<double, 5> step{};
        bool ok = false;
        if (sys.solve_f) {
            step = r;
            ok = solve_linear<5>(jf, step);
        } else {
            std::array<std::array<double, 4>, 4> j4{};
            std::array<double, 4> b4{};
            for (std::size_t a = 0; a < 4; ++a) {
                for (std::size_t b = 0; b < 4; ++b) j4[a][b] = jf[a][b];
                b4[a] = r[a];
            }
            ok = solve_linear<4>(j4, b4);
            std::copy(b4.begin(), b4.end(), step.begin());
        }
        if (!ok) return false;
        double lambda = 1.0;
        for (int ls = 0; ls < 30; ++ls) {
            SaddlePoint trial = x;
            trial.k -= lambda * Complex(step[0], step[1]);
            trial.s -= lambda * Complex(step[2], step[3]);
            if (sys.solve_f) trial.F -= lambda * step[4];
            const auto rt = sys.residual(trial);
            const double rtn = norm_inf(rt, n);
            if (std::isfinite(rtn) && (rtn < rn || rtn < 1e-14)) {
                x = trial;
                r = rt;
                rn = rtn;
                break;
            }
            lambda *= 0.5;
            if (ls == 29) return false;
        }
        double sn = 0.0;
        for (std::size_t i = 0; i < n; ++i) sn = std::max(sn, std::abs(lambda * step[i]));
        if (sn < 1e-15 && rn < 1e-11) return true;
    }
    return rn < 1e-11;
}

// Ginzburg-Landau estimate near k_c: lambda ~ (F - 1) - D dk^2 + i v k with
// D = -4 delta1, giving the saddle at dk = i v / (2D).
SaddlePoint seed_for(double v, double delta1) {
    const double kc = critical_wavenumber(delta1);
    const double d = -4.0 * delta1;
    SaddlePoint x;
    x.k = Complex(kc, v / (2.0 * d));
    x.F = 1.0 + v * v / (4.0 * d);
    const Complex q = delta1 + 2.0 * x.k * x.k;
    x.s = 4.0 * x.k * q / Complex(0.0, v);
    return x;
}

bool acceptable(const SaddlePoint& x, double v) {
    return std::isfinite(x.F) && x.F >= 1.0 - 1e-12 && x.k.imag() * v >= 0.0 &&
           x.k.real() > 0.0;
}

AbsoluteThreshold pack(const SaddlePoint& x, double v, int iterations, std::string method) {
    AbsoluteThreshold out;
    out.f_c = x.F;
    out.k_star = x.k;
    out.frequency = v * x.k.real() + x.s.imag();
    out.iterations = iterations;
    out.method = std::move(method);
    return out;
}

}  // namespace

AbsoluteThreshold absolute_threshold(double v, double delta1) {
    if (!(delta1 < 0.0)) throw ThresholdError("absolute threshold requires delta1 < 0");
    if (!std::isfinite(v)) throw ThresholdError("walk-off must be finite");
    v = std::abs(v);  // mirror symmetry k -> -k
    if (v == 0.0) {
        AbsoluteThreshold out;
        out.k_star = Complex(critical_wavenumber(delta1), 0.0);
        out.method = "trivial";
        return out;
    }

    int iterations = 0;
    SaddlePoint x = seed_for(v, delta1);
    if (newton({v, delta1, true}, x, iterations) && acceptable(x, v))
        return pack(x, v, iterations, "direct");

    // Continuation in v from a small walk-off, where the Ginzburg-Landau seed
    // is accurate.
    constexpr int kSteps = 32;
    x = seed_for(v / kSteps, delta1);
    bool ok = true;
    for (int i = 1; i <= kSteps && ok; ++i)
        ok = newton({v * i / kSteps, delta1, true}, x, iterations) && acceptable(x, v);
    if (ok) return pack(x, v, iterations, "continuation");

    // Bisection on F; for each F the saddle is tracked by Newton on the
    // dispersion and saddle conditions only.
    SaddlePoint tracked = seed_for(v, delta1);
    auto growth_at = [&](double F, bool& converged) {
        SaddlePoint trial = tracked;
        trial.F = F;
        const Complex q = delta1 + 2.0 * trial.k * trial.k;
        trial.s = 4.0 * trial.k * q / Complex(0.0, v);
        converged = newton({v, delta1, false}, trial, iterations);
        if (converged) tracked = trial;
        return -1.0 - v * trial.k.imag() + trial.s.real();
    };
    double lo = 1.0;
    double hi = seed_for(v, delta1).F;
    bool conv = false;
    double g_hi = growth_at(hi, conv);
    for (int expand = 0; conv && g_hi < 0.0 && expand < 40; ++expand) {
        lo = hi;
        hi = 1.0 + 2.0 * (hi - 1.0);
        g_hi = growth_at(hi, conv);
    }
    if (conv && g_hi >= 0.0) {
        for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
            const double mid = 0.5 * (lo + hi);
            const double g = growth_at(mid, conv);
            if (!conv) break;
            (g < 0.0 ? lo : hi) = mid;
        }
        if (conv) {
            tracked.F = 0.5 * (lo + hi);
            return pack(tracked, v, iterations, "bisection");
        }
    }

    std::ostringstream msg;
    msg << "absolute threshold did not converge for v=" << v << ", delta1=" << delta1
        << " (last F bracket [" << lo << ", " << hi << "], last k*=" << x.k.real() << "+"
        << x.k.imag() << "i, iterations=" << iterations << ")";
    throw ThresholdError(msg.str());
}

std::string to_string(Regime regime) {
    switch (regime) {
        case Regime::BelowThreshold: return "below-threshold";
        case Regime::Convective: return "convective";
        case Regime::AbsolutelyUnstable: return "absolutely-unstable";
    }
    return "unknown";
}

RegimeClassification classify(double F, double v, double delta1) {
    constexpr double kBoundaryTol = 1e-9;
    RegimeClassification c;
    c.f_abs = absolute_threshold(v, delta1).f_c;
    if (F >= c.f_abs - kBoundaryTol) {
        c.regime = Regime::AbsolutelyUnstable;
    } else if (F >= c.f_conv - kBoundaryTol) {
        c.regime = Regime::Convective;
    } else {
        c.regime = Regime::BelowThreshold;
    }
    c.on_boundary = std::abs(F - c.f_conv) <= kBoundaryTol || std::abs(F - c.f_abs) <= kBoundaryTol;
    return c;
}

std::vector<DiagramRow> stability_diagram(const std::vector<double>& delta1_values,
                                          const std::vector<double>& v_values,
                                          std::size_t threads) {
    for (double d : delta1_values)
        if (!(d < 0.0)) throw Error("stability diagram requires strictly negative delta1 values");
    std::vector<DiagramRow> rows;
    for (double d : delta1_values)
        for (double v : v_values) rows.push_back({d, v, std::numeric_limits<double>::quiet_NaN(), false});

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < rows.size(); i = next++) {
            try {
                rows[i].f_c = absolute_threshold(rows[i].v, rows[i].delta1).f_c;
                rows[i].converged = true;
            } catch (const ThresholdError&) {
                rows[i].converged = false;
            }
        }
    };
    threads = std::max<std::size_t>(1, std::min(threads, rows.size()));
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    return rows;
}

}  // namespace dopo
