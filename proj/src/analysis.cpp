#include "dopo/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dopo {

FarField far_field(const FieldState& state, const Grid& grid) {
    const auto spectrum = forward(grid, state.signal);
    FarField out;
    out.k = grid.k();
    out.modulus.resize(spectrum.size());
    std::transform(spectrum.begin(), spectrum.end(), out.modulus.begin(),
                   [](const Complex& z) { return std::abs(z); });
    return out;
}

ModeSeries demodulate(ModeSeries series, double v) {
    const double omega = v * series.k;
    series.demodulated.resize(series.size());
    for (std::size_t i = 0; i < series.size(); ++i)
        series.demodulated[i] = series.amplitudes[i] * std::polar(1.0, -omega * series.times[i]);
    return series;
}

ComplexVector remodulate(const ModeSeries& series, double v) {
    if (!series.is_demodulated()) throw Error("series has no demodulated samples");
    const double omega = v * series.k;
    ComplexVector raw(series.size());
    for (std::size_t i = 0; i < series.size(); ++i)
        raw[i] = series.demodulated[i] * std::polar(1.0, omega * series.times[i]);
    return raw;
}

namespace {

void check_pair(const ModeSeries& a, const ModeSeries& b) {
    if (a.times != b.times) throw Error("mode series have mismatched time axes");
    if (std::abs(a.k + b.k) > 1e-9 * std::max(1.0, std::abs(a.k)))
        throw Error("mode series are not a +k/-k pair");
    if (a.is_demodulated() != b.is_demodulated())
        throw Error("mode pair mixes demodulated and raw samples");
}

}  // namespace

ComplexVector superposition_samples(const ModeSeries& plus_k, const ModeSeries& minus_k,
                                    Superposition which) {
    check_pair(plus_k, minus_k);
    const auto& a = plus_k.slow();
    const auto& b = minus_k.slow();
    const double sign = which == Superposition::Sum ? 1.0 : -1.0;
    ComplexVector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + sign * b[i];
    return out;
}

std::vector<double> superposition_quadrature(const ModeSeries& plus_k, const ModeSeries& minus_k,
                                             double theta, Superposition which) {
    const auto z = superposition_samples(plus_k, minus_k, which);
    const Complex phase = std::polar(1.0, theta);
    std::vector<double> x(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) x[i] = (z[i] * phase).real();
    return x;
}

ShotNoise shot_noise_level(const ModeSeries& ref_plus_k, const ModeSeries& ref_minus_k,
                           double theta, Superposition which, double min_effective) {
    const auto x = superposition_quadrature(ref_plus_k, ref_minus_k, theta, which);
    if (x.empty()) throw Error("empty reference series (no samples after t_transient)");
    const double tau = autocorrelation_time(x);
    ShotNoise out;
    out.samples = x.size();
    out.effective_samples = static_cast<double>(x.size()) / tau;
    if (out.effective_samples < min_effective)
        throw Error("reference series too short for a shot-noise estimate (" +
                    std::to_string(out.effective_samples) + " effective samples)");
    const auto boot = block_bootstrap(x, default_block_length(x), population_variance, 200);
    out.level = boot.estimate;
    out.standard_error = boot.standard_error;

    double p = 0.0;
    for (std::size_t i = 0; i < ref_plus_k.size(); ++i)
        p += std::norm(ref_plus_k.amplitudes[i]) + std::norm(ref_minus_k.amplitudes[i]);
    out.mode_variance = p / (2.0 * static_cast<double>(ref_plus_k.size()));
    return out;
}

SqueezingResult squeezing_ratio(std::span<const double> quadrature, double shot_level) {
    if (!(shot_level > 0.0)) throw Error("shot-noise level must be positive");
    if (quadrature.size() < 40) throw Error("quadrature series too short");
    SqueezingResult out;
    out.shot_level = shot_level;
    out.correlation_time = autocorrelation_time(quadrature);
    out.block_length = default_block_length(quadrature);
    const auto boot = block_bootstrap(quadrature, out.block_length, population_variance);
    out.variance = boot.estimate;
    out.ratio = boot.estimate / shot_level;
    out.standard_error = boot.standard_error / shot_level;
    out.ci_low = boot.ci_low / shot_level;
    out.ci_high = boot.ci_high / shot_level;

    const std::size_t half = quadrature.size() / 2;
    const auto first = quadrature.first(half);
    const auto second = quadrature.subspan(half);
    const auto b1 = block_bootstrap(first, default_block_length(first), population_variance, 200);
    const auto b2 = block_bootstrap(second, default_block_length(second), population_variance, 200);
    const double sigma = std::hypot(b1.standard_error, b2.standard_error);
    out.nonstationary = std::abs(b1.estimate - b2.estimate) > 3.0 * sigma;
    return out;
}

std::vector<double> theta_grid(std::size_t points) {
    std::vector<double> t(points);
    for (std::size_t i = 0; i < points; ++i)
        t[i] = -M_PI / 2.0 + M_PI * static_cast<double>(i) / static_cast<double>(points);
    return t;
}

AngleScan angle_scan(const ModeSeries& plus_k, const ModeSeries& minus_k,
                     const std::vector<double>& thetas, double shot_level, Superposition which) {
    if (!(shot_level > 0.0)) throw Error("shot-noise level must be positive");
    if (thetas.empty()) throw Error("empty angle grid");
    // Var Re(z e^{i theta}) = (Szz + Re(e^{2 i theta} Czz)) / 2 from the
    // circular and noncircular second moments of the centred samples.
    const auto z = superposition_samples(plus_k, minus_k, which);
    if (z.empty()) throw Error("empty mode series");
    Complex mean{};
    for (const auto& s : z) mean += s;
    mean /= static_cast<double>(z.size());
    double szz = 0.0;
    Complex czz{};
    for (const auto& s : z) {
        const Complex d = s - mean;
        szz += std::norm(d);
        czz += d * d;
    }
    szz /= static_cast<double>(z.size());
    czz /= static_cast<double>(z.size());

    AngleScan scan;
    // Minimum where e^{2 i theta} Czz points along the negative real axis.
    double t = 0.5 * (M_PI - std::arg(czz));
    if (t >= M_PI / 2.0) t -= M_PI;
    scan.exact_argmin = t;
    scan.min_ratio = std::numeric_limits<double>::infinity();
    for (double theta : thetas) {
        const double var = 0.5 * (szz + (std::polar(1.0, 2.0 * theta) * czz).real());
        const double ratio = var / shot_level;
        scan.rows.push_back({theta, var, ratio});
        if (ratio < scan.min_ratio) {
            scan.min_ratio = ratio;
            scan.argmin_theta = theta;
        }
    }
    return scan;
}

IntensityDifference intensity_difference(const ModeSeries& plus_k, const ModeSeries& minus_k,
                                         double vacuum_mode_variance) {
    check_pair(plus_k, minus_k);
    if (!(vacuum_mode_variance > 0.0)) throw Error("vacuum mode variance must be positive");
    if (plus_k.size() < 40) throw Error("insufficient samples for the intensity difference");
    const double c = 2.0 * vacuum_mode_variance;
    std::vector<double> y(plus_k.size());
    double total_n = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double na = std::norm(plus_k.amplitudes[i]);
        const double nb = std::norm(minus_k.amplitudes[i]);
        const double d = na - nb;
        y[i] = d * d - c * (na + nb) + 0.5 * c * c;
        total_n += na + nb - c;
    }
    total_n /= static_cast<double>(y.size());
    auto mean = [](std::span<const double> s) {
        double m = 0.0;
        for (double v : s) m += v;
        return m / static_cast<double>(s.size());
    };
    IntensityDifference out;
    out.block_length = default_block_length(y);
    const auto boot = block_bootstrap(y, out.block_length, mean);
    out.value = boot.estimate;
    out.standard_error = boot.standard_error;
    out.ci_low = boot.ci_low;
    out.ci_high = boot.ci_high;
    out.normalized = total_n > 0.0 ? out.value / (c * total_n) : 0.0;
    return out;
}

PrincipalAxes principal_axes(std::span<const Complex> samples) {
    if (samples.empty()) throw Error("principal axes of an empty sample set");
    Complex mean{};
    for (const auto& s : samples) mean += s;
    mean /= static_cast<double>(samples.size());
    double cxx = 0.0, cyy = 0.0, cxy = 0.0;
    for (const auto& s : samples) {
        const Complex d = s - mean;
        cxx += d.real() * d.real();
        cyy += d.imag() * d.imag();
        cxy += d.real() * d.imag();
    }
    const double n = static_cast<double>(samples.size());
    cxx /= n;
    cyy /= n;
    cxy /= n;
    const double tr = 0.5 * (cxx + cyy);
    const double disc = std::sqrt(0.25 * (cxx - cyy) * (cxx - cyy) + cxy * cxy);
    PrincipalAxes out;
    out.angle_major = 0.5 * std::atan2(2.0 * cxy, cxx - cyy);
    out.var_major = tr + disc;
    out.var_minor = tr - disc;
    return out;
}

std::vector<double> project(std::span<const Complex> samples, double angle) {
    const Complex rot = std::polar(1.0, -angle);
    std::vector<double> out(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) out[i] = (samples[i] * rot).real();
    return out;
}

PairAnalysis analyze_pair(const ModeSeries& plus_k, const ModeSeries& minus_k,
                          const ModeSeries& ref_plus_k, const ModeSeries& ref_minus_k, double v,
                          std::size_t theta_points) {
    const auto a = demodulate(plus_k, v);
    const auto b = demodulate(minus_k, v);
    PairAnalysis out;
    out.k_index = plus_k.k_index;
    out.mirror_index = minus_k.k_index;
    out.k = plus_k.k;
    out.shot_index = ref_plus_k.k_index;
    out.shot = shot_noise_level(ref_plus_k, ref_minus_k, 0.0, Superposition::Difference);
    // A circular reference gives the same level for sum and difference.
    out.x_minus = squeezing_ratio(superposition_quadrature(a, b, 0.0, Superposition::Difference), out.shot.level);
    out.x_plus = squeezing_ratio(superposition_quadrature(a, b, 0.0, Superposition::Sum), out.shot.level);
    out.scan = angle_scan(a, b, theta_grid(theta_points), out.shot.level);
    out.twin = intensity_difference(a, b, out.shot.mode_variance);
    const auto z = superposition_samples(a, b, Superposition::Sum);
    out.sum_axes = principal_axes(z);
    return out;
}

}  // namespace dopo
