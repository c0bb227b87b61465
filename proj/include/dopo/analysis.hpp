#pragma once

// Observables built from recorded trajectories: far fields, demodulated mode
// amplitudes, superposition quadratures, shot-noise calibration, squeezing
// ratios, angle scans and the normally ordered intensity-difference moment.
//
// Stochastic samples are Wigner (symmetric-ordering) samples. Shot-noise
// normalization always goes through a co-run empty-cavity reference with the
// same eps, grid and dt, so transform and discretization factors cancel.

#include "dopo/mode_series.hpp"
#include "dopo/params.hpp"
#include "dopo/spectral.hpp"
#include "dopo/statistics.hpp"

#include <optional>
#include <string>
#include <vector>

namespace dopo {

struct FarField {
    std::vector<double> k;  // transform order
    std::vector<double> modulus;
};

/// |forward(signal)| with wavenumber labels.
FarField far_field(const FieldState& state, const Grid& grid);

/// Fills `demodulated` with amplitudes * exp(-i v k t).
ModeSeries demodulate(ModeSeries series, double v);
/// Inverse of demodulate: raw amplitudes recomputed from `demodulated`.
ComplexVector remodulate(const ModeSeries& series, double v);

enum class Superposition { Sum, Difference };

/// X_pm(theta)(t) = Re{[a'(k, t) pm a'(-k, t)] e^{i theta}} using demodulated
/// amplitudes when present. The series must share a time axis and sit on
/// mirror bins.
std::vector<double> superposition_quadrature(const ModeSeries& plus_k, const ModeSeries& minus_k,
                                             double theta, Superposition which);

/// a'(k) pm a'(-k) as complex samples (phase-space trajectory of the pair).
ComplexVector superposition_samples(const ModeSeries& plus_k, const ModeSeries& minus_k,
                                    Superposition which);

struct ShotNoise {
    /// Variance of Re{[s(k) pm s(-k)] e^{i theta}} of the reference process.
    double level = 0.0;
    double standard_error = 0.0;
    /// Per-mode variance <|s_k|^2> averaged over the pair; equals `level` for a
    /// circular process.
    double mode_variance = 0.0;
    std::size_t samples = 0;
    double effective_samples = 0.0;
};

inline constexpr double kMinEffectiveSamples = 50.0;

/// Throws dopo::Error when fewer than `min_effective` decorrelated samples
/// are available.
ShotNoise shot_noise_level(const ModeSeries& ref_plus_k, const ModeSeries& ref_minus_k,
                           double theta, Superposition which = Superposition::Difference,
                           double min_effective = kMinEffectiveSamples);

struct SqueezingResult {
    double ratio = 0.0;  // Var_S(X) / shot
    double variance = 0.0;
    double shot_level = 0.0;
    double standard_error = 0.0;  // of the ratio
    double ci_low = 0.0;
    double ci_high = 0.0;
    double correlation_time = 0.0;  // samples
    std::size_t block_length = 1;
    /// First- and second-half variances differ by more than 3 sigma.
    bool nonstationary = false;
};

SqueezingResult squeezing_ratio(std::span<const double> quadrature, double shot_level);

struct AngleScanRow {
    double theta = 0.0;
    double variance = 0.0;
    double ratio = 0.0;
};

struct AngleScan {
    std::vector<AngleScanRow> rows;
    double argmin_theta = 0.0;  // on the grid
    double min_ratio = 0.0;
    /// Minimizer of the closed-form variance, wrapped into [-pi/2, pi/2).
    double exact_argmin = 0.0;
};

/// Uniform grid of `points` angles on [-pi/2, pi/2).
std::vector<double> theta_grid(std::size_t points);

AngleScan angle_scan(const ModeSeries& plus_k, const ModeSeries& minus_k,
                     const std::vector<double>& thetas, double shot_level,
                     Superposition which = Superposition::Difference);

struct IntensityDifference {
    /// <:(n_k - n_{-k})^2:>, in units of the squared per-mode field scale.
    double value = 0.0;
    double standard_error = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    /// value / (c * (<n_k> + <n_-k>)): -1/2 is the ideal intracavity twin-beam
    /// limit, 0 the coherent-state level.
    double normalized = 0.0;
    std::size_t block_length = 1;
};

/// Normally ordered intensity-difference moment from Wigner samples.
/// `vacuum_mode_variance` is <|s_k|^2> of the reference; the commutator
/// scale is c = 2 * vacuum_mode_variance and
///   <:(n_k - n_-k)^2:> = <(|a|^2 - |b|^2)^2>_W - c (<|a|^2>_W + <|b|^2>_W) + c^2 / 2.
IntensityDifference intensity_difference(const ModeSeries& plus_k, const ModeSeries& minus_k,
                                         double vacuum_mode_variance);

/// Principal axes of a set of complex samples.
struct PrincipalAxes {
    double angle_major = 0.0;  // radians, direction of largest variance
    double var_major = 0.0;
    double var_minor = 0.0;
};

PrincipalAxes principal_axes(std::span<const Complex> samples);

/// Sample set along direction `angle`: Re(z e^{-i angle}).
std::vector<double> project(std::span<const Complex> samples, double angle);

/// Everything reported for one +k/-k pair against its reference pair.
struct PairAnalysis {
    std::size_t k_index = 0;
    std::size_t mirror_index = 0;
    double k = 0.0;
    /// Reference bin used for the shot level; differs from k_index when the
    /// reference did not record this pair and the nearest one stands in.
    std::size_t shot_index = 0;
    ShotNoise shot;
    SqueezingResult x_minus;  // X-(0)
    SqueezingResult x_plus;   // X+(0)
    AngleScan scan;           // X-(theta)
    IntensityDifference twin;
    /// Axes of the sum superposition a(k) + a(-k).
    PrincipalAxes sum_axes;
};

/// Demodulates both series (walk-off v) and runs the full set of estimators.
/// The reference pair is used as recorded (it has no walk-off).
PairAnalysis analyze_pair(const ModeSeries& plus_k, const ModeSeries& minus_k,
                          const ModeSeries& ref_plus_k, const ModeSeries& ref_minus_k, double v,
                          std::size_t theta_points);

}  // namespace dopo
