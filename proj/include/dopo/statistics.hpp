#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace dopo {

/// Mergeable running moments up to fourth order (pairwise update formulas),
/// so per-trajectory accumulators can be combined across an ensemble.
class RunningMoments {
public:
    /// Builds an accumulator from central sums (sum of (x-mean)^p, p=2..4).
    static RunningMoments from_central(std::uint64_t n, double mean, double m2, double m3, double m4);

    void add(double x);
    void merge(const RunningMoments& other);

    std::uint64_t count() const { return n_; }
    double mean() const { return mean_; }
    /// Population variance (divides by n).
    double variance() const;
    double sample_variance() const;
    /// m4 / m2^2; 3 for a Gaussian.
    double kurtosis() const;
    double skewness() const;

private:
    std::uint64_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
    double m3_ = 0.0;
    double m4_ = 0.0;
};

RunningMoments moments(std::span<const double> x);

/// Integrated autocorrelation time in samples, tau = 1 + 2 sum rho(l), with
/// the self-consistent window l <= 5 tau. Returns 1 for white input.
double autocorrelation_time(std::span<const double> x);

struct BootstrapResult {
    double estimate = 0.0;
    double standard_error = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::size_t block_length = 1;
    std::size_t resamples = 0;
};

/// Moving-block bootstrap of `statistic` over a correlated series. The RNG is
/// seeded from `seed`, so repeated calls give identical intervals.
BootstrapResult block_bootstrap(std::span<const double> x, std::size_t block_length,
                                const std::function<double(std::span<const double>)>& statistic,
                                std::size_t resamples = 400, std::uint64_t seed = 0x5eed);

/// Block length of ten correlation times, clamped to [1, n/20].
std::size_t default_block_length(std::span<const double> x);

double population_variance(std::span<const double> x);

}  // namespace dopo
