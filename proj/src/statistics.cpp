#include "dopo/statistics.hpp"

#include "dopo/params.hpp"
#include "dopo/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace dopo {

void RunningMoments::add(double x) {
    RunningMoments one;
    one.n_ = 1;
    one.mean_ = x;
    merge(one);
}

void RunningMoments::merge(const RunningMoments& o) {
    if (o.n_ == 0) return;
    if (n_ == 0) {
        *this = o;
        return;
    }
    const double na = static_cast<double>(n_);
    const double nb = static_cast<double>(o.n_);
    const double n = na + nb;
    const double d = o.mean_ - mean_;
    const double d2 = d * d;
    const double m2 = m2_ + o.m2_ + d2 * na * nb / n;
    const double m3 = m3_ + o.m3_ + d * d2 * na * nb * (na - nb) / (n * n) +
                      3.0 * d * (na * o.m2_ - nb * m2_) / n;
    const double m4 = m4_ + o.m4_ + d2 * d2 * na * nb * (na * na - na * nb + nb * nb) / (n * n * n) +
                      6.0 * d2 * (na * na * o.m2_ + nb * nb * m2_) / (n * n) +
                      4.0 * d * (na * o.m3_ - nb * m3_) / n;
    n_ += o.n_;
    mean_ += d * nb / n;
    m2_ = m2;
    m3_ = m3;
    m4_ = m4;
}

double RunningMoments::variance() const { return n_ > 0 ? m2_ / static_cast<double>(n_) : 0.0; }

double RunningMoments::sample_variance() const {
    return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0;
}

double RunningMoments::kurtosis() const {
    return m2_ > 0.0 ? static_cast<double>(n_) * m4_ / (m2_ * m2_) : 0.0;
}

double RunningMoments::skewness() const {
    return m2_ > 0.0 ? std::sqrt(static_cast<double>(n_)) * m3_ / std::pow(m2_, 1.5) : 0.0;
}

RunningMoments RunningMoments::from_central(std::uint64_t n, double mean, double m2, double m3,
                                            double m4) {
    RunningMoments out;
    out.n_ = n;
    out.mean_ = mean;
    out.m2_ = m2;
    out.m3_ = m3;
    out.m4_ = m4;
    return out;
}

RunningMoments moments(std::span<const double> x) {
    // Two-pass for accuracy; the result is still mergeable.
    if (x.empty()) return {};
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : x) {
        const double d = v - mean;
        const double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    return RunningMoments::from_central(x.size(), mean, m2, m3, m4);
}

double population_variance(std::span<const double> x) {
    if (x.empty()) return 0.0;
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    double s = 0.0;
    for (double v : x) s += (v - mean) * (v - mean);
    return s / static_cast<double>(x.size());
}

double autocorrelation_time(std::span<const double> x) {
    const std::size_t n = x.size();
    if (n < 4) return 1.0;
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);

    std::size_t m = 1;
    while (m < 2 * n) m <<= 1;
    Transform fft(m);
    auto buf = fft.buffer();
    std::fill(buf.begin(), buf.end(), Complex{});
    for (std::size_t i = 0; i < n; ++i) buf[i] = x[i] - mean;
    fft.forward_raw();
    for (auto& z : buf) z = std::norm(z);
    fft.inverse_raw();
    const double c0 = buf[0].real();
    if (!(c0 > 0.0)) return 1.0;

    double tau = 1.0;
    for (std::size_t lag = 1; lag < n; ++lag) {
        const double rho = buf[lag].real() / c0;
        tau += 2.0 * rho;
        if (static_cast<double>(lag) >= 5.0 * tau) break;
    }
    return std::max(tau, 1.0);
}

std::size_t default_block_length(std::span<const double> x) {
    const double tau = autocorrelation_time(x);
    const std::size_t cap = std::max<std::size_t>(1, x.size() / 20);
    return std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(10.0 * tau)), 1, cap);
}

BootstrapResult block_bootstrap(std::span<const double> x, std::size_t block_length,
                                const std::function<double(std::span<const double>)>& statistic,
                                std::size_t resamples, std::uint64_t seed) {
    if (x.empty()) throw Error("bootstrap of an empty series");
    BootstrapResult out;
    out.estimate = statistic(x);
    out.block_length = std::clamp<std::size_t>(block_length, 1, x.size());
    out.resamples = resamples;
    if (resamples == 0) return out;

    const std::size_t n = x.size();
    const std::size_t b = out.block_length;
    const std::size_t starts = n - b + 1;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, starts - 1);
    std::vector<double> sample(n);
    std::vector<double> reps(resamples);
    for (auto& r : reps) {
        std::size_t filled = 0;
        while (filled < n) {
            const std::size_t s = pick(rng);
            const std::size_t len = std::min(b, n - filled);
            std::copy_n(x.begin() + static_cast<std::ptrdiff_t>(s), len,
                        sample.begin() + static_cast<std::ptrdiff_t>(filled));
            filled += len;
        }
        r = statistic(sample);
    }
    double mean = 0.0;
    for (double r : reps) mean += r;
    mean /= static_cast<double>(reps.size());
    double var = 0.0;
    for (double r : reps) var += (r - mean) * (r - mean);
    out.standard_error = std::sqrt(var / static_cast<double>(reps.size() > 1 ? reps.size() - 1 : 1));
    std::sort(reps.begin(), reps.end());
    auto quantile = [&](double q) {
        const double pos = q * static_cast<double>(reps.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const auto hi = std::min(lo + 1, reps.size() - 1);
        const double f = pos - static_cast<double>(lo);
        return reps[lo] * (1.0 - f) + reps[hi] * f;
    };
    out.ci_low = quantile(0.025);
    out.ci_high = quantile(0.975);
    return out;
}

}  // namespace dopo
