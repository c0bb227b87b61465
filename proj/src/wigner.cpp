#include "dopo/wigner.hpp"

#include <algorithm>
#include <cmath>

namespace dopo {

WignerHistogram::WignerHistogram(HistogramExtents extents, std::size_t n_re, std::size_t n_im)
    : extents_(extents), n_re_(n_re), n_im_(n_im), counts_(n_re * n_im, 0) {
    if (n_re == 0 || n_im == 0) throw Error("histogram needs at least one bin per axis");
    if (!(extents.re_max > extents.re_min) || !(extents.im_max > extents.im_min))
        throw Error("histogram extents must be nonempty");
}

WignerHistogram WignerHistogram::from_counts(HistogramExtents extents, std::size_t n_re,
                                             std::size_t n_im, std::vector<std::uint64_t> counts,
                                             std::uint64_t outside) {
    WignerHistogram h(extents, n_re, n_im);
    if (counts.size() != n_re * n_im) throw Error("histogram count array has the wrong size");
    h.counts_ = std::move(counts);
    h.total_ = 0;
    for (auto c : h.counts_) h.total_ += c;
    h.outside_ = outside;
    return h;
}

void WignerHistogram::add(Complex z) {
    auto bin = [](double v, double lo, double hi, std::size_t n) -> std::ptrdiff_t {
        if (!(v >= lo && v <= hi)) return -1;
        const auto i = static_cast<std::ptrdiff_t>(std::floor((v - lo) / (hi - lo) * static_cast<double>(n)));
        return std::min<std::ptrdiff_t>(i, static_cast<std::ptrdiff_t>(n) - 1);
    };
    const auto ir = bin(z.real(), extents_.re_min, extents_.re_max, n_re_);
    const auto ii = bin(z.imag(), extents_.im_min, extents_.im_max, n_im_);
    if (ir < 0 || ii < 0) {
        ++outside_;
        return;
    }
    ++counts_[static_cast<std::size_t>(ir) * n_im_ + static_cast<std::size_t>(ii)];
    ++total_;
}

void WignerHistogram::merge(const WignerHistogram& other) {
    const auto& a = extents_;
    const auto& b = other.extents_;
    if (n_re_ != other.n_re_ || n_im_ != other.n_im_ || a.re_min != b.re_min ||
        a.re_max != b.re_max || a.im_min != b.im_min || a.im_max != b.im_max)
        throw Error("cannot merge histograms with different binning");
    for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
    total_ += other.total_;
    outside_ += other.outside_;
}

std::vector<double> WignerHistogram::normalized() const {
    std::vector<double> out(counts_.size(), 0.0);
    if (total_ == 0) return out;
    const double inv = 1.0 / static_cast<double>(total_);
    for (std::size_t i = 0; i < counts_.size(); ++i) out[i] = static_cast<double>(counts_[i]) * inv;
    return out;
}

std::vector<double> WignerHistogram::marginal_re() const {
    const auto p = normalized();
    std::vector<double> m(n_re_, 0.0);
    for (std::size_t r = 0; r < n_re_; ++r)
        for (std::size_t i = 0; i < n_im_; ++i) m[r] += p[r * n_im_ + i];
    return m;
}

std::vector<double> WignerHistogram::marginal_im() const {
    const auto p = normalized();
    std::vector<double> m(n_im_, 0.0);
    for (std::size_t r = 0; r < n_re_; ++r)
        for (std::size_t i = 0; i < n_im_; ++i) m[i] += p[r * n_im_ + i];
    return m;
}

namespace {

// Bins adjacent to zero along an axis: one bin, or two when zero sits on an edge.
std::vector<std::size_t> zero_bins(double lo, double hi, std::size_t n) {
    if (!(lo <= 0.0 && hi >= 0.0)) throw Error("histogram extents do not contain the origin");
    const double pos = (0.0 - lo) / (hi - lo) * static_cast<double>(n);
    const double f = std::floor(pos);
    const auto i = static_cast<std::size_t>(std::min<double>(f, static_cast<double>(n - 1)));
    if (pos == f && i > 0 && pos < static_cast<double>(n)) return {i - 1, i};
    return {i};
}

std::vector<double> renormalize(std::vector<double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    if (s > 0.0)
        for (double& x : v) x /= s;
    return v;
}

}  // namespace

std::vector<double> WignerHistogram::cut_re() const {
    std::vector<double> cut(n_re_, 0.0);
    for (std::size_t ii : zero_bins(extents_.im_min, extents_.im_max, n_im_))
        for (std::size_t r = 0; r < n_re_; ++r) cut[r] += static_cast<double>(counts_[r * n_im_ + ii]);
    return renormalize(std::move(cut));
}

std::vector<double> WignerHistogram::cut_im() const {
    std::vector<double> cut(n_im_, 0.0);
    for (std::size_t ir : zero_bins(extents_.re_min, extents_.re_max, n_re_))
        for (std::size_t i = 0; i < n_im_; ++i) cut[i] += static_cast<double>(counts_[ir * n_im_ + i]);
    return renormalize(std::move(cut));
}

std::vector<double> WignerHistogram::centers_re() const {
    std::vector<double> c(n_re_);
    for (std::size_t i = 0; i < n_re_; ++i)
        c[i] = extents_.re_min + (static_cast<double>(i) + 0.5) * width_re();
    return c;
}

std::vector<double> WignerHistogram::centers_im() const {
    std::vector<double> c(n_im_);
    for (std::size_t i = 0; i < n_im_; ++i)
        c[i] = extents_.im_min + (static_cast<double>(i) + 0.5) * width_im();
    return c;
}

std::pair<std::size_t, std::size_t> WignerHistogram::mode() const {
    const auto it = std::max_element(counts_.begin(), counts_.end());
    const auto idx = static_cast<std::size_t>(it - counts_.begin());
    return {idx / n_im_, idx % n_im_};
}

bool WignerHistogram::touches_origin(std::size_t i_re, std::size_t i_im) const {
    const auto re = zero_bins(extents_.re_min, extents_.re_max, n_re_);
    const auto im = zero_bins(extents_.im_min, extents_.im_max, n_im_);
    return std::find(re.begin(), re.end(), i_re) != re.end() &&
           std::find(im.begin(), im.end(), i_im) != im.end();
}

WignerHistogram accumulate_wigner(std::span<const Complex> samples, const BinSpec& spec) {
    if (samples.empty()) throw Error("cannot build a histogram from an empty sample set");
    HistogramExtents ext;
    if (spec.extents) {
        ext = *spec.extents;
    } else {
        double mr = 0.0, mi = 0.0;
        for (const auto& z : samples) {
            mr += z.real();
            mi += z.imag();
        }
        const double n = static_cast<double>(samples.size());
        mr /= n;
        mi /= n;
        double vr = 0.0, vi = 0.0;
        for (const auto& z : samples) {
            vr += (z.real() - mr) * (z.real() - mr);
            vi += (z.imag() - mi) * (z.imag() - mi);
        }
        auto half_span = [&](double mean, double var) {
            const double s = std::abs(mean) + spec.span_sigmas * std::sqrt(var / n);
            return s > 0.0 ? s : 1.0;
        };
        const double hr = half_span(mr, vr);
        const double hi = half_span(mi, vi);
        ext = {-hr, hr, -hi, hi};
    }
    WignerHistogram h(ext, spec.n_re, spec.n_im);
    for (const auto& z : samples) h.add(z);
    return h;
}

double distribution_mean(std::span<const double> centers, std::span<const double> mass) {
    double m = 0.0, s = 0.0;
    for (std::size_t i = 0; i < centers.size(); ++i) {
        m += centers[i] * mass[i];
        s += mass[i];
    }
    return s > 0.0 ? m / s : 0.0;
}

double distribution_variance(std::span<const double> centers, std::span<const double> mass) {
    const double mu = distribution_mean(centers, mass);
    double v = 0.0, s = 0.0;
    for (std::size_t i = 0; i < centers.size(); ++i) {
        v += (centers[i] - mu) * (centers[i] - mu) * mass[i];
        s += mass[i];
    }
    return s > 0.0 ? v / s : 0.0;
}

double distribution_kurtosis(std::span<const double> centers, std::span<const double> mass) {
    const double mu = distribution_mean(centers, mass);
    double m2 = 0.0, m4 = 0.0, s = 0.0;
    for (std::size_t i = 0; i < centers.size(); ++i) {
        const double d2 = (centers[i] - mu) * (centers[i] - mu);
        m2 += d2 * mass[i];
        m4 += d2 * d2 * mass[i];
        s += mass[i];
    }
    if (!(m2 > 0.0)) return 0.0;
    m2 /= s;
    m4 /= s;
    return m4 / (m2 * m2);
}

}  // namespace dopo
