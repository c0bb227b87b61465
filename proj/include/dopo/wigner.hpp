#pragma once

// Phase-space histogram of complex samples, read as an estimate of the
// Wigner distribution of a mode (or mode superposition).

#include "dopo/params.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace dopo {

struct HistogramExtents {
    double re_min = -1.0;
    double re_max = 1.0;
    double im_min = -1.0;
    double im_max = 1.0;
};

struct BinSpec {
    std::size_t n_re = 256;
    std::size_t n_im = 256;
    /// Explicit extents; otherwise +-(|mean| + span_sigmas * sd) per axis,
    /// symmetric about the origin.
    std::optional<HistogramExtents> extents;
    double span_sigmas = 5.0;
};

class WignerHistogram {
public:
    WignerHistogram(HistogramExtents extents, std::size_t n_re, std::size_t n_im);
    /// Rebuilds a histogram from stored counts (row-major in the real index).
    static WignerHistogram from_counts(HistogramExtents extents, std::size_t n_re, std::size_t n_im,
                                       std::vector<std::uint64_t> counts, std::uint64_t outside);

    void add(Complex z);
    /// Requires identical extents and bin counts.
    void merge(const WignerHistogram& other);

    const HistogramExtents& extents() const { return extents_; }
    std::size_t n_re() const { return n_re_; }
    std::size_t n_im() const { return n_im_; }
    /// Samples that fell inside the extents.
    std::uint64_t total() const { return total_; }
    std::uint64_t outside() const { return outside_; }
    std::uint64_t count(std::size_t i_re, std::size_t i_im) const { return counts_[i_re * n_im_ + i_im]; }
    const std::vector<std::uint64_t>& counts() const { return counts_; }

    /// Bin masses, row-major in the real index, summing to 1.
    std::vector<double> normalized() const;
    std::vector<double> marginal_re() const;
    std::vector<double> marginal_im() const;
    /// W(x, 0): mass along the row(s) containing Im = 0, renormalized to sum 1.
    /// With an even bin count the two rows adjacent to zero are averaged.
    std::vector<double> cut_re() const;
    /// W(0, y), analogous.
    std::vector<double> cut_im() const;

    std::vector<double> centers_re() const;
    std::vector<double> centers_im() const;
    double width_re() const { return (extents_.re_max - extents_.re_min) / static_cast<double>(n_re_); }
    double width_im() const { return (extents_.im_max - extents_.im_min) / static_cast<double>(n_im_); }

    /// Bin of maximal mass.
    std::pair<std::size_t, std::size_t> mode() const;
    /// Whether bin (i_re, i_im) touches the origin.
    bool touches_origin(std::size_t i_re, std::size_t i_im) const;

private:
    HistogramExtents extents_;
    std::size_t n_re_;
    std::size_t n_im_;
    std::vector<std::uint64_t> counts_;
    std::uint64_t total_ = 0;
    std::uint64_t outside_ = 0;
};

/// Throws dopo::Error on an empty sample set.
WignerHistogram accumulate_wigner(std::span<const Complex> samples, const BinSpec& spec = {});

/// Mean and variance of a discrete distribution given by bin centers and masses.
double distribution_mean(std::span<const double> centers, std::span<const double> mass);
double distribution_variance(std::span<const double> centers, std::span<const double> mass);
/// Fourth standardized moment (3 for a Gaussian).
double distribution_kurtosis(std::span<const double> centers, std::span<const double> mass);

}  // namespace dopo
