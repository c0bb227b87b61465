#pragma once

// Periodic transverse grid, unitary discrete Fourier transform and the exact
// diagonal propagators of the linear pump/signal operators.
//
// Transform convention ("unitary-dft-v1"):
//   forward:  S_j = n^{-1/2} sum_m f_m exp(-i k_j x_m)
//   inverse:  f_m = n^{-1/2} sum_j S_j exp(+i k_j x_m)
// with x_m = m dx and k_j = 2 pi m_j / (n dx), m_j in standard FFT order
// (0, 1, ..., n/2-1, -n/2, ..., -1). Parseval holds without weights.

#include "dopo/params.hpp"

#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace dopo {

inline constexpr const char* kTransformConvention = "unitary-dft-v1";

class Grid {
public:
    Grid(std::size_t n_points, double dx);
    explicit Grid(const SimParams& params) : Grid(params.n_points, params.dx) {}

    std::size_t size() const { return n_; }
    double dx() const { return dx_; }
    double length() const { return static_cast<double>(n_) * dx_; }
    double dk() const { return 2.0 * M_PI / length(); }

    const std::vector<double>& x() const { return x_; }
    const std::vector<double>& k() const { return k_; }

    std::size_t nyquist_index() const { return n_ / 2; }
    /// Index holding -k_j. The Nyquist bin has no partner and returns nullopt.
    std::optional<std::size_t> mirror_index(std::size_t j) const;
    /// Bin whose wavenumber is closest to `target`, never the Nyquist bin.
    std::size_t nearest_index(double target) const;

private:
    std::size_t n_;
    double dx_;
    std::vector<double> x_;
    std::vector<double> k_;
};

/// Unitary DFT pair on a fixed length. Owns FFTW plans and aligned scratch;
/// one instance per thread.
class Transform {
public:
    explicit Transform(std::size_t n);
    ~Transform();
    Transform(Transform&&) noexcept;
    Transform& operator=(Transform&&) noexcept;
    Transform(const Transform&) = delete;
    Transform& operator=(const Transform&) = delete;

    std::size_t size() const;

    void forward(std::span<const Complex> field, std::span<Complex> spectrum);
    void inverse(std::span<const Complex> spectrum, std::span<Complex> field);
    ComplexVector forward(std::span<const Complex> field);
    ComplexVector inverse(std::span<const Complex> spectrum);

    /// Unnormalized in-place transforms on the internal buffer, for hot loops
    /// that fold the 1/n factor into a propagator.
    std::span<Complex> buffer();
    void forward_raw();
    void inverse_raw();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

ComplexVector forward(const Grid& grid, std::span<const Complex> field);
ComplexVector inverse(const Grid& grid, std::span<const Complex> spectrum);

struct LinearSymbols {
    /// L0(k) = -(1 + i delta0) - i k^2
    ComplexVector pump;
    /// L1(k) = -(1 + i delta1) - 2 i k^2 + i v k
    ComplexVector signal;
};

LinearSymbols make_symbols(const Grid& grid, double delta0, double delta1, double v);
LinearSymbols make_symbols(const Grid& grid, const SimParams& params);

/// Empty-cavity signal symbol used by the shot-noise reference (no walk-off).
ComplexVector reference_symbol(const Grid& grid, double delta1);

/// Elementwise exp(L(k) dt).
ComplexVector linear_propagator(std::span<const Complex> symbol, double dt);

}  // namespace dopo
