#include "dopo/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <mutex>

namespace dopo {

Grid::Grid(std::size_t n_points, double dx) : n_(n_points), dx_(dx), x_(n_points), k_(n_points) {
    if (n_points < 2 || !is_power_of_two(n_points))
        throw Error("grid size must be a power of two >= 2");
    if (!(dx > 0.0)) throw Error("grid spacing must be positive");
    const double dk = 2.0 * M_PI / (static_cast<double>(n_) * dx_);
    const auto half = static_cast<std::ptrdiff_t>(n_ / 2);
    for (std::size_t j = 0; j < n_; ++j) {
        x_[j] = static_cast<double>(j) * dx_;
        auto m = static_cast<std::ptrdiff_t>(j);
        if (m >= half) m -= static_cast<std::ptrdiff_t>(n_);
        k_[j] = dk * static_cast<double>(m);
    }
}

std::optional<std::size_t> Grid::mirror_index(std::size_t j) const {
    if (j >= n_) throw Error("wavenumber index out of range");
    if (j == nyquist_index()) return std::nullopt;
    return (n_ - j) % n_;
}

std::size_t Grid::nearest_index(double target) const {
    std::size_t best = 0;
    double best_dist = std::abs(k_[0] - target);
    for (std::size_t j = 1; j < n_; ++j) {
        if (j == nyquist_index()) continue;
        const double d = std::abs(k_[j] - target);
        if (d < best_dist) {
            best = j;
            best_dist = d;
        }
    }
    return best;
}

namespace {
// FFTW planning is not thread safe; execution of existing plans is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

struct Transform::Impl {
    std::size_t n = 0;
    fftw_complex* data = nullptr;
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
    double norm = 1.0;

    explicit Impl(std::size_t size) : n(size), norm(1.0 / std::sqrt(static_cast<double>(size))) {
        std::lock_guard lock(planner_mutex());
        data = fftw_alloc_complex(n);
        if (data == nullptr) throw Error("fftw allocation failed");
        // FFTW_ESTIMATE keeps the chosen algorithm, and hence the rounding,
        // identical from run to run.
        const int len = static_cast<int>(n);
        fwd = fftw_plan_dft_1d(len, data, data, FFTW_FORWARD, FFTW_ESTIMATE);
        bwd = fftw_plan_dft_1d(len, data, data, FFTW_BACKWARD, FFTW_ESTIMATE);
        if (fwd == nullptr || bwd == nullptr) throw Error("fftw planning failed");
    }
    ~Impl() {
        std::lock_guard lock(planner_mutex());
        if (fwd) fftw_destroy_plan(fwd);
        if (bwd) fftw_destroy_plan(bwd);
        if (data) fftw_free(data);
    }
    Complex* buf() { return reinterpret_cast<Complex*>(data); }
};

Transform::Transform(std::size_t n) : impl_(std::make_unique<Impl>(n)) {}
Transform::~Transform() = default;
Transform::Transform(Transform&&) noexcept = default;
Transform& Transform::operator=(Transform&&) noexcept = default;

std::size_t Transform::size() const { return impl_->n; }

std::span<Complex> Transform::buffer() { return {impl_->buf(), impl_->n}; }
void Transform::forward_raw() { fftw_execute(impl_->fwd); }
void Transform::inverse_raw() { fftw_execute(impl_->bwd); }

void Transform::forward(std::span<const Complex> field, std::span<Complex> spectrum) {
    if (field.size() != impl_->n || spectrum.size() != impl_->n)
        throw Error("transform length mismatch");
    std::copy(field.begin(), field.end(), impl_->buf());
    fftw_execute(impl_->fwd);
    const Complex* b = impl_->buf();
    for (std::size_t j = 0; j < impl_->n; ++j) spectrum[j] = b[j] * impl_->norm;
}

void Transform::inverse(std::span<const Complex> spectrum, std::span<Complex> field) {
    if (field.size() != impl_->n || spectrum.size() != impl_->n)
        throw Error("transform length mismatch");
    std::copy(spectrum.begin(), spectrum.end(), impl_->buf());
    fftw_execute(impl_->bwd);
    const Complex* b = impl_->buf();
    for (std::size_t j = 0; j < impl_->n; ++j) field[j] = b[j] * impl_->norm;
}

ComplexVector Transform::forward(std::span<const Complex> field) {
    ComplexVector out(impl_->n);
    forward(field, out);
    return out;
}

ComplexVector Transform::inverse(std::span<const Complex> spectrum) {
    ComplexVector out(impl_->n);
    inverse(spectrum, out);
    return out;
}

ComplexVector forward(const Grid& grid, std::span<const Complex> field) {
    if (field.size() != grid.size()) throw Error("transform length mismatch");
    Transform t(grid.size());
    return t.forward(field);
}

ComplexVector inverse(const Grid& grid, std::span<const Complex> spectrum) {
    if (spectrum.size() != grid.size()) throw Error("transform length mismatch");
    Transform t(grid.size());
    return t.inverse(spectrum);
}

LinearSymbols make_symbols(const Grid& grid, double delta0, double delta1, double v) {
    LinearSymbols s;
    s.pump.resize(grid.size());
    s.signal.resize(grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const double k = grid.k()[j];
        s.pump[j] = Complex(-1.0, -delta0 - k * k);
        s.signal[j] = Complex(-1.0, -delta1 - 2.0 * k * k + v * k);
    }
    return s;
}

LinearSymbols make_symbols(const Grid& grid, const SimParams& params) {
    return make_symbols(grid, params.delta0, params.delta1, params.v);
}

ComplexVector reference_symbol(const Grid& grid, double delta1) {
    ComplexVector s(grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const double k = grid.k()[j];
        s[j] = Complex(-1.0, -delta1 - 2.0 * k * k);
    }
    return s;
}

ComplexVector linear_propagator(std::span<const Complex> symbol, double dt) {
    if (!(dt > 0.0)) throw Error("propagator time step must be positive");
    ComplexVector p(symbol.size());
    std::transform(symbol.begin(), symbol.end(), p.begin(),
                   [dt](const Complex& l) { return std::exp(l * dt); });
    return p;
}

}  // namespace dopo
