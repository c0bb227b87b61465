#pragma once

#include "dopo/params.hpp"

#include <vector>

namespace dopo {

/// Time series of one far-field amplitude alpha_1(k, t) under the unitary
/// transform convention. `demodulated` is empty until demodulate() fills it
/// with alpha_1(k, t) exp(-i v k t).
struct ModeSeries {
    std::size_t k_index = 0;
    double k = 0.0;
    std::vector<double> times;
    ComplexVector amplitudes;
    ComplexVector demodulated;

    std::size_t size() const { return times.size(); }
    bool is_demodulated() const { return !demodulated.empty(); }
    /// Demodulated samples when present, raw ones otherwise.
    const ComplexVector& slow() const { return is_demodulated() ? demodulated : amplitudes; }
};

}  // namespace dopo
