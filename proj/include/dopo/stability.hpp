#pragma once

// Linear stability of the homogeneous steady state: dispersion relation,
// critical wavenumber, instability direction, and the convective/absolute
// threshold from a saddle-point (pinch-point) analysis of lambda_+(k).

#include "dopo/params.hpp"

#include <string>
#include <vector>

namespace dopo {

/// Pump amplitude of the homogeneous steady state, E0 / (1 + i delta0). The
/// signal is zero there.
Complex steady_state(double e0, double delta0);
Complex steady_state(const SimParams& params);

struct DispersionBranch {
    double k = 0.0;
    Complex lambda_plus;
    Complex lambda_minus;
};

/// lambda_pm(k) = -1 + i v k +- sqrt(F^2 - (delta1 + 2 k^2)^2), principal root.
DispersionBranch dispersion(double k, double F, double delta1, double v);

/// sqrt(-delta1 / 2) for delta1 < 0, else 0.
double critical_wavenumber(double delta1);

/// Relative phases e^{i Phi_pm} of the eigen-combinations
/// V_pm = e^{i Phi_pm} dA1(k) +- conj(dA1(-k)).
struct InstabilityPhases {
    Complex plus;
    Complex minus;
};

/// Throws dopo::Error when `pump_ss` is zero. Walk-off does not enter.
InstabilityPhases instability_phase(double k, double delta1, Complex pump_ss);

struct AbsoluteThreshold {
    double f_c = 1.0;
    /// Saddle point k* in the complex wavenumber plane.
    Complex k_star;
    /// Imaginary part of lambda_+(k*) at threshold (real part is zero).
    double frequency = 0.0;
    int iterations = 0;
    /// "direct", "continuation", "bisection" or "trivial" (v = 0).
    std::string method;
};

class ThresholdError : public Error {
public:
    using Error::Error;
};

/// Smallest F at which the saddle point of lambda_+ has zero growth rate.
/// Requires delta1 < 0; v = 0 returns exactly 1.
AbsoluteThreshold absolute_threshold(double v, double delta1);

enum class Regime { BelowThreshold, Convective, AbsolutelyUnstable };

std::string to_string(Regime regime);

struct RegimeClassification {
    Regime regime = Regime::BelowThreshold;
    double f_conv = 1.0;
    double f_abs = 1.0;
    /// F sits on a threshold (within 1e-9); `regime` is then the higher one.
    bool on_boundary = false;
};

RegimeClassification classify(double F, double v, double delta1);

struct DiagramRow {
    double delta1 = 0.0;
    double v = 0.0;
    double f_c = 0.0;  // NaN when not converged
    bool converged = false;
};

/// F_c over the product of `delta1_values` and `v_values`, row-major in
/// delta1. Points that fail are recorded with converged = false.
std::vector<DiagramRow> stability_diagram(const std::vector<double>& delta1_values,
                                          const std::vector<double>& v_values,
                                          std::size_t threads = 1);

}  // namespace dopo
