#pragma once

// Scaled model parameters, pump profiles and field-state containers.
//
// All quantities are in the scaled units of the DOPO mean-field model: time in
// units of the cavity lifetime, transverse space in diffraction lengths. The
// transverse dimension is fixed to one.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dopo {

using Complex = std::complex<double>;
using ComplexVector = std::vector<Complex>;

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class PumpKind { Flat, Supergaussian };

std::string to_string(PumpKind kind);
PumpKind pump_kind_from_string(const std::string& name);

/// Transverse shape of the driving field. The plateau amplitude is not stored
/// here; it always follows from the scaled pump F (see effective_drive).
struct PumpProfile {
    PumpKind kind = PumpKind::Supergaussian;
    /// Half-width of the supergaussian in scaled space units. Zero selects the
    /// default of 0.3 x system size.
    double width = 0.0;
    /// Even exponent of the supergaussian.
    int order = 10;
};

struct SimParams {
    double delta0 = 0.0;
    double delta1 = -0.25;
    double v = 0.42;
    double F = 0.999;
    double epsilon = 3.0e-3;

    std::size_t n_points = 512;
    double dx = 1.7678;
    double dt = 0.025;

    PumpProfile pump;
    std::uint64_t seed = 1;

    double t_transient = 500.0;
    double sample_interval = 0.5;

    double system_size() const { return static_cast<double>(n_points) * dx; }
    double pump_center() const { return 0.5 * system_size(); }
    /// Supergaussian half-width with the zero-means-default rule applied.
    double pump_width() const;
};

enum class Severity { Warning, Error };

struct ValidationIssue {
    Severity severity;
    std::string key;
    std::string message;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;

    bool ok() const;
    std::vector<std::string> errors() const;
    std::vector<std::string> warnings() const;
    /// Throws dopo::Error listing every error-level issue.
    void throw_if_invalid() const;
};

ValidationReport validate(const SimParams& params);

/// Plateau drive E0 = F * sqrt(1 + delta0^2), the inverse of the scaled-pump
/// definition.
double effective_drive(const SimParams& params);
double effective_drive(double F, double delta0);

/// E0(x) for a given plateau amplitude, evaluated at position x.
double evaluate_pump(const PumpProfile& profile, double e_max, double x,
                     double center, double width);

/// E0(x_j) on the grid x_j = j * dx.
std::vector<double> pump_values(const SimParams& params);

struct FieldState {
    double t = 0.0;
    ComplexVector pump;
    ComplexVector signal;

    FieldState() = default;
    explicit FieldState(std::size_t n) : pump(n), signal(n) {}

    std::size_t size() const { return signal.size(); }
    bool all_finite() const;
    double max_modulus() const;
};

bool is_power_of_two(std::size_t n);

}  // namespace dopo
