#include "dopo/params.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dopo {

std::string to_string(PumpKind kind) {
    return kind == PumpKind::Flat ? "flat" : "supergaussian";
}

PumpKind pump_kind_from_string(const std::string& name) {
    if (name == "flat") return PumpKind::Flat;
    if (name == "supergaussian") return PumpKind::Supergaussian;
    throw Error("unknown pump profile '" + name + "' (expected flat or supergaussian)");
}

double SimParams::pump_width() const {
    return pump.width > 0.0 ? pump.width : 0.3 * system_size();
}

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

bool ValidationReport::ok() const {
    return std::none_of(issues.begin(), issues.end(),
                        [](const ValidationIssue& i) { return i.severity == Severity::Error; });
}

std::vector<std::string> ValidationReport::errors() const {
    std::vector<std::string> out;
    for (const auto& i : issues)
        if (i.severity == Severity::Error) out.push_back(i.message);
    return out;
}

std::vector<std::string> ValidationReport::warnings() const {
    std::vector<std::string> out;
    for (const auto& i : issues)
        if (i.severity == Severity::Warning) out.push_back(i.message);
    return out;
}

void ValidationReport::throw_if_invalid() const {
    if (ok()) return;
    std::ostringstream msg;
    msg << "invalid parameters:";
    for (const auto& e : errors()) msg << "\n  - " << e;
    throw Error(msg.str());
}

ValidationReport validate(const SimParams& p) {
    ValidationReport report;
    auto error = [&](std::string key, std::string msg) {
        report.issues.push_back({Severity::Error, std::move(key), std::move(msg)});
    };
    auto warn = [&](std::string key, std::string msg) {
        report.issues.push_back({Severity::Warning, std::move(key), std::move(msg)});
    };

    if (!is_power_of_two(p.n_points)) error("n_points", "grid size not power of two");
    if (p.n_points < 8) error("n_points", "grid size below minimum of 8");
    if (!(p.dx > 0.0)) error("dx", "nonpositive grid spacing");
    if (!(p.dt > 0.0)) error("dt", "nonpositive time step");
    if (!(p.epsilon >= 0.0)) error("epsilon", "negative noise amplitude");
    if (!(p.F >= 0.0)) error("F", "negative scaled pump");
    if (!std::isfinite(p.delta0) || !std::isfinite(p.delta1) || !std::isfinite(p.v))
        error("delta", "non-finite detuning or walk-off");
    if (!(p.t_transient >= 0.0)) error("t_transient", "negative transient horizon");
    if (!(p.sample_interval > 0.0)) error("sample_interval", "nonpositive sample interval");

    if (p.pump.kind == PumpKind::Supergaussian) {
        if (p.pump.width < 0.0) error("pump_width", "negative supergaussian width");
        if (p.pump.order < 2 || p.pump.order % 2 != 0)
            error("pump_order", "supergaussian order must be even and >= 2");
    }

    if (report.ok() && p.dt > 0.0 && p.dx > 0.0) {
        if (p.delta1 >= 0.0)
            warn("delta1", "delta1 >= 0: outside the pattern-forming regime (no finite critical wavenumber)");
        // Stiffest phase rotation of the signal symbol at the Nyquist wavenumber.
        const double k_max = M_PI / p.dx;
        const double stiff = std::abs(Complex(-1.0, -(p.delta1 + 2.0 * k_max * k_max) + p.v * k_max));
        if (p.dt * stiff > 1.0)
            warn("dt", "dt*max|L(k)| > 1: time step is coarse relative to the linear symbol");
        if (p.sample_interval < p.dt) warn("sample_interval", "sample interval shorter than dt");
    }
    return report;
}

double effective_drive(double F, double delta0) { return F * std::sqrt(1.0 + delta0 * delta0); }

double effective_drive(const SimParams& params) { return effective_drive(params.F, params.delta0); }

double evaluate_pump(const PumpProfile& profile, double e_max, double x, double center,
                     double width) {
    if (profile.kind == PumpKind::Flat) return e_max;
    const double r = (x - center) / width;
    return e_max * std::exp(-std::pow(r, profile.order));
}

std::vector<double> pump_values(const SimParams& params) {
    const double e_max = effective_drive(params);
    const double center = params.pump_center();
    const double width = params.pump_width();
    std::vector<double> e0(params.n_points);
    for (std::size_t j = 0; j < e0.size(); ++j)
        e0[j] = evaluate_pump(params.pump, e_max, static_cast<double>(j) * params.dx, center, width);
    return e0;
}

bool FieldState::all_finite() const {
    auto finite = [](const Complex& z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); };
    return std::all_of(pump.begin(), pump.end(), finite) &&
           std::all_of(signal.begin(), signal.end(), finite);
}

double FieldState::max_modulus() const {
    double m = 0.0;
    for (const auto& z : pump) m = std::max(m, std::abs(z));
    for (const auto& z : signal) m = std::max(m, std::abs(z));
    return m;
}

}  // namespace dopo
