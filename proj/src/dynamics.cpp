#include "dopo/dynamics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <sstream>
#include <thread>

namespace dopo {

namespace {

std::string blow_up_message(double t, double max_modulus) {
    std::ostringstream os;
    os << "integrator blow-up at t=" << t << " (max |field| = " << max_modulus << ")";
    return os.str();
}

std::uint64_t steps_for(double duration, double dt) {
    if (!(duration >= 0.0)) throw Error("duration must be nonnegative");
    return static_cast<std::uint64_t>(std::llround(duration / dt));
}

}  // namespace

BlowUpError::BlowUpError(double t, double max_modulus)
    : Error(blow_up_message(t, max_modulus)), t_(t), max_modulus_(max_modulus) {}

FieldState default_initial_state(const SimParams& params, NoiseSource& rng) {
    FieldState s(params.n_points);
    const auto e0 = pump_values(params);
    const Complex denom(1.0, params.delta0);
    for (std::size_t j = 0; j < s.size(); ++j) s.pump[j] = e0[j] / denom;
    if (params.epsilon > 0.0)
        rng.fill_circular(s.signal, params.epsilon / std::sqrt(2.0 * params.dx));
    return s;
}

Stepper::Stepper(const SimParams& params)
    : params_(params),
      grid_(params),
      transform_(params.n_points),
      drive_(pump_values(params)),
      noise_(params.n_points),
      noise_scale_(noise_step_scale(params.epsilon, params.dx, params.dt)) {
    validate(params).throw_if_invalid();
    const auto symbols = make_symbols(grid_, params);
    const double inv_n = 1.0 / static_cast<double>(params.n_points);
    pump_prop_ = linear_propagator(symbols.pump, params.dt);
    signal_prop_ = linear_propagator(symbols.signal, params.dt);
    for (auto& p : pump_prop_) p *= inv_n;
    for (auto& p : signal_prop_) p *= inv_n;

    // Affine part of the pump flow: the drive integrated exactly against L0.
    auto buf = transform_.buffer();
    std::copy(drive_.begin(), drive_.end(), buf.begin());
    transform_.forward_raw();
    drive_kick_.resize(params.n_points);
    for (std::size_t j = 0; j < params.n_points; ++j) {
        const Complex l = symbols.pump[j];
        drive_kick_[j] = (std::exp(l * params.dt) - 1.0) / l * buf[j] * inv_n;
    }
}

namespace {

// cosh(x) and sinh(x)/x; series below 0.1 where they are exact to roundoff.
inline void cosh_sinhc(double x, double& c, double& sc) {
    if (x < 0.1) {
        const double x2 = x * x;
        c = 1.0 + x2 * (0.5 + x2 * (1.0 / 24.0 + x2 * (1.0 / 720.0 + x2 / 40320.0)));
        sc = 1.0 + x2 * (1.0 / 6.0 + x2 * (1.0 / 120.0 + x2 * (1.0 / 5040.0 + x2 / 362880.0)));
    } else {
        c = std::cosh(x);
        sc = std::sinh(x) / x;
    }
}

}  // namespace

void Stepper::step(FieldState& state, NoiseSource& rng) {
    const std::size_t n = grid_.size();
    if (state.pump.size() != n || state.signal.size() != n)
        throw Error("field state does not match the grid");

    auto buf = transform_.buffer();
    auto propagate = [&](ComplexVector& field, const ComplexVector& prop, const Complex* kick) {
        std::copy(field.begin(), field.end(), buf.begin());
        transform_.forward_raw();
        if (kick)
            for (std::size_t j = 0; j < n; ++j) buf[j] = buf[j] * prop[j] + kick[j];
        else
            for (std::size_t j = 0; j < n; ++j) buf[j] *= prop[j];
        transform_.inverse_raw();
        std::copy(buf.begin(), buf.end(), field.begin());
    };
    propagate(state.pump, pump_prop_, drive_kick_.data());
    propagate(state.signal, signal_prop_, nullptr);

    const bool noisy = noise_scale_ > 0.0;
    if (noisy) rng.fill_circular(noise_, noise_scale_);

    const double dt = params_.dt;
    double max_norm = 0.0;
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const Complex a0 = state.pump[j];
        const Complex a1 = state.signal[j];
        const Complex p = a0 - 0.5 * dt * a1 * a1;
        // d_t a1 = a0 conj(a1) with a0 frozen:
        // a1 -> cosh(|a0| dt) a1 + sinh(|a0| dt) / |a0| * a0 conj(a1)
        double c, sc;
        cosh_sinhc(std::sqrt(std::norm(a0)) * dt, c, sc);
        Complex s = c * a1 + (sc * dt) * (a0 * std::conj(a1));
        if (noisy) s += noise_[j];
        state.pump[j] = p;
        state.signal[j] = s;
        const double np = std::norm(p), ns = std::norm(s);
        max_norm = std::max({max_norm, np, ns});
        total += np + ns;
    }
    state.t += dt;
    // std::max drops NaN; the sum keeps it.
    if (!(max_norm <= kBlowUpModulus * kBlowUpModulus) || !std::isfinite(total))
        throw BlowUpError(state.t, std::sqrt(max_norm));
}

FieldState step(const FieldState& state, const SimParams& params, NoiseSource& rng) {
    Stepper stepper(params);
    FieldState next = state;
    stepper.step(next, rng);
    return next;
}

// ---------------------------------------------------------------------------
// Recorder

TrajectoryRecorder::TrajectoryRecorder(RecorderConfig config) : config_(std::move(config)) {}

void TrajectoryRecorder::ensure_series(std::size_t index, const Grid& grid) {
    if (find(index) != nullptr) return;
    ModeSeries s;
    s.k_index = index;
    s.k = grid.k()[index];
    series_.push_back(std::move(s));
}

void TrajectoryRecorder::bind(const Grid& grid, double dt) {
    if (grid_) {
        if (grid_->size() != grid.size() || grid_->dx() != grid.dx())
            throw Error("recorder already bound to a different grid");
        return;
    }
    if (!(config_.sample_interval > 0.0)) throw Error("sample interval must be positive");
    grid_.emplace(grid);
    spectrum_every_ = std::max<std::uint64_t>(1, std::llround(config_.sample_interval / dt));
    frame_every_ = config_.spacetime_interval > 0.0
                       ? std::max<std::uint64_t>(1, std::llround(config_.spacetime_interval / dt))
                       : 0;
    for (double k : config_.target_wavenumbers) {
        const std::size_t j = grid.nearest_index(k);
        ensure_series(j, grid);
        if (auto m = grid.mirror_index(j)) ensure_series(*m, grid);
    }
    if (acc_.pre_power.empty()) {
        acc_.pre_power.assign(grid.size(), 0.0);
        acc_.post_power.assign(grid.size(), 0.0);
    }
}

bool TrajectoryRecorder::wants_spectrum(std::uint64_t step) const {
    return step % spectrum_every_ == 0;
}

bool TrajectoryRecorder::wants_frame(std::uint64_t step) const {
    return frame_every_ != 0 && step % frame_every_ == 0;
}

void TrajectoryRecorder::resolve(std::span<const Complex> spectrum) {
    const Grid& grid = *grid_;
    std::vector<double> power(grid.size());
    if (acc_.pre_count > 0) {
        power = acc_.pre_power;
    } else {
        for (std::size_t j = 0; j < grid.size(); ++j) power[j] = std::norm(spectrum[j]);
    }
    std::size_t best = 1;
    double best_power = -1.0;
    for (std::size_t j = 1; j < grid.nyquist_index(); ++j) {
        const double p = power[j] + power[grid.size() - j];
        if (p > best_power) {
            best_power = p;
            best = j;
        }
    }
    dominant_ = best;
    ensure_series(best, grid);
    ensure_series(*grid.mirror_index(best), grid);
}

void TrajectoryRecorder::record_spectrum(double t, std::span<const Complex> spectrum) {
    if (!grid_) throw Error("recorder used before bind()");
    const bool post = t >= config_.t_transient - 1e-9;
    if (!post) {
        if (t >= 0.5 * config_.t_transient) {
            for (std::size_t j = 0; j < spectrum.size(); ++j) acc_.pre_power[j] += std::norm(spectrum[j]);
            ++acc_.pre_count;
        }
        return;
    }
    if (config_.record_dominant && !acc_.resolved) resolve(spectrum);
    acc_.resolved = true;
    for (std::size_t j = 0; j < spectrum.size(); ++j) acc_.post_power[j] += std::norm(spectrum[j]);
    ++acc_.post_count;
    for (auto& s : series_) {
        s.times.push_back(t);
        s.amplitudes.push_back(spectrum[s.k_index]);
    }
}

void TrajectoryRecorder::record_frame(double t, std::span<const Complex> near_field) {
    frames_.push_back({t, ComplexVector(near_field.begin(), near_field.end())});
}

const ModeSeries* TrajectoryRecorder::find(std::size_t k_index) const {
    for (const auto& s : series_)
        if (s.k_index == k_index) return &s;
    return nullptr;
}

std::vector<double> TrajectoryRecorder::mean_far_field_power() const {
    std::vector<double> p = acc_.post_power;
    if (acc_.post_count > 0)
        for (auto& x : p) x /= static_cast<double>(acc_.post_count);
    return p;
}

void TrajectoryRecorder::restore(std::vector<ModeSeries> series, std::vector<SpacetimeFrame> frames,
                                 Accumulators acc, std::optional<std::size_t> dominant) {
    series_ = std::move(series);
    frames_ = std::move(frames);
    acc_ = std::move(acc);
    dominant_ = dominant;
}

// ---------------------------------------------------------------------------
// Runners

namespace {

RunState start_state(const SimParams& params, const RunControl& control, bool reference) {
    if (control.resume) return *control.resume;
    const std::uint64_t stream = reference ? reference_stream(control.stream) : control.stream;
    RunState rs{FieldState{}, NoiseSource(params.seed, stream), 0};
    if (control.initial) {
        rs.state = *control.initial;
    } else if (reference) {
        // Spectral-space draw at the same scale as the real-space default.
        rs.state = FieldState(params.n_points);
        if (params.epsilon > 0.0)
            rs.rng.fill_circular(rs.state.signal, params.epsilon / std::sqrt(2.0 * params.dx));
    } else {
        rs.state = default_initial_state(params, rs.rng);
    }
    return rs;
}

}  // namespace

TrajectoryResult run_trajectory(const SimParams& params, double duration,
                                TrajectoryRecorder& recorder, const RunControl& control) {
    Stepper stepper(params);
    const Grid& grid = stepper.grid();
    recorder.bind(grid, params.dt);
    RunState rs = start_state(params, control, false);
    if (rs.state.size() != grid.size()) throw Error("initial state does not match the grid");
    const double origin = rs.state.t - static_cast<double>(rs.step) * params.dt;
    const std::uint64_t total = steps_for(duration - origin, params.dt);

    ComplexVector spectrum(grid.size());
    auto observe = [&] {
        if (recorder.wants_spectrum(rs.step)) {
            stepper.transform().forward(rs.state.signal, spectrum);
            recorder.record_spectrum(rs.state.t, spectrum);
        }
        if (recorder.wants_frame(rs.step)) recorder.record_frame(rs.state.t, rs.state.signal);
    };
    if (!control.resume) observe();
    while (rs.step < total) {
        stepper.step(rs.state, rs.rng);
        ++rs.step;
        rs.state.t = origin + static_cast<double>(rs.step) * params.dt;
        observe();
        if (control.checkpoint_every != 0 && control.on_checkpoint &&
            rs.step % control.checkpoint_every == 0)
            control.on_checkpoint(rs, recorder);
    }
    return {rs.state, rs.step};
}

TrajectoryResult run_reference(const SimParams& params, double duration,
                               TrajectoryRecorder& recorder, const RunControl& control) {
    validate(params).throw_if_invalid();
    const Grid grid(params);
    Transform transform(grid.size());
    recorder.bind(grid, params.dt);
    RunState rs = start_state(params, control, true);
    if (rs.state.size() != grid.size()) throw Error("initial state does not match the grid");
    // Reference runs carry the spectrum in `signal` while integrating.
    // A resumed state already holds the spectrum, as does the default draw.
    const bool near_field_start = control.initial && !control.resume;
    ComplexVector spectrum = near_field_start ? transform.forward(rs.state.signal) : rs.state.signal;

    const auto prop = linear_propagator(reference_symbol(grid, params.delta1), params.dt);
    const double scale = noise_step_scale(params.epsilon, params.dx, params.dt);
    const double origin = rs.state.t - static_cast<double>(rs.step) * params.dt;
    const std::uint64_t total = steps_for(duration - origin, params.dt);
    ComplexVector noise(grid.size());
    ComplexVector near(grid.size());

    auto observe = [&] {
        if (recorder.wants_spectrum(rs.step)) recorder.record_spectrum(rs.state.t, spectrum);
        if (recorder.wants_frame(rs.step)) {
            transform.inverse(spectrum, near);
            recorder.record_frame(rs.state.t, near);
        }
    };
    if (!control.resume) observe();
    while (rs.step < total) {
        if (scale > 0.0) rs.rng.fill_circular(noise, scale);
        for (std::size_t j = 0; j < grid.size(); ++j) {
            spectrum[j] *= prop[j];
            if (scale > 0.0) spectrum[j] += noise[j];
        }
        ++rs.step;
        rs.state.t = origin + static_cast<double>(rs.step) * params.dt;
        observe();
        if (control.checkpoint_every != 0 && control.on_checkpoint &&
            rs.step % control.checkpoint_every == 0) {
            RunState snapshot{FieldState{}, rs.rng, rs.step};
            snapshot.state.t = rs.state.t;
            snapshot.state.pump.assign(grid.size(), Complex{});
            snapshot.state.signal = spectrum;
            control.on_checkpoint(snapshot, recorder);
        }
    }
    FieldState out(grid.size());
    out.t = rs.state.t;
    transform.inverse(spectrum, out.signal);
    return {out, rs.step};
}

double reference_mode_variance(const SimParams& params) {
    const double sigma2 = params.epsilon * params.epsilon / params.dx;
    return sigma2 * params.dt / (1.0 - std::exp(-2.0 * params.dt));
}

double reference_mode_variance_continuum(const SimParams& params) {
    return params.epsilon * params.epsilon / (2.0 * params.dx);
}

std::vector<TrajectoryRecorder> run_ensemble(const SimParams& params, double duration,
                                             const RecorderConfig& config, std::size_t members,
                                             std::size_t threads, bool reference) {
    std::vector<TrajectoryRecorder> out(members, TrajectoryRecorder(config));
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t m = next++; m < members; m = next++) {
            try {
                RunControl control;
                control.stream = m;
                if (reference)
                    run_reference(params, duration, out[m], control);
                else
                    run_trajectory(params, duration, out[m], control);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    threads = std::max<std::size_t>(1, std::min(threads, members));
    std::vector<std::thread> pool;
    for (std::size_t i = 1; i < threads; ++i) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
    return out;
}

}  // namespace dopo
