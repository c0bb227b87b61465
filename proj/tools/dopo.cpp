// dopo: command-line driver for the stochastic DOPO simulator.
//
//   dopo simulate  [-c run.cfg] [-o dir] [--resume ckpt] [--key=value ...]
//   dopo reference [-c run.cfg] [-o dir] [--match series.bin] [--key=value ...]
//   dopo stability [-c run.cfg] [-o dir] [--delta1-min ...] [--key=value ...]
//   dopo analyze   --series series.bin --reference reference.bin [-o dir]
//   dopo sweep     --key epsilon --values 3e-3,1e-3 [-c run.cfg] [-o dir]

#include "CLI11.hpp"
#include "json.hpp"

#include "dopo/analysis.hpp"
#include "dopo/binary_io.hpp"
#include "dopo/config.hpp"
#include "dopo/dynamics.hpp"
#include "dopo/manifest.hpp"
#include "dopo/output.hpp"
#include "dopo/stability.hpp"
#include "dopo/wigner.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

using namespace dopo;
namespace fs = std::filesystem;

namespace {

struct Common {
    std::string config;
    std::string out = ".";
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("-c,--config", c.config, "key=value configuration file");
    sub->add_option("-o,--out", c.out, "output directory")->capture_default_str();
    sub->allow_extras();
}

Config load(const Common& c, CLI::App* sub) {
    std::optional<fs::path> file;
    if (!c.config.empty()) file = c.config;
    return load_config(file, parse_overrides(sub->remaining()));
}

RunManifest start_manifest(const std::string& command, const Config& cfg, const Common& c) {
    RunManifest m;
    m.command = command;
    m.params = cfg.params;
    m.options = to_key_values(cfg.run);
    if (!c.config.empty()) m.inputs.push_back(c.config);
    m.convention = kTransformConvention;
    return m;
}

class Clock {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::vector<double> target_wavenumbers(const Config& cfg) {
    const double kc = critical_wavenumber(cfg.params.delta1);
    std::vector<double> k;
    for (double t : cfg.run.targets_kc) k.push_back(t * kc);
    return k;
}

std::uint64_t steps_per(double interval, double dt) {
    return interval > 0.0 ? std::max<std::uint64_t>(1, std::llround(interval / dt)) : 0;
}

// Parameters a checkpoint was written with must match the resumed run.
void check_resume_params(const KeyValues& header, const SimParams& params) {
    for (const auto& [k, v] : to_key_values(params)) {
        const auto h = find_value(header, k);
        if (!h || *h != v)
            throw Error("checkpoint was written with " + k + "=" + (h ? *h : "?") + ", run has " + v);
    }
}

std::string bin_tag(std::size_t j) { return "k" + std::to_string(j); }

// ---------------------------------------------------------------------------
// Plot data

void write_spacetime_outputs(const fs::path& dir, const KeyValues& prov, const Config& cfg,
                             const std::vector<SpacetimeFrame>& frames, std::vector<std::string>& outputs) {
    if (frames.empty()) return;
    const Grid grid(cfg.params);
    const std::size_t n = grid.size();
    const std::size_t stride = cfg.run.plot_stride;

    write_spacetime(dir / "spacetime.bin", prov, frames, Precision::Complex64);
    outputs.push_back("spacetime.bin");

    {
        CsvWriter near(dir / "near_field.csv", prov, {"t", "x", "re", "abs"});
        for (const auto& f : frames)
            for (std::size_t j = 0; j < n; j += stride)
                near.row(std::vector<double>{f.t, grid.x()[j], f.signal[j].real(), std::abs(f.signal[j])});
    }
    outputs.push_back("near_field.csv");

    Heatmap re;
    re.rows = frames.size();
    re.cols = n;
    re.x0 = 0.0;
    re.x1 = grid.length();
    re.y0 = frames.front().t;
    re.y1 = frames.back().t;
    re.title = "Re a1(x, t)";
    re.xlabel = "x";
    re.ylabel = "t";
    re.diverging = true;
    for (const auto& f : frames)
        for (const auto& z : f.signal) re.values.push_back(z.real());
    write_heatmap_svg(dir / "near_field.svg", prov, re);
    outputs.push_back("near_field.svg");

    // Far field |a1(k, t)| in ascending k, central half of the spectrum.
    Transform tr(n);
    std::vector<std::size_t> order;
    for (std::size_t j = n / 2 + n / 4; j < n; ++j) order.push_back(j);
    for (std::size_t j = 0; j < n / 4; ++j) order.push_back(j);
    Heatmap ff;
    ff.rows = frames.size();
    ff.cols = order.size();
    ff.x0 = grid.k()[order.front()];
    ff.x1 = grid.k()[order.back()];
    ff.y0 = frames.front().t;
    ff.y1 = frames.back().t;
    ff.title = "|a1(k, t)|";
    ff.xlabel = "k";
    ff.ylabel = "t";
    {
        CsvWriter far(dir / "far_field.csv", prov, {"t", "k", "abs"});
        ComplexVector s(n);
        for (const auto& f : frames) {
            tr.forward(f.signal, s);
            for (std::size_t i = 0; i < order.size(); ++i) {
                const double m = std::abs(s[order[i]]);
                ff.values.push_back(m);
                if (i % stride == 0) far.row(std::vector<double>{f.t, grid.k()[order[i]], m});
            }
        }
    }
    write_heatmap_svg(dir / "far_field.svg", prov, ff);
    outputs.push_back("far_field.csv");
    outputs.push_back("far_field.svg");
}

void write_power_spectrum(const fs::path& dir, const KeyValues& prov, const Grid& grid,
                          const TrajectoryRecorder& rec, std::vector<std::string>& outputs) {
    const auto power = rec.mean_far_field_power();
    if (power.empty()) return;
    CsvWriter csv(dir / "spectrum.csv", prov, {"k_index", "k", "mean_power"});
    LineSeries line{"<|a1(k)|^2>", {}, {}};
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const std::size_t j = (i + grid.size() / 2) % grid.size();  // ascending k
        csv.row(std::vector<std::string>{cell(j), cell(grid.k()[j]), cell(power[j])});
        if (power[j] > 0.0) {
            line.x.push_back(grid.k()[j]);
            line.y.push_back(power[j]);
        }
    }
    LinePlot plot;
    plot.title = "post-transient far-field power";
    plot.xlabel = "k";
    plot.ylabel = "<|a1(k)|^2>";
    plot.log_y = true;
    plot.series.push_back(std::move(line));
    write_line_svg(dir / "spectrum.svg", prov, plot);
    outputs.push_back("spectrum.csv");
    outputs.push_back("spectrum.svg");
}

// ---------------------------------------------------------------------------
// simulate / reference

int run_process(const Common& common, CLI::App* sub, bool reference, const std::string& resume,
                const std::string& match) {
    const Config cfg = load(common, sub);
    const fs::path dir(common.out);
    fs::create_directories(dir);
    RunManifest m = start_manifest(reference ? "reference" : "simulate", cfg, common);
    if (!resume.empty()) m.inputs.push_back(resume);
    if (!match.empty()) m.inputs.push_back(match);
    const auto prov = m.provenance();
    const Grid grid(cfg.params);
    Clock clock;

    RecorderConfig rc;
    rc.sample_interval = cfg.params.sample_interval;
    rc.t_transient = cfg.params.t_transient;
    rc.target_wavenumbers = target_wavenumbers(cfg);
    rc.record_dominant = !reference && cfg.run.record_dominant;
    rc.spacetime_interval = reference ? 0.0 : cfg.run.spacetime_interval;
    if (!match.empty()) {
        const auto other = read_mode_series(match);
        for (const auto& s : other.series) rc.target_wavenumbers.push_back(s.k);
    }
    TrajectoryRecorder rec(rc);

    RunControl ctl;
    ctl.stream = cfg.run.stream;
    if (!resume.empty()) {
        const auto cp = read_checkpoint(resume);
        if (cp.reference != reference) throw Error("checkpoint '" + resume + "' belongs to the other process");
        check_resume_params(cp.header, cfg.params);
        cp.restore(rec);
        ctl.resume = cp.run_state(cfg.params);
    }
    const fs::path ckpt = dir / (reference ? "reference_checkpoint.bin" : "checkpoint.bin");
    ctl.checkpoint_every = steps_per(cfg.run.checkpoint_interval, cfg.params.dt);
    ctl.on_checkpoint = [&](const RunState& rs, const TrajectoryRecorder& r) {
        write_checkpoint(ckpt, prov, reference, rs, r);
    };

    const std::string series_name = reference ? "reference_series.bin" : "series.bin";
    auto finish = [&](bool complete, std::uint64_t steps) {
        m.wall_seconds = clock.seconds();
        m.steps = steps;
        m.complete = complete;
        m.write(dir / (reference ? "reference_manifest.json" : "manifest.json"));
    };

    TrajectoryResult result;
    try {
        result = reference ? run_reference(cfg.params, cfg.run.duration, rec, ctl)
                           : run_trajectory(cfg.params, cfg.run.duration, rec, ctl);
    } catch (const BlowUpError& e) {
        // Keep what was recorded; the manifest marks the run incomplete.
        std::vector<ModeSeries> series = rec.series();
        write_mode_series(dir / series_name, prov, series);
        m.outputs.push_back(series_name);
        finish(false, 0);
        throw;
    }

    std::vector<ModeSeries> series;
    for (const auto& s : rec.series()) series.push_back(reference ? s : demodulate(s, cfg.params.v));
    write_mode_series(dir / series_name, prov, series);
    m.outputs.push_back(series_name);

    if (ctl.checkpoint_every != 0) m.outputs.push_back(ckpt.filename().string());

    if (reference) {
        CsvWriter csv(dir / "shot_noise.csv", prov,
                      {"k_index", "k", "mode_variance", "level", "level_se", "oracle_mode_variance"});
        for (const auto& s : series) {
            const auto mirror = grid.mirror_index(s.k_index);
            const ModeSeries* partner = mirror ? rec.find(*mirror) : nullptr;
            if (!partner || s.k < 0.0) continue;
            try {
                const auto shot = shot_noise_level(s, *partner, 0.0);
                csv.row(std::vector<std::string>{cell(s.k_index), cell(s.k), cell(shot.mode_variance),
                                                 cell(shot.level), cell(shot.standard_error),
                                                 cell(reference_mode_variance(cfg.params))});
            } catch (const Error&) {
                // Too short for a level; leave the row out.
            }
        }
        m.outputs.push_back("shot_noise.csv");
    } else {
        write_spacetime_outputs(dir, prov, cfg, rec.frames(), m.outputs);
        write_power_spectrum(dir, prov, grid, rec, m.outputs);
    }
    finish(true, result.steps);
    std::cout << m.command << ": " << result.steps << " steps to t=" << result.final_state.t << " in "
              << m.wall_seconds << " s";
    if (rec.dominant_index())
        std::cout << ", dominant bin " << *rec.dominant_index() << " (k=" << grid.k()[*rec.dominant_index()] << ")";
    std::cout << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// stability

struct StabilityOptions {
    double delta1_min = -1.0;
    double delta1_max = -0.05;
    std::size_t delta1_points = 20;
    std::vector<double> v_values = {0.2, 0.42, 0.6};
};

int run_stability(const Common& common, CLI::App* sub, const StabilityOptions& so) {
    const Config cfg = load(common, sub);
    const fs::path dir(common.out);
    fs::create_directories(dir);
    RunManifest m = start_manifest("stability", cfg, common);
    std::ostringstream vs;
    for (std::size_t i = 0; i < so.v_values.size(); ++i) vs << (i ? "," : "") << format_number(so.v_values[i]);
    m.options.push_back({"delta1_min", format_number(so.delta1_min)});
    m.options.push_back({"delta1_max", format_number(so.delta1_max)});
    m.options.push_back({"delta1_points", std::to_string(so.delta1_points)});
    m.options.push_back({"v_values", vs.str()});
    const auto prov = m.provenance();
    Clock clock;
    const auto& p = cfg.params;

    {
        CsvWriter csv(dir / "dispersion.csv", prov, {"k", "re_lambda_plus", "im_lambda_plus", "re_lambda_minus", "im_lambda_minus"});
        const double kmax = 2.0 * std::max(critical_wavenumber(p.delta1), 0.25);
        for (int i = 0; i <= 400; ++i) {
            const double k = -kmax + 2.0 * kmax * i / 400.0;
            const auto d = dispersion(k, p.F, p.delta1, p.v);
            csv.row(std::vector<double>{k, d.lambda_plus.real(), d.lambda_plus.imag(), d.lambda_minus.real(),
                                        d.lambda_minus.imag()});
        }
    }
    m.outputs.push_back("dispersion.csv");

    if (p.delta1 < 0.0) {
        const auto th = absolute_threshold(p.v, p.delta1);
        const auto cls = classify(p.F, p.v, p.delta1);
        CsvWriter csv(dir / "threshold.csv", prov,
                      {"delta1", "v", "f_c", "k_star_re", "k_star_im", "frequency", "method", "F", "regime"});
        csv.row(std::vector<std::string>{cell(p.delta1), cell(p.v), cell(th.f_c), cell(th.k_star.real()),
                                         cell(th.k_star.imag()), cell(th.frequency), th.method, cell(p.F),
                                         to_string(cls.regime)});
        m.outputs.push_back("threshold.csv");
        std::cout << "F_c(v=" << p.v << ", delta1=" << p.delta1 << ") = " << th.f_c << "; F=" << p.F << " is "
                  << to_string(cls.regime) << "\n";
    }

    if (so.delta1_points < 2) throw Error("--delta1-points needs at least 2");
    if (!(so.delta1_max < 0.0) || !(so.delta1_min < so.delta1_max))
        throw Error("diagram range needs delta1_min < delta1_max < 0");
    std::vector<double> d1;
    for (std::size_t i = 0; i < so.delta1_points; ++i)
        d1.push_back(so.delta1_min + (so.delta1_max - so.delta1_min) * static_cast<double>(i) /
                                         static_cast<double>(so.delta1_points - 1));
    const auto rows = stability_diagram(d1, so.v_values);
    LinePlot plot;
    plot.title = "absolute instability threshold";
    plot.xlabel = "delta1";
    plot.ylabel = "F_c";
    plot.guides = {1.0};
    for (double v : so.v_values) plot.series.push_back({"v=" + format_number(v), {}, {}});
    {
        CsvWriter csv(dir / "diagram.csv", prov, {"delta1", "v", "f_c", "converged"});
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto& r = rows[i];
            csv.row(std::vector<std::string>{cell(r.delta1), cell(r.v), cell(r.f_c), cell(r.converged)});
            if (r.converged) {
                auto& line = plot.series[i % so.v_values.size()];
                line.x.push_back(r.delta1);
                line.y.push_back(r.f_c);
            }
        }
    }
    write_line_svg(dir / "diagram.svg", prov, plot);
    m.outputs.push_back("diagram.csv");
    m.outputs.push_back("diagram.svg");
    m.wall_seconds = clock.seconds();
    m.complete = true;
    m.write(dir / "manifest.json");
    return 0;
}

// ---------------------------------------------------------------------------
// analyze

struct PairInput {
    const ModeSeries* plus;
    const ModeSeries* minus;
    const ModeSeries* ref_plus;
    const ModeSeries* ref_minus;
};

// +k/-k pairs of a trajectory file, each matched to the reference pair at the
// same bin or, failing that, the nearest recorded one.
std::vector<PairInput> match_pairs(const ModeSeriesFile& traj, const ModeSeriesFile& ref, const Grid& grid) {
    std::vector<PairInput> out;
    for (const auto& s : traj.series) {
        if (s.k <= 0.0) continue;
        const auto mirror = grid.mirror_index(s.k_index);
        const ModeSeries* partner = mirror ? traj.find(*mirror) : nullptr;
        if (!partner) continue;
        const ModeSeries* rp = ref.find(s.k_index);
        const ModeSeries* rm = rp ? ref.find(*mirror) : nullptr;
        if (!rp || !rm) {
            rp = rm = nullptr;
            double best = 1e300;
            for (const auto& r : ref.series) {
                if (r.k <= 0.0) continue;
                const auto rmi = grid.mirror_index(r.k_index);
                const ModeSeries* rpart = rmi ? ref.find(*rmi) : nullptr;
                if (rpart && std::abs(r.k - s.k) < best) {
                    best = std::abs(r.k - s.k);
                    rp = &r;
                    rm = rpart;
                }
            }
        }
        if (!rp) throw Error("reference file holds no +k/-k pair");
        out.push_back({&s, partner, rp, rm});
    }
    if (out.empty()) throw Error("trajectory file holds no +k/-k pair");
    return out;
}

std::string verdict(const SqueezingResult& r) {
    if (r.ci_high < 1.0) return "squeezed";
    if (r.ci_low > 1.0) return "excess noise";
    return "consistent with shot noise";
}

void write_histogram_outputs(const fs::path& dir, const std::string& stem, const KeyValues& prov,
                             const WignerHistogram& h, const std::string& title, std::vector<std::string>& outputs) {
    write_histogram(dir / (stem + ".bin"), prov, h);
    Heatmap map;
    map.rows = h.n_im();
    map.cols = h.n_re();
    map.x0 = h.extents().re_min;
    map.x1 = h.extents().re_max;
    map.y0 = h.extents().im_min;
    map.y1 = h.extents().im_max;
    map.title = title;
    map.xlabel = "Re";
    map.ylabel = "Im";
    const auto w = h.normalized();
    map.values.resize(w.size());
    for (std::size_t i = 0; i < h.n_re(); ++i)
        for (std::size_t j = 0; j < h.n_im(); ++j) map.values[j * h.n_re() + i] = w[i * h.n_im() + j];
    write_heatmap_svg(dir / (stem + ".svg"), prov, map);
    {
        CsvWriter csv(dir / (stem + "_cuts.csv"), prov, {"axis", "center", "marginal", "cut"});
        const auto cr = h.centers_re(), ci = h.centers_im();
        const auto mr = h.marginal_re(), mi = h.marginal_im();
        const auto kr = h.cut_re(), ki = h.cut_im();
        for (std::size_t i = 0; i < cr.size(); ++i)
            csv.row(std::vector<std::string>{"re", cell(cr[i]), cell(mr[i]), cell(kr[i])});
        for (std::size_t i = 0; i < ci.size(); ++i)
            csv.row(std::vector<std::string>{"im", cell(ci[i]), cell(mi[i]), cell(ki[i])});
    }
    outputs.push_back(stem + ".bin");
    outputs.push_back(stem + ".svg");
    outputs.push_back(stem + "_cuts.csv");
}

int run_analyze(const Common& common, CLI::App* sub, const std::string& series_path, const std::string& ref_path) {
    const auto traj = read_mode_series(series_path);
    const auto ref = read_mode_series(ref_path);
    check_reference_compatible(traj.header, ref.header);
    // Parameters come from the trajectory header; the configuration may
    // only adjust analysis options.
    Config cfg;
    KeyValues param_kv;
    for (const auto& [k, v] : to_key_values(SimParams{}))
        param_kv.push_back({k, require_value(traj.header, k)});
    cfg.params = params_from_key_values(param_kv);
    std::optional<fs::path> file;
    if (!common.config.empty()) file = common.config;
    KeyValues kv = file ? read_key_values(*file) : KeyValues{};
    for (auto& p : parse_overrides(sub->remaining())) kv.push_back(std::move(p));
    for (const auto& [k, v] : kv) {
        if (k != "theta_points" && k != "histogram_bins" && k != "plot_stride")
            throw Error("analyze takes its parameters from the input files; key '" + k + "' cannot be set here");
        apply_setting(cfg, k, v);
    }

    const fs::path dir(common.out);
    fs::create_directories(dir);
    RunManifest m;
    m.command = "analyze";
    m.params = cfg.params;
    m.options = {{"theta_points", std::to_string(cfg.run.theta_points)},
                 {"histogram_bins", std::to_string(cfg.run.histogram_bins)},
                 {"trajectory_hash", find_value(traj.header, "manifest_hash").value_or("")},
                 {"reference_hash", find_value(ref.header, "manifest_hash").value_or("")}};
    m.inputs = {series_path, ref_path};
    m.convention = kTransformConvention;
    const auto prov = m.provenance();
    Clock clock;
    const Grid grid(cfg.params);
    const double kc = critical_wavenumber(cfg.params.delta1);

    nlohmann::json summary;
    summary["manifest_hash"] = m.hash();
    summary["pairs"] = nlohmann::json::array();
    CsvWriter table(dir / "squeezing.csv", prov,
                    {"k_index", "k", "k_over_kc", "shot_k_index", "shot_level", "shot_level_se",
                     "ratio_xminus0", "ratio_xminus0_se", "ratio_xminus0_ci_low", "ratio_xminus0_ci_high",
                     "ratio_xplus0", "ratio_xplus0_se", "argmin_theta", "exact_argmin_theta", "min_ratio",
                     "intensity_difference", "intensity_difference_se", "intensity_difference_ci_low",
                     "intensity_difference_ci_high", "intensity_difference_normalized", "nonstationary",
                     "verdict"});
    m.outputs.push_back("squeezing.csv");

    for (const auto& pin : match_pairs(traj, ref, grid)) {
        const auto pa = analyze_pair(*pin.plus, *pin.minus, *pin.ref_plus, *pin.ref_minus, cfg.params.v,
                                     cfg.run.theta_points);
        const std::string v = verdict(pa.x_minus);
        table.row(std::vector<std::string>{
            cell(pa.k_index), cell(pa.k), cell(kc > 0.0 ? pa.k / kc : 0.0), cell(pa.shot_index), cell(pa.shot.level),
            cell(pa.shot.standard_error), cell(pa.x_minus.ratio), cell(pa.x_minus.standard_error),
            cell(pa.x_minus.ci_low), cell(pa.x_minus.ci_high), cell(pa.x_plus.ratio), cell(pa.x_plus.standard_error),
            cell(pa.scan.argmin_theta), cell(pa.scan.exact_argmin), cell(pa.scan.min_ratio), cell(pa.twin.value),
            cell(pa.twin.standard_error), cell(pa.twin.ci_low), cell(pa.twin.ci_high), cell(pa.twin.normalized),
            cell(pa.x_minus.nonstationary), v});

        const std::string tag = bin_tag(pa.k_index);
        {
            CsvWriter scan(dir / ("angle_scan_" + tag + ".csv"), prov, {"theta", "variance", "ratio"});
            LineSeries line{"Var X-(theta) / shot", {}, {}};
            for (const auto& r : pa.scan.rows) {
                scan.row(std::vector<double>{r.theta, r.variance, r.ratio});
                line.x.push_back(r.theta);
                line.y.push_back(r.ratio);
            }
            LinePlot plot;
            plot.title = "angle scan, k = " + format_number(pa.k);
            plot.xlabel = "theta";
            plot.ylabel = "Var / shot";
            plot.log_y = true;
            plot.guides = {1.0};
            plot.series.push_back(std::move(line));
            write_line_svg(dir / ("angle_scan_" + tag + ".svg"), prov, plot);
        }
        m.outputs.push_back("angle_scan_" + tag + ".csv");
        m.outputs.push_back("angle_scan_" + tag + ".svg");

        const auto a = demodulate(*pin.plus, cfg.params.v);
        const auto b = demodulate(*pin.minus, cfg.params.v);
        const BinSpec spec{cfg.run.histogram_bins, cfg.run.histogram_bins, std::nullopt, 5.0};
        const auto sum = superposition_samples(a, b, Superposition::Sum);
        write_histogram_outputs(dir, "wigner_sum_" + tag, prov, accumulate_wigner(sum, spec),
                                "W(a(k) + a(-k)), k = " + format_number(pa.k), m.outputs);
        write_histogram_outputs(dir, "wigner_mode_" + tag, prov, accumulate_wigner(a.demodulated, spec),
                                "W(a(k)), k = " + format_number(pa.k), m.outputs);

        summary["pairs"].push_back({{"k_index", pa.k_index},
                                    {"k", pa.k},
                                    {"shot_k_index", pa.shot_index},
                                    {"ratio_xminus0", pa.x_minus.ratio},
                                    {"ratio_xminus0_ci", {pa.x_minus.ci_low, pa.x_minus.ci_high}},
                                    {"exact_argmin_theta", pa.scan.exact_argmin},
                                    {"intensity_difference", pa.twin.value},
                                    {"intensity_difference_se", pa.twin.standard_error},
                                    {"verdict", v}});
        std::cout << "k_index " << pa.k_index << " (k=" << pa.k << "): Var X-(0)/shot = " << pa.x_minus.ratio
                  << " [" << pa.x_minus.ci_low << ", " << pa.x_minus.ci_high << "], " << v << "\n";
    }
    {
        std::ofstream(dir / "summary.json") << summary.dump(2) << "\n";
        m.outputs.push_back("summary.json");
    }
    m.wall_seconds = clock.seconds();
    m.complete = true;
    m.write(dir / "manifest.json");
    return 0;
}

// ---------------------------------------------------------------------------
// sweep

struct SweepOptions {
    std::string key;
    std::vector<std::string> values;
    std::size_t jobs = 1;
};

struct SweepPoint {
    std::string value;
    std::vector<PairAnalysis> pairs;
};

SweepPoint sweep_point(Config cfg, const std::string& key, const std::string& value) {
    apply_setting(cfg, key, value);
    validate(cfg.params).throw_if_invalid();
    RecorderConfig rc;
    rc.sample_interval = cfg.params.sample_interval;
    rc.t_transient = cfg.params.t_transient;
    rc.target_wavenumbers = target_wavenumbers(cfg);
    TrajectoryRecorder tr(rc), rr(rc);
    RunControl ctl;
    ctl.stream = cfg.run.stream;
    run_trajectory(cfg.params, cfg.run.duration, tr, ctl);
    run_reference(cfg.params, cfg.run.duration, rr, ctl);
    const Grid grid(cfg.params);
    SweepPoint out{value, {}};
    for (const auto& s : tr.series()) {
        if (s.k <= 0.0) continue;
        const auto mirror = grid.mirror_index(s.k_index);
        if (!mirror) continue;
        out.pairs.push_back(analyze_pair(s, *tr.find(*mirror), *rr.find(s.k_index), *rr.find(*mirror), cfg.params.v,
                                         cfg.run.theta_points));
    }
    return out;
}

int run_sweep(const Common& common, CLI::App* sub, const SweepOptions& so) {
    const Config cfg = load(common, sub);
    const auto& keys = config_keys();
    if (std::find(keys.begin(), keys.end(), so.key) == keys.end())
        throw Error("unknown configuration key '" + so.key + "' (did you mean '" + nearest_key(so.key) + "'?)");
    if (so.values.empty()) throw Error("sweep needs --values");
    const fs::path dir(common.out);
    fs::create_directories(dir);
    RunManifest m = start_manifest("sweep", cfg, common);
    std::string joined;
    for (const auto& v : so.values) joined += (joined.empty() ? "" : ",") + v;
    m.options.push_back({"sweep_key", so.key});
    m.options.push_back({"sweep_values", joined});
    const auto prov = m.provenance();
    Clock clock;

    std::vector<SweepPoint> points(so.values.size());
    const std::size_t jobs = std::max<std::size_t>(1, so.jobs);
    for (std::size_t start = 0; start < so.values.size(); start += jobs) {
        std::vector<std::future<SweepPoint>> batch;
        for (std::size_t i = start; i < std::min(start + jobs, so.values.size()); ++i)
            batch.push_back(std::async(std::launch::async, sweep_point, cfg, so.key, so.values[i]));
        for (std::size_t i = 0; i < batch.size(); ++i) points[start + i] = batch[i].get();
    }

    const double kc = critical_wavenumber(cfg.params.delta1);
    std::map<std::size_t, LineSeries> lines;
    {
        CsvWriter csv(dir / "sweep.csv", prov,
                      {so.key, "k_index", "k", "k_over_kc", "ratio_xminus0", "ratio_xminus0_ci_low",
                       "ratio_xminus0_ci_high", "exact_argmin_theta", "intensity_difference",
                       "intensity_difference_se", "intensity_difference_normalized"});
        for (const auto& pt : points)
            for (const auto& pa : pt.pairs) {
                csv.row(std::vector<std::string>{pt.value, cell(pa.k_index), cell(pa.k), cell(kc > 0.0 ? pa.k / kc : 0.0),
                                                 cell(pa.x_minus.ratio), cell(pa.x_minus.ci_low),
                                                 cell(pa.x_minus.ci_high), cell(pa.scan.exact_argmin),
                                                 cell(pa.twin.value), cell(pa.twin.standard_error),
                                                 cell(pa.twin.normalized)});
                auto& line = lines[pa.k_index];
                line.label = "k = " + format_number(pa.k);
                line.x.push_back(std::stod(pt.value));
                line.y.push_back(pa.x_minus.ratio);
            }
    }
    LinePlot plot;
    plot.title = "Var X-(0) / shot vs " + so.key;
    plot.xlabel = so.key;
    plot.ylabel = "ratio";
    plot.log_y = true;
    plot.guides = {1.0};
    for (auto& [j, line] : lines) plot.series.push_back(std::move(line));
    write_line_svg(dir / "sweep.svg", prov, plot);
    m.outputs = {"sweep.csv", "sweep.svg"};
    m.wall_seconds = clock.seconds();
    m.complete = true;
    m.write(dir / "manifest.json");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stochastic simulator of a degenerate OPO with walk-off"};
    app.require_subcommand(1);

    Common c_sim, c_ref, c_stab, c_an, c_sweep;
    std::string resume_sim, resume_ref, match;
    auto* sim = app.add_subcommand("simulate", "integrate a trajectory; write mode series, spacetime data and plots");
    add_common(sim, c_sim);
    sim->add_option("--resume", resume_sim, "checkpoint to continue from");

    auto* ref = app.add_subcommand("reference", "integrate the empty-cavity reference for shot-noise calibration");
    add_common(ref, c_ref);
    ref->add_option("--resume", resume_ref, "checkpoint to continue from");
    ref->add_option("--match", match, "also record every bin present in this mode-series file");

    StabilityOptions so;
    auto* stab = app.add_subcommand("stability", "dispersion relation, absolute threshold and stability diagram");
    add_common(stab, c_stab);
    stab->add_option("--delta1-min", so.delta1_min)->capture_default_str();
    stab->add_option("--delta1-max", so.delta1_max)->capture_default_str();
    stab->add_option("--delta1-points", so.delta1_points)->capture_default_str();
    stab->add_option("--v-values", so.v_values)->delimiter(',');

    std::string series_path, ref_path;
    auto* an = app.add_subcommand("analyze", "squeezing, angle scans, twin-beam moment and Wigner histograms");
    add_common(an, c_an);
    an->add_option("--series", series_path, "trajectory mode-series file")->required();
    an->add_option("--reference", ref_path, "reference mode-series file")->required();

    SweepOptions sw;
    auto* sweep = app.add_subcommand("sweep", "repeat simulate + reference + analyze over values of one key");
    add_common(sweep, c_sweep);
    sweep->add_option("--key", sw.key, "configuration key to vary")->required();
    sweep->add_option("--values", sw.values, "comma-separated values")->delimiter(',')->required();
    sweep->add_option("--jobs", sw.jobs, "points run concurrently")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }
    try {
        if (*sim) return run_process(c_sim, sim, false, resume_sim, "");
        if (*ref) return run_process(c_ref, ref, true, resume_ref, match);
        if (*stab) return run_stability(c_stab, stab, so);
        if (*an) return run_analyze(c_an, an, series_path, ref_path);
        if (*sweep) return run_sweep(c_sweep, sweep, sw);
    } catch (const BlowUpError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
