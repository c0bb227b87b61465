#include "dopo/binary_io.hpp"

#include "dopo/spectral.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace dopo {

namespace {

template <class T>
T to_little(T v) {
    if constexpr (std::endian::native == std::endian::big) {
        unsigned char b[sizeof(T)];
        std::memcpy(b, &v, sizeof(T));
        std::reverse(b, b + sizeof(T));
        std::memcpy(&v, b, sizeof(T));
    }
    return v;
}

class Writer {
public:
    template <class T>
    void put(T v) {
        v = to_little(v);
        const auto* p = reinterpret_cast<const char*>(&v);
        buf_.append(p, sizeof(T));
    }
    void u8(std::uint8_t v) { put(v); }
    void u32(std::uint32_t v) { put(v); }
    void u64(std::uint64_t v) { put(v); }
    void i64(std::int64_t v) { put(v); }
    void f64(double v) { put(v); }
    void c128(Complex z) {
        f64(z.real());
        f64(z.imag());
    }
    void c64(Complex z) {
        put(static_cast<float>(z.real()));
        put(static_cast<float>(z.imag()));
    }
    void bytes(const std::string& s) { buf_ += s; }
    const std::string& data() const { return buf_; }

private:
    std::string buf_;
};

class Reader {
public:
    Reader(std::string data, std::string source) : buf_(std::move(data)), source_(std::move(source)) {}

    template <class T>
    T get() {
        need(sizeof(T));
        T v;
        std::memcpy(&v, buf_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return to_little(v);
    }
    std::uint8_t u8() { return get<std::uint8_t>(); }
    std::uint32_t u32() { return get<std::uint32_t>(); }
    std::uint64_t u64() { return get<std::uint64_t>(); }
    std::int64_t i64() { return get<std::int64_t>(); }
    double f64() { return get<double>(); }
    Complex c128() {
        const double re = f64();
        return {re, f64()};
    }
    Complex c64() {
        const float re = get<float>();
        return {re, get<float>()};
    }
    std::string bytes(std::size_t n) {
        need(n);
        std::string s = buf_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    /// Guards element counts read from the file against the bytes left.
    std::size_t count(std::uint64_t n, std::size_t element_size) {
        if (element_size > 0 && n > (buf_.size() - pos_) / element_size) truncated();
        return static_cast<std::size_t>(n);
    }
    bool at_end() const { return pos_ == buf_.size(); }

private:
    void need(std::size_t n) {
        if (buf_.size() - pos_ < n) truncated();
    }
    [[noreturn]] void truncated() const { throw Error("truncated or corrupt file '" + source_ + "'"); }

    std::string buf_;
    std::string source_;
    std::size_t pos_ = 0;
};

std::string header_text(const KeyValues& kv) {
    std::string s;
    for (const auto& [k, v] : kv) {
        if (k.find_first_of("=\n") != std::string::npos || v.find('\n') != std::string::npos)
            throw Error("header entry '" + k + "' cannot be encoded");
        s += k + "=" + v + "\n";
    }
    return s;
}

KeyValues parse_header(const std::string& text) {
    KeyValues kv;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw Error("malformed header line '" + line + "'");
        kv.emplace_back(line.substr(0, eq), line.substr(eq + 1));
    }
    return kv;
}

void write_file(const std::filesystem::path& path, FileKind kind, const KeyValues& header,
                const Writer& payload) {
    const std::string text = header_text(header);
    Writer head;
    head.bytes("DOPO");
    head.u32(kFormatVersion);
    head.u32(static_cast<std::uint32_t>(kind));
    head.u32(static_cast<std::uint32_t>(text.size()));
    head.bytes(text);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out.write(head.data().data(), static_cast<std::streamsize>(head.data().size()));
    out.write(payload.data().data(), static_cast<std::streamsize>(payload.data().size()));
    if (!out) throw Error("write failed for '" + path.string() + "'");
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

FileInfo read_preamble(Reader& r, const std::string& source) {
    if (r.bytes(4) != "DOPO") throw Error("'" + source + "' is not a DOPO file (bad magic)");
    FileInfo info;
    info.version = r.u32();
    if (info.version != kFormatVersion)
        throw Error("'" + source + "' has unsupported format version " + std::to_string(info.version));
    const auto kind = r.u32();
    if (kind < 1 || kind > 4) throw Error("'" + source + "' has unknown kind " + std::to_string(kind));
    info.kind = static_cast<FileKind>(kind);
    info.header = parse_header(r.bytes(r.u32()));
    return info;
}

Reader open_kind(const std::filesystem::path& path, FileKind expected, KeyValues& header) {
    Reader r(slurp(path), path.string());
    const auto info = read_preamble(r, path.string());
    if (info.kind != expected)
        throw Error("'" + path.string() + "' holds a different kind of data (kind " +
                    std::to_string(static_cast<std::uint32_t>(info.kind)) + ")");
    header = info.header;
    return r;
}

void put_series(Writer& w, const std::vector<ModeSeries>& series) {
    w.u64(series.size());
    for (const auto& s : series) {
        w.u64(s.k_index);
        w.f64(s.k);
        w.u64(s.size());
        w.u8(s.is_demodulated() ? 1 : 0);
        for (double t : s.times) w.f64(t);
        for (const auto& z : s.amplitudes) w.c128(z);
        if (s.is_demodulated())
            for (const auto& z : s.demodulated) w.c128(z);
    }
}

std::vector<ModeSeries> get_series(Reader& r) {
    std::vector<ModeSeries> out(r.count(r.u64(), 25));
    for (auto& s : out) {
        s.k_index = r.u64();
        s.k = r.f64();
        const auto n = r.count(r.u64(), 24);
        const bool demod = r.u8() != 0;
        s.times.resize(n);
        s.amplitudes.resize(n);
        for (auto& t : s.times) t = r.f64();
        for (auto& z : s.amplitudes) z = r.c128();
        if (demod) {
            s.demodulated.resize(n);
            for (auto& z : s.demodulated) z = r.c128();
        }
    }
    return out;
}

void put_frames(Writer& w, const std::vector<SpacetimeFrame>& frames, Precision precision) {
    for (const auto& f : frames) {
        w.f64(f.t);
        if (precision == Precision::Complex64)
            for (const auto& z : f.signal) w.c64(z);
        else
            for (const auto& z : f.signal) w.c128(z);
    }
}

std::vector<SpacetimeFrame> get_frames(Reader& r, std::size_t count, std::size_t n, Precision precision) {
    std::vector<SpacetimeFrame> frames(r.count(count, 8 + n * (precision == Precision::Complex64 ? 8 : 16)));
    for (auto& f : frames) {
        f.t = r.f64();
        f.signal.resize(n);
        if (precision == Precision::Complex64)
            for (auto& z : f.signal) z = r.c64();
        else
            for (auto& z : f.signal) z = r.c128();
    }
    return frames;
}

std::uint64_t header_unsigned(const KeyValues& kv, const std::string& key) {
    const auto v = require_value(kv, key);
    try {
        std::size_t used = 0;
        const auto x = std::stoull(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw Error("header key '" + key + "' is not an integer: '" + v + "'");
    }
}

double header_double(const KeyValues& kv, const std::string& key) {
    const auto v = require_value(kv, key);
    try {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw Error("header key '" + key + "' is not a number: '" + v + "'");
    }
}

}  // namespace

std::optional<std::string> find_value(const KeyValues& kv, const std::string& key) {
    for (const auto& [k, v] : kv)
        if (k == key) return v;
    return std::nullopt;
}

std::string require_value(const KeyValues& kv, const std::string& key) {
    auto v = find_value(kv, key);
    if (!v) throw Error("file header lacks '" + key + "'");
    return *v;
}

FileInfo read_file_info(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path.string() + "'");
    char pre[16];
    in.read(pre, 16);
    if (in.gcount() != 16) throw Error("'" + path.string() + "' is too short");
    std::uint32_t len;
    std::memcpy(&len, pre + 12, 4);
    len = to_little(len);
    std::string text(len, '\0');
    in.read(text.data(), len);
    Reader r(std::string(pre, 16) + text, path.string());
    return read_preamble(r, path.string());
}

void write_spacetime(const std::filesystem::path& path, const KeyValues& provenance,
                     const std::vector<SpacetimeFrame>& frames, Precision precision) {
    const std::size_t n = frames.empty() ? 0 : frames.front().signal.size();
    for (const auto& f : frames)
        if (f.signal.size() != n) throw Error("spacetime frames have inconsistent sizes");
    KeyValues header = provenance;
    header.emplace_back("frames", std::to_string(frames.size()));
    header.emplace_back("frame_points", std::to_string(n));
    header.emplace_back("precision", precision == Precision::Complex64 ? "complex64" : "complex128");
    Writer w;
    put_frames(w, frames, precision);
    write_file(path, FileKind::Spacetime, header, w);
}

SpacetimeFile read_spacetime(const std::filesystem::path& path) {
    SpacetimeFile out;
    auto r = open_kind(path, FileKind::Spacetime, out.header);
    const auto count = header_unsigned(out.header, "frames");
    const auto n = header_unsigned(out.header, "frame_points");
    const auto prec = require_value(out.header, "precision");
    if (prec != "complex64" && prec != "complex128") throw Error("unknown precision '" + prec + "'");
    out.frames = get_frames(r, count, n, prec == "complex64" ? Precision::Complex64 : Precision::Complex128);
    return out;
}

void write_mode_series(const std::filesystem::path& path, const KeyValues& provenance,
                       const std::vector<ModeSeries>& series) {
    KeyValues header = provenance;
    header.emplace_back("series", std::to_string(series.size()));
    Writer w;
    put_series(w, series);
    write_file(path, FileKind::ModeSeries, header, w);
}

const ModeSeries* ModeSeriesFile::find(std::size_t k_index) const {
    for (const auto& s : series)
        if (s.k_index == k_index) return &s;
    return nullptr;
}

ModeSeriesFile read_mode_series(const std::filesystem::path& path) {
    ModeSeriesFile out;
    auto r = open_kind(path, FileKind::ModeSeries, out.header);
    out.series = get_series(r);
    return out;
}

void write_histogram(const std::filesystem::path& path, const KeyValues& provenance,
                     const WignerHistogram& h) {
    KeyValues header = provenance;
    const auto& e = h.extents();
    header.emplace_back("n_re", std::to_string(h.n_re()));
    header.emplace_back("n_im", std::to_string(h.n_im()));
    header.emplace_back("re_min", format_number(e.re_min));
    header.emplace_back("re_max", format_number(e.re_max));
    header.emplace_back("im_min", format_number(e.im_min));
    header.emplace_back("im_max", format_number(e.im_max));
    Writer w;
    w.u64(h.outside());
    for (auto c : h.counts()) w.u64(c);
    write_file(path, FileKind::Histogram, header, w);
}

HistogramFile read_histogram(const std::filesystem::path& path) {
    KeyValues header;
    auto r = open_kind(path, FileKind::Histogram, header);
    const auto n_re = header_unsigned(header, "n_re");
    const auto n_im = header_unsigned(header, "n_im");
    const HistogramExtents e{header_double(header, "re_min"), header_double(header, "re_max"),
                             header_double(header, "im_min"), header_double(header, "im_max")};
    const auto outside = r.u64();
    std::vector<std::uint64_t> counts(r.count(n_re * n_im, 8));
    for (auto& c : counts) c = r.u64();
    return {header, WignerHistogram::from_counts(e, n_re, n_im, std::move(counts), outside)};
}

void write_checkpoint(const std::filesystem::path& path, const KeyValues& provenance, bool reference,
                      const RunState& run, const TrajectoryRecorder& recorder) {
    KeyValues header = provenance;
    header.emplace_back("process", reference ? "reference" : "trajectory");
    header.emplace_back("step", std::to_string(run.step));
    header.emplace_back("t", format_number(run.state.t));
    header.emplace_back("field_points", std::to_string(run.state.size()));

    Writer w;
    w.f64(run.state.t);
    w.u64(run.step);
    for (const auto& z : run.state.pump) w.c128(z);
    for (const auto& z : run.state.signal) w.c128(z);
    const auto rng = run.rng.save_state();
    w.u64(rng.size());
    w.bytes(rng);

    const auto& acc = recorder.accumulators();
    w.u8(acc.resolved ? 1 : 0);
    const auto dom = recorder.dominant_index();
    w.i64(dom ? static_cast<std::int64_t>(*dom) : -1);
    w.u64(acc.pre_count);
    w.u64(acc.post_count);
    w.u64(acc.pre_power.size());
    for (double p : acc.pre_power) w.f64(p);
    w.u64(acc.post_power.size());
    for (double p : acc.post_power) w.f64(p);
    put_series(w, recorder.series());
    const auto& frames = recorder.frames();
    w.u64(frames.size());
    w.u64(frames.empty() ? 0 : frames.front().signal.size());
    put_frames(w, frames, Precision::Complex128);

    auto tmp = path;
    tmp += ".tmp";
    write_file(tmp, FileKind::Checkpoint, header, w);
    std::filesystem::rename(tmp, path);
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
    Checkpoint c;
    auto r = open_kind(path, FileKind::Checkpoint, c.header);
    c.reference = require_value(c.header, "process") == "reference";
    const auto n = header_unsigned(c.header, "field_points");
    c.state = FieldState(r.count(n, 32));
    c.state.t = r.f64();
    c.step = r.u64();
    for (auto& z : c.state.pump) z = r.c128();
    for (auto& z : c.state.signal) z = r.c128();
    c.rng_state = r.bytes(r.count(r.u64(), 1));

    c.accumulators.resolved = r.u8() != 0;
    const auto dom = r.i64();
    if (dom >= 0) c.dominant = static_cast<std::size_t>(dom);
    c.accumulators.pre_count = r.u64();
    c.accumulators.post_count = r.u64();
    c.accumulators.pre_power.resize(r.count(r.u64(), 8));
    for (auto& p : c.accumulators.pre_power) p = r.f64();
    c.accumulators.post_power.resize(r.count(r.u64(), 8));
    for (auto& p : c.accumulators.post_power) p = r.f64();
    c.series = get_series(r);
    const auto frames = r.u64();
    const auto points = r.u64();
    c.frames = get_frames(r, frames, points, Precision::Complex128);
    if (!r.at_end()) throw Error("trailing bytes in checkpoint '" + path.string() + "'");
    return c;
}

RunState Checkpoint::run_state(const SimParams& params) const {
    RunState run{state, NoiseSource(params.seed), step};
    run.rng.load_state(rng_state);
    return run;
}

void Checkpoint::restore(TrajectoryRecorder& recorder) const {
    recorder.restore(series, frames, accumulators, dominant);
}

void check_reference_compatible(const KeyValues& trajectory, const KeyValues& reference) {
    for (const char* key : {"convention", "epsilon", "n_points", "dx", "dt"}) {
        const auto a = find_value(trajectory, key);
        const auto b = find_value(reference, key);
        if (!a || !b) throw Error(std::string("cannot check calibration: header lacks '") + key + "'");
        if (*a != *b)
            throw Error(std::string("reference does not match the trajectory: ") + key + " " + *a + " vs " + *b);
    }
}

}  // namespace dopo
