#pragma once

// Binary container for spacetime frames, mode series, histograms and
// checkpoints. All integers and floats are little-endian.
//
//   offset  size  field
//   0       4     magic "DOPO"
//   4       4     u32 format version (currently 1)
//   8       4     u32 kind (1 spacetime, 2 mode series, 3 histogram, 4 checkpoint)
//   12      4     u32 header length H in bytes
//   16      H     UTF-8 text, one key=value per line: provenance (manifest
//                 hash, command, version, transform convention, parameters)
//                 followed by kind-specific keys
//   16+H    ...   payload
//
// Payloads (f64 = IEEE double, c128 = two f64 re,im, c64 = two f32):
//
//   spacetime   header keys frames, n_points, precision (complex64|complex128).
//               Per frame: f64 t, then n_points complex values of the
//               near-field signal, row-major in time.
//   mode series header key series. Per series: u64 k_index, f64 k, u64 count,
//               u8 demodulated flag, then f64 times[count], c128 amplitudes
//               [count] and, when flagged, c128 demodulated[count].
//   histogram   header keys n_re, n_im, re_min, re_max, im_min, im_max.
//               u64 outside, then u64 counts[n_re * n_im] row-major in the
//               real index.
//   checkpoint  header keys process (trajectory|reference), step, t.
//               f64 t, u64 step, c128 pump[n], c128 signal[n], u64 L and L
//               bytes of RNG state text, then the recorder: u8 resolved,
//               i64 dominant bin (-1 when unresolved), u64 pre_count,
//               u64 post_count, u64 m and f64 pre_power[m], u64 m and
//               f64 post_power[m], the mode-series block as above (u64 count
//               first), u64 frame count and frames as in spacetime
//               (complex128).

#include "dopo/config.hpp"
#include "dopo/dynamics.hpp"
#include "dopo/mode_series.hpp"
#include "dopo/wigner.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace dopo {

inline constexpr std::uint32_t kFormatVersion = 1;

enum class FileKind : std::uint32_t { Spacetime = 1, ModeSeries = 2, Histogram = 3, Checkpoint = 4 };

enum class Precision { Complex64, Complex128 };

/// Value of `key` in a header block, if present.
std::optional<std::string> find_value(const KeyValues& kv, const std::string& key);
/// Like find_value but throws when absent.
std::string require_value(const KeyValues& kv, const std::string& key);

/// Kind and header of a file without reading the payload.
struct FileInfo {
    FileKind kind;
    std::uint32_t version = 0;
    KeyValues header;
};
FileInfo read_file_info(const std::filesystem::path& path);

void write_spacetime(const std::filesystem::path& path, const KeyValues& provenance,
                     const std::vector<SpacetimeFrame>& frames, Precision precision = Precision::Complex128);

struct SpacetimeFile {
    KeyValues header;
    std::vector<SpacetimeFrame> frames;
};
SpacetimeFile read_spacetime(const std::filesystem::path& path);

void write_mode_series(const std::filesystem::path& path, const KeyValues& provenance,
                       const std::vector<ModeSeries>& series);

struct ModeSeriesFile {
    KeyValues header;
    std::vector<ModeSeries> series;
    const ModeSeries* find(std::size_t k_index) const;
};
ModeSeriesFile read_mode_series(const std::filesystem::path& path);

void write_histogram(const std::filesystem::path& path, const KeyValues& provenance,
                     const WignerHistogram& histogram);

struct HistogramFile {
    KeyValues header;
    WignerHistogram histogram;
};
HistogramFile read_histogram(const std::filesystem::path& path);

/// Everything needed to continue a run bit-exactly.
struct Checkpoint {
    KeyValues header;
    bool reference = false;
    FieldState state;
    std::string rng_state;
    std::uint64_t step = 0;
    std::vector<ModeSeries> series;
    std::vector<SpacetimeFrame> frames;
    TrajectoryRecorder::Accumulators accumulators;
    std::optional<std::size_t> dominant;

    /// Run state for RunControl::resume, seeded with the stored RNG state.
    RunState run_state(const SimParams& params) const;
    /// Restores the recorder contents into `recorder`.
    void restore(TrajectoryRecorder& recorder) const;
};

/// Written to a temporary file and renamed into place.
void write_checkpoint(const std::filesystem::path& path, const KeyValues& provenance, bool reference,
                      const RunState& run, const TrajectoryRecorder& recorder);
Checkpoint read_checkpoint(const std::filesystem::path& path);

/// Throws dopo::Error unless a trajectory and a reference header agree on
/// eps, grid, dt and transform convention (the shot-noise calibration
/// depends on all of them).
void check_reference_compatible(const KeyValues& trajectory, const KeyValues& reference);

}  // namespace dopo
