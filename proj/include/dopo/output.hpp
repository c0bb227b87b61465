#pragma once

// Text outputs: CSV tables and SVG plots. Both start with the provenance
// block (manifest hash and parameters): CSV as leading "# key=value" lines
// before the header row, SVG as an XML comment.

#include "dopo/config.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace dopo {

class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const KeyValues& provenance,
              const std::vector<std::string>& columns);
    ~CsvWriter();
    CsvWriter(const CsvWriter&) = delete;
    CsvWriter& operator=(const CsvWriter&) = delete;

    void row(const std::vector<std::string>& cells);
    void row(const std::vector<double>& values);

private:
    struct Impl;
    Impl* impl_;
};

/// Cell text for a number, shortest round-trip form.
inline std::string cell(double x) { return format_number(x); }
std::string cell(std::size_t x);
std::string cell(bool x);

struct CsvTable {
    KeyValues provenance;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
};

/// Reads a table written by CsvWriter (comment lines become provenance).
CsvTable read_csv(const std::filesystem::path& path);

struct Heatmap {
    std::size_t rows = 0;  // y direction, first row at the bottom
    std::size_t cols = 0;
    std::vector<double> values;  // row-major
    double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
    std::string title, xlabel, ylabel;
    /// Symmetric blue-white-red scale about zero instead of a sequential one.
    bool diverging = false;
};

/// Cells are block-averaged down to at most `max_cells` per axis.
void write_heatmap_svg(const std::filesystem::path& path, const KeyValues& provenance,
                       const Heatmap& map, std::size_t max_cells = 200);

struct LineSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct LinePlot {
    std::string title, xlabel, ylabel;
    std::vector<LineSeries> series;
    bool log_y = false;
    /// Horizontal guide lines (e.g. the shot-noise level).
    std::vector<double> guides;
};

void write_line_svg(const std::filesystem::path& path, const KeyValues& provenance, const LinePlot& plot);

}  // namespace dopo
