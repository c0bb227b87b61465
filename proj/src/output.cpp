#include "dopo/output.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace dopo {

struct CsvWriter::Impl {
    std::ofstream out;
    std::size_t columns = 0;
};

namespace {

std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + "\"";
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(std::move(cur));
    return out;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

void provenance_comment(std::ostream& os, const KeyValues& provenance) {
    os << "<!--\n";
    for (const auto& [k, v] : provenance) {
        std::string line = k + "=" + v;
        // "--" is not allowed inside XML comments.
        for (std::size_t p; (p = line.find("--")) != std::string::npos;) line.replace(p, 2, "- -");
        os << line << "\n";
    }
    os << "-->\n";
}

std::string fmt(double x, int prec = 4) {
    std::ostringstream os;
    os.precision(prec);
    os << x;
    return os.str();
}

std::string hex_color(double r, double g, double b) {
    auto c = [](double v) { return static_cast<int>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)); };
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", c(r), c(g), c(b));
    return buf;
}

// Sequential scale through dark blue, teal, green and yellow.
std::string sequential(double t) {
    static const double stops[5][3] = {
        {0.27, 0.00, 0.33}, {0.23, 0.32, 0.55}, {0.13, 0.57, 0.55}, {0.37, 0.79, 0.38}, {0.99, 0.91, 0.14}};
    t = std::clamp(t, 0.0, 1.0) * 4.0;
    const int i = std::min(3, static_cast<int>(t));
    const double f = t - i;
    return hex_color(stops[i][0] + f * (stops[i + 1][0] - stops[i][0]),
                     stops[i][1] + f * (stops[i + 1][1] - stops[i][1]),
                     stops[i][2] + f * (stops[i + 1][2] - stops[i][2]));
}

std::string diverging(double t) {  // t in [-1, 1]
    t = std::clamp(t, -1.0, 1.0);
    if (t < 0) return hex_color(1.0 + t * 0.8, 1.0 + t * 0.6, 1.0);
    return hex_color(1.0, 1.0 - t * 0.7, 1.0 - t * 0.8);
}

constexpr double kWidth = 640, kHeight = 480;
constexpr double kLeft = 80, kRight = 30, kTop = 40, kBottom = 60;

void frame_and_labels(std::ostream& os, const std::string& title, const std::string& xlabel,
                      const std::string& ylabel) {
    const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
    os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    os << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
       << xml_escape(title) << "</text>\n";
    os << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 15
       << "\" text-anchor=\"middle\" font-size=\"13\">" << xml_escape(xlabel) << "</text>\n";
    os << "<text x=\"18\" y=\"" << kTop + ph / 2 << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 "
       << kTop + ph / 2 << ")\">" << xml_escape(ylabel) << "</text>\n";
}

void ticks(std::ostream& os, double x0, double x1, double y0, double y1, bool log_y) {
    const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
    for (int i = 0; i <= 4; ++i) {
        const double f = i / 4.0;
        const double xv = x0 + f * (x1 - x0);
        const double yv = log_y ? std::pow(10.0, y0 + f * (y1 - y0)) : y0 + f * (y1 - y0);
        const double px = kLeft + f * pw, py = kTop + ph - f * ph;
        os << "<text x=\"" << px << "\" y=\"" << kTop + ph + 18 << "\" text-anchor=\"middle\" font-size=\"11\">"
           << fmt(xv) << "</text>\n";
        os << "<text x=\"" << kLeft - 6 << "\" y=\"" << py + 4 << "\" text-anchor=\"end\" font-size=\"11\">"
           << fmt(yv) << "</text>\n";
    }
}

std::ofstream open_svg(const std::filesystem::path& path, const KeyValues& provenance) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw Error("cannot write '" + path.string() + "'");
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    provenance_comment(os, provenance);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
       << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\" font-family=\"sans-serif\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    return os;
}

}  // namespace

CsvWriter::CsvWriter(const std::filesystem::path& path, const KeyValues& provenance,
                     const std::vector<std::string>& columns)
    : impl_(new Impl) {
    impl_->out.open(path, std::ios::binary | std::ios::trunc);
    if (!impl_->out) {
        delete impl_;
        throw Error("cannot write '" + path.string() + "'");
    }
    for (const auto& [k, v] : provenance) impl_->out << "# " << k << "=" << v << "\n";
    impl_->columns = columns.size();
    for (std::size_t i = 0; i < columns.size(); ++i) impl_->out << (i ? "," : "") << quote(columns[i]);
    impl_->out << "\n";
}

CsvWriter::~CsvWriter() { delete impl_; }

void CsvWriter::row(const std::vector<std::string>& cells) {
    if (cells.size() != impl_->columns) throw Error("CSV row has the wrong number of cells");
    for (std::size_t i = 0; i < cells.size(); ++i) impl_->out << (i ? "," : "") << quote(cells[i]);
    impl_->out << "\n";
}

void CsvWriter::row(const std::vector<double>& values) {
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (double v : values) cells.push_back(cell(v));
    row(cells);
}

std::string cell(std::size_t x) { return std::to_string(x); }
std::string cell(bool x) { return x ? "true" : "false"; }

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path.string() + "'");
    CsvTable t;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (!have_header && line.rfind("# ", 0) == 0) {
            const auto eq = line.find('=');
            if (eq != std::string::npos) t.provenance.emplace_back(line.substr(2, eq - 2), line.substr(eq + 1));
            continue;
        }
        if (!have_header) {
            t.columns = split_csv(line);
            have_header = true;
        } else if (!line.empty()) {
            t.rows.push_back(split_csv(line));
        }
    }
    return t;
}

void write_heatmap_svg(const std::filesystem::path& path, const KeyValues& provenance, const Heatmap& map,
                       std::size_t max_cells) {
    if (map.values.size() != map.rows * map.cols || map.rows == 0 || map.cols == 0)
        throw Error("heatmap dimensions do not match its data");
    const std::size_t fr = (map.rows + max_cells - 1) / max_cells;
    const std::size_t fc = (map.cols + max_cells - 1) / max_cells;
    const std::size_t rows = (map.rows + fr - 1) / fr, cols = (map.cols + fc - 1) / fc;
    std::vector<double> cells(rows * cols, 0.0);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) {
            double s = 0.0;
            std::size_t n = 0;
            for (std::size_t i = r * fr; i < std::min(map.rows, (r + 1) * fr); ++i)
                for (std::size_t j = c * fc; j < std::min(map.cols, (c + 1) * fc); ++j) {
                    s += map.values[i * map.cols + j];
                    ++n;
                }
            cells[r * cols + c] = s / static_cast<double>(n);
        }
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (double v : cells)
        if (std::isfinite(v)) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    const double amp = std::max(std::abs(lo), std::abs(hi));

    auto os = open_svg(path, provenance);
    const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
    const double cw = pw / static_cast<double>(cols), ch = ph / static_cast<double>(rows);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) {
            const double v = cells[r * cols + c];
            std::string color;
            if (map.diverging)
                color = diverging(amp > 0 ? v / amp : 0.0);
            else
                color = sequential(hi > lo ? (v - lo) / (hi - lo) : 0.0);
            os << "<rect x=\"" << fmt(kLeft + c * cw, 6) << "\" y=\"" << fmt(kTop + ph - (r + 1) * ch, 6)
               << "\" width=\"" << fmt(cw * 1.02, 4) << "\" height=\"" << fmt(ch * 1.02, 4) << "\" fill=\"" << color
               << "\"/>\n";
        }
    frame_and_labels(os, map.title, map.xlabel, map.ylabel);
    ticks(os, map.x0, map.x1, map.y0, map.y1, false);
    os << "<text x=\"" << kWidth - kRight << "\" y=\"" << kTop - 6 << "\" text-anchor=\"end\" font-size=\"11\">range "
       << fmt(lo) << " .. " << fmt(hi) << "</text>\n";
    os << "</svg>\n";
}

void write_line_svg(const std::filesystem::path& path, const KeyValues& provenance, const LinePlot& plot) {
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    auto ty = [&](double y) { return plot.log_y ? std::log10(y) : y; };
    for (const auto& s : plot.series)
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i]) || (plot.log_y && !(s.y[i] > 0))) continue;
            x0 = std::min(x0, s.x[i]);
            x1 = std::max(x1, s.x[i]);
            y0 = std::min(y0, ty(s.y[i]));
            y1 = std::max(y1, ty(s.y[i]));
        }
    for (double g : plot.guides)
        if (!plot.log_y || g > 0) {
            y0 = std::min(y0, ty(g));
            y1 = std::max(y1, ty(g));
        }
    if (!(x1 > x0)) {
        x0 = std::isfinite(x0) ? x0 - 1 : 0;
        x1 = x0 + 2;
    }
    if (!(y1 > y0)) {
        y0 = std::isfinite(y0) ? y0 - 1 : 0;
        y1 = y0 + 2;
    }
    const double pad = 0.05 * (y1 - y0);
    y0 -= pad;
    y1 += pad;

    auto os = open_svg(path, provenance);
    const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
    auto px = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * pw; };
    auto py = [&](double y) { return kTop + ph - (ty(y) - y0) / (y1 - y0) * ph; };
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
    for (double g : plot.guides)
        if (!plot.log_y || g > 0)
            os << "<line x1=\"" << kLeft << "\" x2=\"" << kLeft + pw << "\" y1=\"" << fmt(py(g), 6) << "\" y2=\""
               << fmt(py(g), 6) << "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";
    for (std::size_t si = 0; si < plot.series.size(); ++si) {
        const auto& s = plot.series[si];
        os << "<polyline fill=\"none\" stroke-width=\"1.5\" stroke=\"" << colors[si % 6] << "\" points=\"";
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i]) || (plot.log_y && !(s.y[i] > 0))) continue;
            os << fmt(px(s.x[i]), 6) << "," << fmt(py(s.y[i]), 6) << " ";
        }
        os << "\"/>\n";
        os << "<text x=\"" << kLeft + pw - 8 << "\" y=\"" << kTop + 16 + 15 * si << "\" text-anchor=\"end\" font-size=\"12\" fill=\""
           << colors[si % 6] << "\">" << xml_escape(s.label) << "</text>\n";
    }
    frame_and_labels(os, plot.title, plot.xlabel, plot.ylabel);
    ticks(os, x0, x1, y0, y1, plot.log_y);
    os << "</svg>\n";
}

}  // namespace dopo
