#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ctb/types.hpp"

namespace ctb {

/// All floating-point output uses 17 significant digits so golden files round-trip.
inline std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

/// Minimal one-line JSON object writer with ordered keys and fmt17 numbers.
/// (Deliberate: a deterministic float policy matters more here than a JSON library.)
class JsonRecord {
  public:
    JsonRecord& num(const std::string& key, double v) { return raw(key, fmt17(v)); }
    JsonRecord& integer(const std::string& key, long v) { return raw(key, std::to_string(v)); }
    JsonRecord& str(const std::string& key, const std::string& v) {
        return raw(key, "\"" + escape(v) + "\"");
    }
    JsonRecord& boolean(const std::string& key, bool v) { return raw(key, v ? "true" : "false"); }

    JsonRecord& num_array(const std::string& key, const std::vector<double>& v) {
        std::string out = "[";
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) out += ",";
            out += fmt17(v[i]);
        }
        return raw(key, out + "]");
    }

    std::string str() const {
        std::string out = "{";
        for (std::size_t i = 0; i < fields_.size(); ++i) {
            if (i) out += ",";
            out += "\"" + fields_[i].first + "\":" + fields_[i].second;
        }
        out += "}";
        return out;
    }

  private:
    JsonRecord& raw(const std::string& key, std::string v) {
        fields_.emplace_back(key, std::move(v));
        return *this;
    }
    static std::string escape(const std::string& s) {
        std::string out;
        for (char c : s) {
            if (c == '"' || c == '\\') out += '\\';
            out += c;
        }
        return out;
    }
    std::vector<std::pair<std::string, std::string>> fields_;
};

/// Comma-separated rows; numeric cells via fmt17.
class CsvWriter {
  public:
    explicit CsvWriter(std::ostream& os) : os_(os) {}

    void header(const std::vector<std::string>& names) { line(names); }

    void line(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) os_ << ',';
            os_ << cells[i];
        }
        os_ << '\n';
    }

    class Row {
      public:
        explicit Row(CsvWriter& w) : w_(w) {}
        Row& num(double v) { return cell(fmt17(v)); }
        Row& integer(long v) { return cell(std::to_string(v)); }
        Row& text(const std::string& s) { return cell(s); }
        ~Row() { w_.line(cells_); }

      private:
        Row& cell(std::string s) {
            cells_.push_back(std::move(s));
            return *this;
        }
        CsvWriter& w_;
        std::vector<std::string> cells_;
    };

    Row row() { return Row(*this); }

  private:
    std::ostream& os_;
};

struct SvgSeries {
    std::vector<std::pair<double, double>> points;
    std::string color = "#1f77b4";
    double width = 1.2;
    bool markers = false;  // draw small circles instead of a connected path
};

/// Deterministic SVG line plot: fixed canvas, data-driven bounds, no timestamps.
/// Byte-identical output for identical input data.
inline std::string svg_plot(const std::vector<SvgSeries>& series, const std::string& xlabel,
                            const std::string& ylabel, int w = 640, int h = 480) {
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& s : series)
        for (auto [x, y] : s.points) {
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    if (xmin > xmax) { xmin = 0; xmax = 1; ymin = 0; ymax = 1; }
    if (xmax == xmin) { xmax = xmin + 1; }
    if (ymax == ymin) { ymax = ymin + 1; }
    const double ml = 56, mr = 16, mt = 16, mb = 42;
    auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (w - ml - mr); };
    auto py = [&](double y) { return h - mb - (y - ymin) / (ymax - ymin) * (h - mt - mb); };
    auto fmt = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2f", v);
        return std::string(buf);
    };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
       << "\" viewBox=\"0 0 " << w << " " << h << "\">\n";
    os << "<rect width=\"" << w << "\" height=\"" << h << "\" fill=\"white\"/>\n";
    os << "<rect x=\"" << fmt(ml) << "\" y=\"" << fmt(mt) << "\" width=\"" << fmt(w - ml - mr)
       << "\" height=\"" << fmt(h - mt - mb)
       << "\" fill=\"none\" stroke=\"#444444\" stroke-width=\"1\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double xv = xmin + (xmax - xmin) * i / 4.0;
        const double yv = ymin + (ymax - ymin) * i / 4.0;
        os << "<text x=\"" << fmt(px(xv)) << "\" y=\"" << fmt(h - mb + 16)
           << "\" font-size=\"11\" text-anchor=\"middle\" fill=\"#333333\">" << fmt17(xv)
           << "</text>\n";
        os << "<text x=\"" << fmt(ml - 6) << "\" y=\"" << fmt(py(yv) + 4)
           << "\" font-size=\"11\" text-anchor=\"end\" fill=\"#333333\">" << fmt17(yv)
           << "</text>\n";
    }
    os << "<text x=\"" << fmt(ml + (w - ml - mr) / 2) << "\" y=\"" << fmt(h - 8.0)
       << "\" font-size=\"13\" text-anchor=\"middle\" fill=\"#000000\">" << xlabel
       << "</text>\n";
    os << "<text x=\"14\" y=\"" << fmt(mt + (h - mt - mb) / 2)
       << "\" font-size=\"13\" text-anchor=\"middle\" fill=\"#000000\" transform=\"rotate(-90 14 "
       << fmt(mt + (h - mt - mb) / 2) << ")\">" << ylabel << "</text>\n";
    for (const auto& s : series) {
        if (s.points.empty()) continue;
        if (s.markers) {
            for (auto [x, y] : s.points)
                os << "<circle cx=\"" << fmt(px(x)) << "\" cy=\"" << fmt(py(y))
                   << "\" r=\"1.6\" fill=\"" << s.color << "\"/>\n";
            continue;
        }
        os << "<path fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"" << s.width
           << "\" d=\"";
        for (std::size_t i = 0; i < s.points.size(); ++i)
            os << (i ? "L" : "M") << fmt(px(s.points[i].first)) << " "
               << fmt(py(s.points[i].second));
        os << "\"/>\n";
    }
    os << "</svg>\n";
    return os.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open " + path + " for writing");
    os << content;
}

}  // namespace ctb
