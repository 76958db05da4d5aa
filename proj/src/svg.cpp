#include "ganlab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace ganlab {

namespace {

std::string num(double v) {
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%.3f", v);
    return buffer;
}

std::string tick_label(double v) {
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%.4g", v);
    return buffer;
}

std::string escape(const std::string& text) {
    std::string out;
    for (char c : text) {
        switch (c) {
            case '&':
                out += "&amp;";
                break;
            case '<':
                out += "&lt;";
                break;
            case '>':
                out += "&gt;";
                break;
            default:
                out += c;
        }
    }
    return out;
}

// Round the tick step to a 1/2/5 multiple of a power of ten.
double nice_step(double span, int target_ticks) {
    const double raw = span / target_ticks;
    const double magnitude = std::pow(10.0, std::floor(std::log10(raw)));
    const double residual = raw / magnitude;
    double factor = 10.0;
    if (residual <= 1.0) {
        factor = 1.0;
    } else if (residual <= 2.0) {
        factor = 2.0;
    } else if (residual <= 5.0) {
        factor = 5.0;
    }
    return factor * magnitude;
}

}  // namespace

SvgPlot::SvgPlot(std::string title, std::string x_label, std::string y_label, int width,
                 int height)
    : title_(std::move(title)),
      x_label_(std::move(x_label)),
      y_label_(std::move(y_label)),
      width_(width),
      height_(height) {}

void SvgPlot::add_scatter(const Matrix& points, const std::string& color, double radius,
                          const std::string& name) {
    Series s;
    s.is_line = false;
    s.color = color;
    s.size = radius;
    s.name = name;
    for (int i = 0; i < points.rows(); ++i) {
        s.points.emplace_back(points(i, 0), points.cols() > 1 ? points(i, 1) : 0.0);
    }
    series_.push_back(std::move(s));
}

void SvgPlot::add_polyline(const std::vector<std::pair<double, double>>& points,
                           const std::string& color, double stroke_width,
                           const std::string& name) {
    Series s;
    s.is_line = true;
    s.color = color;
    s.size = stroke_width;
    s.name = name;
    s.points = points;
    series_.push_back(std::move(s));
}

std::string SvgPlot::render() const {
    double min_x = std::numeric_limits<double>::infinity();
    double max_x = -std::numeric_limits<double>::infinity();
    double min_y = min_x;
    double max_y = max_x;
    for (const Series& s : series_) {
        for (const auto& [x, y] : s.points) {
            min_x = std::min(min_x, x);
            max_x = std::max(max_x, x);
            min_y = std::min(min_y, y);
            max_y = std::max(max_y, y);
        }
    }
    if (!(min_x <= max_x)) {
        min_x = 0.0;
        max_x = 1.0;
        min_y = 0.0;
        max_y = 1.0;
    }
    if (max_x == min_x) {
        min_x -= 0.5;
        max_x += 0.5;
    }
    if (max_y == min_y) {
        min_y -= 0.5;
        max_y += 0.5;
    }
    const double pad_x = 0.05 * (max_x - min_x);
    const double pad_y = 0.05 * (max_y - min_y);
    min_x -= pad_x;
    max_x += pad_x;
    min_y -= pad_y;
    max_y += pad_y;

    const double left = 64.0;
    const double right = width_ - 16.0;
    const double top = 40.0;
    const double bottom = height_ - 48.0;
    auto map_x = [&](double x) {
        return left + (x - min_x) / (max_x - min_x) * (right - left);
    };
    auto map_y = [&](double y) {
        return bottom - (y - min_y) / (max_y - min_y) * (bottom - top);
    };

    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width_) +
           "\" height=\"" + std::to_string(height_) + "\" viewBox=\"0 0 " +
           std::to_string(width_) + " " + std::to_string(height_) + "\">\n";
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out += "<text x=\"" + num(width_ / 2.0) + "\" y=\"20\" text-anchor=\"middle\" "
           "font-family=\"sans-serif\" font-size=\"14\">" + escape(title_) + "</text>\n";

    // axes box
    out += "<rect x=\"" + num(left) + "\" y=\"" + num(top) + "\" width=\"" + num(right - left) +
           "\" height=\"" + num(bottom - top) +
           "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";

    const double x_step = nice_step(max_x - min_x, 6);
    for (double t = std::ceil(min_x / x_step) * x_step; t <= max_x + 1e-12 * x_step;
         t += x_step) {
        const double px = map_x(t);
        out += "<line x1=\"" + num(px) + "\" y1=\"" + num(bottom) + "\" x2=\"" + num(px) +
               "\" y2=\"" + num(bottom + 4) + "\" stroke=\"black\"/>\n";
        out += "<text x=\"" + num(px) + "\" y=\"" + num(bottom + 18) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" +
               tick_label(std::abs(t) < 1e-12 * x_step ? 0.0 : t) + "</text>\n";
    }
    const double y_step = nice_step(max_y - min_y, 6);
    for (double t = std::ceil(min_y / y_step) * y_step; t <= max_y + 1e-12 * y_step;
         t += y_step) {
        const double py = map_y(t);
        out += "<line x1=\"" + num(left - 4) + "\" y1=\"" + num(py) + "\" x2=\"" + num(left) +
               "\" y2=\"" + num(py) + "\" stroke=\"black\"/>\n";
        out += "<text x=\"" + num(left - 8) + "\" y=\"" + num(py + 4) +
               "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" +
               tick_label(std::abs(t) < 1e-12 * y_step ? 0.0 : t) + "</text>\n";
    }
    out += "<text x=\"" + num((left + right) / 2.0) + "\" y=\"" + num(height_ - 10.0) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" +
           escape(x_label_) + "</text>\n";
    out += "<text x=\"16\" y=\"" + num((top + bottom) / 2.0) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
           "transform=\"rotate(-90 16 " + num((top + bottom) / 2.0) + ")\">" +
           escape(y_label_) + "</text>\n";

    double legend_y = top + 16.0;
    for (const Series& s : series_) {
        if (s.is_line) {
            std::string path;
            for (const auto& [x, y] : s.points) {
                path += (path.empty() ? "M" : " L") + num(map_x(x)) + " " + num(map_y(y));
            }
            out += "<path d=\"" + path + "\" fill=\"none\" stroke=\"" + s.color +
                   "\" stroke-width=\"" + num(s.size) + "\"/>\n";
        } else {
            for (const auto& [x, y] : s.points) {
                out += "<circle cx=\"" + num(map_x(x)) + "\" cy=\"" + num(map_y(y)) +
                       "\" r=\"" + num(s.size) + "\" fill=\"" + s.color +
                       "\" fill-opacity=\"0.7\"/>\n";
            }
        }
        if (!s.name.empty()) {
            out += "<rect x=\"" + num(right - 130.0) + "\" y=\"" + num(legend_y - 8.0) +
                   "\" width=\"10\" height=\"10\" fill=\"" + s.color + "\"/>\n";
            out += "<text x=\"" + num(right - 115.0) + "\" y=\"" + num(legend_y + 1.0) +
                   "\" font-family=\"sans-serif\" font-size=\"11\">" + escape(s.name) +
                   "</text>\n";
            legend_y += 16.0;
        }
    }
    out += "</svg>\n";
    return out;
}

}  // namespace ganlab
