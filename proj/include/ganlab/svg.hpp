#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ganlab/matrix.hpp"

namespace ganlab {

// Minimal deterministic plotter: scatter points and polylines on shared
// linear axes with ticks. Output depends only on the added data.
class SvgPlot {
  public:
    SvgPlot(std::string title, std::string x_label, std::string y_label, int width = 640,
            int height = 480);

    void add_scatter(const Matrix& points, const std::string& color, double radius = 2.5,
                     const std::string& name = "");
    void add_polyline(const std::vector<std::pair<double, double>>& points,
                      const std::string& color, double stroke_width = 1.5,
                      const std::string& name = "");

    std::string render() const;

  private:
    struct Series {
        bool is_line = false;
        std::vector<std::pair<double, double>> points;
        std::string color;
        double size = 0.0;
        std::string name;
    };

    std::string title_;
    std::string x_label_;
    std::string y_label_;
    int width_;
    int height_;
    std::vector<Series> series_;
};

}  // namespace ganlab
