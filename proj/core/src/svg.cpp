#include "mms/svg.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>

#include "mms/errors.hpp"

namespace mms {
namespace {

// Fixed-precision, locale-independent number rendering for coordinates.
std::string fixed(double v, int precision = 2) {
  if (!std::isfinite(v)) v = 0.0;
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, precision);
  return std::string(buf, res.ptr);
}

std::string escape_xml(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
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
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

// Round a range outward to "nice" tick steps (1/2/5 ladder).
double nice_step(double span) {
  if (!(span > 0.0)) return 1.0;
  const double raw = span / 6.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double norm = raw / mag;
  double step;
  if (norm < 1.5) {
    step = 1.0;
  } else if (norm < 3.5) {
    step = 2.0;
  } else if (norm < 7.5) {
    step = 5.0;
  } else {
    step = 10.0;
  }
  return step * mag;
}

}  // namespace

void write_svg_plot(const std::string& path, const std::vector<SvgSeries>& series,
                    const SvgPlotOptions& options) {
  double xmin = std::numeric_limits<double>::infinity();
  double xmax = -xmin;
  double ymin = xmin;
  double ymax = -xmin;
  for (const auto& s : series) {
    for (double v : s.x) {
      if (std::isfinite(v)) {
        xmin = std::min(xmin, v);
        xmax = std::max(xmax, v);
      }
    }
    for (double v : s.y) {
      if (std::isfinite(v)) {
        ymin = std::min(ymin, v);
        ymax = std::max(ymax, v);
      }
    }
  }
  if (!(xmin <= xmax)) {
    xmin = 0.0;
    xmax = 1.0;
  }
  if (!(ymin <= ymax)) {
    ymin = 0.0;
    ymax = 1.0;
  }
  if (xmax - xmin < 1e-12) {
    xmin -= 0.5;
    xmax += 0.5;
  }
  if (ymax - ymin < 1e-12) {
    ymin -= 0.5;
    ymax += 0.5;
  }

  const double margin_left = 70.0;
  const double margin_right = 20.0;
  const double margin_top = 40.0;
  const double margin_bottom = 55.0;
  double plot_w = options.width_px - margin_left - margin_right;
  double plot_h = options.height_px - margin_top - margin_bottom;

  if (options.equal_aspect) {
    // Expand the smaller data span so one unit maps to the same pixel count
    // on both axes.
    const double sx = plot_w / (xmax - xmin);
    const double sy = plot_h / (ymax - ymin);
    if (sx < sy) {
      const double want = plot_h / sx;
      const double extra = (want - (ymax - ymin)) / 2.0;
      ymin -= extra;
      ymax += extra;
    } else {
      const double want = plot_w / sy;
      const double extra = (want - (xmax - xmin)) / 2.0;
      xmin -= extra;
      xmax += extra;
    }
  }

  const auto map_x = [&](double v) {
    return margin_left + (v - xmin) / (xmax - xmin) * plot_w;
  };
  const auto map_y = [&](double v) {
    return margin_top + plot_h - (v - ymin) / (ymax - ymin) * plot_h;
  };

  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(options.width_px) +
         "\" height=\"" + std::to_string(options.height_px) + "\" viewBox=\"0 0 " +
         std::to_string(options.width_px) + " " + std::to_string(options.height_px) + "\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<text x=\"" + fixed(options.width_px / 2.0) +
         "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">" +
         escape_xml(options.title) + "</text>\n";

  // Grid and ticks.
  const double xstep = nice_step(xmax - xmin);
  const double ystep = nice_step(ymax - ymin);
  out += "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#444\">\n";
  for (double v = std::ceil(xmin / xstep) * xstep; v <= xmax + 1e-9; v += xstep) {
    const double px = map_x(v);
    out += "<line x1=\"" + fixed(px) + "\" y1=\"" + fixed(margin_top) + "\" x2=\"" + fixed(px) +
           "\" y2=\"" + fixed(margin_top + plot_h) + "\" stroke=\"#ddd\" stroke-width=\"1\"/>\n";
    out += "<text x=\"" + fixed(px) + "\" y=\"" + fixed(margin_top + plot_h + 16.0) +
           "\" text-anchor=\"middle\">" + fixed(v, 3) + "</text>\n";
  }
  for (double v = std::ceil(ymin / ystep) * ystep; v <= ymax + 1e-9; v += ystep) {
    const double py = map_y(v);
    out += "<line x1=\"" + fixed(margin_left) + "\" y1=\"" + fixed(py) + "\" x2=\"" +
           fixed(margin_left + plot_w) + "\" y2=\"" + fixed(py) +
           "\" stroke=\"#ddd\" stroke-width=\"1\"/>\n";
    out += "<text x=\"" + fixed(margin_left - 6.0) + "\" y=\"" + fixed(py + 4.0) +
           "\" text-anchor=\"end\">" + fixed(v, 3) + "</text>\n";
  }
  out += "</g>\n";

  // Frame.
  out += "<rect x=\"" + fixed(margin_left) + "\" y=\"" + fixed(margin_top) + "\" width=\"" +
         fixed(plot_w) + "\" height=\"" + fixed(plot_h) +
         "\" fill=\"none\" stroke=\"#333\" stroke-width=\"1\"/>\n";

  // Axis labels.
  out += "<text x=\"" + fixed(margin_left + plot_w / 2.0) + "\" y=\"" +
         fixed(options.height_px - 12.0) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" +
         escape_xml(options.x_label) + "</text>\n";
  out += "<text x=\"16\" y=\"" + fixed(margin_top + plot_h / 2.0) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" transform=\"rotate(-90 16 " +
         fixed(margin_top + plot_h / 2.0) + ")\">" + escape_xml(options.y_label) + "</text>\n";

  // Data series, clipped to the plot area.
  out += "<clipPath id=\"plot\"><rect x=\"" + fixed(margin_left) + "\" y=\"" + fixed(margin_top) +
         "\" width=\"" + fixed(plot_w) + "\" height=\"" + fixed(plot_h) + "\"/></clipPath>\n";
  out += "<g clip-path=\"url(#plot)\">\n";
  for (const auto& s : series) {
    if (s.x.size() != s.y.size() || s.x.empty()) continue;
    out += "<polyline fill=\"none\" stroke=\"" + escape_xml(s.color) +
           "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (i != 0) out += " ";
      out += fixed(map_x(s.x[i])) + "," + fixed(map_y(s.y[i]));
    }
    out += "\"/>\n";
  }
  out += "</g>\n";

  // Legend.
  double ly = margin_top + 14.0;
  for (const auto& s : series) {
    if (s.label.empty()) continue;
    out += "<line x1=\"" + fixed(margin_left + 10.0) + "\" y1=\"" + fixed(ly - 4.0) + "\" x2=\"" +
           fixed(margin_left + 34.0) + "\" y2=\"" + fixed(ly - 4.0) + "\" stroke=\"" +
           escape_xml(s.color) + "\" stroke-width=\"2\"/>\n";
    out += "<text x=\"" + fixed(margin_left + 40.0) + "\" y=\"" + fixed(ly) +
           "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#222\">" + escape_xml(s.label) +
           "</text>\n";
    ly += 16.0;
  }
  out += "</svg>\n";

  std::ofstream f(path, std::ios::binary);
  if (!f) {
    raise(Errc::io_error, "write_svg_plot: cannot open " + path);
  }
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) {
    raise(Errc::io_error, "write_svg_plot: write failed for " + path);
  }
}

}  // namespace mms
