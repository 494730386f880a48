#include "volfeed/svgplot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "volfeed/errors.hpp"

namespace volfeed {

namespace {

const char* kPalette[] = {"#1f6fb2", "#d1495b", "#2e8b57", "#e6a817",
                          "#6a4fb3", "#13889b", "#777777"};
constexpr int kPaletteSize = 7;

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.8g", v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void expand(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  bool valid() const { return lo <= hi; }
};

double nice_step(double span, int target) {
  if (!(span > 0.0)) return 1.0;
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double mult : {1.0, 2.0, 5.0})
    if (raw <= mult * mag) return mult * mag;
  return 10.0 * mag;
}

}  // namespace

std::string SvgChart::render() const {
  Range xr, yr;
  for (const SvgSeries& s : series) {
    for (double v : s.x) xr.expand(v);
    for (double v : s.y) yr.expand(v);
  }
  for (const auto& [y, label] : hlines) yr.expand(y);
  if (!xr.valid()) {
    xr.lo = 0;
    xr.hi = 1;
  }
  if (!yr.valid()) {
    yr.lo = 0;
    yr.hi = 1;
  }
  if (xr.hi == xr.lo) {
    xr.lo -= 0.5;
    xr.hi += 0.5;
  }
  if (yr.hi == yr.lo) {
    yr.lo -= 0.5;
    yr.hi += 0.5;
  }
  const double ypad = 0.05 * (yr.hi - yr.lo);
  yr.lo -= ypad;
  yr.hi += ypad;

  const double ml = 72, mr = 18, mt = 40, mb = 48;
  const double pw = width - ml - mr;
  const double ph = height - mt - mb;
  auto px = [&](double x) { return ml + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
  auto py = [&](double y) { return mt + (yr.hi - y) / (yr.hi - yr.lo) * ph; };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << ' '
      << height << "\">\n";
  out << "<rect width=\"" << width << "\" height=\"" << height
      << "\" fill=\"#ffffff\"/>\n";
  if (!title.empty())
    out << "<text x=\"" << fmt(ml + pw / 2)
        << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"15\" fill=\"#222222\">"
        << xml_escape(title) << "</text>\n";

  // axes and ticks
  const double xstep = nice_step(xr.hi - xr.lo, 6);
  const double ystep = nice_step(yr.hi - yr.lo, 6);
  out << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#444444\">\n";
  for (double x = std::ceil(xr.lo / xstep) * xstep; x <= xr.hi + 1e-9 * xstep;
       x += xstep) {
    out << "<line x1=\"" << fmt(px(x)) << "\" y1=\"" << fmt(mt) << "\" x2=\""
        << fmt(px(x)) << "\" y2=\"" << fmt(mt + ph)
        << "\" stroke=\"#e4e4e4\" stroke-width=\"1\"/>\n";
    out << "<text x=\"" << fmt(px(x)) << "\" y=\"" << fmt(mt + ph + 16)
        << "\" text-anchor=\"middle\">" << fmt(x) << "</text>\n";
  }
  for (double y = std::ceil(yr.lo / ystep) * ystep; y <= yr.hi + 1e-9 * ystep;
       y += ystep) {
    out << "<line x1=\"" << fmt(ml) << "\" y1=\"" << fmt(py(y)) << "\" x2=\""
        << fmt(ml + pw) << "\" y2=\"" << fmt(py(y))
        << "\" stroke=\"#e4e4e4\" stroke-width=\"1\"/>\n";
    out << "<text x=\"" << fmt(ml - 6) << "\" y=\"" << fmt(py(y) + 4)
        << "\" text-anchor=\"end\">" << fmt(y) << "</text>\n";
  }
  out << "</g>\n";
  out << "<rect x=\"" << fmt(ml) << "\" y=\"" << fmt(mt) << "\" width=\""
      << fmt(pw) << "\" height=\"" << fmt(ph)
      << "\" fill=\"none\" stroke=\"#999999\" stroke-width=\"1\"/>\n";
  if (!x_label.empty())
    out << "<text x=\"" << fmt(ml + pw / 2) << "\" y=\"" << fmt(height - 10)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"12\" fill=\"#333333\">"
        << xml_escape(x_label) << "</text>\n";
  if (!y_label.empty())
    out << "<text x=\"16\" y=\"" << fmt(mt + ph / 2)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"12\" fill=\"#333333\" transform=\"rotate(-90 16 "
        << fmt(mt + ph / 2) << ")\">" << xml_escape(y_label) << "</text>\n";

  for (const auto& [y, label] : hlines) {
    out << "<line x1=\"" << fmt(ml) << "\" y1=\"" << fmt(py(y)) << "\" x2=\""
        << fmt(ml + pw) << "\" y2=\"" << fmt(py(y))
        << "\" stroke=\"#888888\" stroke-width=\"1\" "
           "stroke-dasharray=\"5 4\"/>\n";
    if (!label.empty())
      out << "<text x=\"" << fmt(ml + pw - 4) << "\" y=\"" << fmt(py(y) - 4)
          << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
             "font-size=\"10\" fill=\"#666666\">"
          << xml_escape(label) << "</text>\n";
  }

  for (std::size_t si = 0; si < series.size(); ++si) {
    const SvgSeries& s = series[si];
    const std::string color =
        s.color.empty() ? kPalette[si % kPaletteSize] : s.color;
    const std::size_t npts = std::min(s.x.size(), s.y.size());
    if (s.points) {
      out << "<g fill=\"" << color << "\">\n";
      for (std::size_t i = 0; i < npts; ++i) {
        if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
        out << "<circle cx=\"" << fmt(px(s.x[i])) << "\" cy=\""
            << fmt(py(s.y[i])) << "\" r=\"2.4\"/>\n";
      }
      out << "</g>\n";
    } else {
      // break the polyline at non-finite samples
      bool open = false;
      for (std::size_t i = 0; i < npts; ++i) {
        const bool ok = std::isfinite(s.x[i]) && std::isfinite(s.y[i]);
        if (ok && !open) {
          out << "<polyline fill=\"none\" stroke=\"" << color
              << "\" stroke-width=\"1.6\"";
          if (s.dashed) out << " stroke-dasharray=\"6 4\"";
          out << " points=\"";
          open = true;
        }
        if (ok) {
          out << fmt(px(s.x[i])) << ',' << fmt(py(s.y[i])) << ' ';
        } else if (open) {
          out << "\"/>\n";
          open = false;
        }
      }
      if (open) out << "\"/>\n";
    }
  }

  // legend
  double ly = mt + 14;
  out << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
  for (std::size_t si = 0; si < series.size(); ++si) {
    const SvgSeries& s = series[si];
    if (s.label.empty()) continue;
    const std::string color =
        s.color.empty() ? kPalette[si % kPaletteSize] : s.color;
    out << "<line x1=\"" << fmt(ml + 10) << "\" y1=\"" << fmt(ly - 4)
        << "\" x2=\"" << fmt(ml + 34) << "\" y2=\"" << fmt(ly - 4)
        << "\" stroke=\"" << color << "\" stroke-width=\"2\"";
    if (s.dashed) out << " stroke-dasharray=\"6 4\"";
    out << "/>\n";
    out << "<text x=\"" << fmt(ml + 40) << "\" y=\"" << fmt(ly)
        << "\" fill=\"#333333\">" << xml_escape(s.label) << "</text>\n";
    ly += 16;
  }
  out << "</g>\n";

  // numbers behind the picture, for checking the figure without a renderer
  out << "<!-- data\n";
  for (const SvgSeries& s : series) {
    // "--" is illegal inside an XML comment
    std::string label = xml_escape(s.label);
    for (std::size_t pos = 0; (pos = label.find("--", pos)) != std::string::npos;)
      label.replace(pos, 2, "- -");
    out << label << ":";
    const std::size_t npts = std::min(s.x.size(), s.y.size());
    for (std::size_t i = 0; i < npts; ++i)
      out << ' ' << fmt(s.x[i]) << ',' << fmt(s.y[i]);
    out << '\n';
  }
  out << "-->\n";
  out << "</svg>\n";
  return out.str();
}

void SvgChart::write(const std::string& path) const {
  std::ofstream outf(path, std::ios::binary);
  if (!outf) throw InputError("cannot write " + path);
  outf << render();
}

}  // namespace volfeed
