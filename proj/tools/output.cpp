#include "output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace piezo::cli {

std::string fmt(double x) {
  if (x == 0.0) return "0";  // no "-0"
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  write_text(path, j.dump(2) + "\n");
}

namespace {

std::string short_num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

}  // namespace

std::string loglog_svg(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                       const std::vector<Series>& series) {
  constexpr double width = 640, height = 420;
  constexpr double left = 80, right = 20, top = 40, bottom = 60;
  static const char* colours[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

  std::vector<std::vector<std::pair<double, double>>> pts;
  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo, ylo = xlo, yhi = -xlo;
  for (const auto& s : series) {
    std::vector<std::pair<double, double>> p;
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!(s.x[i] > 0) || !(s.y[i] > 0) || !std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      p.emplace_back(std::log10(s.x[i]), std::log10(s.y[i]));
    }
    if (p.size() < 2) p.clear();
    for (const auto& [x, y] : p) {
      xlo = std::min(xlo, x); xhi = std::max(xhi, x);
      ylo = std::min(ylo, y); yhi = std::max(yhi, y);
    }
    pts.push_back(std::move(p));
  }
  if (!(xlo < xhi)) { xlo = 0; xhi = 1; }
  if (!(ylo < yhi)) { ylo = (ylo == ylo && std::isfinite(ylo)) ? ylo - 0.5 : 0; yhi = ylo + 1; }
  xlo = std::floor(xlo); xhi = std::ceil(xhi);
  ylo = std::floor(ylo); yhi = std::ceil(yhi);
  if (xhi == xlo) xhi += 1;
  if (yhi == ylo) yhi += 1;

  const double pw = width - left - right, ph = height - top - bottom;
  auto sx = [&](double x) { return left + (x - xlo) / (xhi - xlo) * pw; };
  auto sy = [&](double y) { return top + (yhi - y) / (yhi - ylo) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(title)
    << "</text>\n";
  o << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";

  // one tick per decade, thinned when there are many
  const int xstep = std::max(1, static_cast<int>((xhi - xlo) / 8));
  for (int d = static_cast<int>(xlo); d <= static_cast<int>(xhi); d += xstep) {
    const double x = sx(d);
    o << "<line x1=\"" << x << "\" y1=\"" << top + ph << "\" x2=\"" << x << "\" y2=\"" << top + ph + 5
      << "\" stroke=\"black\"/>";
    o << "<text x=\"" << x << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">1e" << d << "</text>\n";
  }
  const int ystep = std::max(1, static_cast<int>((yhi - ylo) / 8));
  for (int d = static_cast<int>(ylo); d <= static_cast<int>(yhi); d += ystep) {
    const double y = sy(d);
    o << "<line x1=\"" << left - 5 << "\" y1=\"" << y << "\" x2=\"" << left << "\" y2=\"" << y
      << "\" stroke=\"black\"/>";
    o << "<text x=\"" << left - 8 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">1e" << d << "</text>\n";
  }
  o << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 15 << "\" text-anchor=\"middle\">" << escape(xlabel)
    << "</text>\n";
  o << "<text transform=\"translate(18," << top + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
    << escape(ylabel) << "</text>\n";

  for (std::size_t k = 0; k < pts.size(); ++k) {
    if (pts[k].empty()) continue;
    const char* colour = colours[k % 5];
    o << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : pts[k]) o << short_num(sx(x)) << ',' << short_num(sy(y)) << ' ';
    o << "\"/>\n";
    const double ly = top + 16 + 16 * static_cast<double>(k);
    o << "<line x1=\"" << left + pw - 150 << "\" y1=\"" << ly - 4 << "\" x2=\"" << left + pw - 125 << "\" y2=\""
      << ly - 4 << "\" stroke=\"" << colour << "\" stroke-width=\"2\"/>";
    o << "<text x=\"" << left + pw - 120 << "\" y=\"" << ly << "\">" << escape(series[k].name) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace piezo::cli
