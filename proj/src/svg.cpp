#include "lsfem/svg.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace lsfem::svg {

namespace {

constexpr double kWidth = 640, kHeight = 480;
constexpr double kLeft = 80, kRight = 150, kTop = 40, kBottom = 60;
constexpr std::array<const char*, 8> kPalette = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                                 "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string escape(const std::string& s) {
  std::string out;
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

struct Frame {
  Bounds b;
  double px(double x) const { return kLeft + (x - b.xmin) / (b.xmax - b.xmin) * (kWidth - kLeft - kRight); }
  double py(double y) const { return kHeight - kBottom - (y - b.ymin) / (b.ymax - b.ymin) * (kHeight - kTop - kBottom); }
};

// 1, 2 or 5 times a power of ten, about `target` ticks across the range.
double nice_step(double range, int target) {
  const double raw = range / target;
  const double p = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0})
    if (m * p >= raw) return m * p;
  return 10.0 * p;
}

std::string header(const std::string& title) {
  return fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\">\n"
      "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      "<text x=\"{2}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" text-anchor=\"middle\">{3}</text>\n",
      kWidth, kHeight, (kLeft + kWidth - kRight) / 2, escape(title));
}

std::string axes(const std::string& xlabel, const std::string& ylabel) {
  const double x0 = kLeft, x1 = kWidth - kRight, y0 = kTop, y1 = kHeight - kBottom;
  return fmt::format(
      "<rect x=\"{0}\" y=\"{2}\" width=\"{4}\" height=\"{5}\" fill=\"none\" stroke=\"black\"/>\n"
      "<text x=\"{6}\" y=\"{7}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">{8}</text>\n"
      "<text x=\"20\" y=\"{9}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" "
      "transform=\"rotate(-90 20 {9})\">{10}</text>\n",
      x0, x1, y0, y1, x1 - x0, y1 - y0, (x0 + x1) / 2, kHeight - 15, escape(xlabel), (y0 + y1) / 2,
      escape(ylabel));
}

std::string legend(const std::vector<Series>& series) {
  std::string out;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double y = kTop + 10 + 20.0 * static_cast<double>(i);
    out += fmt::format(
        "<circle cx=\"{}\" cy=\"{}\" r=\"4\" fill=\"{}\"/>\n"
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>\n",
        kWidth - kRight + 15, y, kPalette[i % kPalette.size()], kWidth - kRight + 25, y + 4,
        escape(series[i].label));
  }
  return out;
}

std::string tick_label(double v) { return fmt::format("{:.4g}", std::abs(v) < 1e-300 ? 0.0 : v); }

}  // namespace

Bounds data_bounds(const std::vector<Series>& series) {
  double inf = std::numeric_limits<double>::infinity();
  Bounds b{inf, -inf, inf, -inf};
  for (const auto& s : series)
    for (const auto& [x, y] : s.points) {
      b.xmin = std::min(b.xmin, x);
      b.xmax = std::max(b.xmax, x);
      b.ymin = std::min(b.ymin, y);
      b.ymax = std::max(b.ymax, y);
    }
  if (!std::isfinite(b.xmin)) return {0, 1, 0, 1};
  auto pad = [](double& lo, double& hi) {
    const double r = hi - lo;
    if (r <= 1e-12 * std::max(std::abs(lo), std::abs(hi))) {
      const double c = 0.5 * (lo + hi);
      const double w = std::max(0.5, 0.05 * std::abs(c));
      lo = c - w;
      hi = c + w;
    } else {
      lo -= 0.05 * r;
      hi += 0.05 * r;
    }
  };
  pad(b.xmin, b.xmax);
  pad(b.ymin, b.ymax);
  return b;
}

std::string scatter(const std::vector<Series>& series, const std::string& title, const std::string& xlabel,
                    const std::string& ylabel, std::optional<Bounds> bounds) {
  const Frame f{bounds.value_or(data_bounds(series))};
  std::string out = header(title);

  const double sx = nice_step(f.b.xmax - f.b.xmin, 6), sy = nice_step(f.b.ymax - f.b.ymin, 6);
  for (double x = std::ceil(f.b.xmin / sx) * sx; x <= f.b.xmax; x += sx)
    out += fmt::format(
        "<line x1=\"{0:.2f}\" y1=\"{1}\" x2=\"{0:.2f}\" y2=\"{2}\" stroke=\"#dddddd\"/>\n"
        "<text x=\"{0:.2f}\" y=\"{3}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">{4}</text>\n",
        f.px(x), kTop, kHeight - kBottom, kHeight - kBottom + 16, tick_label(x));
  for (double y = std::ceil(f.b.ymin / sy) * sy; y <= f.b.ymax; y += sy)
    out += fmt::format(
        "<line x1=\"{0}\" y1=\"{2:.2f}\" x2=\"{1}\" y2=\"{2:.2f}\" stroke=\"#dddddd\"/>\n"
        "<text x=\"{3}\" y=\"{4:.2f}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{5}</text>\n",
        kLeft, kWidth - kRight, f.py(y), kLeft - 6, f.py(y) + 4, tick_label(y));
  if (f.b.xmin < 0 && f.b.xmax > 0)
    out += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1}\" x2=\"{0:.2f}\" y2=\"{2}\" stroke=\"#888888\"/>\n", f.px(0),
                       kTop, kHeight - kBottom);
  if (f.b.ymin < 0 && f.b.ymax > 0)
    out += fmt::format("<line x1=\"{0}\" y1=\"{2:.2f}\" x2=\"{1}\" y2=\"{2:.2f}\" stroke=\"#888888\"/>\n", kLeft,
                       kWidth - kRight, f.py(0));
  out += axes(xlabel, ylabel);

  for (std::size_t i = 0; i < series.size(); ++i)
    for (const auto& [x, y] : series[i].points) {
      if (x < f.b.xmin || x > f.b.xmax || y < f.b.ymin || y > f.b.ymax) continue;
      out += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"2.5\" fill=\"{}\" fill-opacity=\"0.7\"/>\n",
                         f.px(x), f.py(y), kPalette[i % kPalette.size()]);
    }
  out += legend(series);
  out += "</svg>\n";
  return out;
}

std::string loglog(const std::vector<Series>& series, const std::string& title, const std::string& xlabel,
                   const std::string& ylabel) {
  std::vector<Series> logs;
  for (const auto& s : series) {
    Series l{s.label, {}};
    for (const auto& [x, y] : s.points)
      if (x > 0 && y > 0) l.points.emplace_back(std::log10(x), std::log10(y));
    logs.push_back(std::move(l));
  }
  Bounds b = data_bounds(logs);
  b = {std::floor(b.xmin), std::ceil(b.xmax), std::floor(b.ymin), std::ceil(b.ymax)};
  const Frame f{b};
  std::string out = header(title);

  for (int e = static_cast<int>(b.xmin); e <= static_cast<int>(b.xmax); ++e)
    out += fmt::format(
        "<line x1=\"{0:.2f}\" y1=\"{1}\" x2=\"{0:.2f}\" y2=\"{2}\" stroke=\"#dddddd\"/>\n"
        "<text x=\"{0:.2f}\" y=\"{3}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">1e{4}</text>\n",
        f.px(e), kTop, kHeight - kBottom, kHeight - kBottom + 16, e);
  for (int e = static_cast<int>(b.ymin); e <= static_cast<int>(b.ymax); ++e)
    out += fmt::format(
        "<line x1=\"{0}\" y1=\"{2:.2f}\" x2=\"{1}\" y2=\"{2:.2f}\" stroke=\"#dddddd\"/>\n"
        "<text x=\"{3}\" y=\"{4:.2f}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">1e{5}</text>\n",
        kLeft, kWidth - kRight, f.py(e), kLeft - 6, f.py(e) + 4, e);
  out += axes(xlabel, ylabel);

  for (std::size_t i = 0; i < logs.size(); ++i) {
    const char* color = kPalette[i % kPalette.size()];
    std::string path;
    for (const auto& [x, y] : logs[i].points)
      path += fmt::format("{}{:.2f},{:.2f}", path.empty() ? "" : " ", f.px(x), f.py(y));
    if (!path.empty())
      out += fmt::format("<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>\n", path, color);
    for (const auto& [x, y] : logs[i].points)
      out += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"3.5\" fill=\"{}\"/>\n", f.px(x), f.py(y), color);
  }
  out += legend(logs);
  out += "</svg>\n";
  return out;
}

}  // namespace lsfem::svg
