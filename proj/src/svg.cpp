// Copyright (c) 2026 relcomplete authors
// SPDX-License-Identifier: Apache-2.0
//
#include "relc/svg.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <limits>

#include "relc/error.hpp"

namespace relc {

namespace {

constexpr double kPanel = 300.0;
constexpr double kMargin = 24.0;

struct Projection {
  const char* label;
  double (*u)(const Vec3&);
  double (*v)(const Vec3&);
  double (*depth)(const Vec3&);
};

const Projection kViews[3] = {
    {"xy", [](const Vec3& p) { return p.x; }, [](const Vec3& p) { return p.y; },
     [](const Vec3& p) { return p.z; }},
    {"xz", [](const Vec3& p) { return p.x; }, [](const Vec3& p) { return p.z; },
     [](const Vec3& p) { return p.y; }},
    {"yz", [](const Vec3& p) { return p.y; }, [](const Vec3& p) { return p.z; },
     [](const Vec3& p) { return p.x; }},
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

void write_cloud_svg(const std::string& path, const std::vector<SvgLayer>& layers) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& layer : layers) {
    if (!layer.cloud) continue;
    for (const auto& p : layer.cloud->points()) {
      lo = std::min({lo, p.x, p.y, p.z});
      hi = std::max({hi, p.x, p.y, p.z});
    }
  }
  if (!(lo < hi)) {
    lo = -1.0;
    hi = 1.0;
  }
  const double span = hi - lo;
  const double total_w = 3 * kPanel + 4 * kMargin;
  const double total_h = kPanel + 2 * kMargin + 16.0;

  std::ofstream f(path, std::ios::trunc);
  if (!f) throw IoError("cannot write svg: " + path);
  f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << total_w << "\" height=\""
    << total_h << "\" viewBox=\"0 0 " << total_w << " " << total_h << "\">\n";
  f << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  for (int view = 0; view < 3; ++view) {
    const double ox = kMargin + view * (kPanel + kMargin);
    const double oy = kMargin;
    f << "<rect x=\"" << fmt(ox) << "\" y=\"" << fmt(oy) << "\" width=\"" << kPanel
      << "\" height=\"" << kPanel << "\" fill=\"none\" stroke=\"#cccccc\"/>\n";
    f << "<text x=\"" << fmt(ox + 4) << "\" y=\"" << fmt(oy + kPanel + 14)
      << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#444444\">"
      << kViews[view].label << "</text>\n";
    for (const auto& layer : layers) {
      if (!layer.cloud) continue;
      f << "<g fill=\"" << layer.color << "\" fill-opacity=\"" << layer.opacity << "\">\n";
      for (const auto& p : layer.cloud->points()) {
        const double u = (kViews[view].u(p) - lo) / span;
        const double v = (kViews[view].v(p) - lo) / span;
        const double depth = (kViews[view].depth(p) - lo) / span;  // 0 far .. 1 near
        const double r = 0.9 + 1.5 * depth;
        f << "<circle cx=\"" << fmt(ox + u * kPanel) << "\" cy=\""
          << fmt(oy + (1.0 - v) * kPanel) << "\" r=\"" << fmt(r) << "\"/>\n";
      }
      f << "</g>\n";
    }
  }
  f << "</svg>\n";
  if (!f) throw IoError("write failed: " + path);
}

}  // namespace relc
