#include "gridwarp/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "gridwarp/baselines.hpp"

namespace gridwarp {

void validate(const PipelineConfig& c) {
  validate(c.solver);
  if (!(c.discretize.text_interval > 0) || !(c.discretize.vertical_interval > 0) ||
      !(c.discretize.boundary_interval > 0))
    throw ConfigError("sampling intervals must be positive");
  if (c.discretize.working_frame < 2) throw ConfigError("working_frame must be >= 2");
  if (!(c.vertical.w > 0) || !(c.vertical.h > 0) || !(c.vertical.theta > 0))
    throw ConfigError("vertical detection window and angle must be positive");
  if (c.output_width < 0 || c.output_height < 0 || c.output_width == 1 || c.output_height == 1)
    throw ConfigError("output size must be 0 (default) or >= 2");
  if (c.backward_size < 0 || c.backward_size == 1) throw ConfigError("backward_size must be 0 (default) or >= 2");
}

std::pair<int, int> output_size(const PipelineConfig& c, int width, int height) {
  const int side = std::max(width, height);
  return {c.output_width > 0 ? c.output_width : side, c.output_height > 0 ? c.output_height : side};
}

GeometricElements prepare_elements(const GeometricElements& elems, const PipelineConfig& c) {
  validate(elems);
  GeometricElements out = elems;
  if (!c.use_text_lines) out.text_lines.clear();
  out.vertical_lines.clear();
  if (!c.use_vertical_lines) return out;
  if (!c.detect_vertical) {
    out.vertical_lines = elems.vertical_lines;
    return out;
  }
  // Detection runs in the square working frame, like the sampling intervals.
  const int frame = c.discretize.working_frame;
  GeometricElements work = rescale(elems, frame, frame);
  GeometricElements found;
  found.width = frame;
  found.height = frame;
  found.vertical_lines = detect_vertical_lines(work.text_lines, c.vertical);
  out.vertical_lines = rescale(found, elems.width, elems.height).vertical_lines;
  return out;
}

DewarpResult compute_dewarp(const GeometricElements& elems, const PipelineConfig& c) {
  validate(c);
  DewarpResult r;
  r.elements = prepare_elements(elems, c);
  const ConstraintSet set = discretize_elements(r.elements, c.solver.n, c.discretize);
  FieldSolution sol = solve_field(set, c.solver);
  r.field = std::move(sol.field);
  r.u = std::move(sol.u);
  r.v = std::move(sol.v);
  r.grid = grid_diagnostics(r.field);

  const int side = c.backward_size > 0 ? c.backward_size : c.solver.n;
  InversionResult inv = invert_forward(r.field, elems.width, elems.height, side, side);
  r.inversion = std::move(inv.diagnostics);
  const auto [ow, oh] = output_size(c, elems.width, elems.height);
  r.backward = upsample_backward(fill_holes(inv.map), ow, oh);
  return r;
}

DewarpResult dewarp(const ImageBuffer& image, const GeometricElements& elems, const PipelineConfig& c) {
  if (image.width != elems.width || image.height != elems.height)
    throw ConfigError("image size does not match the elements image_size");
  DewarpResult r = compute_dewarp(elems, c);
  r.image = resample(image, r.backward);
  return r;
}

const char* to_string(Baseline b) { return b == Baseline::tfi ? "tfi" : "tps"; }

Baseline baseline_from_string(const std::string& name) {
  if (name == "tfi") return Baseline::tfi;
  if (name == "tps") return Baseline::tps;
  throw ConfigError("unknown baseline '" + name + "'");
}

BaselineResult compute_baseline(const GeometricElements& elems, Baseline method, const PipelineConfig& c,
                                double reg) {
  validate(c);
  validate(elems);
  const int n = c.backward_size > 0 ? c.backward_size : c.solver.n;
  BaselineResult r;
  if (method == Baseline::tfi) {
    r.lattice = tfi_grid(make_boundary_curves(elems), n);
  } else {
    const ControlPoints cp =
        boundary_control_points(elems, c.discretize.boundary_interval, c.discretize.working_frame);
    r.lattice = tps_grid(tps_fit(cp.target, cp.source, reg), n);
  }
  const auto [ow, oh] = output_size(c, elems.width, elems.height);
  r.backward = upsample_backward(lattice_to_backward(r.lattice), ow, oh);
  return r;
}

BaselineResult baseline_dewarp(const ImageBuffer& image, const GeometricElements& elems, Baseline method,
                               const PipelineConfig& c, double reg) {
  if (image.width != elems.width || image.height != elems.height)
    throw ConfigError("image size does not match the elements image_size");
  BaselineResult r = compute_baseline(elems, method, c, reg);
  r.image = resample(image, r.backward);
  return r;
}

namespace {

ImageBuffer to_rgb(const ImageBuffer& img) {
  if (img.channels == 3) return img;
  ImageBuffer out(img.width, img.height, 3);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = img.at(x, y, 0);
  return out;
}

void draw_polyline(ImageBuffer& img, const Polyline& line, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  auto plot = [&](const Point2& p) {
    const int x = int(std::lround(p.x())), y = int(std::lround(p.y()));
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        const int px = x + dx, py = y + dy;
        if (px < 0 || py < 0 || px >= img.width || py >= img.height) continue;
        img.at(px, py, 0) = r;
        img.at(px, py, 1) = g;
        img.at(px, py, 2) = b;
      }
  };
  for (std::size_t k = 0; k + 1 < line.points.size(); ++k) {
    const Point2 a = line.points[k], d = line.points[k + 1] - a;
    const int steps = std::max(1, int(std::ceil(d.norm())));
    for (int s = 0; s <= steps; ++s) plot(a + d * (double(s) / steps));
  }
  if (line.points.size() == 1) plot(line.points.front());
}

}  // namespace

ImageBuffer render_overlay(const ImageBuffer& image, const GeometricElements& elems) {
  ImageBuffer out = to_rgb(image);
  for (const Polyline* side : {&elems.top, &elems.bottom, &elems.left, &elems.right})
    draw_polyline(out, *side, 255, 0, 0);
  for (const auto& l : elems.text_lines) draw_polyline(out, l, 0, 255, 0);
  for (const auto& l : elems.vertical_lines) draw_polyline(out, l, 255, 255, 0);
  return out;
}

ImageBuffer render_uv(const GridField& field, int width, int height) {
  if (width < 2 || height < 2) throw DomainError("render_uv: size must be >= 2");
  const int n = field.size();
  ImageBuffer out(width, height, 3);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const Point2 g = to_grid(Point2(x, y), width, height, n);
      const double u = interpolate(field.u(), g), v = interpolate(field.v(), g);
      const auto near_line = [](double t) { return std::abs(t * 16 - std::round(t * 16)) < 0.04; };
      const double shade = near_line(u) || near_line(v) ? 0.4 : 1.0;
      out.at(x, y, 0) = std::uint8_t(std::clamp(std::lround(255 * std::clamp(u, 0.0, 1.0) * shade), 0L, 255L));
      out.at(x, y, 1) = std::uint8_t(std::clamp(std::lround(255 * std::clamp(v, 0.0, 1.0) * shade), 0L, 255L));
      out.at(x, y, 2) = std::uint8_t(std::lround(64 * shade));
    }
  return out;
}

}  // namespace gridwarp
