#include "gridwarp/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "gridwarp/remap.hpp"

namespace gridwarp {

const char* to_string(WarpKind kind) {
  switch (kind) {
    case WarpKind::cylinder: return "cylinder";
    case WarpKind::fold: return "fold";
    case WarpKind::gaussian_bumps: return "gaussian_bumps";
    case WarpKind::polynomial: return "polynomial";
  }
  return "?";
}

WarpKind warp_kind_from_string(const std::string& name) {
  if (name == "cylinder") return WarpKind::cylinder;
  if (name == "fold") return WarpKind::fold;
  if (name == "gaussian_bumps" || name == "bumps") return WarpKind::gaussian_bumps;
  if (name == "polynomial") return WarpKind::polynomial;
  throw ConfigError("unknown warp kind '" + name + "'");
}

namespace {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform(double a, double b) { return a + (b - a) * std::generate_canonical<double, 53>(gen_); }
  int integer(int a, int b) { return a + int(gen_() % std::uint64_t(b - a + 1)); }

 private:
  std::mt19937_64 gen_;
};

Polyline dense_segment(Point2 a, Point2 b, double step) {
  Polyline line;
  const double len = (b - a).norm();
  const int k = std::max(1, int(std::ceil(len / step)));
  for (int i = 0; i <= k; ++i) line.points.push_back(a + (b - a) * (double(i) / k));
  return line;
}

constexpr double kCreaseSoftness = 0.05;

// Monomials s^i t^j, i + j <= 3, with their s- and t-derivatives.
void monomials(double s, double t, double (&m)[10], double (&ms)[10], double (&mt)[10]) {
  const int pi[10] = {0, 1, 0, 2, 1, 0, 3, 2, 1, 0};
  const int pj[10] = {0, 0, 1, 0, 1, 2, 0, 1, 2, 3};
  for (int k = 0; k < 10; ++k) {
    m[k] = std::pow(s, pi[k]) * std::pow(t, pj[k]);
    ms[k] = pi[k] == 0 ? 0.0 : pi[k] * std::pow(s, pi[k] - 1) * std::pow(t, pj[k]);
    mt[k] = pj[k] == 0 ? 0.0 : pj[k] * std::pow(s, pi[k]) * std::pow(t, pj[k] - 1);
  }
}

}  // namespace

Page render_page(int width, int height, int line_count, std::uint64_t seed) {
  if (line_count < 1) throw DomainError("render_page: line_count must be >= 1");
  if (width < 64 || height < 64) throw DomainError("render_page: page too small");
  Rng rng(seed);
  const int m = int(std::lround(0.09 * std::min(width, height)));
  Page page;
  page.doc = {double(m), double(m), double(width - 1 - m), double(height - 1 - m)};
  page.image = ImageBuffer(width, height, 1, 110);
  for (int y = m; y <= height - 1 - m; ++y)
    for (int x = m; x <= width - 1 - m; ++x) page.image.at(x, y) = 255;

  const int pad = int(std::lround(0.05 * (width - 2 * m)));
  const int left = m + pad, right = width - 1 - m - pad;
  const int top = m + pad;
  const int avail = (height - 1 - 2 * m) - 2 * pad;
  const int pitch = std::min(12, avail / line_count);
  if (pitch < 6) throw DomainError("render_page: too many lines for the page height");
  const int thick = std::min(5, pitch - 4);
  const int indent = 24;

  auto& el = page.elements;
  el.width = width;
  el.height = height;
  int para_left = 0, para_len = 0;
  for (int k = 0; k < line_count; ++k) {
    if (para_left == 0) {
      para_len = para_left = std::min(rng.integer(3, 8), line_count - k);
    }
    const bool first = para_left == para_len, last = para_left == 1;
    --para_left;
    const int ya = top + k * pitch;
    int xa = left, xb = right;
    if (para_len > 1 && first) xa += indent;
    if (para_len > 1 && last) xb = left + int(std::lround(rng.uniform(0.3, 0.7) * (right - left)));
    for (int y = ya; y < ya + thick; ++y)
      for (int x = xa; x <= xb; ++x) page.image.at(x, y) = 0;
    const double yc = ya + (thick - 1) / 2.0;
    Polyline line;
    for (int x = xa; x < xb; x += 8) line.points.emplace_back(x, yc);
    line.points.emplace_back(xb, yc);
    el.text_lines.push_back(std::move(line));
  }
  const auto& d = page.doc;
  el.top = dense_segment({d.x0, d.y0}, {d.x1, d.y0}, 4.0);
  el.bottom = dense_segment({d.x0, d.y1}, {d.x1, d.y1}, 4.0);
  el.left = dense_segment({d.x0, d.y0}, {d.x0, d.y1}, 4.0);
  el.right = dense_segment({d.x1, d.y0}, {d.x1, d.y1}, 4.0);
  return page;
}

Warp::Warp(WarpSpec spec, int width, int height, std::vector<Term> terms)
    : spec_(spec), width_(width), height_(height), terms_(std::move(terms)) {}

namespace {

// Offset of one term and its gradient with respect to pixel coordinates.
void evaluate_term(const Warp::Term& term, const Point2& p, int w, int h, Point2& value, Eigen::Matrix2d& grad) {
  using Type = Warp::Term::Type;
  const double sx = 1.0 / (w - 1), sy = 1.0 / (h - 1);
  const double s = p.x() * sx, t = p.y() * sy;
  const double a = term.amplitude;
  double val = 0.0;
  Point2 dval = Point2::Zero();
  switch (term.type) {
    case Type::column_sine: {
      const double arg = M_PI * (term.p0 * s + term.p1);
      val = a * std::sin(arg);
      dval = {a * M_PI * term.p0 * std::cos(arg) * sx, 0.0};
      break;
    }
    case Type::column_sine2: {
      val = a * std::sin(2 * M_PI * s);
      dval = {a * 2 * M_PI * std::cos(2 * M_PI * s) * sx, 0.0};
      break;
    }
    case Type::crease: {
      const Point2 normal(std::cos(term.p2), std::sin(term.p2));
      const double d = (p - Point2(term.p0, term.p1)).dot(normal) / term.p3;
      const double root = std::sqrt(d * d + kCreaseSoftness * kCreaseSoftness);
      val = a * (root - kCreaseSoftness);
      dval = a * d / root * normal / term.p3;
      break;
    }
    case Type::bump: {
      const Point2 r = p - Point2(term.p0, term.p1);
      const double sig2 = term.p2 * term.p2;
      val = a * std::exp(-r.squaredNorm() / (2 * sig2));
      dval = -val * r / sig2;
      break;
    }
    case Type::polynomial: {
      double m[10], ms[10], mt[10];
      monomials(s, t, m, ms, mt);
      value.setZero();
      grad.setZero();
      for (int k = 0; k < 10; ++k) {
        const Point2 c = term.poly.row(k).transpose();
        value += a * m[k] * c;
        grad.col(0) += a * ms[k] * sx * c;
        grad.col(1) += a * mt[k] * sy * c;
      }
      return;
    }
  }
  value = val * term.direction;
  grad = term.direction * dval.transpose();
}

}  // namespace

Point2 Warp::offset(const Point2& p) const {
  Point2 sum = Point2::Zero(), v;
  Eigen::Matrix2d g;
  for (const auto& term : terms_) {
    evaluate_term(term, p, width_, height_, v, g);
    sum += v;
  }
  return sum;
}

Eigen::Matrix2d Warp::jacobian(const Point2& p) const {
  Eigen::Matrix2d j = Eigen::Matrix2d::Identity(), g;
  Point2 v;
  for (const auto& term : terms_) {
    evaluate_term(term, p, width_, height_, v, g);
    j += g;
  }
  return j;
}

Point2 Warp::to_warped(const Point2& flat) const {
  Point2 p = flat - offset(flat);
  for (int it = 0; it < 60; ++it) {
    const Point2 f = to_flat(p) - flat;
    if (f.norm() < 1e-11 * (1.0 + flat.norm())) return p;
    p -= jacobian(p).inverse() * f;
  }
  if ((to_flat(p) - flat).norm() > 1e-8) throw DomainError("Warp::to_warped: Newton iteration did not converge");
  return p;
}

double Warp::min_jacobian_determinant() const {
  double lo = std::numeric_limits<double>::infinity();
  for (int y = 0; y < height_; ++y)
    for (int x = 0; x < width_; ++x) lo = std::min(lo, jacobian(Point2(x, y)).determinant());
  return lo;
}

GridField warp_forward_field(const Warp& warp, const DocRect& doc, int n) {
  GridField f(n);
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) {
      const Point2 p = grid_to_pixel(Point2(ix, iy), warp.width(), warp.height(), n);
      f.set(ix, iy, doc.to_uv(warp.to_flat(p)));
    }
  return f;
}

BackwardMap warp_backward_map(const Warp& warp, const DocRect& doc, int out_w, int out_h) {
  BackwardMap bm(out_w, out_h);
  for (int py = 0; py < out_h; ++py)
    for (int px = 0; px < out_w; ++px) {
      const Point2 uv(double(px) / (out_w - 1), double(py) / (out_h - 1));
      bm.set(px, py, warp.to_warped(doc.to_flat(uv)));
    }
  return bm;
}

WarpResult make_warp(const WarpSpec& spec, int width, int height, const DocRect& doc, int n) {
  using Type = Warp::Term::Type;
  if (spec.amplitude < 0) throw DomainError("make_warp: amplitude must be non-negative");
  Rng rng(spec.seed);
  std::vector<Warp::Term> terms;
  auto random_direction = [&]() {
    const double ang = rng.uniform(0.0, 2 * M_PI);
    return Point2(std::cos(ang), std::sin(ang));
  };
  const double sign = rng.uniform(0.0, 1.0) < 0.5 ? -1.0 : 1.0;

  switch (spec.kind) {
    case WarpKind::cylinder: {
      Warp::Term bow;
      bow.type = Type::column_sine;
      bow.amplitude = 1.0;
      bow.p0 = rng.uniform(0.8, 1.0);
      bow.p1 = rng.uniform(0.0, 1.0 - bow.p0);
      bow.direction = {0.0, sign};
      Warp::Term squeeze;
      squeeze.type = Type::column_sine2;
      squeeze.amplitude = rng.uniform(-0.25, 0.25);
      squeeze.direction = {1.0, 0.0};
      terms = {bow, squeeze};
      break;
    }
    case WarpKind::fold: {
      Warp::Term crease;
      crease.type = Type::crease;
      crease.amplitude = 1.0;
      crease.p0 = rng.uniform(0.35, 0.65) * (width - 1);
      crease.p1 = rng.uniform(0.35, 0.65) * (height - 1);
      crease.p2 = rng.uniform(-0.3, 0.3);
      crease.p3 = std::max(width, height);
      const double tilt = rng.uniform(-0.3, 0.3);
      crease.direction = {sign * std::sin(tilt), sign * std::cos(tilt)};
      terms = {crease};
      break;
    }
    case WarpKind::gaussian_bumps: {
      const int count = std::max(1, spec.count);
      for (int k = 0; k < count; ++k) {
        Warp::Term bump;
        bump.type = Type::bump;
        bump.amplitude = rng.uniform(0.5, 1.0);
        bump.p0 = rng.uniform(0.2, 0.8) * (width - 1);
        bump.p1 = rng.uniform(0.2, 0.8) * (height - 1);
        bump.p2 = rng.uniform(0.15, 0.3) * std::min(width, height);
        bump.direction = random_direction();
        terms.push_back(bump);
      }
      break;
    }
    case WarpKind::polynomial: {
      Warp::Term poly;
      poly.type = Type::polynomial;
      poly.amplitude = 1.0;
      for (int k = 3; k < 10; ++k) poly.poly.row(k) << rng.uniform(-1, 1), rng.uniform(-1, 1);
      terms = {poly};
      break;
    }
  }

  // Scale so the largest displacement over the frame equals the drawn amplitude.
  const double target = spec.amplitude * rng.uniform(0.75, 1.0);
  const Warp unit(spec, width, height, terms);
  double peak = 0.0;
  for (int j = 0; j <= 64; ++j)
    for (int i = 0; i <= 64; ++i)
      peak = std::max(peak, unit.offset(Point2(i / 64.0 * (width - 1), j / 64.0 * (height - 1))).norm());
  const double scale = peak > 0 ? target / peak : 0.0;
  for (auto& t : terms) t.amplitude *= scale;

  WarpResult res{Warp(spec, width, height, std::move(terms)), Plane<double>(height, width),
                 Plane<double>(height, width), GridField()};
  if (res.warp.min_jacobian_determinant() <= 0.0)
    throw DomainError("make_warp: amplitude folds the page; use a smaller amplitude");
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const Point2 o = res.warp.offset(Point2(x, y));
      res.dx(y, x) = o.x();
      res.dy(y, x) = o.y();
    }
  res.gt_forward = warp_forward_field(res.warp, doc, n);
  return res;
}

WarpBundle apply_warp(const Page& page, const WarpResult& wr, int out_w, int out_h) {
  const int w = page.image.width, h = page.image.height;
  if (wr.warp.width() != w || wr.warp.height() != h) throw DomainError("apply_warp: warp and page sizes differ");
  if (out_w <= 0) out_w = w;
  if (out_h <= 0) out_h = h;

  WarpBundle b;
  b.flat_image = page.image;
  b.flat_elements = page.elements;
  b.doc = page.doc;
  b.spec = wr.warp.spec();
  BackwardMap to_flat(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) to_flat.set(x, y, wr.warp.to_flat(Point2(x, y)));
  b.warped_image = resample(page.image, to_flat);

  auto map_line = [&](const Polyline& line) {
    Polyline out;
    for (const auto& p : line.points) {
      const Point2 q = wr.warp.to_warped(p);
      out.points.emplace_back(std::clamp(q.x(), 0.0, double(w)), std::clamp(q.y(), 0.0, double(h)));
    }
    return out;
  };
  auto& we = b.warped_elements;
  we.width = w;
  we.height = h;
  we.top = map_line(page.elements.top);
  we.bottom = map_line(page.elements.bottom);
  we.left = map_line(page.elements.left);
  we.right = map_line(page.elements.right);
  for (const auto& l : page.elements.text_lines) we.text_lines.push_back(map_line(l));
  for (const auto& l : page.elements.vertical_lines) we.vertical_lines.push_back(map_line(l));

  b.gt_forward = wr.gt_forward;
  b.gt_backward = warp_backward_map(wr.warp, page.doc, out_w, out_h);
  return b;
}

ImageBuffer flat_reference(const WarpBundle& b) {
  return resample(b.flat_image, identity_backward(b));
}

BackwardMap identity_backward(const WarpBundle& b) {
  return rectangle_backward(b.doc.x0, b.doc.y0, b.doc.x1, b.doc.y1, b.gt_backward.width, b.gt_backward.height);
}

}  // namespace gridwarp
