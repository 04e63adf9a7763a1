// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gridwarp/baselines.hpp"
#include "gridwarp/io.hpp"
#include "gridwarp/pipeline.hpp"
#include "gridwarp/synth.hpp"
#include "support.hpp"

using namespace gridwarp;
using gridwarp::testing::random_points;
using gridwarp::testing::rect_elements;
using gridwarp::testing::segment;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

ConstraintSet random_constraints(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> d(0.0, 1.0);
  const int w = 200, h = 160;
  GeometricElements e;
  e.width = w;
  e.height = h;
  const Point2 tl(5 + 20 * d(rng), 5 + 20 * d(rng)), tr(175 + 20 * d(rng), 5 + 20 * d(rng));
  const Point2 bl(5 + 20 * d(rng), 135 + 20 * d(rng)), br(175 + 20 * d(rng), 135 + 20 * d(rng));
  auto bowed = [&](Point2 a, Point2 b) {
    Polyline l;
    const double bow = 6 * (d(rng) - 0.5);
    const Point2 nrm = Point2(-(b - a).y(), (b - a).x()).normalized();
    for (int k = 0; k <= 8; ++k) {
      const double t = k / 8.0;
      l.points.push_back(a + t * (b - a) + bow * std::sin(M_PI * t) * nrm);
    }
    return l;
  };
  e.top = bowed(tl, tr);
  e.bottom = bowed(bl, br);
  e.left = bowed(tl, bl);
  e.right = bowed(tr, br);
  const int lines = 1 + int(4 * d(rng));
  for (int k = 0; k < lines; ++k) {
    const double y = 40 + 80 * d(rng);
    e.text_lines.push_back(segment({40 + 10 * d(rng), y}, {160 - 10 * d(rng), y + 10 * (d(rng) - 0.5)}, 4));
  }
  if (d(rng) < 0.7) e.vertical_lines.push_back(segment({50 + 20 * d(rng), 30}, {50 + 20 * d(rng), 130}, 3));
  DiscretizeParams p;
  p.working_frame = 200;
  return discretize_elements(e, n, p);
}

// Dense normal equations from the stacked rows, solved by Cholesky.
Eigen::VectorXd dense_normal_solve(const QuadraticProblem& prob) {
  const Eigen::Index m = prob.unknowns();
  Eigen::MatrixXd ata = Eigen::MatrixXd::Zero(m, m);
  Eigen::VectorXd atb = Eigen::VectorXd::Zero(m);
  for (const auto& b : prob.blocks) {
    const Eigen::MatrixXd a = Eigen::MatrixXd(b.rows);
    ata += b.weight * a.transpose() * a;
    atb += b.weight * a.transpose() * b.rhs;
  }
  return ata.ldlt().solve(atb);
}

Outcome criterion1() {
  std::mt19937_64 rng(101);
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = std::array{6, 8, 12}[trial % 3];
    const auto set = random_constraints(rng, n);
    SolverParams p;
    p.n = n;
    p.tol = 1e-13;
    for (Channel ch : {Channel::U, Channel::V}) {
      const auto prob = build_problem(set, p, ch);
      const auto sol = solve(prob, p);
      worst = std::max(worst, (sol.values - dense_normal_solve(prob)).cwiseAbs().maxCoeff());
    }
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-6 && secs < 10.0, fmt("max |iterative - dense| = %.2e over 20 problems, %.2f s", worst, secs)};
}

Outcome criterion2() {
  std::mt19937_64 rng(202);
  std::normal_distribution<double> nd;
  double worst_grad = 0.0, worst_energy = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const int n = 8;
    const auto set = random_constraints(rng, n);
    SolverParams p;
    p.n = n;
    const auto pu = build_problem(set, p, Channel::U), pv = build_problem(set, p, Channel::V);
    GridField f(n);
    for (int c = 0; c < 2; ++c)
      for (auto& v : f.flat(c)) v = nd(rng);
    for (const auto* prob : {&pu, &pv}) {
      const Eigen::VectorXd x = f.flat(int(prob->channel));
      const Eigen::VectorXd g = gradient(*prob, x);
      Eigen::VectorXd fd(x.size());
      const double h = 1e-5;
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        Eigen::VectorXd a = x, b = x;
        a(i) += h;
        b(i) -= h;
        fd(i) = (objective(*prob, a) - objective(*prob, b)) / (2 * h);
      }
      worst_grad = std::max(worst_grad, (fd - g).norm() / g.norm());
    }
    const auto sol = solve_field(set, p);
    const auto rep = energy_report(sol.field, pu, pv);
    const double obj = sol.u.objective + sol.v.objective;
    worst_energy = std::max(worst_energy, std::abs(rep.total - obj) / obj);
  }
  return {worst_grad < 1e-5 && worst_energy < 1e-9,
          fmt("gradient rel. error %.2e, energy report vs objective rel. error %.2e", worst_grad, worst_energy)};
}

Outcome criterion3() {
  const Page page = render_page(512, 512, 28, 303);
  GeometricElements e = page.elements;
  e.top = segment({0, 0}, {511, 0});
  e.bottom = segment({0, 511}, {511, 511});
  e.left = segment({0, 0}, {0, 511});
  e.right = segment({511, 0}, {511, 511});
  PipelineConfig c;
  const auto r = dewarp(page.image, e, c);
  const GridField u = GridField::uniform(c.solver.n);
  const double dev = std::max((r.field.flat(0) - u.flat(0)).cwiseAbs().maxCoeff(),
                              (r.field.flat(1) - u.flat(1)).cwiseAbs().maxCoeff());
  const double score = ms_ssim(r.image, page.image);
  return {dev < 1e-6 && score >= 0.995,
          fmt("max |field - uniform| = %.2e, MS-SSIM vs input %.6f, %zu vertical lines", dev, score,
              r.elements.vertical_lines.size())};
}

struct SuiteCase {
  WarpKind kind;
  double ld_input, ld_full, ld_text, ld_boundary, ld_tfi, ld_tps;
  double ssim_input, ssim_full;
  double seconds;
};

std::vector<SuiteCase> run_suite() {
  const WarpKind kinds[] = {WarpKind::cylinder, WarpKind::fold, WarpKind::gaussian_bumps};
  const int side = 512;
  std::vector<SuiteCase> out;
  for (int k = 0; k < 50; ++k) {
    const std::uint64_t seed = 1000 + std::uint64_t(k);
    const Page page = render_page(side, side, 28, seed);
    const WarpSpec spec{kinds[k % 3], 0.08 * side, seed, 4};
    const auto bundle = apply_warp(page, make_warp(spec, side, side, page.doc, 128));
    const ImageBuffer reference = flat_reference(bundle);
    const BackwardMap input_map = identity_backward(bundle);

    SuiteCase sc{};
    sc.kind = spec.kind;
    sc.ld_input = local_distortion(input_map, bundle.gt_backward);
    sc.ssim_input = ms_ssim(resample(bundle.warped_image, input_map), reference);

    PipelineConfig full;
    const auto t0 = Clock::now();
    const auto r = dewarp(bundle.warped_image, bundle.warped_elements, full);
    sc.seconds = seconds_since(t0);
    sc.ld_full = local_distortion(r.backward, bundle.gt_backward);
    sc.ssim_full = ms_ssim(r.image, reference);

    PipelineConfig text = full;
    text.use_vertical_lines = false;
    sc.ld_text = local_distortion(compute_dewarp(bundle.warped_elements, text).backward, bundle.gt_backward);
    PipelineConfig boundary = text;
    boundary.use_text_lines = false;
    sc.ld_boundary = local_distortion(compute_dewarp(bundle.warped_elements, boundary).backward, bundle.gt_backward);
    sc.ld_tfi = local_distortion(compute_baseline(bundle.warped_elements, Baseline::tfi, full).backward,
                                 bundle.gt_backward);
    sc.ld_tps = local_distortion(compute_baseline(bundle.warped_elements, Baseline::tps, full).backward,
                                 bundle.gt_backward);
    std::printf("  case %2d %-14s LD in %6.2f full %6.2f text %6.2f bd %6.2f tfi %6.2f tps %6.2f | "
                "MS-SSIM in %.4f out %.4f | %.2f s\n",
                k, to_string(sc.kind), sc.ld_input, sc.ld_full, sc.ld_text, sc.ld_boundary, sc.ld_tfi, sc.ld_tps,
                sc.ssim_input, sc.ssim_full, sc.seconds);
    std::fflush(stdout);
    out.push_back(sc);
  }
  return out;
}

Outcome criterion4(const std::vector<SuiteCase>& suite) {
  int wins = 0;
  double slowest = 0.0;
  std::vector<double> ratio;
  for (const auto& c : suite) {
    wins += c.ssim_full > c.ssim_input;
    slowest = std::max(slowest, c.seconds);
    ratio.push_back(c.ld_full / c.ld_input);
  }
  const double win_rate = double(wins) / double(suite.size());
  const double drop = 1.0 - median(ratio);
  return {win_rate >= 0.95 && drop >= 0.5 && slowest <= 30.0,
          fmt("MS-SSIM wins %d/%zu (%.0f%%, need 95%%), median LD drop %.1f%% (need 50%%), slowest case %.2f s", wins,
              suite.size(), 100 * win_rate, 100 * drop, slowest)};
}

Outcome criterion5(const std::vector<SuiteCase>& suite) {
  std::vector<double> full, text, bd;
  for (const auto& c : suite) {
    full.push_back(c.ld_full);
    text.push_back(c.ld_text);
    bd.push_back(c.ld_boundary);
  }
  const double mf = median(full), mt = median(text), mb = median(bd);
  return {mf <= mt && mt <= mb,
          fmt("median LD boundary+text+vertical %.4f, boundary+text %.4f (diff %+.1e), boundary-only %.4f", mf, mt,
              mf - mt, mb)};
}

Outcome criterion6(const std::vector<SuiteCase>& suite) {
  std::vector<double> bd, tfi, tps;
  for (const auto& c : suite)
    if (c.kind == WarpKind::cylinder) {
      bd.push_back(c.ld_boundary);
      tfi.push_back(c.ld_tfi);
      tps.push_back(c.ld_tps);
    }
  const double mb = median(bd), mi = median(tfi), mp = median(tps);
  const double spread = std::max({mb, mi, mp}) / std::min({mb, mi, mp}) - 1.0;
  return {spread <= 0.10, fmt("cylinder cases %zu: median LD boundary-only %.3f, TFI %.3f, TPS %.3f, spread %.1f%%",
                              bd.size(), mb, mi, mp, 100 * spread)};
}

Outcome criterion7() {
  std::mt19937_64 rng(707);
  double worst_tps = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const auto p = random_points(rng, 30, 0.0, 1.0);
    const auto q = random_points(rng, 30, 0.0, 500.0);
    const auto m = tps_fit(p, q);
    for (std::size_t i = 0; i < p.size(); ++i) worst_tps = std::max(worst_tps, (m(p[i]) - q[i]).norm());
  }
  // analytic boundary: sine-bowed sides sampled densely
  GeometricElements e;
  e.width = 400;
  e.height = 400;
  auto curve = [](Point2 a, Point2 b, double bow) {
    Polyline l;
    const Point2 nrm = Point2(-(b - a).y(), (b - a).x()).normalized();
    for (int k = 0; k <= 400; ++k) {
      const double t = k / 400.0;
      l.points.push_back(a + t * (b - a) + bow * std::sin(M_PI * t) * nrm);
    }
    return l;
  };
  e.top = curve({50, 50}, {350, 60}, 20);
  e.bottom = curve({40, 340}, {360, 350}, -15);
  e.left = curve({50, 50}, {40, 340}, 10);
  e.right = curve({350, 60}, {360, 350}, 12);
  const auto c = make_boundary_curves(e);
  double worst_tfi = 0.0;
  for (int k = 0; k <= 200; ++k) {
    const double t = k / 200.0;
    worst_tfi = std::max({worst_tfi, (tfi_point(c, t, 0.0) - c.top(t)).norm(),
                          (tfi_point(c, t, 1.0) - c.bottom(t)).norm(), (tfi_point(c, 0.0, t) - c.left(t)).norm(),
                          (tfi_point(c, 1.0, t) - c.right(t)).norm()});
  }
  return {worst_tps < 1e-8 && worst_tfi < 1e-6,
          fmt("TPS control-point error %.2e, TFI boundary error %.2e", worst_tps, worst_tfi)};
}

Outcome criterion8() {
  auto lines_from = [](std::initializer_list<Point2> starts) {
    std::vector<Polyline> lines;
    for (const auto& s : starts) lines.push_back(segment(s, s + Point2(100, 0), 4));
    return lines;
  };
  auto left_mutual = [](const std::vector<Polyline>& lines) {
    return vertical_edges(collect_endpoints(lines, EndpointSide::left), {}).mutual.size();
  };
  bool ok = true;
  std::string notes;
  const auto aligned = detect_vertical_lines(lines_from({{10, 10}, {10, 22}, {10, 34}}));
  const bool c1 = !aligned.empty() && aligned[0].size() == 3 && aligned[0].points[0] == Point2(10, 10) &&
                  aligned[0].points[2] == Point2(10, 34);
  const bool c2 = left_mutual(lines_from({{10, 10}, {40, 22}})) == 0;
  const bool c3 = left_mutual(lines_from({{10, 10}, {16, 22}})) == 0 && left_mutual(lines_from({{10, 10}, {15, 22}})) == 1;
  ok = c1 && c2 && c3;

  std::mt19937_64 rng(808);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int symmetric = 0, nonempty = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Polyline> lines;
    const int count = 4 + int(14 * u(rng));
    double y = 20 + 10 * u(rng);
    const double slope = 0.2 * (u(rng) - 0.5);
    for (int k = 0; k < count; ++k) {
      const double x0 = 40 + (u(rng) < 0.2 ? 30 * u(rng) : 4 * u(rng));
      const double x1 = 400 - (u(rng) < 0.3 ? 150 * u(rng) : 4 * u(rng));
      Polyline l;
      for (int i = 0; i <= 6; ++i) {
        const double x = x0 + (x1 - x0) * i / 6.0;
        l.points.emplace_back(x, y + slope * x + 1.5 * (u(rng) - 0.5));
      }
      lines.push_back(l);
      y += 8 + 10 * u(rng);
    }
    auto flipped = lines;
    for (auto& l : flipped)
      for (auto& p : l.points) p.y() = 512.0 - p.y();
    const auto a = detect_vertical_lines(lines), b = detect_vertical_lines(flipped);
    auto canon = [](const std::vector<Polyline>& v, bool flip) {
      std::vector<std::vector<std::pair<double, double>>> out;
      for (const auto& l : v) {
        std::vector<std::pair<double, double>> pts;
        for (const auto& p : l.points) pts.emplace_back(p.x(), flip ? 512.0 - p.y() : p.y());
        std::sort(pts.begin(), pts.end(), [](auto x, auto y) { return x.second < y.second; });
        out.push_back(pts);
      }
      std::sort(out.begin(), out.end());
      return out;
    };
    symmetric += canon(a, true) == canon(b, false);
    nonempty += !a.empty();
  }
  ok = ok && symmetric == 100;
  return {ok, fmt("aligned %s, outside window %s, angle cases %s, flip symmetry %d/100 (%d layouts with chains)",
                  c1 ? "ok" : "FAIL", c2 ? "ok" : "FAIL", c3 ? "ok" : "FAIL", symmetric, nonempty)};
}

Outcome criterion9() {
  const WarpKind kinds[] = {WarpKind::cylinder, WarpKind::fold, WarpKind::gaussian_bumps, WarpKind::polynomial};
  const int side = 256, n = 64, raster = 256;
  const DocRect doc{0, 0, side - 1.0, side - 1.0};
  double worst = 0.0;
  long covered = 0;
  for (int k = 0; k < 20; ++k) {
    const auto w = make_warp({kinds[k % 4], 0.06 * side, 900 + std::uint64_t(k), 4}, side, side, doc, n);
    const auto inv = invert_forward(w.gt_forward, side, side, raster, raster);
    for (int py = 0; py < raster; ++py)
      for (int px = 0; px < raster; ++px) {
        if (inv.map.is_hole(px, py)) continue;
        // barycentric sums can land a rounding error outside the frame
        const Point2 g = to_grid(inv.map.at(px, py), side, side, n).cwiseMax(0.0).cwiseMin(double(n - 1));
        const Point2 uv(interpolate(w.gt_forward.u(), g), interpolate(w.gt_forward.v(), g));
        worst = std::max(worst, (Point2(uv.x() * (raster - 1), uv.y() * (raster - 1)) - Point2(px, py)).norm());
        ++covered;
      }
  }
  GridField folded = GridField::uniform(6);
  folded.set(2, 2, Point2(0.75, 0.75));
  const auto fd = invert_forward(folded, 100, 100, 100, 100).diagnostics;
  const auto gd = grid_diagnostics(folded);
  const bool fold_ok = fd.folded_triangles > 0 && fd.folded_pixels > 0 && gd.fold_count > 0;
  return {worst < 0.5 && fold_ok, fmt("max round-trip error %.3f px over %ld covered pixels; folded cell: %ld folded "
                                      "triangles, %ld fold pixels, %ld folded grid cells",
                                      worst, covered, fd.folded_triangles, fd.folded_pixels, gd.fold_count)};
}

Outcome criterion10() {
  const std::filesystem::path dir = std::filesystem::path(GRIDWARP_TEST_DATA) / "ms_ssim";
  const Json expected = read_json(dir / "expected.json");
  double worst = 0.0;
  for (const auto& e : expected) {
    const double got = ms_ssim(read_image(dir / e["a"].get<std::string>()), read_image(dir / e["b"].get<std::string>()));
    worst = std::max(worst, std::abs(got - e["ms_ssim"].get<double>()));
  }
  return {expected.size() >= 10 && worst < 1e-3,
          fmt("max |ours - reference| = %.2e over %zu pairs", worst, expected.size())};
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int id, const char* name, const Outcome& o) {
    std::printf("criterion %2d %-32s %s  %s\n", id, name, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
    failures += !o.pass;
  };
  report(1, "solver oracle equivalence", criterion1());
  report(2, "gradient and energy checks", criterion2());
  report(3, "flat fixed point", criterion3());
  std::printf("running the 50-case synthetic suite\n");
  const auto suite = run_suite();
  report(4, "synthetic dewarping improvement", criterion4(suite));
  report(5, "ablation ordering", criterion5(suite));
  report(6, "baseline agreement (cylinder)", criterion6(suite));
  report(7, "TPS and TFI exactness", criterion7());
  report(8, "vertical-line detection", criterion8());
  report(9, "inversion round trip", criterion9());
  report(10, "MS-SSIM reference agreement", criterion10());
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
