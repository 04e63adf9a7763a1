#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <optional>

#include <CLI11.hpp>

#include "gridwarp/elements.hpp"
#include "gridwarp/io.hpp"
#include "gridwarp/metrics.hpp"
#include "gridwarp/pipeline.hpp"
#include "gridwarp/synth.hpp"

namespace gridwarp::cli {

namespace fs = std::filesystem;

namespace {

struct SolverFlags {
  std::optional<int> n, max_iters, backward_size, width, height;
  std::optional<double> alpha, lambda, beta, tol;
  std::optional<std::string> preconditioner;
  bool no_text = false, no_vertical = false, no_detect = false;
};

void add_solver_flags(CLI::App& cmd, SolverFlags& f) {
  cmd.add_option("--n", f.n, "Grid nodes per side (default 128)");
  cmd.add_option("--alpha", f.alpha, "Line constraint weight (default 10)");
  cmd.add_option("--lambda", f.lambda, "Regularizer weight (default 2)");
  cmd.add_option("--beta", f.beta, "Mixed-derivative weight inside the regularizer (default 20)");
  cmd.add_option("--tol", f.tol, "Relative residual tolerance (default 1e-8)");
  cmd.add_option("--max-iters", f.max_iters, "Iteration cap (default 20000)");
  cmd.add_option("--preconditioner", f.preconditioner, "jacobi, incomplete_cholesky or cholesky");
  cmd.add_option("--backward-size", f.backward_size, "Inversion raster side (default n)");
  cmd.add_option("--width", f.width, "Output width (default: longer input side)");
  cmd.add_option("--height", f.height, "Output height (default: longer input side)");
  cmd.add_flag("--no-text-lines", f.no_text, "Ignore text lines");
  cmd.add_flag("--no-vertical-lines", f.no_vertical, "Ignore vertical lines");
  cmd.add_flag("--no-detect-vertical", f.no_detect, "Use the supplied vertical lines instead of detecting them");
}

PipelineConfig effective_config(const std::string& config_path, const SolverFlags& f) {
  PipelineConfig c = config_path.empty() ? PipelineConfig{} : read_config(config_path);
  if (f.n) c.solver.n = *f.n;
  if (f.alpha) c.solver.alpha = *f.alpha;
  if (f.lambda) c.solver.lambda = *f.lambda;
  if (f.beta) c.solver.beta = *f.beta;
  if (f.tol) c.solver.tol = *f.tol;
  if (f.max_iters) c.solver.max_iters = *f.max_iters;
  if (f.preconditioner) c.solver.preconditioner = preconditioner_from_string(*f.preconditioner);
  if (f.backward_size) c.backward_size = *f.backward_size;
  if (f.width) c.output_width = *f.width;
  if (f.height) c.output_height = *f.height;
  if (f.no_text) c.use_text_lines = false;
  if (f.no_vertical) c.use_vertical_lines = false;
  if (f.no_detect) c.detect_vertical = false;
  validate(c);
  return c;
}

Polyline frame_side(Point2 a, Point2 b) {
  Polyline line;
  line.points = {a, b};
  return line;
}

// Elements from a JSON file, a text-line mask, or both (mask lines replace the
// file's text lines). A mask alone uses the image frame as the boundary.
GeometricElements load_elements(const std::string& elements_path, const std::string& mask_path, int width,
                                int height) {
  GeometricElements e;
  if (!elements_path.empty()) {
    e = read_elements(elements_path);
  } else {
    if (mask_path.empty()) throw ConfigError("either --elements or --mask is required");
    e.width = width;
    e.height = height;
    const double r = width - 1, b = height - 1;
    e.top = frame_side({0, 0}, {r, 0});
    e.bottom = frame_side({0, b}, {r, b});
    e.left = frame_side({0, 0}, {0, b});
    e.right = frame_side({r, 0}, {r, b});
  }
  if (!mask_path.empty()) {
    const ImageBuffer mask = read_image(mask_path);
    if (mask.width != e.width || mask.height != e.height) throw ConfigError("mask size does not match the elements");
    e.text_lines = extract_text_lines(mask);
  }
  return e;
}

void write_or_print(const std::string& path, const Json& j, std::ostream& out) {
  if (path.empty() || path == "-") out << j.dump(2) << '\n';
  else write_json(path, j);
}

int cmd_dewarp(const std::string& image_path, const std::string& elements_path, const std::string& mask_path,
               const std::string& config_path, const SolverFlags& flags, const std::string& output,
               const std::string& diagnostics, const std::string& overlay, const std::string& uv,
               const std::string& flow, const std::string& config_out, std::ostream& out) {
  const PipelineConfig config = effective_config(config_path, flags);
  const ImageBuffer image = read_image(image_path);
  const GeometricElements elems = load_elements(elements_path, mask_path, image.width, image.height);
  const DewarpResult r = dewarp(image, elems, config);
  write_image(output, r.image);

  const ConstraintSet set = discretize_elements(r.elements, config.solver.n, config.discretize);
  const EnergyReport energy = energy_report(r.field, build_problem(set, config.solver, Channel::U),
                                            build_problem(set, config.solver, Channel::V));
  Json report;
  report["config"] = config_to_json(config);
  report["input"] = {{"width", image.width},
                     {"height", image.height},
                     {"text_lines", r.elements.text_lines.size()},
                     {"vertical_lines", r.elements.vertical_lines.size()},
                     {"constraint_points", set.points.size()}};
  report["output"] = {{"width", r.image.width}, {"height", r.image.height}};
  report["solver"] = {{"u", diagnostics_to_json(r.u)}, {"v", diagnostics_to_json(r.v)}};
  report["energy"] = energy_to_json(energy);
  report["inversion"] = diagnostics_to_json(r.inversion);
  report["grid"] = diagnostics_to_json(r.grid);
  if (!diagnostics.empty()) write_or_print(diagnostics, report, out);
  if (!overlay.empty()) write_image(overlay, render_overlay(image, r.elements));
  if (!uv.empty()) write_image(uv, render_uv(r.field, image.width, image.height));
  if (!flow.empty()) write_flow(flow, r.backward);
  if (!config_out.empty()) write_json(config_out, config_to_json(config));
  return ok;
}

int cmd_baseline(Baseline method, const std::string& image_path, const std::string& elements_path,
                 const std::string& config_path, const SolverFlags& flags, double reg, const std::string& output,
                 const std::string& flow, const std::string& overlay) {
  const PipelineConfig config = effective_config(config_path, flags);
  const ImageBuffer image = read_image(image_path);
  const GeometricElements elems = read_elements(elements_path);
  const BaselineResult r = baseline_dewarp(image, elems, method, config, reg);
  write_image(output, r.image);
  if (!flow.empty()) write_flow(flow, r.backward);
  if (!overlay.empty()) write_image(overlay, render_overlay(image, elems));
  return ok;
}

int cmd_synth(const std::string& dir, int size, int lines, const std::string& kind, double amplitude,
              std::uint64_t seed, int count, std::ostream& out) {
  if (size < 64) throw ConfigError("--size must be >= 64");
  const Page page = render_page(size, size, lines, seed);
  const WarpSpec spec{warp_kind_from_string(kind), amplitude, seed, count};
  const WarpResult warp = make_warp(spec, size, size, page.doc, 128);
  const WarpBundle bundle = apply_warp(page, warp);
  write_bundle(dir, bundle);
  out << "wrote " << dir << '\n';
  return ok;
}

int cmd_eval(const std::string& a, const std::string& b, const std::string& flow_est, const std::string& flow_ref,
             int scales, const std::string& output, std::ostream& out) {
  if (a.empty() != b.empty()) throw ConfigError("--image and --reference go together");
  if (flow_est.empty() != flow_ref.empty()) throw ConfigError("--flow and --reference-flow go together");
  if (a.empty() && flow_est.empty()) throw ConfigError("nothing to evaluate");
  Json report = Json::object();
  if (!a.empty()) {
    MsSsimOptions opt;
    opt.scales = scales;
    report["ms_ssim"] = ms_ssim(read_image(a), read_image(b), opt);
  }
  if (!flow_est.empty()) report["local_distortion"] = local_distortion(read_flow(flow_est), read_flow(flow_ref));
  write_or_print(output, report, out);
  return ok;
}

int cmd_detect(const std::string& elements_path, const std::string& mask_path, double w, double h, double theta,
               int frame, const std::string& output, std::ostream& out) {
  GeometricElements e;
  if (!elements_path.empty()) {
    e = read_elements(elements_path);
    if (!mask_path.empty()) e.text_lines = extract_text_lines(read_image(mask_path));
  } else {
    if (mask_path.empty()) throw ConfigError("either --elements or --mask is required");
    const ImageBuffer mask = read_image(mask_path);
    e = load_elements("", mask_path, mask.width, mask.height);
  }
  PipelineConfig c;
  c.vertical = {w, h, theta};
  c.discretize.working_frame = frame;
  validate(c);
  e.vertical_lines = prepare_elements(e, c).vertical_lines;
  write_or_print(output, elements_to_json(e), out);
  return ok;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Document dewarping by grid regularization", "gridwarp"};
  app.require_subcommand(1);

  SolverFlags flags;
  std::string image, elements, mask, config, output, diagnostics, overlay, uv, flow, config_out;

  auto* dewarp_cmd = app.add_subcommand("dewarp", "Rectify an image from its geometric elements");
  dewarp_cmd->add_option("--image,-i", image, "Input image (PNG, PGM or PPM)")->required();
  dewarp_cmd->add_option("--elements,-e", elements, "Elements JSON");
  dewarp_cmd->add_option("--mask,-m", mask, "Text-line mask; replaces the text lines of --elements");
  dewarp_cmd->add_option("--config,-c", config, "Config JSON; flags override it");
  dewarp_cmd->add_option("--output,-o", output, "Rectified image")->required();
  dewarp_cmd->add_option("--diagnostics,-d", diagnostics, "Diagnostics JSON ('-' for stdout)");
  dewarp_cmd->add_option("--overlay", overlay, "Input with the constrained elements drawn on top");
  dewarp_cmd->add_option("--uv", uv, "Forward field visualization");
  dewarp_cmd->add_option("--flow", flow, "Backward map as a flow file");
  dewarp_cmd->add_option("--write-config", config_out, "Effective config JSON");
  add_solver_flags(*dewarp_cmd, flags);

  double reg = 0.0;
  std::string base_flow, base_overlay;
  auto add_baseline = [&](const char* name, const char* help) {
    auto* cmd = app.add_subcommand(name, help);
    cmd->add_option("--image,-i", image, "Input image")->required();
    cmd->add_option("--elements,-e", elements, "Elements JSON")->required();
    cmd->add_option("--config,-c", config, "Config JSON; flags override it");
    cmd->add_option("--output,-o", output, "Rectified image")->required();
    cmd->add_option("--flow", base_flow, "Backward map as a flow file");
    cmd->add_option("--overlay", base_overlay, "Input with the elements drawn on top");
    add_solver_flags(*cmd, flags);
    return cmd;
  };
  auto* tfi_cmd = add_baseline("baseline-tfi", "Rectify by transfinite interpolation of the boundary");
  auto* tps_cmd = add_baseline("baseline-tps", "Rectify by a thin-plate spline through boundary points");
  tps_cmd->add_option("--reg", reg, "Bending-energy regularization (default 0)")->check(CLI::NonNegativeNumber);

  std::string dir, kind = "cylinder";
  int size = 512, lines = 28, count = 4;
  double amplitude = 30.0;
  std::uint64_t seed = 0;
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic warped bundle");
  synth_cmd->add_option("--out,-o", dir, "Bundle directory")->required();
  synth_cmd->add_option("--size", size, "Page side in pixels (default 512)");
  synth_cmd->add_option("--lines", lines, "Text line count (default 28)");
  synth_cmd->add_option("--kind", kind, "cylinder, fold, gaussian_bumps or polynomial");
  synth_cmd->add_option("--amplitude", amplitude, "Largest displacement in pixels (default 30)");
  synth_cmd->add_option("--seed", seed, "Random seed (default 0)");
  synth_cmd->add_option("--count", count, "Bump count for gaussian_bumps (default 4)");

  std::string ref_image, flow_est, flow_ref;
  int scales = 5;
  auto* eval_cmd = app.add_subcommand("eval", "MS-SSIM between images and local distortion between flows");
  eval_cmd->add_option("--image,-i", image, "Image to score");
  eval_cmd->add_option("--reference,-r", ref_image, "Reference image");
  eval_cmd->add_option("--flow", flow_est, "Estimated flow file");
  eval_cmd->add_option("--reference-flow", flow_ref, "Reference flow file");
  eval_cmd->add_option("--scales", scales, "MS-SSIM scales (default 5)");
  eval_cmd->add_option("--output,-o", output, "Report JSON (default stdout)");

  VerticalDetectParams vp;
  int frame = 512;
  auto* detect_cmd = app.add_subcommand("detect", "Estimate vertical lines from text-line endpoints");
  detect_cmd->add_option("--elements,-e", elements, "Elements JSON");
  detect_cmd->add_option("--mask,-m", mask, "Text-line mask");
  detect_cmd->add_option("--window-w", vp.w, "Window half-width (default 15)");
  detect_cmd->add_option("--window-h", vp.h, "Window height (default 15)");
  detect_cmd->add_option("--theta", vp.theta, "Angle threshold in radians (default atan 0.45)");
  detect_cmd->add_option("--frame", frame, "Working frame side (default 512)");
  detect_cmd->add_option("--output,-o", output, "Elements JSON with vertical lines (default stdout)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return ok;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return bad_input;
  }

  try {
    if (dewarp_cmd->parsed())
      return cmd_dewarp(image, elements, mask, config, flags, output, diagnostics, overlay, uv, flow, config_out, out);
    if (tfi_cmd->parsed())
      return cmd_baseline(Baseline::tfi, image, elements, config, flags, 0.0, output, base_flow, base_overlay);
    if (tps_cmd->parsed())
      return cmd_baseline(Baseline::tps, image, elements, config, flags, reg, output, base_flow, base_overlay);
    if (synth_cmd->parsed()) return cmd_synth(dir, size, lines, kind, amplitude, seed, count, out);
    if (eval_cmd->parsed()) return cmd_eval(image, ref_image, flow_est, flow_ref, scales, output, out);
    if (detect_cmd->parsed()) return cmd_detect(elements, mask, vp.w, vp.h, vp.theta, frame, output, out);
  } catch (const UnderDeterminedError& e) {
    err << "error: under-determined problem: " << e.what() << '\n';
    return under_determined;
  } catch (const NonConvergenceError& e) {
    err << "error: solver did not converge: " << e.what() << '\n';
    return non_convergence;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return bad_input;
  }
  return bad_input;
}

}  // namespace gridwarp::cli
