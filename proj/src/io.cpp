#include "gridwarp/io.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>

namespace gridwarp {

namespace fs = std::filesystem;

namespace {

std::string lower_extension(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return char(std::tolower(c)); });
  return ext;
}

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using File = std::unique_ptr<std::FILE, FileCloser>;

File open_file(const fs::path& path, const char* mode) {
  File f(std::fopen(path.c_str(), mode));
  if (!f) throw IoError("cannot open '" + path.string() + "'");
  return f;
}

}  // namespace

ImageBuffer read_png(const fs::path& path) {
  File file = open_file(path, "rb");
  std::array<unsigned char, 8> sig{};
  if (std::fread(sig.data(), 1, 8, file.get()) != 8 || png_sig_cmp(sig.data(), 0, 8) != 0)
    throw IoError("'" + path.string() + "' is not a PNG file");

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("png_create_info_struct failed");
  }
  ImageBuffer img;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("corrupt PNG '" + path.string() + "'");
  }
  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  const png_byte color = png_get_color_type(png, info);
  const png_byte depth = png_get_bit_depth(png, info);
  if (depth == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);

  const int channels = png_get_channels(png, info);
  img = ImageBuffer(int(png_get_image_width(png, info)), int(png_get_image_height(png, info)), channels);
  rows.resize(std::size_t(img.height));
  for (int y = 0; y < img.height; ++y) rows[std::size_t(y)] = &img.data[std::size_t(y) * img.width * channels];
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  if (img.channels != 1 && img.channels != 3) throw IoError("unsupported PNG channel layout");
  return img;
}

void write_png(const fs::path& path, const ImageBuffer& img) {
  if (img.channels != 1 && img.channels != 3) throw IoError("write_png: 1 or 3 channels required");
  File file = open_file(path, "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("png_create_info_struct failed");
  }
  std::vector<png_bytep> rows(std::size_t(img.height));
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("failed writing '" + path.string() + "'");
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, png_uint_32(img.width), png_uint_32(img.height), 8,
               img.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < img.height; ++y)
    rows[std::size_t(y)] = const_cast<png_bytep>(&img.data[std::size_t(y) * img.width * img.channels]);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

namespace {

// Next header token of a PNM stream, skipping whitespace and comments.
std::string pnm_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      if (!tok.empty()) break;
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(char(c));
  }
  return tok;
}

int pnm_int(std::istream& in, const fs::path& path) {
  const std::string tok = pnm_token(in);
  try {
    std::size_t used = 0;
    const int v = std::stoi(tok, &used);
    if (used != tok.size() || v < 0) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw IoError("bad PNM header value '" + tok + "' in '" + path.string() + "'");
  }
}

}  // namespace

ImageBuffer read_pnm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  const std::string magic = pnm_token(in);
  int channels = 0;
  bool ascii = false;
  if (magic == "P5" || magic == "P2") channels = 1;
  else if (magic == "P6" || magic == "P3") channels = 3;
  else throw IoError("'" + path.string() + "' is not a PGM/PPM file");
  ascii = magic == "P2" || magic == "P3";
  const int w = pnm_int(in, path), h = pnm_int(in, path), maxval = pnm_int(in, path);
  if (w < 1 || h < 1 || maxval < 1 || maxval > 65535) throw IoError("bad PNM header in '" + path.string() + "'");
  ImageBuffer img(w, h, channels);
  const std::size_t count = img.data.size();
  auto scale = [&](int v) {
    if (v > maxval) throw IoError("PNM sample exceeds maxval in '" + path.string() + "'");
    return std::uint8_t(std::lround(255.0 * v / maxval));
  };
  if (ascii) {
    for (std::size_t i = 0; i < count; ++i) img.data[i] = scale(pnm_int(in, path));
    return img;
  }
  const int bytes = maxval > 255 ? 2 : 1;
  std::vector<unsigned char> raw(count * std::size_t(bytes));
  in.read(reinterpret_cast<char*>(raw.data()), std::streamsize(raw.size()));
  if (std::size_t(in.gcount()) != raw.size()) throw IoError("truncated PNM data in '" + path.string() + "'");
  for (std::size_t i = 0; i < count; ++i)
    img.data[i] = scale(bytes == 1 ? raw[i] : (raw[2 * i] << 8) | raw[2 * i + 1]);
  return img;
}

void write_pnm(const fs::path& path, const ImageBuffer& img) {
  if (img.channels != 1 && img.channels != 3) throw IoError("write_pnm: 1 or 3 channels required");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << (img.channels == 1 ? "P5" : "P6") << '\n' << img.width << ' ' << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.data.data()), std::streamsize(img.data.size()));
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

ImageBuffer read_image(const fs::path& path) {
  const std::string ext = lower_extension(path);
  if (ext == ".pgm" || ext == ".ppm" || ext == ".pnm") return read_pnm(path);
  if (ext == ".png") return read_png(path);
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw IoError("cannot open '" + path.string() + "'");
  return probe.peek() == 'P' ? read_pnm(path) : read_png(path);
}

void write_image(const fs::path& path, const ImageBuffer& img) {
  const std::string ext = lower_extension(path);
  if (ext == ".png") return write_png(path, img);
  if (ext == ".pgm") {
    if (img.channels != 1) throw IoError("PGM output needs a single-channel image");
    return write_pnm(path, img);
  }
  if (ext == ".ppm") {
    if (img.channels == 3) return write_pnm(path, img);
    ImageBuffer rgb(img.width, img.height, 3);
    for (std::size_t i = 0; i < img.data.size(); ++i)
      for (int c = 0; c < 3; ++c) rgb.data[i * 3 + std::size_t(c)] = img.data[i];
    return write_pnm(path, rgb);
  }
  throw IoError("unsupported image extension '" + ext + "' (use .png, .pgm or .ppm)");
}

namespace {

Json polyline_to_json(const Polyline& line) {
  Json arr = Json::array();
  for (const auto& p : line.points) arr.push_back({p.x(), p.y()});
  return arr;
}

Polyline polyline_from_json(const Json& j, const std::string& what) {
  if (!j.is_array()) throw ConfigError(what + ": expected an array of [x, y] pairs");
  Polyline line;
  for (const auto& p : j) {
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
      throw ConfigError(what + ": every point must be [x, y]");
    line.points.emplace_back(p[0].get<double>(), p[1].get<double>());
  }
  return line;
}

std::vector<Polyline> lines_from_json(const Json& j, const char* key) {
  std::vector<Polyline> lines;
  if (!j.contains(key)) return lines;
  if (!j[key].is_array()) throw ConfigError(std::string(key) + ": expected an array of polylines");
  for (std::size_t i = 0; i < j[key].size(); ++i)
    lines.push_back(polyline_from_json(j[key][i], std::string(key) + "[" + std::to_string(i) + "]"));
  return lines;
}

}  // namespace

Json elements_to_json(const GeometricElements& e) {
  Json j;
  j["schema"] = 1;
  j["image_size"] = {e.width, e.height};
  j["boundary"] = {{"top", polyline_to_json(e.top)},
                   {"bottom", polyline_to_json(e.bottom)},
                   {"left", polyline_to_json(e.left)},
                   {"right", polyline_to_json(e.right)}};
  Json text = Json::array(), vert = Json::array();
  for (const auto& l : e.text_lines) text.push_back(polyline_to_json(l));
  for (const auto& l : e.vertical_lines) vert.push_back(polyline_to_json(l));
  j["text_lines"] = text;
  j["vertical_lines"] = vert;
  return j;
}

GeometricElements elements_from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("elements: expected a JSON object");
  if (!j.contains("schema") || j["schema"] != 1) throw ConfigError("elements: unsupported or missing schema (expected 1)");
  const auto& size = j.value("image_size", Json());
  if (!size.is_array() || size.size() != 2 || !size[0].is_number_integer() || !size[1].is_number_integer())
    throw ConfigError("elements: image_size must be [width, height]");
  GeometricElements e;
  e.width = size[0].get<int>();
  e.height = size[1].get<int>();
  if (e.width < 2 || e.height < 2) throw ConfigError("elements: image_size must be at least 2 x 2");
  if (!j.contains("boundary") || !j["boundary"].is_object()) throw ConfigError("elements: missing boundary object");
  const auto& b = j["boundary"];
  for (const char* side : {"top", "bottom", "left", "right"})
    if (!b.contains(side)) throw ConfigError(std::string("elements: missing boundary.") + side);
  e.top = polyline_from_json(b["top"], "boundary.top");
  e.bottom = polyline_from_json(b["bottom"], "boundary.bottom");
  e.left = polyline_from_json(b["left"], "boundary.left");
  e.right = polyline_from_json(b["right"], "boundary.right");
  e.text_lines = lines_from_json(j, "text_lines");
  e.vertical_lines = lines_from_json(j, "vertical_lines");
  validate(e);
  return e;
}

Json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("invalid JSON in '" + path.string() + "': " + e.what());
  }
}

void write_json(const fs::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

GeometricElements read_elements(const fs::path& path) { return elements_from_json(read_json(path)); }

void write_elements(const fs::path& path, const GeometricElements& e) { write_json(path, elements_to_json(e)); }

namespace {

constexpr char kFlowMagic[8] = {'G', 'R', 'I', 'D', 'F', 'L', 'O', '1'};

void put_u32(std::ostream& out, std::uint32_t v) {
  const unsigned char b[4] = {std::uint8_t(v), std::uint8_t(v >> 8), std::uint8_t(v >> 16), std::uint8_t(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

void put_f32(std::ostream& out, float f) { put_u32(out, std::bit_cast<std::uint32_t>(f)); }

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (in.gcount() != 4) throw IoError("truncated flow file");
  return std::uint32_t(b[0]) | std::uint32_t(b[1]) << 8 | std::uint32_t(b[2]) << 16 | std::uint32_t(b[3]) << 24;
}

}  // namespace

void write_flow(const fs::path& path, const BackwardMap& flow) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(kFlowMagic, 8);
  put_u32(out, std::uint32_t(flow.width));
  put_u32(out, std::uint32_t(flow.height));
  const float nan = std::numeric_limits<float>::quiet_NaN();
  for (int py = 0; py < flow.height; ++py)
    for (int px = 0; px < flow.width; ++px) {
      const bool hole = flow.is_hole(px, py);
      put_f32(out, hole ? nan : float(flow.x(py, px)));
      put_f32(out, hole ? nan : float(flow.y(py, px)));
    }
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

BackwardMap read_flow(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  char magic[8];
  in.read(magic, 8);
  if (in.gcount() != 8 || std::memcmp(magic, kFlowMagic, 8) != 0)
    throw IoError("'" + path.string() + "' is not a GRIDFLO1 flow file");
  const std::uint32_t w = get_u32(in), h = get_u32(in);
  if (w == 0 || h == 0 || w > 1u << 15 || h > 1u << 15) throw IoError("implausible flow size in '" + path.string() + "'");
  BackwardMap flow(static_cast<int>(w), static_cast<int>(h));
  for (int py = 0; py < flow.height; ++py)
    for (int px = 0; px < flow.width; ++px) {
      const float x = std::bit_cast<float>(get_u32(in)), y = std::bit_cast<float>(get_u32(in));
      if (std::isnan(x) || std::isnan(y)) flow.set_hole(px, py);
      else flow.set(px, py, Point2(x, y));
    }
  return flow;
}

void write_field(const fs::path& path, const GridField& field) {
  const int n = field.size();
  BackwardMap bm(n, n);
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) bm.set(ix, iy, field.at(ix, iy));
  write_flow(path, bm);
}

GridField read_field(const fs::path& path) {
  const BackwardMap bm = read_flow(path);
  if (bm.width != bm.height) throw IoError("field file '" + path.string() + "' is not square");
  if (bm.hole_count() > 0) throw IoError("field file '" + path.string() + "' contains holes");
  GridField f(bm.width);
  for (int iy = 0; iy < bm.height; ++iy)
    for (int ix = 0; ix < bm.width; ++ix) f.set(ix, iy, bm.at(ix, iy));
  return f;
}

Json config_to_json(const PipelineConfig& c) {
  Json j;
  j["solver"] = {{"n", c.solver.n},
                 {"alpha", c.solver.alpha},
                 {"lambda", c.solver.lambda},
                 {"beta", c.solver.beta},
                 {"tol", c.solver.tol},
                 {"max_iters", c.solver.max_iters},
                 {"preconditioner", to_string(c.solver.preconditioner)}};
  j["discretize"] = {{"text_interval", c.discretize.text_interval},
                     {"vertical_interval", c.discretize.vertical_interval},
                     {"boundary_interval", c.discretize.boundary_interval},
                     {"working_frame", c.discretize.working_frame}};
  j["vertical"] = {{"w", c.vertical.w}, {"h", c.vertical.h}, {"theta", c.vertical.theta}};
  j["detect_vertical"] = c.detect_vertical;
  j["use_text_lines"] = c.use_text_lines;
  j["use_vertical_lines"] = c.use_vertical_lines;
  j["output_width"] = c.output_width;
  j["output_height"] = c.output_height;
  j["backward_size"] = c.backward_size;
  return j;
}

namespace {

void check_keys(const Json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& item : j.items()) {
    const bool ok = std::any_of(allowed.begin(), allowed.end(), [&](const char* k) { return item.key() == k; });
    if (!ok) throw ConfigError(where + ": unknown key '" + item.key() + "'");
  }
}

template <typename T>
void read_key(const Json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j[key].get<T>();
  } catch (const Json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

}  // namespace

PipelineConfig config_from_json(const Json& j, const PipelineConfig& base) {
  PipelineConfig c = base;
  check_keys(j, "config", {"solver", "discretize", "vertical", "detect_vertical", "use_text_lines",
                           "use_vertical_lines", "output_width", "output_height", "backward_size"});
  if (j.contains("solver")) {
    const auto& s = j["solver"];
    check_keys(s, "config.solver", {"n", "alpha", "lambda", "beta", "tol", "max_iters", "preconditioner"});
    read_key(s, "n", c.solver.n, "solver");
    read_key(s, "alpha", c.solver.alpha, "solver");
    read_key(s, "lambda", c.solver.lambda, "solver");
    read_key(s, "beta", c.solver.beta, "solver");
    read_key(s, "tol", c.solver.tol, "solver");
    read_key(s, "max_iters", c.solver.max_iters, "solver");
    std::string pre = to_string(c.solver.preconditioner);
    read_key(s, "preconditioner", pre, "solver");
    c.solver.preconditioner = preconditioner_from_string(pre);
  }
  if (j.contains("discretize")) {
    const auto& d = j["discretize"];
    check_keys(d, "config.discretize", {"text_interval", "vertical_interval", "boundary_interval", "working_frame"});
    read_key(d, "text_interval", c.discretize.text_interval, "discretize");
    read_key(d, "vertical_interval", c.discretize.vertical_interval, "discretize");
    read_key(d, "boundary_interval", c.discretize.boundary_interval, "discretize");
    read_key(d, "working_frame", c.discretize.working_frame, "discretize");
  }
  if (j.contains("vertical")) {
    const auto& v = j["vertical"];
    check_keys(v, "config.vertical", {"w", "h", "theta"});
    read_key(v, "w", c.vertical.w, "vertical");
    read_key(v, "h", c.vertical.h, "vertical");
    read_key(v, "theta", c.vertical.theta, "vertical");
  }
  read_key(j, "detect_vertical", c.detect_vertical, "config");
  read_key(j, "use_text_lines", c.use_text_lines, "config");
  read_key(j, "use_vertical_lines", c.use_vertical_lines, "config");
  read_key(j, "output_width", c.output_width, "config");
  read_key(j, "output_height", c.output_height, "config");
  read_key(j, "backward_size", c.backward_size, "config");
  validate(c);
  return c;
}

PipelineConfig read_config(const fs::path& path) { return config_from_json(read_json(path)); }

Json diagnostics_to_json(const SolveDiagnostics& d) {
  Json blocks = Json::object();
  for (const auto& b : d.block_energies) blocks[b.name] = b.energy;
  return {{"iterations", d.iterations},
          {"relative_residual", d.relative_residual},
          {"objective", d.objective},
          {"block_energies", blocks}};
}

Json diagnostics_to_json(const InversionDiagnostics& d) {
  return {{"degenerate_triangles", d.degenerate_triangles},
          {"folded_triangles", d.folded_triangles},
          {"folded_pixels", d.folded_pixels},
          {"overlap_pixels", d.overlap_pixels},
          {"hole_pixels", d.hole_pixels}};
}

Json diagnostics_to_json(const GridDiagnostics& d) {
  return {{"fold_count", d.fold_count},
          {"min_cell_area", d.min_cell_area},
          {"row_v_std", d.row_v_std},
          {"col_u_std", d.col_u_std}};
}

namespace {

Json channel_energy_json(const ChannelEnergy& e) {
  Json boundary = Json::object(), lines = Json::object();
  for (const auto& g : e.boundary) boundary[g.name] = g.energy;
  for (const auto& g : e.lines) lines[g.name] = g.energy;
  return {{"boundary", boundary}, {"lines", lines}, {"laplacian", e.laplacian}, {"cross", e.cross}, {"total", e.total}};
}

}  // namespace

Json energy_to_json(const EnergyReport& r) {
  return {{"u", channel_energy_json(r.u)}, {"v", channel_energy_json(r.v)}, {"total", r.total}};
}

Json warp_spec_to_json(const WarpSpec& s) {
  return {{"kind", to_string(s.kind)}, {"amplitude", s.amplitude}, {"seed", s.seed}, {"count", s.count}};
}

WarpSpec warp_spec_from_json(const Json& j) {
  check_keys(j, "warp", {"kind", "amplitude", "seed", "count"});
  WarpSpec s;
  std::string kind = to_string(s.kind);
  read_key(j, "kind", kind, "warp");
  s.kind = warp_kind_from_string(kind);
  read_key(j, "amplitude", s.amplitude, "warp");
  read_key(j, "seed", s.seed, "warp");
  read_key(j, "count", s.count, "warp");
  return s;
}

void write_bundle(const fs::path& dir, const WarpBundle& b) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
  write_png(dir / "flat.png", b.flat_image);
  write_png(dir / "warped.png", b.warped_image);
  write_elements(dir / "flat_elements.json", b.flat_elements);
  write_elements(dir / "warped_elements.json", b.warped_elements);
  write_field(dir / "gt_forward.flo", b.gt_forward);
  write_flow(dir / "gt_backward.flo", b.gt_backward);
  Json meta;
  meta["warp"] = warp_spec_to_json(b.spec);
  meta["doc"] = {b.doc.x0, b.doc.y0, b.doc.x1, b.doc.y1};
  write_json(dir / "meta.json", meta);
}

WarpBundle read_bundle(const fs::path& dir) {
  WarpBundle b;
  b.flat_image = read_png(dir / "flat.png");
  b.warped_image = read_png(dir / "warped.png");
  b.flat_elements = read_elements(dir / "flat_elements.json");
  b.warped_elements = read_elements(dir / "warped_elements.json");
  b.gt_forward = read_field(dir / "gt_forward.flo");
  b.gt_backward = read_flow(dir / "gt_backward.flo");
  const Json meta = read_json(dir / "meta.json");
  if (!meta.contains("warp") || !meta.contains("doc") || !meta["doc"].is_array() || meta["doc"].size() != 4)
    throw ConfigError("meta.json: expected warp and doc entries");
  b.spec = warp_spec_from_json(meta["warp"]);
  b.doc = {meta["doc"][0].get<double>(), meta["doc"][1].get<double>(), meta["doc"][2].get<double>(),
           meta["doc"][3].get<double>()};
  return b;
}

}  // namespace gridwarp
