#include <fstream>

#include "earthworks/harness.hpp"

namespace earthworks::bench {

namespace {

Rgb heat(double t) {
  // Blue, cyan, yellow, red.
  static constexpr std::array<std::array<double, 3>, 4> stops{{{0, 0, 200}, {0, 200, 220}, {240, 220, 0}, {200, 0, 0}}};
  t = std::clamp(t, 0.0, 1.0) * 3.0;
  const int k = std::min(2, int(t));
  const double f = t - k;
  auto mix = [&](int c) { return std::uint8_t(std::lround(stops[k][c] + f * (stops[k + 1][c] - stops[k][c]))); };
  return {mix(0), mix(1), mix(2)};
}

struct Pixel {
  double x, y;
};

Pixel to_pixel(const grid::GridSpec& spec, int scale, int height, Vec2 p) {
  const Vec2 f = spec.fractional(p);
  return {(f.x + 0.5) * scale, height - (f.y + 0.5) * scale};
}

void plot(Image& img, int x, int y, Rgb c) {
  if (x >= 0 && y >= 0 && x < img.width && y < img.height) img.at(x, y) = c;
}

void line(Image& img, Pixel a, Pixel b, Rgb c) {
  const double steps = std::max({std::abs(b.x - a.x), std::abs(b.y - a.y), 1.0});
  for (int k = 0; k <= int(std::ceil(steps)); ++k) {
    const double t = k / std::ceil(steps);
    plot(img, int(std::floor(a.x + t * (b.x - a.x))), int(std::floor(a.y + t * (b.y - a.y))), c);
  }
}

int read_token(std::istream& in) {
  in >> std::ws;
  while (in.peek() == '#') {
    std::string comment;
    std::getline(in, comment);
    in >> std::ws;
  }
  int v = -1;
  in >> v;
  if (!in) throw Error(ErrorCode::Parse, "bad PPM header");
  return v;
}

}  // namespace

Rgb mask_color(grid::MaskValue v) {
  switch (v) {
    case grid::MaskValue::Dig: return {148, 0, 211};
    case grid::MaskValue::PermanentDump: return {0, 170, 0};
    case grid::MaskValue::Neutral: return {135, 206, 250};
    case grid::MaskValue::NoGo: return {220, 0, 0};
    case grid::MaskValue::Boundary: return {0, 0, 139};
  }
  return {0, 0, 0};
}

Image render_grid(const grid::LayeredGrid& site, Layer layer, int scale) {
  if (scale < 1) throw Error(ErrorCode::InvalidArgument, "pixel scale must be >= 1");
  const auto& spec = site.spec();
  Image img;
  img.width = spec.cols * scale;
  img.height = spec.rows * scale;
  img.pixels.assign(std::size_t(img.width) * std::size_t(img.height), Rgb{});
  std::vector<Rgb> colors(spec.size());
  if (layer == Layer::Mask) {
    for (std::size_t i = 0; i < spec.size(); ++i) colors[i] = mask_color(site.mask(i));
  } else {
    const auto e = site.layer(grid::layer::kElevation);
    double lo = grid::kInf, hi = -grid::kInf;
    for (double v : e)
      if (std::isfinite(v)) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    const double span = hi > lo ? hi - lo : 1.0;
    for (std::size_t i = 0; i < spec.size(); ++i)
      colors[i] = std::isfinite(e[i]) ? heat((e[i] - lo) / span) : Rgb{};
  }
  for (int y = 0; y < img.height; ++y) {
    const int row = spec.rows - 1 - y / scale;
    for (int x = 0; x < img.width; ++x) img.at(x, y) = colors[spec.index(row, x / scale)];
  }
  return img;
}

void draw_pose(Image& img, const grid::GridSpec& spec, int scale, const Pose2& pose, Rgb color) {
  const double len = 2.0;  // metres
  const Vec2 tip = pose.position() + unit(pose.heading) * len;
  const Pixel a = to_pixel(spec, scale, img.height, pose.position());
  const Pixel b = to_pixel(spec, scale, img.height, tip);
  line(img, a, b, color);
  for (double side : {-1.0, 1.0}) {
    const Vec2 barb = tip + unit(pose.heading + kPi + side * 0.5) * (0.4 * len);
    line(img, b, to_pixel(spec, scale, img.height, barb), color);
  }
}

void draw_path(Image& img, const grid::GridSpec& spec, int scale, std::span<const nav::PathSample> path) {
  for (std::size_t k = 1; k < path.size(); ++k) {
    const Rgb c = path[k].forward ? Rgb{0, 200, 0} : Rgb{230, 0, 0};
    line(img, to_pixel(spec, scale, img.height, path[k - 1].pose.position()),
         to_pixel(spec, scale, img.height, path[k].pose.position()), c);
  }
}

void write_ppm(const std::filesystem::path& file, const Image& img) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write image " + file.string());
  out << "P6\n" << img.width << ' ' << img.height << "\n255\n";
  for (const Rgb& p : img.pixels) {
    const char px[3] = {char(p.r), char(p.g), char(p.b)};
    out.write(px, 3);
  }
  if (!out) throw Error(ErrorCode::Io, "short write to " + file.string());
}

Image read_ppm(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open image " + file.string());
  std::string magic;
  in >> magic;
  if (magic != "P6") throw Error(ErrorCode::Parse, "not a binary PPM: " + file.string());
  Image img;
  img.width = read_token(in);
  img.height = read_token(in);
  if (read_token(in) != 255 || img.width < 0 || img.height < 0) throw Error(ErrorCode::Parse, "unsupported PPM");
  in.get();
  img.pixels.resize(std::size_t(img.width) * std::size_t(img.height));
  for (Rgb& p : img.pixels) {
    char px[3];
    if (!in.read(px, 3)) throw Error(ErrorCode::Parse, "truncated PPM " + file.string());
    p = {std::uint8_t(px[0]), std::uint8_t(px[1]), std::uint8_t(px[2])};
  }
  return img;
}

}  // namespace earthworks::bench
