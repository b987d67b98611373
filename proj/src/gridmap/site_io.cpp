#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "earthworks/gridmap.hpp"

namespace earthworks::grid {

namespace fs = std::filesystem;

namespace {

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::uint64_t to_le(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) return __builtin_bswap64(v);
  return v;
}

void write_raw(const fs::path& file, std::span<const double> values) {
  std::vector<std::uint64_t> buf(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) buf[i] = to_le(std::bit_cast<std::uint64_t>(values[i]));
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + file.string());
  out.write(reinterpret_cast<const char*>(buf.data()), std::streamsize(buf.size() * 8));
}

std::vector<double> read_raw(const fs::path& file, std::size_t n) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + file.string());
  std::vector<std::uint64_t> buf(n);
  in.read(reinterpret_cast<char*>(buf.data()), std::streamsize(n * 8));
  if (std::size_t(in.gcount()) != n * 8) throw Error(ErrorCode::Parse, file.string() + " is truncated");
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = std::bit_cast<double>(to_le(buf[i]));
  return out;
}

bool valid_layer_name(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) return false;
  return true;
}

}  // namespace

void write_site(const fs::path& dir, const LayeredGrid& grid, std::span<const PolygonFeature> polygons) {
  fs::create_directories(dir);
  const GridSpec& s = grid.spec();
  std::ostringstream meta;
  meta << "earthworks-site 1\n";
  meta << "resolution " << fmt17(s.resolution) << "\n";
  meta << "origin " << fmt17(s.origin.x) << " " << fmt17(s.origin.y) << "\n";
  meta << "dims " << s.rows << " " << s.cols << "\n";
  meta << "crs " << s.crs << "\n";
  for (const auto& name : grid.layer_names()) {
    if (!valid_layer_name(name)) throw Error(ErrorCode::InvalidArgument, "bad layer name '" + name + "'");
    meta << "layer " << name << "\n";
    write_raw(dir / (name + ".f64"), grid.layer(name));
  }
  {
    std::ofstream out(dir / "site.meta");
    if (!out) throw Error(ErrorCode::Io, "cannot write site.meta in " + dir.string());
    out << meta.str();
  }
  nlohmann::json features = nlohmann::json::array();
  for (const auto& p : polygons) {
    nlohmann::json ring = nlohmann::json::array();
    for (const Vec2& v : p.ring) ring.push_back({v.x, v.y});
    if (!p.ring.empty() && !(p.ring.front() == p.ring.back())) ring.push_back({p.ring[0].x, p.ring[0].y});
    features.push_back({{"type", "Feature"},
                        {"geometry", {{"type", "Polygon"}, {"coordinates", {ring}}}},
                        {"properties", {{"layer", p.layer}, {"value", p.value}, {"relative", p.relative}}}});
  }
  nlohmann::json doc = {{"type", "FeatureCollection"}, {"features", features}};
  std::ofstream out(dir / "polygons.geojson");
  if (!out) throw Error(ErrorCode::Io, "cannot write polygons.geojson");
  out << doc.dump(1) << "\n";
}

namespace {

std::vector<PolygonFeature> parse_polygons(const nlohmann::json& doc) {
  std::vector<PolygonFeature> out;
  for (const auto& f : doc.at("features")) {
    PolygonFeature p;
    const auto& coords = f.at("geometry").at("coordinates").at(0);
    for (const auto& v : coords) p.ring.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
    if (p.ring.size() > 1 && p.ring.front() == p.ring.back()) p.ring.pop_back();
    const auto& props = f.at("properties");
    p.layer = props.at("layer").get<std::string>();
    p.value = props.at("value").get<double>();
    p.relative = props.value("relative", false);
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace

std::vector<PolygonFeature> read_polygon_file(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + file.string());
  try {
    return parse_polygons(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, file.string() + ": " + e.what());
  }
}

Site read_site(const fs::path& dir) {
  std::ifstream in(dir / "site.meta");
  if (!in) throw Error(ErrorCode::Io, "cannot read " + (dir / "site.meta").string());
  GridSpec spec;
  std::vector<std::string> names;
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    if (key == "earthworks-site") {
      header = true;
    } else if (key == "resolution") {
      ls >> spec.resolution;
    } else if (key == "origin") {
      ls >> spec.origin.x >> spec.origin.y;
    } else if (key == "dims") {
      ls >> spec.rows >> spec.cols;
    } else if (key == "crs") {
      std::getline(ls >> std::ws, spec.crs);
    } else if (key == "layer") {
      std::string n;
      ls >> n;
      names.push_back(n);
    } else {
      throw Error(ErrorCode::Parse, "unknown site.meta key '" + key + "'");
    }
    if (ls.fail()) throw Error(ErrorCode::Parse, "malformed site.meta line: " + line);
  }
  if (!header) throw Error(ErrorCode::Parse, "site.meta lacks header");
  Site site;
  site.grid = LayeredGrid(spec);
  for (const auto& n : names) site.grid.set_layer(n, read_raw(dir / (n + ".f64"), spec.size()));
  const fs::path poly = dir / "polygons.geojson";
  if (fs::exists(poly)) {
    site.polygons = read_polygon_file(poly);
  }
  return site;
}

}  // namespace earthworks::grid
