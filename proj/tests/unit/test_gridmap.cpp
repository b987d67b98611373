#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>

#include "earthworks/gridmap.hpp"

using namespace earthworks;
using namespace earthworks::grid;

namespace {

GridSpec make_spec(int rows, int cols, double res = 0.1, Vec2 origin = {0, 0}) {
  GridSpec s;
  s.rows = rows;
  s.cols = cols;
  s.resolution = res;
  s.origin = origin;
  return s;
}

std::vector<Vec2> square(double x0, double y0, double x1, double y1) {
  return {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
}

std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("earthworks_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

// Random simple polygon, star-shaped around c.
std::vector<Vec2> random_star(Rng& rng, Vec2 c, double rmin, double rmax) {
  const int n = 3 + int(rng.index(6));
  std::vector<double> ang(n);
  for (int k = 0; k < n; ++k) ang[k] = (k + rng.uniform(0.1, 0.9)) * 2 * kPi / n;
  std::vector<Vec2> ring;
  for (double a : ang) ring.push_back(c + unit(a) * rng.uniform(rmin, rmax));
  return ring;
}

}  // namespace

TEST_CASE("unit square of dig on a 0.1 m grid has 100 cells") {
  // Offset by half a cell so no center lies on an edge.
  std::vector<PolygonFeature> f{{square(0.05, 0.05, 1.05, 1.05), layer::kExcavationMask, double(MaskValue::Dig)}};
  auto g = rasterize_polygons(f, make_spec(30, 30));
  auto dig = mask_equals(g, MaskValue::Dig);
  CHECK(std::count(dig.begin(), dig.end(), 1) == 100);
}

TEST_CASE("empty polygon list gives neutral mask and free occupancy") {
  auto g = rasterize_polygons({}, make_spec(7, 9));
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(g.mask(i) == MaskValue::Neutral);
    CHECK(g.layer(layer::kOccupancy)[i] == 0.0);
  }
}

TEST_CASE("later polygon wins per cell, checked against point-in-polygon") {
  Rng rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<PolygonFeature> f;
    const int n = 1 + int(rng.index(4));
    for (int k = 0; k < n; ++k)
      f.push_back({random_star(rng, {rng.uniform(0.5, 2.5), rng.uniform(0.5, 2.5)}, 0.3, 1.4),
                   layer::kExcavationMask, double(rng.index(5))});
    auto spec = make_spec(31, 29, 0.1, {0.013, -0.021});
    auto g = rasterize_polygons(f, spec);
    for (std::size_t i = 0; i < g.size(); ++i) {
      double expect = double(MaskValue::Neutral);
      for (const auto& p : f)
        if (point_in_ring(p.ring, spec.center(i))) expect = p.value;
      REQUIRE(g.layer(layer::kExcavationMask)[i] == expect);
    }
  }
}

TEST_CASE("overlapping squares, the later NoGo wins in the overlap") {
  std::vector<PolygonFeature> f{{square(0.05, 0.05, 1.05, 1.05), layer::kExcavationMask, 0.0},
                                {square(0.55, 0.55, 1.55, 1.55), layer::kExcavationMask, 3.0}};
  auto spec = make_spec(20, 20);
  auto g = rasterize_polygons(f, spec);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Vec2 c = spec.center(i);
    const bool in_b = c.x > 0.55 && c.x < 1.55 && c.y > 0.55 && c.y < 1.55;
    const bool in_a = c.x > 0.05 && c.x < 1.05 && c.y > 0.05 && c.y < 1.05;
    const MaskValue expect = in_b ? MaskValue::NoGo : in_a ? MaskValue::Dig : MaskValue::Neutral;
    CHECK(g.mask(i) == expect);
  }
}

TEST_CASE("self-intersecting ring is rejected with its index") {
  std::vector<PolygonFeature> f{{square(0, 0, 1, 1), layer::kExcavationMask, 0.0},
                                {{{0, 0}, {1, 1}, {1, 0}, {0, 1}}, layer::kExcavationMask, 0.0}};
  try {
    rasterize_polygons(f, make_spec(10, 10));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SelfIntersectingRing);
    CHECK(std::string(e.what()).find("ring 1") != std::string::npos);
  }
}

TEST_CASE("relative target polygon offsets the elevation") {
  std::vector<PolygonFeature> f{{square(-1, -1, 5, 5), layer::kElevation, 2.0},
                                {square(0.05, 0.05, 1.05, 1.05), layer::kTargetElevation, -1.0, true}};
  auto spec = make_spec(20, 20);
  auto g = rasterize_polygons(f, spec);
  const std::size_t in = spec.index(5, 5), out = spec.index(15, 15);
  CHECK(g.layer(layer::kTargetElevation)[in] == 1.0);
  CHECK(g.layer(layer::kTargetElevation)[out] == 2.0);
}

TEST_CASE("distance transform basics") {
  auto spec = make_spec(10, 10);
  std::vector<std::uint8_t> set(spec.size(), 0);
  set[spec.index(2, 2)] = 1;
  auto d = distance_transform(spec, set);
  CHECK(d.values[spec.index(2, 2)] == 0.0);
  CHECK(d.values[spec.index(2, 7)] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK_FALSE(d.empty_set);

  std::vector<std::uint8_t> none(spec.size(), 0);
  auto e = distance_transform(spec, none);
  CHECK(e.empty_set);
  CHECK(std::isinf(e.values[0]));
}

TEST_CASE("distance transform equals brute force on random masks") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int rows = 1 + int(rng.index(20)), cols = 1 + int(rng.index(20));
    auto spec = make_spec(rows, cols, trial % 2 ? 0.1 : 0.37);
    std::vector<std::uint8_t> set(spec.size());
    const double p = rng.uniform(0.0, 0.3);
    for (auto& b : set) b = rng.uniform() < p;
    auto d = distance_transform(spec, set);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) {
        double best = kInf;
        for (int r2 = 0; r2 < rows; ++r2)
          for (int c2 = 0; c2 < cols; ++c2)
            if (set[spec.index(r2, c2)]) {
              const double d2 = double((r - r2) * (r - r2) + (c - c2) * (c - c2));
              best = std::min(best, std::sqrt(d2) * spec.resolution);
            }
        REQUIRE(d.values[spec.index(r, c)] == best);
      }
  }
}

TEST_CASE("distance field is 1-Lipschitz in cell-center distance") {
  Rng rng(5);
  auto spec = make_spec(25, 25);
  std::vector<std::uint8_t> set(spec.size());
  for (auto& b : set) b = rng.uniform() < 0.05;
  set[0] = 1;
  auto d = distance_transform(spec, set);
  const double diag = spec.resolution * std::sqrt(2.0);
  for (int k = 0; k < 2000; ++k) {
    const std::size_t a = rng.index(spec.size()), b = rng.index(spec.size());
    CHECK(std::abs(d.values[a] - d.values[b]) <= distance(spec.center(a), spec.center(b)) + diag + 1e-12);
  }
}

TEST_CASE("signed distance on mask values") {
  std::vector<PolygonFeature> f{{square(0.05, 0.05, 0.55, 0.55), layer::kExcavationMask, 1.0}};
  auto g = rasterize_polygons(f, make_spec(20, 20));
  std::array<MaskValue, 1> dump{MaskValue::PermanentDump};
  auto d = signed_distance(g, dump);
  CHECK(d.values[g.spec().index(3, 3)] == 0.0);
  CHECK(d.values[g.spec().index(3, 10)] == doctest::Approx(0.5));
}

TEST_CASE("volume between layers") {
  auto spec = make_spec(10, 10);
  LayeredGrid g(spec);
  g.add_layer("a", 1.0);
  g.add_layer("b", 0.0);
  std::vector<std::uint8_t> all(spec.size(), 1);
  CHECK(volume_between(g, "a", "a", all) == 0.0);
  CHECK(volume_between(g, "a", "b", all) == doctest::Approx(1.0).epsilon(1e-12));

  Rng rng(3);
  auto a = g.layer("a");
  auto b = g.layer("b");
  for (std::size_t i = 0; i < spec.size(); ++i) {
    a[i] = rng.uniform(-2, 2);
    b[i] = rng.uniform(-2, 2);
  }
  std::vector<std::uint8_t> region(spec.size());
  for (auto& r : region) r = rng.uniform() < 0.5;
  double oracle = 0.0;
  for (std::size_t i = 0; i < spec.size(); ++i)
    if (region[i]) oracle += (a[i] - b[i]) * 0.1 * 0.1;
  CHECK(volume_between(g, "a", "b", region) == doctest::Approx(oracle).epsilon(1e-12));
  CHECK(volume_between(g, "a", "b", region) == -volume_between(g, "b", "a", region));

  a[17] = kNoData;
  region[17] = 1;
  try {
    volume_between(g, "a", "b", region);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InsufficientData);
    CHECK(std::string(e.what()).find("(1,7)") != std::string::npos);
  }
}

TEST_CASE("fill holes") {
  auto spec = make_spec(5, 5);
  LayeredGrid g(spec);
  g.add_layer("h", 2.0);
  auto unchanged = fill_holes(g, "h");
  CHECK(std::equal(unchanged.layer("h").begin(), unchanged.layer("h").end(), g.layer("h").begin()));

  g.layer("h")[spec.index(2, 2)] = kNoData;
  CHECK(fill_holes(g, "h").layer("h")[spec.index(2, 2)] == 2.0);

  LayeredGrid line(make_spec(1, 5));
  line.add_layer("h", 0.0);
  auto h = line.layer("h");
  h[1] = h[2] = h[3] = kNoData;
  h[4] = 1.0;
  auto filled_grid = fill_holes(line, "h");
  auto filled = filled_grid.layer("h");
  CHECK(filled[1] > 0.0);
  CHECK(filled[1] <= filled[2]);
  CHECK(filled[2] <= filled[3]);
  CHECK(filled[3] < 1.0);

  LayeredGrid all(make_spec(3, 3));
  all.add_layer("h", kNoData);
  CHECK_THROWS_AS(fill_holes(all, "h"), Error);
}

TEST_CASE("site files round-trip bit-identically") {
  Rng rng(9);
  std::vector<PolygonFeature> f{{square(0.05, 0.05, 1.05, 1.05), layer::kExcavationMask, 0.0},
                                {square(0.3, 0.2, 1.9, 1.3), layer::kElevation, 1.0 / 3.0},
                                {square(0.3, 0.2, 1.9, 1.3), layer::kTargetElevation, -0.1, true}};
  auto spec = make_spec(17, 23, 0.1, {1.0 / 7.0, -2.0 / 3.0});
  spec.crs = "EPSG:4978 ecef";
  auto g = rasterize_polygons(f, spec);
  g.add_layer("noise");
  for (double& v : g.layer("noise")) v = rng.normal();
  g.layer("noise")[3] = kNoData;
  auto dir = temp_dir("roundtrip");
  write_site(dir, g, f);
  auto back = read_site(dir);
  CHECK(back.grid.spec() == g.spec());
  REQUIRE(back.grid.layer_names() == g.layer_names());
  for (const auto& n : g.layer_names()) {
    auto a = g.layer(n);
    auto b = back.grid.layer(n);
    CHECK(std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
  }
  REQUIRE(back.polygons.size() == f.size());
  CHECK(back.polygons[2].relative);
  CHECK(back.polygons[1].ring == f[1].ring);
  auto dir2 = temp_dir("roundtrip2");
  write_site(dir2, back.grid, back.polygons);
  for (const char* file : {"site.meta", "elevation.f64", "polygons.geojson"}) {
    std::ifstream a(dir / file, std::ios::binary), b(dir2 / file, std::ios::binary);
    std::string sa((std::istreambuf_iterator<char>(a)), {}), sb((std::istreambuf_iterator<char>(b)), {});
    CHECK(sa == sb);
  }
}

TEST_CASE("footprint cell enumeration matches containment test") {
  auto spec = make_spec(60, 60, 0.1, {-3, -3});
  Rng rng(2);
  for (int k = 0; k < 50; ++k) {
    Footprint fp{{rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-kPi, kPi)}, rng.uniform(0.2, 1.5),
                 rng.uniform(0.2, 1.5)};
    std::vector<std::uint8_t> hit(spec.size(), 0);
    for_each_cell_under(spec, fp, [&](std::size_t i) { hit[i] = 1; });
    for (std::size_t i = 0; i < spec.size(); ++i) {
      const Vec2 l = to_local(fp.pose, spec.center(i));
      const bool clear_in = std::abs(l.x) < fp.half_length - 1e-9 && std::abs(l.y) < fp.half_width - 1e-9;
      const bool clear_out = std::abs(l.x) > fp.half_length + 1e-9 || std::abs(l.y) > fp.half_width + 1e-9;
      if (clear_in) REQUIRE(hit[i] == 1);
      if (clear_out) REQUIRE(hit[i] == 0);
    }
  }
}

TEST_CASE("connected components use 8-connectivity") {
  auto spec = make_spec(4, 4);
  std::vector<std::uint8_t> set(spec.size(), 0);
  set[spec.index(0, 0)] = set[spec.index(1, 1)] = 1;
  set[spec.index(3, 3)] = 1;
  int n = 0;
  auto lab = connected_components(spec, set, &n);
  CHECK(n == 2);
  CHECK(lab[spec.index(0, 0)] == lab[spec.index(1, 1)]);
  CHECK(lab[spec.index(2, 2)] == -1);
}
