#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "capdim/grassmann.hpp"
#include "capdim/pointset.hpp"
#include "capdim/profiles.hpp"
#include "capdim/serialize.hpp"

using namespace capdim;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("csv round trip preserves coordinates exactly") {
  Rng rng(1);
  const auto e = random_box_sample(3, 100, rng);
  const auto path = temp_file("capdim_pts.csv");
  save_points(e, path.string(), "csv");
  const auto back = load_points(path.string());
  REQUIRE(back.dim == 3);
  REQUIRE(back.coords == e.coords);
  std::filesystem::remove(path);
}

TEST_CASE("json round trip preserves coordinates exactly") {
  const auto line = generate_cantor(1.0 / 3.0, 6);
  const auto e = product_set(line, line);
  const auto path = temp_file("capdim_pts.json");
  save_points(e, path.string(), "json");
  const auto back = load_points(path.string());
  REQUIRE(back.dim == 2);
  REQUIRE(back.coords == e.coords);
  std::filesystem::remove(path);
}

TEST_CASE("format dispatch follows the file suffix") {
  const auto e = make_segment(5);
  const auto jpath = temp_file("capdim_suffix.json");
  save_points(e, jpath.string(), "json");
  const std::string text = slurp(jpath);
  REQUIRE(text.find("\"dim\"") != std::string::npos);
  std::filesystem::remove(jpath);
}

TEST_CASE("ragged csv rows are rejected") {
  const auto path = temp_file("capdim_ragged.csv");
  std::ofstream out(path);
  out << "0.1,0.2\n0.3\n";
  out.close();
  REQUIRE_THROWS_AS(load_points(path.string()), invalid_parameter);
  std::filesystem::remove(path);
}

TEST_CASE("seventeen-digit formatting survives a parse round trip") {
  const double vals[] = {1.0 / 3.0, 0.1, 6.02214076e23, 2.2250738585072014e-308};
  for (double v : vals) {
    const std::string s = format_double(v);
    REQUIRE(std::stod(s) == v);
  }
}

TEST_CASE("scaling fit serializes its slopes") {
  std::vector<double> grid = {0.5, 0.25, 0.125, 0.0625, 0.03125};
  std::vector<double> values;
  for (double r : grid) values.push_back(std::pow(r, -0.6));
  const auto fit = fit_scaling(grid, values, 3);
  const json j = to_json(fit);
  REQUIRE(j.contains("slope_ols"));
  REQUIRE(j["slope_ols"].get<double>() == Catch::Approx(0.6).margin(1e-10));
  REQUIRE(j["slope_lower"].get<double>() <= j["slope_upper"].get<double>());
}

TEST_CASE("profile csv has a header and one row per exponent") {
  ProfileCurve curve;
  curve.dim = 1;
  curve.s_grid = {0.5, 1.0};
  std::vector<double> grid = {0.5, 0.25, 0.125, 0.0625, 0.03125};
  for (double s : curve.s_grid) {
    std::vector<double> values;
    for (double r : grid) values.push_back(std::pow(r, -std::min(s, 0.8)));
    curve.fits.push_back(fit_scaling(grid, values, 3));
  }
  const auto path = temp_file("capdim_profile.csv");
  {
    std::ofstream os(path);
    save_profile_csv(curve, os);
  }
  const std::string text = slurp(path);
  REQUIRE(text.rfind("s,", 0) == 0);
  std::size_t lines = 0;
  for (char c : text)
    if (c == '\n') ++lines;
  REQUIRE(lines == 3);
  std::filesystem::remove(path);
}

TEST_CASE("unknown formats and missing files raise errors") {
  const auto e = make_segment(4);
  REQUIRE_THROWS_AS(save_points(e, "/tmp/capdim_bad.xyz", "parquet"),
                    invalid_parameter);
  REQUIRE_THROWS_AS(load_points("/tmp/definitely_not_here_9921.csv"),
                    invalid_parameter);
}

TEST_CASE("subspace json round trip") {
  const auto v = sample_subspace(4, 2, 88);
  const json j = to_json(v);
  const auto back = subspace_from_json(j);
  REQUIRE(back.n == v.n);
  REQUIRE(back.m == v.m);
  REQUIRE(back.basis == v.basis);
}
