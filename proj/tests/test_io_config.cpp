#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include <gtest/gtest.h>

#include <polariton/config.hpp>
#include <polariton/io.hpp>

using namespace pol;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("polariton_io_" + name);
  fs::remove_all(d);
  fs::remove_all(d.string() + ".partial");
  return d;
}

json groups_config(const std::string& kind) {
  return {{"kind", kind},
          {"params", {{"mode", "groups"}, {"fom", 40}, {"omega_over_g", 0.05}, {"omega_over_delta", 0.05}}},
          {"k_bar", {0.98}}};
}

}  // namespace

TEST(Io, DoubleFormattingRoundTrips) {
  for (double v : {0.1, -1.0 / 3, 6.02214076e23, 2.2250738585072014e-308, 0.0}) EXPECT_EQ(std::stod(io::fmt_double(v)), v);
  EXPECT_EQ(io::fmt_double(0.5), "0.5");
  EXPECT_EQ(io::fmt_double(std::nan("")), "nan");
}

TEST(Io, Sha256KnownVector) {
  EXPECT_EQ(io::sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(io::sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST(Io, GzipIsDeterministicAndRoundTrips) {
  std::string text;
  for (int i = 0; i < 1000; ++i) text += std::to_string(i * i) + ",";
  const auto a = io::gzip(text), b = io::gzip(text);
  EXPECT_EQ(a, b);
  EXPECT_LT(a.size(), text.size());
  EXPECT_EQ(static_cast<unsigned char>(a[0]), 0x1f);
  EXPECT_EQ(a.substr(4, 4), std::string(4, '\0'));  // zero mtime
  EXPECT_EQ(io::gunzip(a), text);
  EXPECT_THROW(io::gunzip(a.substr(0, 10) + "garbage"), Error);
}

TEST(Io, CsvTableRoundTrip) {
  io::CsvTable t({"a", "b", "label"});
  t.add_cells({"1", "2.5", "wkb"});
  EXPECT_THROW(t.add({1.0}), Error);
  EXPECT_EQ(t.str(), "a,b,label\n1,2.5,wkb\n");
  io::CsvTable u({"x", "y"});
  u.add({0.25, -3});
  std::vector<std::string> head;
  const auto rows = io::parse_csv(u.str(), &head);
  EXPECT_EQ(head, (std::vector<std::string>{"x", "y"}));
  EXPECT_EQ(rows, (std::vector<std::vector<double>>{{0.25, -3}}));
  EXPECT_THROW(io::parse_csv(""), Error);
  EXPECT_THROW(io::parse_csv_cells("a,b\n1\n"), Error);
}

TEST(Io, OutputSetCommitsWithManifest) {
  const auto dir = scratch("commit");
  {
    io::OutputSet out(dir);
    out.write("a.txt", "hello");
    out.write_json("b.json", {{"x", 1}});
    EXPECT_FALSE(fs::exists(dir));
    out.commit();
  }
  EXPECT_FALSE(fs::exists(dir.string() + ".partial"));
  const auto m = json::parse(io::read_file(dir / "manifest.json"));
  ASSERT_EQ(m.size(), 2u);
  EXPECT_EQ(m[0]["file"], "a.txt");
  EXPECT_EQ(m[0]["bytes"], 5);
  EXPECT_EQ(m[0]["sha256"], io::sha256_hex("hello"));
  EXPECT_EQ(m[0]["schema_version"], io::kSchemaVersion);
  EXPECT_TRUE(io::verify_manifest(dir).empty());
  fs::resize_file(dir / "b.json", 3);
  EXPECT_EQ(io::verify_manifest(dir), std::vector<std::string>{"b.json"});
  fs::remove(dir / "a.txt");
  EXPECT_EQ(io::verify_manifest(dir).size(), 2u);
  fs::remove_all(dir);
}

TEST(Io, UncommittedOutputLeavesNothing) {
  const auto dir = scratch("abort");
  {
    io::OutputSet out(dir);
    out.write("a.txt", "partial");
  }
  EXPECT_FALSE(fs::exists(dir));
  EXPECT_FALSE(fs::exists(dir.string() + ".partial"));
}

TEST(Config, ParsesGroups) {
  auto j = groups_config("dispersion");
  j["k_bar"] = {{"from", 0.9}, {"to", 0.99}, {"count", 4}};
  j["branches"] = {2, 3};
  const auto c = parse_config(j);
  EXPECT_EQ(c.kind, ScenarioKind::dispersion);
  ASSERT_EQ(c.k_bar.size(), 4u);
  EXPECT_NEAR(c.k_bar[1], 0.93, 1e-15);
  EXPECT_EQ(c.branches, (std::vector<int>{2, 3}));
  const auto p = normalized_params(c);
  EXPECT_NEAR(p.figure_of_merit(), 40, 1e-12);
  EXPECT_NEAR(p.delta, 1, 0);
}

TEST(Config, RejectsMalformedInput) {
  auto bad = [](json j) { EXPECT_THROW(parse_config(j), ConfigError) << j.dump(); };
  auto j = groups_config("dispersion");
  j["colour"] = 1;
  bad(j);
  j = groups_config("spectrum");
  bad(j);
  j = groups_config("dispersion");
  j.erase("k_bar");
  bad(j);
  j = groups_config("dispersion");
  j["k_bar"] = {1.2};
  bad(j);
  j = groups_config("dispersion");
  j["params"]["fom"] = "forty";
  bad(j);
  j = groups_config("dispersion");
  j["branches"] = {0};
  bad(j);
  j = groups_config("evolve");
  bad(j);
  j["evolution"] = {{"t_final", 1}, {"resolution", 2}};
  bad(j);
  j["evolution"] = {{"t_final", 1}, {"t_final_unit", "fortnights"}};
  bad(j);
  j["evolution"] = {{"t_final", 1}, {"fit_window", {0.5, 0.2}}};
  bad(j);
  j = groups_config("potential_profile");
  j["k_bar"] = {0.9, 0.95};
  bad(j);
  bad(json::array());
}

TEST(Config, PhysicalUnits) {
  json j = {{"kind", "evolve"},
            {"params",
             {{"mode", "physical"},
              {"units", {{"frequency", "MHz_2pi"}, {"length", "um"}}},
              {"g", 17000},
              {"omega_c", 1.5},
              {"delta", 30},
              {"gamma", 3},
              {"gamma_r", 0.1},
              {"r_b", 25}}},
            {"evolution", {{"t_final", 10}}}};
  const auto c = parse_config(j);
  EXPECT_NEAR(c.params.physical.g, 2 * std::numbers::pi * 17000, 1e-9);
  EXPECT_NEAR(c.params.physical.rb0(), 25, 1e-9);
  warnings_enabled() = false;
  const auto p = normalized_params(c);
  warnings_enabled() = true;
  const double fom = std::pow(2 * std::numbers::pi * 17000, 2) * 25 / (kSpeedOfLight * 2 * std::numbers::pi * 30);
  EXPECT_NEAR(p.figure_of_merit(), fom, 1e-9 * fom);
  EXPECT_NEAR(fom, 5.0, 0.1);
  EXPECT_NEAR(p.gamma, 0.1, 1e-12);
  EXPECT_NEAR(p.omega_c, 0.05, 1e-12);

  j["params"]["units"]["length"] = "m";
  j["params"]["r_b"] = 25e-6;
  EXPECT_NEAR(parse_config(j).params.rb_um, 25, 1e-9);
  j["params"]["units"]["frequency"] = "Hz";
  EXPECT_THROW(parse_config(j), ConfigError);
}

TEST(Config, ZetaOnlyForEvolution) {
  json params = {{"mode", "physical"}, {"g", 17000}, {"omega_c", 1.5}, {"delta", 30}, {"r_b", 25}, {"zeta", 1e3}};
  json j = {{"kind", "dispersion"}, {"params", params}, {"k_bar", {0.9}}};
  EXPECT_THROW(parse_config(j), ConfigError);
  j["params"]["zeta"] = 0.5;
  j["kind"] = "evolve";
  j["evolution"] = {{"t_final", 1}};
  j.erase("k_bar");
  EXPECT_THROW(parse_config(j), ConfigError);
}

TEST(Config, ZetaScalingKeepsGroupsButRaisesVg) {
  json params = {{"mode", "physical"}, {"g", 17000}, {"omega_c", 1.5}, {"delta", 30},
                 {"gamma", 3},         {"gamma_r", 0.1}, {"r_b", 25},    {"zeta", 1.2e7}};
  json j = {{"kind", "evolve"}, {"params", params}, {"evolution", {{"t_final", 10}}}};
  warnings_enabled() = false;
  const auto scaled = normalized_params(parse_config(j));
  j["params"]["zeta"] = 1;
  const auto plain = normalized_params(parse_config(j));
  warnings_enabled() = true;
  EXPECT_NEAR(scaled.figure_of_merit(), plain.figure_of_merit(), 1e-9);
  EXPECT_NEAR(scaled.vg() / scaled.c, 1.2e7 * plain.vg() / plain.c, 1e-9 * scaled.vg() / scaled.c);
}

TEST(Config, PhysicalSummaryReconstructsGroups) {
  auto j = groups_config("dispersion");
  j["params"]["r_b"] = {{"value", 25}, {"unit", "um"}};
  const auto c = parse_config(j);
  const auto s = physical_summary(c);
  const double g = s["g"], d = s["delta"], om = s["omega_c"], rb = s["r_b"];
  EXPECT_NEAR(g * g * rb / (kSpeedOfLight * d), 40, 1e-9);
  EXPECT_NEAR(om / g, 0.05, 1e-12);
  EXPECT_NEAR(om / d, 0.05, 1e-12);
  EXPECT_NEAR(std::pow(double(s["c6"]) / (2 * om * om / d), 1.0 / 6.0), 25, 1e-9);
}

TEST(Config, KindsAndSubcommands) {
  for (auto k : {ScenarioKind::dispersion, ScenarioKind::wkb_map, ScenarioKind::decompose, ScenarioKind::evolve,
                 ScenarioKind::potential_profile})
    EXPECT_EQ(parse_kind(kind_name(k)), k);
  EXPECT_STREQ(subcommand_of(ScenarioKind::wkb_map), "wkb");
  EXPECT_STREQ(subcommand_of(ScenarioKind::potential_profile), "potential");
}
