#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "dpack/cli.hpp"
#include "dpack/fixtures.hpp"
#include "dpack/mechanism_io.hpp"
#include "dpack/mesh_io.hpp"
#include "dpack/primitives.hpp"
#include "json.hpp"

using namespace dpack;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Workspace {
  fs::path path;
  explicit Workspace(const std::string& name) : path(fs::temp_directory_path() / ("dpack_cli_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~Workspace() { fs::remove_all(path); }
};

std::ostream& sink() {
  static std::ostringstream s;
  return s;
}

json read_json(const fs::path& p) {
  std::ifstream f(p);
  return json::parse(f);
}

int run_args(std::vector<std::string> args, std::string* err_text = nullptr) {
  args.insert(args.begin(), "dpack");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  if (err_text) *err_text = err.str();
  return code;
}

cli::RunConfig config_for(const fs::path& mech, const fs::path& out, double w, double d) {
  cli::RunConfig c;
  c.mechanism_path = mech;
  c.out_dir = out;
  c.base_w = w;
  c.base_d = d;
  return c;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("box argument parsing") {
  CHECK(cli::parse_box("2x3") == std::pair<double, double>{2.0, 3.0});
  CHECK(cli::parse_box("0.5x1.25") == std::pair<double, double>{0.5, 1.25});
  for (const char* bad : {"", "2", "2x", "x3", "2x3x4", "-1x2", "0x1", "ax b", "2X3"}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(cli::parse_box(bad), InvalidInput);
  }
}

TEST_CASE("run config validation") {
  cli::RunConfig c;
  CHECK_NOTHROW(c.validate());
  CHECK(c.final_box().cell_size == doctest::Approx(1.0 / 64));
  c.cell_size = 0.1;
  CHECK(c.final_box().cell_size == 0.1);
  c.target_efficiency = 0.0;
  CHECK_THROWS_AS(c.validate(), InvalidInput);
  c = {};
  c.threads = 0;
  CHECK_THROWS_AS(c.validate(), InvalidInput);
}

TEST_CASE("single cube in a 2x2 base") {
  Workspace ws("cube");
  REQUIRE(cli::cmd_fixture("single_cube", ws.path, sink(), sink()) == 0);
  auto c = config_for(ws.path / "single_cube.json", ws.path / "out", 2.0, 2.0);
  std::ostringstream out, err;
  REQUIRE(cli::cmd_pack(c, out, err) == cli::kOk);
  const auto layout = read_json(ws.path / "out" / "layout.json");
  CHECK(layout["h"].get<double>() == doctest::Approx(1.0));
  CHECK(layout["utilization"].get<double>() == doctest::Approx(0.25));
  REQUIRE(layout["placements"].size() == 1);
  CHECK(layout["placements"][0]["cell_anchor"] == json::array({0, 0, 0}));
  CHECK(layout["placements"][0]["quaternion"][0].get<double>() >= 0.0);
  const auto metrics = read_json(ws.path / "out" / "metrics.json");
  CHECK(metrics["baseline_h"].get<double>() == doctest::Approx(1.0));
  CHECK_FALSE(metrics.contains("threads"));
  CHECK(fs::exists(ws.path / "out" / "scene.obj"));
  CHECK(fs::exists(ws.path / "out" / "scene_box.obj"));
  CHECK(fs::exists(ws.path / "out" / "timings.json"));
  CHECK_FALSE(fs::exists(ws.path / "out" / "hierarchy"));
}

TEST_CASE("disconnected mechanism is invalid input") {
  Workspace ws("disconnected");
  auto m = fixtures::two_bar();
  m.joints.clear();
  const auto path = save_mechanism(m, ws.path, "loose");
  std::ostringstream out, err;
  CHECK(cli::cmd_pack(config_for(path, ws.path / "out", 3, 3), out, err) == cli::kInvalidInput);
  CHECK(err.str().find("disconnected graph") != std::string::npos);
}

TEST_CASE("empty mesh file is invalid input") {
  Workspace ws("emptymesh");
  std::ofstream(ws.path / "empty.obj").close();
  std::ofstream(ws.path / "m.json")
      << R"({"parts":[{"id":"a","mesh_path":"empty.obj"}],"driving_part":"a"})";
  std::ostringstream out, err;
  CHECK(cli::cmd_pack(config_for(ws.path / "m.json", ws.path / "out", 1, 1), out, err) ==
        cli::kInvalidInput);
  std::string e;
  CHECK(run_args({"obb", (ws.path / "empty.obj").string()}, &e) == cli::kInvalidInput);
}

TEST_CASE("one group keeps the cut empty") {
  Workspace ws("k1");
  REQUIRE(cli::cmd_fixture("two_bar", ws.path, sink(), sink()) == 0);
  auto c = config_for(ws.path / "two_bar.json", ws.path / "out", 1.5, 1.5);
  c.max_groups = 1;
  c.dump_hierarchy = true;
  std::ostringstream out, err;
  REQUIRE(cli::cmd_disassemble(c, out, err) == cli::kOk);
  const auto metrics = read_json(ws.path / "out" / "metrics.json");
  CHECK(metrics["cut"].empty());
  CHECK(metrics["groups"] == 1);
  CHECK(fs::exists(ws.path / "out" / "chosen.json"));
  CHECK(fs::exists(ws.path / "out" / "hierarchy" / "node_000.json"));
}

TEST_CASE("too small a base does not fit") {
  Workspace ws("nofit");
  REQUIRE(cli::cmd_fixture("single_cube", ws.path, sink(), sink()) == 0);
  std::ostringstream out, err;
  CHECK(cli::cmd_pack(config_for(ws.path / "single_cube.json", ws.path / "out", 0.5, 0.5), out, err) ==
        cli::kDoesNotFit);
}

TEST_CASE("corner hinge has no admissible configuration") {
  Workspace ws("corner");
  REQUIRE(cli::cmd_fixture("corner_hinge", ws.path, sink(), sink()) == 0);
  std::ostringstream out, err;
  CHECK(cli::cmd_pack(config_for(ws.path / "corner_hinge.json", ws.path / "out", 2, 2), out, err) ==
        cli::kNoAdmissible);
}

TEST_CASE("obb command prints the box") {
  Workspace ws("obb");
  write_obj(ws.path / "box.obj", make_box(Vec3::Zero(), Vec3(2, 1, 1)));
  std::ostringstream out, err;
  REQUIRE(cli::cmd_obb(ws.path / "box.obj", 6.0, out, err) == 0);
  const std::string s = out.str();
  CHECK(s.find("center") != std::string::npos);
  CHECK(s.find("half_extents") != std::string::npos);
  CHECK(s.find("volume 2") != std::string::npos);
}

TEST_CASE("command line flags and config file") {
  Workspace ws("flags");
  CHECK(run_args({"fixture", "two_bar", "--out", ws.path.string()}) == 0);
  CHECK(fs::exists(ws.path / "two_bar.json"));
  CHECK(run_args({"fixture", "bogus", "--out", ws.path.string()}) == cli::kInvalidInput);
  CHECK(run_args({"pack"}) == cli::kInvalidInput);
  CHECK(run_args({"pack", (ws.path / "two_bar.json").string(), "--box", "3"}) == cli::kInvalidInput);
  CHECK(run_args({"pack", (ws.path / "two_bar.json").string(), "--box", "3x3", "--target-util", "2"}) ==
        cli::kInvalidInput);

  std::ofstream(ws.path / "run.toml") << "box = \"3x3\"\nmax-groups = 2\nthreads = 2\n";
  const fs::path out = ws.path / "out";
  CHECK(run_args({"pack", (ws.path / "two_bar.json").string(), "--config", (ws.path / "run.toml").string(),
                  "--out", out.string()}) == 0);
  const auto metrics = read_json(out / "metrics.json");
  CHECK(metrics["config"]["max_groups"] == 2);
  CHECK(metrics["config"]["box"] == json::array({3.0, 3.0}));
}

}  // TEST_SUITE
