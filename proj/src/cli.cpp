#include "dpack/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <ostream>

#include "dpack/errors.hpp"
#include "dpack/fixtures.hpp"
#include "dpack/mechanism_io.hpp"
#include "dpack/mesh_io.hpp"
#include "dpack/parallel.hpp"

namespace dpack::cli {

using nlohmann::json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Config

void RunConfig::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0)) throw InvalidInput(std::string(name) + " must be positive");
  };
  positive(base_w, "box width");
  positive(base_d, "box depth");
  if (max_groups < 1) throw InvalidInput("max groups must be positive");
  if (!(target_efficiency > 0.0 && target_efficiency <= 1.0)) {
    throw InvalidInput("target utilization must be in (0, 1]");
  }
  if (beam_width < 1) throw InvalidInput("beam width must be positive");
  if (cell_size) positive(*cell_size, "cell size");
  if (!(angular_step_deg > 0.0 && angular_step_deg <= 45.0)) {
    throw InvalidInput("angular step must be in (0, 45] degrees");
  }
  if (param_steps < 2) throw InvalidInput("param steps must be at least 2");
  if (threads < 1) throw InvalidInput("threads must be positive");
  final_box().validate();
}

SearchCriteria RunConfig::criteria() const {
  SearchCriteria c;
  c.max_groups = max_groups;
  c.target_efficiency = target_efficiency;
  c.beam_width = beam_width;
  c.resolution.angular_step = deg_to_rad(angular_step_deg);
  c.resolution.param_steps = param_steps;
  c.threads = threads;
  return c;
}

BoxSpec RunConfig::final_box() const {
  if (cell_size) return {base_w, base_d, *cell_size};
  return BoxSpec::with_divisor(base_w, base_d, 64.0);
}

std::pair<double, double> parse_box(const std::string& text) {
  const auto x = text.find('x');
  if (x == std::string::npos) throw InvalidInput("box must be given as WxD, got '" + text + "'");
  auto number = [&](std::string_view s) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
      throw InvalidInput("bad number '" + std::string(s) + "' in box '" + text + "'");
    }
    return v;
  };
  const std::string_view all(text);
  const double w = number(all.substr(0, x)), d = number(all.substr(x + 1));
  if (!(w > 0.0 && d > 0.0)) throw InvalidInput("box dimensions must be positive, got '" + text + "'");
  return {w, d};
}

// ---------------------------------------------------------------------------
// JSON helpers

namespace {

json vec_json(const Vec3& v) { return {v.x(), v.y(), v.z()}; }

json quat_json(Quat q) {
  // q and -q are the same rotation; report the one with w >= 0.
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();
  return {q.w(), q.x(), q.y(), q.z()};
}

json config_json(const Configuration& c) {
  json out = json::object();
  for (const auto& [k, v] : c.values) out[k] = v;
  return out;
}

json group_json(const Group& g) {
  return {{"part_ids", g.part_ids},
          {"internal_joints", g.internal_joints},
          {"config", config_json(g.config)},
          {"obb_volume", g.obb.volume()},
          {"material_volume", g.material_volume}};
}

json node_json(const HierarchyNode& n) {
  json groups = json::array();
  for (const auto& g : n.groups) groups.push_back(group_json(g));
  return {{"cut", std::vector<std::string>(n.cut.begin(), n.cut.end())},
          {"parent_cut", std::vector<std::string>(n.parent_cut.begin(), n.parent_cut.end())},
          {"groups", groups},
          {"total_volume", n.total_volume}};
}

json run_config_json(const RunConfig& c) {
  return {{"mechanism", c.mechanism_path.generic_string()},
          {"box", {c.base_w, c.base_d}},
          {"max_groups", c.max_groups},
          {"target_efficiency", c.target_efficiency},
          {"beam_width", c.beam_width},
          {"cell_size", c.final_box().cell_size},
          {"angular_step_deg", c.angular_step_deg},
          {"param_steps", c.param_steps},
          {"dump_hierarchy", c.dump_hierarchy}};
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path.string());
  f << text;
  if (!f) throw Error("failed writing " + path.string());
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

class Stopwatch {
 public:
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

// Maps library errors onto exit codes.
int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const DoesNotFit& e) {
    err << "does not fit: " << e.what() << "\n";
    return kDoesNotFit;
  } catch (const GroupTooLarge& e) {
    err << "group too large: " << e.what() << "\n";
    return kDoesNotFit;
  } catch (const NoAdmissibleConfiguration& e) {
    err << "no admissible configuration: " << e.what() << "\n";
    return kNoAdmissible;
  } catch (const InvalidInput& e) {
    err << "invalid input: " << e.what() << "\n";
    return kInvalidInput;
  } catch (const NotWatertight& e) {
    err << "invalid input: " << e.what() << "\n";
    return kInvalidInput;
  } catch (const DegenerateInput& e) {
    err << "invalid input: " << e.what() << "\n";
    return kInvalidInput;
  } catch (const UnknownJoint& e) {
    err << "invalid input: " << e.what() << "\n";
    return kInvalidInput;
  } catch (const LoopClosureViolation& e) {
    err << "invalid input: " << e.what() << "\n";
    return kInvalidInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
}

// Loads and validates; nullopt after printing violations.
std::optional<Mechanism> load_valid(const RunConfig& config, std::ostream& err) {
  config.validate();
  Mechanism m = load_mechanism(config.mechanism_path);
  const auto violations = validate_mechanism(m);
  if (violations.empty()) return m;
  for (const auto& v : violations) err << v.rule << ": " << v.detail << "\n";
  return std::nullopt;
}

void dump_hierarchy(const fs::path& dir, const SearchResult& result) {
  fs::create_directories(dir);
  for (std::size_t i = 0; i < result.explored.size(); ++i) {
    const auto& e = result.explored[i];
    json j = node_json(e.node);
    j["index"] = i;
    j["level"] = e.level;
    j["trial_efficiency"] = e.efficiency ? json(*e.efficiency) : json(nullptr);
    j["trial_h"] = e.trial_h;
    char name[32];
    std::snprintf(name, sizeof name, "node_%03zu.json", i);
    write_json(dir / name, j);
  }
}

json search_json(const SearchResult& r) {
  return {{"cut", std::vector<std::string>(r.chosen.cut.begin(), r.chosen.cut.end())},
          {"groups", r.chosen.groups.size()},
          {"total_obb_volume", r.chosen.total_volume},
          {"search_efficiency", r.efficiency},
          {"explored_nodes", r.explored.size()}};
}

// The mechanism as one rigid item at its rest configuration.
PackItem rest_item(const Mechanism& m, const OptimizerResolution& res) {
  const PoseMap poses = forward_kinematics(m, rest_configuration(m));
  std::vector<std::string> ids;
  std::vector<TriMesh> meshes;
  for (const auto& p : m.parts) {
    ids.push_back(p.id);
    meshes.push_back(transform_mesh(p.mesh, poses.at(p.id)));
  }
  return make_pack_item(std::move(ids), std::move(meshes), res.obb_options());
}

}  // namespace

// ---------------------------------------------------------------------------
// Commands

int cmd_pack(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    Stopwatch clock;
    json timings;
    const auto m = load_valid(config, err);
    if (!m) return int(kInvalidInput);
    timings["load_s"] = clock.lap();

    const auto criteria = config.criteria();
    const SearchResult result = bfs_disassemble(*m, config.base_w, config.base_d, criteria);
    timings["disassemble_s"] = clock.lap();

    const BoxSpec box = config.final_box();
    PackOptions popts;
    popts.threads = config.threads;
    const auto items = pack_items(*m, result.chosen);
    const PackingLayout layout = pack_all(items, box, popts);
    const double util = utilization(layout);
    timings["pack_s"] = clock.lap();

    json baseline_h = nullptr;
    json baseline_util = nullptr;
    try {
      const PackItem whole = rest_item(*m, criteria.resolution);
      const PackingLayout base_layout = pack_all(std::span(&whole, 1), box, popts);
      baseline_h = base_layout.h();
      baseline_util = utilization(base_layout);
    } catch (const DoesNotFit&) {
      // The undisassembled object may simply not fit the base.
    }
    timings["baseline_s"] = clock.lap();

    fs::create_directories(config.out_dir);
    json placements = json::array();
    std::vector<NamedMesh> scene;
    for (const auto& p : layout.placements()) {
      const Group& g = result.chosen.groups[p.group_index];
      json parts = json::array();
      for (const auto& id : g.part_ids) {
        const RigidTransform world = p.pose() * g.part_poses.at(id);
        parts.push_back({{"id", id},
                         {"quaternion", quat_json(world.rotation())},
                         {"translation", vec_json(world.translation())}});
        scene.push_back({"g" + std::to_string(p.group_index) + "_" + id,
                         transform_mesh(m->part(id).mesh, world)});
      }
      placements.push_back({{"group_index", p.group_index},
                            {"part_ids", g.part_ids},
                            {"quaternion", quat_json(p.rotation)},
                            {"translation", vec_json(p.translation)},
                            {"orientation", p.orientation},
                            {"cell_anchor", {p.cell_anchor.x(), p.cell_anchor.y(), p.cell_anchor.z()}},
                            {"rule", static_cast<int>(p.rule)},
                            {"parts", parts}});
    }
    const json layout_json = {
        {"box", {{"base_w", box.base_w}, {"base_d", box.base_d}, {"cell_size", box.cell_size}}},
        {"h", layout.h()},
        {"utilization", util},
        {"placements", placements}};
    write_json(config.out_dir / "layout.json", layout_json);
    {
      std::ofstream f(config.out_dir / "scene.obj", std::ios::binary);
      write_obj_scene(f, scene);
      std::ofstream b(config.out_dir / "scene_box.obj", std::ios::binary);
      write_box_wireframe(b, Vec3::Zero(), Vec3(box.base_w, box.base_d, layout.h()));
      if (!f || !b) throw Error("failed writing scene files");
    }

    json metrics = search_json(result);
    metrics["config"] = run_config_json(config);
    metrics["group_details"] = json::array();
    for (const auto& g : result.chosen.groups) metrics["group_details"].push_back(group_json(g));
    metrics["h"] = layout.h();
    metrics["utilization"] = util;
    metrics["baseline_h"] = baseline_h;
    metrics["baseline_utilization"] = baseline_util;
    write_json(config.out_dir / "metrics.json", metrics);
    if (config.dump_hierarchy) dump_hierarchy(config.out_dir / "hierarchy", result);
    timings["write_s"] = clock.lap();
    timings["threads"] = config.threads;
    write_json(config.out_dir / "timings.json", timings);

    out << "groups " << result.chosen.groups.size() << ", h " << layout.h() << ", utilization "
        << util << "\n";
    return int(kOk);
  });
}

int cmd_disassemble(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    Stopwatch clock;
    json timings;
    const auto m = load_valid(config, err);
    if (!m) return int(kInvalidInput);
    timings["load_s"] = clock.lap();
    const SearchResult result = bfs_disassemble(*m, config.base_w, config.base_d, config.criteria());
    timings["disassemble_s"] = clock.lap();

    fs::create_directories(config.out_dir);
    json metrics = search_json(result);
    metrics["config"] = run_config_json(config);
    write_json(config.out_dir / "metrics.json", metrics);
    write_json(config.out_dir / "chosen.json", node_json(result.chosen));
    if (config.dump_hierarchy) dump_hierarchy(config.out_dir / "hierarchy", result);
    timings["write_s"] = clock.lap();
    timings["threads"] = config.threads;
    write_json(config.out_dir / "timings.json", timings);

    out << "cut {";
    bool first = true;
    for (const auto& j : result.chosen.cut) {
      out << (first ? "" : ", ") << j;
      first = false;
    }
    out << "}, groups " << result.chosen.groups.size() << ", efficiency " << result.efficiency
        << "\n";
    return int(kOk);
  });
}

int cmd_obb(const fs::path& mesh_path, double angular_step_deg, std::ostream& out,
            std::ostream& err) {
  return guarded(err, [&] {
    if (!(angular_step_deg > 0.0 && angular_step_deg <= 45.0)) {
      throw InvalidInput("angular step must be in (0, 45] degrees");
    }
    const TriMesh mesh = read_obj(mesh_path);
    ObbOptions opts;
    opts.angular_step = deg_to_rad(angular_step_deg);
    const Obb box = min_obb(mesh, opts);
    Quat q = box.orientation;
    if (q.w() < 0.0) q.coeffs() = -q.coeffs();
    char line[256];
    auto clean = [](double v) { return v == 0.0 ? 0.0 : v; };
    std::snprintf(line, sizeof line, "center %.9g %.9g %.9g\n", clean(box.center.x()),
                  clean(box.center.y()), clean(box.center.z()));
    out << line;
    std::snprintf(line, sizeof line, "half_extents %.9g %.9g %.9g\n", box.half_extents.x(),
                  box.half_extents.y(), box.half_extents.z());
    out << line;
    std::snprintf(line, sizeof line, "quaternion %.9g %.9g %.9g %.9g\n", clean(q.w()), clean(q.x()),
                  clean(q.y()), clean(q.z()));
    out << line;
    std::snprintf(line, sizeof line, "volume %.9g\n", box.volume());
    out << line;
    return int(kOk);
  });
}

int cmd_fixture(const std::string& name, const fs::path& dir, std::ostream& out,
                std::ostream& err) {
  return guarded(err, [&] {
    const auto path = save_mechanism(fixtures::by_name(name), dir, name);
    out << path.generic_string() << "\n";
    return int(kOk);
  });
}

// ---------------------------------------------------------------------------
// Front end

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Disassemble mechanisms into groups and pack them into a box"};
  app.set_config("--config", "", "TOML file with option defaults");
  app.fallthrough();
  app.require_subcommand(1);

  RunConfig config;
  config.threads = default_threads();
  std::string box_text;
  std::optional<double> cell;
  std::string fixture_name;
  fs::path input;

  app.add_option("--box", box_text, "Box base as WxD");
  app.add_option("--max-groups", config.max_groups, "Maximum number of groups K");
  app.add_option("--target-util", config.target_efficiency, "Accept a group set at this utilization");
  app.add_option("--beam", config.beam_width, "Nodes kept per hierarchy level");
  app.add_option("--cell", cell, "Voxel size of the final pack (default min(W, D) / 64)");
  app.add_option("--angular-step", config.angular_step_deg, "OBB search step in degrees");
  app.add_option("--param-steps", config.param_steps, "Grid points per joint line search");
  app.add_option("--out", config.out_dir, "Output directory");
  app.add_flag("--dump-hierarchy", config.dump_hierarchy, "Write one JSON file per explored node");
  app.add_option("--threads", config.threads, "Worker threads");

  auto* pack = app.add_subcommand("pack", "Disassemble, pack and write layout artifacts");
  pack->add_option("mechanism", input, "Mechanism JSON")->required();
  auto* dis = app.add_subcommand("disassemble", "Search the disassembly hierarchy only");
  dis->add_option("mechanism", input, "Mechanism JSON")->required();
  auto* obb = app.add_subcommand("obb", "Print the minimum OBB of an OBJ mesh");
  obb->add_option("mesh", input, "OBJ file")->required();
  auto* fix = app.add_subcommand("fixture", "Write a built-in test mechanism");
  fix->add_option("name", fixture_name, "Fixture name")
      ->required()
      ->check(CLI::IsMember(fixtures::names()));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return kInvalidInput;
  }

  if (*obb) return cmd_obb(input, config.angular_step_deg, out, err);
  if (*fix) return cmd_fixture(fixture_name, config.out_dir, out, err);

  return guarded(err, [&] {
    if (box_text.empty()) throw InvalidInput("--box WxD is required");
    std::tie(config.base_w, config.base_d) = parse_box(box_text);
    config.cell_size = cell;
    config.mechanism_path = input;
    return *pack ? cmd_pack(config, out, err) : cmd_disassemble(config, out, err);
  });
}

}  // namespace dpack::cli
