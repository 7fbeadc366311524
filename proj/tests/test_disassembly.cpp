#include "doctest.h"

#include "dpack/disassembly.hpp"
#include "dpack/fixtures.hpp"
#include "dpack/primitives.hpp"

using namespace dpack;

namespace {

double posed_obb_volume(const Mechanism& m, const Configuration& c, double step_deg) {
  const auto poses = forward_kinematics(m, c);
  std::vector<Vec3> pts, tmp;
  for (const auto& p : m.parts) {
    transform_points(p.mesh.vertices, poses.at(p.id), tmp);
    pts.insert(pts.end(), tmp.begin(), tmp.end());
  }
  ObbOptions o;
  o.angular_step = deg_to_rad(step_deg);
  return min_obb(pts, o).volume();
}

std::vector<std::set<std::string>> cuts_of(const std::vector<HierarchyNode>& nodes) {
  std::vector<std::set<std::string>> out;
  for (const auto& n : nodes) out.push_back(n.cut);
  return out;
}

}  // namespace

TEST_SUITE("disassembly") {

TEST_CASE("a single part is its own group") {
  const auto m = fixtures::single_cube();
  const auto root = root_node(m);
  REQUIRE(root.groups.size() == 1);
  CHECK(root.groups[0].config.values.empty());
  CHECK(root.groups[0].obb.volume() == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(root.groups[0].material_volume == doctest::Approx(1.0));
  CHECK(expand_node(m, root).empty());
}

TEST_CASE("slider stays collapsed") {
  const auto m = fixtures::slider();
  const auto root = root_node(m);
  REQUIRE(root.groups.size() == 1);
  // Any extension only grows the box; check against a 0.01 sweep.
  double best = std::numeric_limits<double>::infinity();
  for (double d = 0.0; d <= 1.0 + 1e-12; d += 0.01)
    best = std::min(best, posed_obb_volume(m, {{{"slide", d}}}, 6.0));
  CHECK(best == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(root.groups[0].config.at("slide") == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(root.groups[0].obb.volume() <= best * (1 + 1e-6));
}

TEST_CASE("two bar folds onto itself") {
  const auto m = fixtures::two_bar();
  const auto root = root_node(m);
  REQUIRE(root.groups.size() == 1);
  double best = std::numeric_limits<double>::infinity();
  for (int deg = 0; deg <= 180; ++deg) {
    const Configuration c{{{"hinge", std::min(kPi, deg_to_rad(deg))}}};
    if (!check_slippable(m, c).empty()) continue;
    best = std::min(best, posed_obb_volume(m, c, 6.0));
  }
  CHECK(root.groups[0].obb.volume() <= best * 1.01);
  CHECK(root.groups[0].obb.volume() == doctest::Approx(0.08).epsilon(0.02));
}

TEST_CASE("every optimized group is admissible") {
  for (const auto& name : {"two_bar", "zigzag3", "gear_chain4", "slider"}) {
    CAPTURE(name);
    const auto m = fixtures::by_name(name);
    for (const auto& n : expand_node(m, root_node(m))) {
      for (const auto& g : n.groups) {
        const auto sub = sub_mechanism(m, g.skeleton());
        CHECK(check_slippable(sub, g.config).empty());
      }
    }
  }
}

TEST_CASE("corner hinge has no admissible start") {
  CHECK_THROWS_AS(root_node(fixtures::corner_hinge()), NoAdmissibleConfiguration);
}

TEST_CASE("children of the root") {
  const auto m = fixtures::zigzag3();
  const auto root = root_node(m);
  CHECK(root.uncut_joints(m) == std::vector<std::string>{"j1", "j2"});
  const auto kids = expand_node(m, root);
  REQUIRE(kids.size() == 2);
  for (std::size_t i = 1; i < kids.size(); ++i)
    CHECK(kids[i - 1].total_volume <= kids[i].total_volume);
  for (const auto& k : kids) {
    CHECK(k.groups.size() == 2);
    CHECK(k.parent_cut.empty());
  }
  const auto grand = expand_node(m, kids[0]);
  REQUIRE(grand.size() == 1);
  CHECK(grand[0].groups.size() == 3);
  CHECK(grand[0].cut == std::set<std::string>{"j1", "j2"});
}

TEST_CASE("joint cost is the volume removed") {
  const auto m = fixtures::zigzag3();
  const auto root = root_node(m);
  for (const auto& j : {"j1", "j2"}) {
    const auto child = cut_joint(m, root, j);
    CHECK(joint_cost(m, root, j) == doctest::Approx(root.total_volume - child.total_volume));
  }
  CHECK_THROWS_AS(cut_joint(m, root, "nope"), UnknownJoint);
  CHECK_THROWS_AS(cut_joint(m, cut_joint(m, root, "j1"), "j1"), InvalidInput);
}

TEST_CASE("material volume is conserved across cuts") {
  const auto m = fixtures::gear_chain4();
  const double total = total_material_volume(m);
  const auto root = root_node(m);
  std::vector<HierarchyNode> frontier{root};
  while (!frontier.empty()) {
    const auto n = frontier.back();
    frontier.pop_back();
    double sum = 0.0;
    std::size_t parts = 0;
    for (const auto& g : n.groups) {
      sum += g.material_volume;
      parts += g.part_ids.size();
    }
    CHECK(sum == doctest::Approx(total).epsilon(1e-12));
    CHECK(parts == m.parts.size());
    if (n.cut.size() < 2)
      for (auto& k : expand_node(m, n)) frontier.push_back(std::move(k));
  }
}

TEST_CASE("one group allowed means the root") {
  SearchCriteria c;
  c.max_groups = 1;
  const auto r = bfs_disassemble(fixtures::zigzag3(), 1.5, 1.5, c);
  CHECK(r.chosen.cut.empty());
  CHECK(r.explored.size() == 1);
}

TEST_CASE("a zero target stops at the first packable node") {
  SearchCriteria c;
  c.target_efficiency = 0.0;
  const auto r = bfs_disassemble(fixtures::two_bar(), 3.0, 3.0, c);
  CHECK(r.chosen.cut.empty());
  CHECK(r.explored.size() == 1);
}

TEST_CASE("search is deterministic across thread counts") {
  SearchCriteria c;
  c.max_groups = 3;
  c.target_efficiency = 1.0;
  const auto m = fixtures::gear_chain4();
  const auto a = bfs_disassemble(m, 1.5, 1.5, c);
  c.threads = 4;
  const auto b = bfs_disassemble(m, 1.5, 1.5, c);
  CHECK(a.chosen.cut == b.chosen.cut);
  CHECK(a.efficiency == b.efficiency);
  REQUIRE(a.explored.size() == b.explored.size());
  for (std::size_t i = 0; i < a.explored.size(); ++i) {
    CHECK(a.explored[i].node.cut == b.explored[i].node.cut);
    CHECK(a.explored[i].node.total_volume == b.explored[i].node.total_volume);
  }
}

TEST_CASE("explored levels respect the group bound and beam") {
  SearchCriteria c;
  c.max_groups = 2;
  c.beam_width = 1;
  c.target_efficiency = 1.0;
  const auto r = bfs_disassemble(fixtures::gear_chain4(), 1.5, 1.5, c);
  std::map<int, int> per_level;
  for (const auto& e : r.explored) {
    CHECK(static_cast<int>(e.node.groups.size()) <= 2);
    ++per_level[e.level];
  }
  for (const auto& [level, count] : per_level) CHECK(count <= 1);
}

TEST_CASE("nothing packable raises group too large") {
  SearchCriteria c;
  c.max_groups = 1;
  CHECK_THROWS_AS(bfs_disassemble(fixtures::two_bar(), 0.1, 0.1, c), GroupTooLarge);
}

TEST_CASE("box fixtures never gain volume by cutting") {
  // Cutting frees joints; with rigid box parts the optimum can only shrink
  // or stay, since each piece alone is no larger than its share of the whole.
  for (const auto& name : {"two_bar", "zigzag3", "slider"}) {
    CAPTURE(name);
    const auto m = fixtures::by_name(name);
    const auto root = root_node(m);
    for (const auto& k : expand_node(m, root)) CHECK(k.total_volume <= root.total_volume * (1 + 1e-6));
  }
}

TEST_CASE("criteria validation") {
  SearchCriteria c;
  c.max_groups = 0;
  CHECK_THROWS_AS(c.validate(), InvalidInput);
  c = {};
  c.target_efficiency = 1.5;
  CHECK_THROWS_AS(c.validate(), InvalidInput);
  c = {};
  c.beam_width = 0;
  CHECK_THROWS_AS(c.validate(), InvalidInput);
  OptimizerResolution r;
  r.param_steps = 1;
  CHECK_THROWS_AS(r.validate(), InvalidInput);
}

}  // TEST_SUITE
