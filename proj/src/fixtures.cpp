#include "dpack/fixtures.hpp"

#include "dpack/errors.hpp"
#include "dpack/primitives.hpp"

namespace dpack::fixtures {

namespace {

Part part(std::string id, TriMesh mesh) { return {std::move(id), std::move(mesh), {}}; }

Joint revolute(std::string id, std::string a, std::string b, const Vec3& anchor,
               const Vec3& axis, double lo, double hi) {
  Joint j;
  j.id = std::move(id);
  j.kind = JointKind::Revolute;
  j.part_a = std::move(a);
  j.part_b = std::move(b);
  j.anchor = anchor;
  j.axis = axis;
  j.lo = lo;
  j.hi = hi;
  return j;
}

}  // namespace

Mechanism two_bar() {
  Mechanism m;
  m.parts.push_back(part("A", make_box({0, -0.1, -0.1}, {1, 0.1, 0.1})));
  m.parts.push_back(part("B", make_box({1, -0.1, 0.1}, {2, 0.1, 0.3})));
  m.joints.push_back(revolute("hinge", "A", "B", {1, 0, 0}, Vec3::UnitZ(), 0.0, kPi));
  m.driving_part = "A";
  return m;
}

Mechanism corner_hinge() {
  Mechanism m;
  m.parts.push_back(part("A", make_box({0, 0, 0}, {1, 0.2, 0.2})));
  m.parts.push_back(part("B", make_box({0, 0, 0}, {1, 0.2, 0.2})));
  m.joints.push_back(revolute("hinge", "A", "B", {0, 0, 0}, Vec3::UnitZ(), 0.0, kPi / 2));
  m.driving_part = "A";
  return m;
}

Mechanism zigzag3() {
  Mechanism m;
  m.parts.push_back(part("A", make_box({0, -0.1, -0.1}, {1, 0.1, 0.1})));
  m.parts.push_back(part("B", make_box({0.8, -0.1, 0.1}, {1.0, 0.1, 1.1})));
  m.parts.push_back(part("C", make_box({0.8, -0.1, 1.1}, {1.8, 0.1, 1.3})));
  Joint weld;
  weld.id = "j1";
  weld.kind = JointKind::Fixed;
  weld.part_a = "A";
  weld.part_b = "B";
  weld.anchor = {0.9, 0, 0.1};
  m.joints.push_back(weld);
  m.joints.push_back(revolute("j2", "B", "C", {0.9, 0, 1.1}, Vec3::UnitZ(), 0.0, kPi));
  m.driving_part = "A";
  return m;
}

Mechanism gear_chain4() {
  const Vec3 g1(1.26, 0, 0.1), g2(1.77, 0, 0.1);
  Mechanism m;
  m.parts.push_back(part("A", make_box({0, -0.1, 0}, {1, 0.1, 0.2})));
  m.parts.push_back(part("G1", make_prism(8, 0.25, 0.2, g1)));
  m.parts.push_back(part("G2", make_prism(8, 0.25, 0.2, g2)));
  m.parts.push_back(part("B", make_box({2.02, -0.1, 0.2}, {3.02, 0.1, 0.4})));
  m.joints.push_back(revolute("j1", "G1", "A", {g1.x(), 0, 0}, Vec3::UnitZ(), -kPi / 2, kPi / 2));
  Joint gear;
  gear.id = "j2";
  gear.kind = JointKind::Gear2Gear;
  gear.part_a = "G1";
  gear.part_b = "G2";
  gear.anchor = {g1.x(), 0, 0};
  gear.axis = Vec3::UnitZ();
  gear.anchor_b = {g2.x(), 0, 0};
  gear.axis_b = Vec3::UnitZ();
  gear.ratio = 1.0;
  gear.lo = -kPi;
  gear.hi = kPi;
  m.joints.push_back(gear);
  m.joints.push_back(revolute("j3", "G2", "B", {2.02, 0, 0}, Vec3::UnitZ(), 0.0, kPi));
  m.driving_part = "G1";
  return m;
}

Mechanism slider() {
  Mechanism m;
  m.parts.push_back(part("A", make_box({0, 0, 0}, {1, 1, 1})));
  m.parts.push_back(part("B", make_box({0, 0, 1}, {1, 1, 2})));
  Joint j;
  j.id = "slide";
  j.kind = JointKind::PointOnLine;
  j.part_a = "A";
  j.part_b = "B";
  j.anchor = {0.5, 0.5, 1};
  j.axis = Vec3::UnitZ();
  j.lo = 0.0;
  j.hi = 1.0;
  m.joints.push_back(j);
  m.driving_part = "A";
  return m;
}

Mechanism single_cube() {
  Mechanism m;
  m.parts.push_back(part("cube", make_box({0, 0, 0}, {1, 1, 1})));
  m.driving_part = "cube";
  return m;
}

std::vector<std::string> names() {
  return {"two_bar", "corner_hinge", "zigzag3", "gear_chain4", "slider", "single_cube"};
}

Mechanism by_name(const std::string& name) {
  if (name == "two_bar") return two_bar();
  if (name == "corner_hinge") return corner_hinge();
  if (name == "zigzag3") return zigzag3();
  if (name == "gear_chain4") return gear_chain4();
  if (name == "slider") return slider();
  if (name == "single_cube") return single_cube();
  throw InvalidInput("unknown fixture '" + name + "'");
}

}  // namespace dpack::fixtures
