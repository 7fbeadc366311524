#include "dpack/mechanism.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <sstream>

namespace dpack {

std::string_view to_string(JointKind kind) {
  switch (kind) {
    case JointKind::Fixed:
      return "Fixed";
    case JointKind::Revolute:
      return "Revolute";
    case JointKind::Gear2Gear:
      return "Gear2Gear";
    case JointKind::PointOnLine:
      return "PointOnLine";
  }
  return "?";
}

std::optional<JointKind> parse_joint_kind(std::string_view name) {
  for (auto k : {JointKind::Fixed, JointKind::Revolute, JointKind::Gear2Gear,
                 JointKind::PointOnLine}) {
    if (name == to_string(k)) return k;
  }
  return std::nullopt;
}

RigidTransform Joint::relative_motion(double value) const {
  switch (kind) {
    case JointKind::Fixed:
      return RigidTransform::identity();
    case JointKind::Revolute:
      return RigidTransform::about_axis(anchor, axis, value);
    case JointKind::PointOnLine:
      return RigidTransform::from_translation(value * axis);
    case JointKind::Gear2Gear:
      // External meshing reverses the sense of rotation.
      return RigidTransform::about_axis(anchor_b, axis_b, -ratio * value);
  }
  return RigidTransform::identity();
}

// ---------------------------------------------------------------------------
// Mechanism lookups

std::optional<std::size_t> Mechanism::part_index(std::string_view id) const {
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (parts[i].id == id) return i;
  }
  return std::nullopt;
}

std::optional<std::size_t> Mechanism::joint_index(std::string_view id) const {
  for (std::size_t i = 0; i < joints.size(); ++i) {
    if (joints[i].id == id) return i;
  }
  return std::nullopt;
}

const Part& Mechanism::part(std::string_view id) const {
  const auto i = part_index(id);
  if (!i) throw InvalidInput("unknown part '" + std::string(id) + "'");
  return parts[*i];
}

const Joint& Mechanism::joint(std::string_view id) const {
  const auto i = joint_index(id);
  if (!i) throw UnknownJoint("unknown joint '" + std::string(id) + "'");
  return joints[*i];
}

std::vector<std::string> Mechanism::free_joints() const {
  std::vector<std::string> out;
  for (const auto& j : joints) {
    if (j.has_parameter()) out.push_back(j.id);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Validation

namespace {

bool unit(const Vec3& v) { return std::abs(v.norm() - 1.0) <= 1e-9; }

std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adjacency(
    const Mechanism& m, const std::set<std::string>* cut = nullptr) {
  // part index -> (joint index, other part index), joints in id order.
  std::vector<std::size_t> order(m.joints.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return m.joints[a].id < m.joints[b].id; });
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adj(m.parts.size());
  for (std::size_t ji : order) {
    const Joint& j = m.joints[ji];
    if (cut && cut->count(j.id)) continue;
    const auto a = m.part_index(j.part_a);
    const auto b = m.part_index(j.part_b);
    if (!a || !b || *a == *b) continue;
    adj[*a].emplace_back(ji, *b);
    adj[*b].emplace_back(ji, *a);
  }
  return adj;
}

std::vector<int> component_labels(const Mechanism& m, const std::set<std::string>* cut) {
  const auto adj = adjacency(m, cut);
  std::vector<int> label(m.parts.size(), -1);
  int next = 0;
  for (std::size_t s = 0; s < m.parts.size(); ++s) {
    if (label[s] >= 0) continue;
    std::deque<std::size_t> queue{s};
    label[s] = next;
    while (!queue.empty()) {
      const auto u = queue.front();
      queue.pop_front();
      for (const auto& [ji, v] : adj[u]) {
        if (label[v] < 0) {
          label[v] = next;
          queue.push_back(v);
        }
      }
    }
    ++next;
  }
  return label;
}

}  // namespace

std::vector<Violation> validate_mechanism(const Mechanism& m) {
  std::vector<Violation> out;
  auto add = [&](std::string rule, std::string detail) {
    out.push_back({std::move(rule), std::move(detail)});
  };

  if (m.parts.empty()) add("no parts", "a mechanism needs at least one part");

  std::set<std::string> seen;
  for (const auto& p : m.parts) {
    if (!seen.insert(p.id).second) add("duplicate part id", "part '" + p.id + "' appears twice");
    const auto mesh_issues = mesh_violations(p.mesh);
    if (!mesh_issues.empty()) add("invalid mesh", "part '" + p.id + "': " + mesh_issues.front());
    if (p.mesh.empty()) {
      add("invalid mesh", "part '" + p.id + "' has no triangles");
    } else if (mesh_issues.empty() && !is_closed_manifold(p.mesh)) {
      add("mesh not watertight", "part '" + p.id + "' is not a closed, consistently wound surface");
    }
  }
  if (!m.part_index(m.driving_part)) {
    add("driving part missing", "driving part '" + m.driving_part + "' is not a part");
  }

  std::set<std::string> joint_ids;
  for (const auto& j : m.joints) {
    const std::string who = "joint '" + j.id + "'";
    if (!joint_ids.insert(j.id).second) add("duplicate joint id", who + " appears twice");
    for (const auto* end : {&j.part_a, &j.part_b}) {
      if (!m.part_index(*end)) add("unknown part", who + " names missing part '" + *end + "'");
    }
    if (j.part_a == j.part_b) add("self joint", who + " connects a part to itself");
    if (j.kind == JointKind::Fixed) continue;
    if (!unit(j.axis)) {
      std::ostringstream os;
      os << who << " axis has length " << j.axis.norm();
      add("non-unit axis", os.str());
    }
    if (j.kind == JointKind::Gear2Gear) {
      if (!unit(j.axis_b)) {
        std::ostringstream os;
        os << who << " axis_b has length " << j.axis_b.norm();
        add("non-unit axis", os.str());
      }
      if (j.ratio == 0.0 || !std::isfinite(j.ratio)) add("zero gear ratio", who + " has ratio 0");
    }
    if (!(j.lo <= j.hi) || !std::isfinite(j.lo) || !std::isfinite(j.hi)) {
      std::ostringstream os;
      os << who << " limits [" << j.lo << ", " << j.hi << "]";
      add("invalid limits", os.str());
    }
  }

  if (m.parts.size() > 1) {
    const auto labels = component_labels(m, nullptr);
    const int n = *std::max_element(labels.begin(), labels.end()) + 1;
    if (n > 1) {
      add("disconnected graph",
          "joint graph has " + std::to_string(n) + " connected components");
    }
  }
  return out;
}

void validate_configuration(const Mechanism& m, const Configuration& c) {
  for (const auto& [id, value] : c.values) {
    const auto ji = m.joint_index(id);
    if (!ji) throw InvalidInput("configuration names unknown joint '" + id + "'");
    const Joint& j = m.joints[*ji];
    if (!j.has_parameter()) throw InvalidInput("configuration sets Fixed joint '" + id + "'");
    if (!(value >= j.lo - 1e-12 && value <= j.hi + 1e-12)) {
      std::ostringstream os;
      os << "joint '" << id << "' value " << value << " outside [" << j.lo << ", " << j.hi << "]";
      throw InvalidInput(os.str());
    }
  }
  for (const auto& j : m.joints) {
    if (j.has_parameter() && !c.values.count(j.id)) {
      throw InvalidInput("configuration misses joint '" + j.id + "'");
    }
  }
}

Configuration rest_configuration(const Mechanism& m) {
  Configuration c;
  for (const auto& j : m.joints) {
    if (j.has_parameter()) c.values[j.id] = std::clamp(0.0, j.lo, j.hi);
  }
  return c;
}

// ---------------------------------------------------------------------------
// Kinematics

KinematicTree spanning_tree(const Mechanism& m) {
  KinematicTree tree;
  const auto root = m.part_index(m.driving_part);
  if (!root) throw InvalidInput("driving part '" + m.driving_part + "' is not a part");
  tree.root = *root;

  const auto adj = adjacency(m);
  std::vector<bool> visited(m.parts.size(), false);
  std::vector<bool> in_tree(m.joints.size(), false);
  std::deque<std::size_t> queue{tree.root};
  visited[tree.root] = true;
  while (!queue.empty()) {
    const auto u = queue.front();
    queue.pop_front();
    for (const auto& [ji, v] : adj[u]) {
      if (visited[v]) continue;
      visited[v] = true;
      in_tree[ji] = true;
      tree.edges.push_back({ji, u, v, m.joints[ji].part_a == m.parts[u].id});
      queue.push_back(v);
    }
  }
  if (std::find(visited.begin(), visited.end(), false) != visited.end()) {
    throw InvalidInput("joint graph is disconnected");
  }
  for (std::size_t ji = 0; ji < m.joints.size(); ++ji) {
    if (!in_tree[ji]) tree.loops.push_back(ji);
  }
  std::sort(tree.loops.begin(), tree.loops.end(),
            [&](std::size_t a, std::size_t b) { return m.joints[a].id < m.joints[b].id; });
  return tree;
}

namespace {

double parameter(const Joint& j, const Configuration& c) {
  if (!j.has_parameter()) return 0.0;
  auto it = c.values.find(j.id);
  if (it == c.values.end()) throw InvalidInput("configuration misses joint '" + j.id + "'");
  return it->second;
}

// Assembly-frame displacement of every part relative to rest.
std::vector<RigidTransform> displacements(const Mechanism& m, const Configuration& c,
                                          double loop_tol) {
  const KinematicTree tree = spanning_tree(m);
  std::vector<RigidTransform> disp(m.parts.size());
  for (const auto& e : tree.edges) {
    const Joint& j = m.joints[e.joint];
    const RigidTransform rel = j.relative_motion(parameter(j, c));
    disp[e.child] = e.forward ? disp[e.parent] * rel : disp[e.parent] * rel.inverse();
  }
  for (std::size_t ji : tree.loops) {
    const Joint& j = m.joints[ji];
    const auto a = *m.part_index(j.part_a);
    const auto b = *m.part_index(j.part_b);
    const Vec3 pin = j.kind == JointKind::Gear2Gear ? j.anchor_b : j.anchor;
    const Vec3 via_a = disp[a] * (j.relative_motion(parameter(j, c)) * pin);
    const Vec3 via_b = disp[b] * pin;
    const double gap = (via_a - via_b).norm();
    if (gap > loop_tol) {
      std::ostringstream os;
      os << "joint '" << j.id << "' closes a loop with error " << gap << " m at its anchor";
      throw LoopClosureViolation(os.str());
    }
  }
  return disp;
}

}  // namespace

PoseMap forward_kinematics(const Mechanism& m, const Configuration& c, double loop_tol) {
  const auto disp = displacements(m, c, loop_tol);
  PoseMap poses;
  for (std::size_t i = 0; i < m.parts.size(); ++i) {
    poses.emplace(m.parts[i].id, disp[i] * m.parts[i].rest_pose);
  }
  return poses;
}

std::vector<PartPair> penetrating_pairs(const Mechanism& m, const PoseMap& poses, double eps) {
  std::vector<TriMesh> posed;
  posed.reserve(m.parts.size());
  for (const auto& p : m.parts) posed.push_back(transform_mesh(p.mesh, poses.at(p.id)));

  std::vector<PartPair> out;
  std::vector<Vec3> anchors;
  for (std::size_t i = 0; i < m.parts.size(); ++i) {
    for (std::size_t k = i + 1; k < m.parts.size(); ++k) {
      anchors.clear();
      for (const auto& j : m.joints) {
        const bool links = (j.part_a == m.parts[i].id && j.part_b == m.parts[k].id) ||
                           (j.part_a == m.parts[k].id && j.part_b == m.parts[i].id);
        if (!links) continue;
        // Anchors co-move with part_a.
        const auto& pa = m.part(j.part_a);
        const RigidTransform disp_a = poses.at(pa.id) * pa.rest_pose.inverse();
        anchors.push_back(disp_a * j.anchor);
        if (j.kind == JointKind::Gear2Gear) anchors.push_back(disp_a * j.anchor_b);
      }
      if (meshes_intersect(posed[i], posed[k], eps, anchors)) {
        out.emplace_back(m.parts[i].id, m.parts[k].id);
      }
    }
  }
  return out;
}

std::vector<PartPair> check_slippable(const Mechanism& m, const Configuration& c, double eps) {
  validate_configuration(m, c);
  return penetrating_pairs(m, forward_kinematics(m, c), eps);
}

// ---------------------------------------------------------------------------
// Splitting

std::vector<GroupSkeleton> split_by_joints(const Mechanism& m, const std::set<std::string>& cut) {
  for (const auto& id : cut) {
    if (!m.joint_index(id)) throw UnknownJoint("cut names unknown joint '" + id + "'");
  }
  const auto labels = component_labels(m, &cut);
  const int n = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<GroupSkeleton> groups(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < m.parts.size(); ++i) {
    groups[labels[i]].part_ids.push_back(m.parts[i].id);
  }
  for (const auto& j : m.joints) {
    if (cut.count(j.id)) continue;
    const auto a = m.part_index(j.part_a);
    if (!a) continue;
    groups[labels[*a]].internal_joints.push_back(j.id);
  }
  for (auto& g : groups) std::sort(g.internal_joints.begin(), g.internal_joints.end());
  return groups;
}

Mechanism sub_mechanism(const Mechanism& m, const GroupSkeleton& group) {
  Mechanism sub;
  for (const auto& id : group.part_ids) sub.parts.push_back(m.part(id));
  for (const auto& id : group.internal_joints) sub.joints.push_back(m.joint(id));
  const bool has_driver = std::find(group.part_ids.begin(), group.part_ids.end(),
                                    m.driving_part) != group.part_ids.end();
  sub.driving_part = has_driver || group.part_ids.empty() ? m.driving_part : group.part_ids.front();
  return sub;
}

Configuration restrict_configuration(const Configuration& c, const std::vector<std::string>& joints) {
  Configuration out;
  for (const auto& id : joints) {
    auto it = c.values.find(id);
    if (it != c.values.end()) out.values.insert(*it);
  }
  return out;
}

}  // namespace dpack
