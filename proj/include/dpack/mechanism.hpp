#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dpack/geometry.hpp"

namespace dpack {

enum class JointKind { Fixed, Revolute, Gear2Gear, PointOnLine };

std::string_view to_string(JointKind kind);
std::optional<JointKind> parse_joint_kind(std::string_view name);

/// A rigid body. The mesh is in the part's local frame; rest_pose maps it into
/// the assembly frame.
struct Part {
  std::string id;
  TriMesh mesh;
  RigidTransform rest_pose;
};

/// A kinematic pair. Anchors and axes are assembly-frame quantities at rest.
///
/// The joint parameter moves part_b relative to part_a:
///   Revolute     rotation by the parameter about (anchor, axis)
///   PointOnLine  translation by parameter * axis
///   Gear2Gear    part_b turns by -ratio * parameter about (anchor_b, axis_b);
///                (anchor, axis) is the driving gear's own axle
///   Fixed        no parameter
struct Joint {
  std::string id;
  JointKind kind = JointKind::Fixed;
  std::string part_a;
  std::string part_b;
  Vec3 anchor = Vec3::Zero();
  Vec3 axis = Vec3::UnitZ();
  Vec3 anchor_b = Vec3::Zero();
  Vec3 axis_b = Vec3::UnitZ();
  double lo = 0.0;
  double hi = 0.0;
  double ratio = 1.0;

  bool has_parameter() const { return kind != JointKind::Fixed; }
  /// Displacement of part_b relative to part_a, in rest assembly coordinates.
  RigidTransform relative_motion(double value) const;
};

struct Mechanism {
  std::vector<Part> parts;
  std::vector<Joint> joints;
  std::string driving_part;

  const Part& part(std::string_view id) const;
  const Joint& joint(std::string_view id) const;
  std::optional<std::size_t> part_index(std::string_view id) const;
  std::optional<std::size_t> joint_index(std::string_view id) const;
  /// Ids of all joints that carry a parameter, sorted.
  std::vector<std::string> free_joints() const;
};

/// A point in joint-parameter space: joint id -> value.
struct Configuration {
  std::map<std::string, double> values;

  double at(const std::string& joint_id) const { return values.at(joint_id); }
  friend bool operator==(const Configuration&, const Configuration&) = default;
};

struct Violation {
  std::string rule;
  std::string detail;
};

/// One record per failed invariant; empty when the mechanism is well formed.
std::vector<Violation> validate_mechanism(const Mechanism& m);

/// Throws InvalidInput if `c` misses a parameterized joint, names an unknown
/// or Fixed joint, or leaves a joint's limits.
void validate_configuration(const Mechanism& m, const Configuration& c);

/// Every parameterized joint at 0, clamped into its limits.
Configuration rest_configuration(const Mechanism& m);

/// Spanning tree of the joint graph rooted at the driving part, built
/// breadth-first with incident joints visited in id order.
struct KinematicTree {
  struct Edge {
    std::size_t joint;   // index into Mechanism::joints
    std::size_t parent;  // part index
    std::size_t child;   // part index
    bool forward;        // parent is the joint's part_a
  };
  std::size_t root = 0;
  std::vector<Edge> edges;         // in BFS order
  std::vector<std::size_t> loops;  // joint indices not in the tree
};

KinematicTree spanning_tree(const Mechanism& m);

using PoseMap = std::map<std::string, RigidTransform>;

/// Part poses (local -> assembly frame) at configuration `c`. The driving part
/// stays at its rest pose. Joints closing a loop are checked, not propagated:
/// LoopClosureViolation if one is off by more than `loop_tol` at its anchor.
PoseMap forward_kinematics(const Mechanism& m, const Configuration& c,
                           double loop_tol = 1e-4);

using PartPair = std::pair<std::string, std::string>;

/// Pairs of parts (ordered by part index) whose posed meshes interpenetrate by
/// more than eps. Contact near a joint anchor shared by the pair is allowed.
std::vector<PartPair> penetrating_pairs(const Mechanism& m, const PoseMap& poses,
                                        double eps = 1e-6);

/// forward_kinematics followed by penetrating_pairs. Empty means admissible.
std::vector<PartPair> check_slippable(const Mechanism& m, const Configuration& c,
                                      double eps = 1e-6);

/// A connected component of the joint graph after some joints are cut.
struct GroupSkeleton {
  std::vector<std::string> part_ids;         // mechanism order
  std::vector<std::string> internal_joints;  // sorted
};

/// Components of the joint graph with `cut` removed, ordered by their first
/// part in mechanism order. Throws UnknownJoint for an unknown cut id.
std::vector<GroupSkeleton> split_by_joints(const Mechanism& m,
                                           const std::set<std::string>& cut);

/// The parts and internal joints of a group as a mechanism of its own. Its
/// driving part is the original one when present, else the group's first part.
Mechanism sub_mechanism(const Mechanism& m, const GroupSkeleton& group);

/// `c` restricted to the given joints.
Configuration restrict_configuration(const Configuration& c,
                                     const std::vector<std::string>& joints);

}  // namespace dpack
