#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dpack/geometry.hpp"
#include "dpack/mechanism.hpp"
#include "dpack/packing.hpp"

namespace dpack {

/// Knobs of the per-group OBB optimizer.
struct OptimizerResolution {
  double angular_step = deg_to_rad(6.0);  // min_obb grid
  int param_steps = 32;                   // grid points per line search
  double rel_tol = 1e-3;                  // stop when a sweep gains less
  int max_sweeps = 10;
  double penetration_eps = 1e-6;

  ObbOptions obb_options() const;
  void validate() const;
};

/// A connected set of parts held at one configuration of its internal joints.
struct Group {
  std::vector<std::string> part_ids;         // mechanism order
  std::vector<std::string> internal_joints;  // sorted
  Configuration config;                      // non-Fixed internal joints only
  PoseMap part_poses;                        // member part -> assembly frame
  Obb obb;                                   // of the posed member meshes
  double material_volume = 0.0;
  RigidTransform pose;  // group frame -> box, set once packed

  GroupSkeleton skeleton() const { return {part_ids, internal_joints}; }
};

struct HierarchyNode {
  std::set<std::string> cut;
  std::set<std::string> parent_cut;
  std::vector<Group> groups;
  double total_volume = 0.0;

  std::vector<std::string> uncut_joints(const Mechanism& m) const;
};

struct SearchCriteria {
  int max_groups = 3;
  double target_efficiency = 0.6;
  int beam_width = 4;
  OptimizerResolution resolution{};
  int threads = 1;
  /// Trial packs during the search use min(W, D) / trial_divisor cells.
  double trial_divisor = 32.0;

  void validate() const;
};

struct GroupOptimum {
  Configuration config;
  Obb obb;
  PoseMap poses;
};

/// Coordinate descent over the group's free joints, each coordinate searched
/// on a uniform grid within its limits and refined around the best grid point.
/// Inadmissible configurations (loop closure or penetration) are skipped.
/// Starts from the rest configuration and, if given, from `warm` (missing
/// joints filled from rest); the better result is kept.
/// Throws NoAdmissibleConfiguration when no start is admissible.
GroupOptimum minimize_group_obb(const Mechanism& m, const GroupSkeleton& g,
                                const OptimizerResolution& res = {},
                                const Configuration* warm = nullptr);

/// Builds a group from an optimum.
Group make_group(const Mechanism& m, const GroupSkeleton& g, GroupOptimum opt);

/// Root of the hierarchy: nothing cut, every component optimized from rest.
HierarchyNode root_node(const Mechanism& m, const OptimizerResolution& res = {});

/// The node reached by additionally cutting `joint`. Groups unchanged by the
/// cut are copied; the others are re-optimized starting from the parent's
/// configuration. Throws UnknownJoint, or InvalidInput if already cut.
HierarchyNode cut_joint(const Mechanism& m, const HierarchyNode& node, const std::string& joint,
                        const OptimizerResolution& res = {});

/// Volume removed by cutting `joint`; may be negative.
double joint_cost(const Mechanism& m, const HierarchyNode& node, const std::string& joint,
                  const OptimizerResolution& res = {});

/// One child per uncut joint, sorted by total volume, then cut set.
std::vector<HierarchyNode> expand_node(const Mechanism& m, const HierarchyNode& node,
                                       const OptimizerResolution& res = {});

/// Posed group meshes ready for packing, one item per group.
std::vector<PackItem> pack_items(const Mechanism& m, const HierarchyNode& node);

/// Total mesh volume of the mechanism's parts.
double total_material_volume(const Mechanism& m);

/// Packs the node's groups at the given cell size. Returns nullopt when some
/// group does not fit the base.
std::optional<PackingLayout> trial_pack(const Mechanism& m, const HierarchyNode& node,
                                        const BoxSpec& box, int threads = 1);

struct ExploredNode {
  HierarchyNode node;
  int level = 0;
  std::optional<double> efficiency;  // nullopt when the trial pack failed
  double trial_h = 0.0;
};

struct SearchResult {
  HierarchyNode chosen;
  double efficiency = 0.0;
  std::vector<ExploredNode> explored;  // in visiting order
};

/// Breadth-first search over cut sets of size 0 .. max_groups - 1, keeping
/// beam_width nodes per level ranked by (total volume, group count, cut).
/// Every kept node is trial packed; the first whose efficiency reaches the
/// target wins, else the best by (efficiency, fewer groups, cut).
/// Throws GroupTooLarge when no explored node can be packed.
SearchResult bfs_disassemble(const Mechanism& m, double base_w, double base_d,
                             const SearchCriteria& criteria);

}  // namespace dpack
