#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dpack/geometry.hpp"

namespace dpack {

/// Fixed base, open top. Grid columns: ceil(base / cell_size) per axis.
struct BoxSpec {
  double base_w = 1.0;
  double base_d = 1.0;
  double cell_size = 1.0 / 64.0;

  /// Cell size min(base_w, base_d) / divisor.
  static BoxSpec with_divisor(double base_w, double base_d, double divisor);

  int columns_x() const;
  int columns_y() const;
  /// Throws InvalidInput when a dimension is non-positive or below cell_size.
  void validate() const;
};

/// Something to pack: rigid meshes in a common frame plus their OBB in that
/// frame. A disassembled group becomes one of these.
struct PackItem {
  std::vector<std::string> part_ids;
  std::vector<TriMesh> meshes;
  Obb obb;
  double material_volume = 0.0;

  std::string label() const;
};

/// Builds an item, computing its OBB (min_obb over all vertices) and its
/// material volume (sum of mesh volumes).
PackItem make_pack_item(std::vector<std::string> part_ids, std::vector<TriMesh> meshes,
                        const ObbOptions& obb_opts = {});

/// The 24 proper rotations mapping coordinate axes onto coordinate axes, as
/// exact signed permutation matrices. Index 0 is the identity.
const std::array<Mat3, 24>& axis_rotations();

/// An item voxelized in one orientation, tight to its rotated bounding box.
struct Footprint {
  int orientation = 0;
  VoxelGrid cells;         // origin at 0, dims = footprint size in cells
  RigidTransform to_local;  // item frame -> footprint frame (min corner at 0)
  std::size_t count = 0;
  bool connected = true;  // 6-connected occupied cells

  Vec3i dims() const { return cells.dims(); }
};

/// Conservative voxel image of `item` under orientation `orientation`
/// (index into axis_rotations()), applied in the item's OBB frame.
Footprint make_footprint(const PackItem& item, int orientation, double cell_size,
                         const VoxelizeOptions& vox = {});

/// The occupancy grid of a footprint.
inline VoxelGrid footprint(const PackItem& item, int orientation, double cell_size) {
  return make_footprint(item, orientation, cell_size).cells;
}

/// Which insertion rule chose a placement.
enum class PlacementRule { Hole = 1, BelowHeight = 2, RaiseHeight = 3 };

struct Placement {
  std::size_t group_index = 0;
  int orientation = 0;
  Vec3i cell_anchor = Vec3i::Zero();
  /// Item frame -> box frame.
  Quat rotation = Quat::Identity();
  Vec3 translation = Vec3::Zero();
  PlacementRule rule = PlacementRule::RaiseHeight;

  RigidTransform pose() const { return {rotation, translation}; }
};

struct Hole {
  std::vector<Vec3i> cells;  // ordered by z, then y, then x
  double volume = 0.0;
  Vec3i anchor = Vec3i::Zero();  // first cell
};

class PackingLayout {
 public:
  explicit PackingLayout(const BoxSpec& box);

  const BoxSpec& box() const { return box_; }
  const std::vector<Placement>& placements() const { return placements_; }
  const VoxelGrid& grid() const { return grid_; }
  int height_cells() const { return height_cells_; }
  double h() const { return height_cells_ * box_.cell_size; }
  double material_volume() const { return material_volume_; }
  /// h (in cells) after each insertion.
  const std::vector<int>& height_history() const { return height_history_; }

  bool occupied(int x, int y, int z) const;
  /// Index of the placement owning a cell, -1 when empty.
  int owner(int x, int y, int z) const;

  /// Whether `fp` at `anchor` stays within the base and hits no occupied cell.
  bool fits(const Footprint& fp, const Vec3i& anchor) const;

  /// Claims the footprint's cells. Throws std::logic_error if any is taken.
  void insert(const Placement& placement, const Footprint& fp, double material_volume);

  // Column bit masks over z, used by the placement search.
  const std::vector<std::uint64_t>& column(int x, int y) const {
    return columns_[static_cast<std::size_t>(x) + static_cast<std::size_t>(box_.columns_x()) * y];
  }

 private:
  BoxSpec box_;
  VoxelGrid grid_;
  std::vector<int> owner_;
  std::vector<std::vector<std::uint64_t>> columns_;
  std::vector<Placement> placements_;
  std::vector<int> height_history_;
  int height_cells_ = 0;
  double material_volume_ = 0.0;
};

/// Maximal 6-connected sets of empty cells strictly below h.
std::vector<Hole> find_holes(const PackingLayout& layout);

/// Insertion order: longest OBB edge descending, then OBB volume descending,
/// then part-id list ascending. Returns indices into `items`.
std::vector<std::size_t> sort_groups(std::span<const PackItem> items);

struct PackOptions {
  int threads = 1;
  VoxelizeOptions voxelize{};
};

/// A placement together with the footprint it was chosen for.
struct PlacementChoice {
  Placement placement;
  Footprint footprint;
};

/// Candidate orientation footprints of an item for a box; orientations whose
/// footprint exceeds the base or duplicates a lower index are dropped.
std::vector<Footprint> candidate_footprints(const PackItem& item, const BoxSpec& box,
                                            std::span<const int> orientations,
                                            const VoxelizeOptions& vox = {});

/// Chooses where the next item goes:
///  1. if some hole can hold the footprint, the hole whose volume is closest to
///     the footprint's;
///  2. else the position keeping h that leaves the least empty space beneath
///     the footprint;
///  3. else the position raising h the least.
/// Ties go to lowest z, then y, then x, then orientation index.
/// Throws DoesNotFit when no orientation fits the base.
PlacementChoice choose_placement(const PackingLayout& layout, const PackItem& item,
                                 std::size_t group_index,
                                 std::span<const Footprint> footprints,
                                 const PackOptions& opts = {});

/// choose_placement over the given orientations (all 24 when empty).
Placement place_group(const PackingLayout& layout, const PackItem& item,
                      std::span<const int> orientations = {}, const PackOptions& opts = {});

/// Sorts with sort_groups() and inserts every item. Throws DoesNotFit naming
/// the offending item.
PackingLayout pack_all(std::span<const PackItem> items, const BoxSpec& box,
                       const PackOptions& opts = {});

/// Placed material volume over base_w * base_d * h. Throws EmptyLayout when
/// nothing is placed.
double utilization(const PackingLayout& layout);

/// Column-wise count of empty cells below the footprint's lowest cell in each
/// column, for `fp` placed at `anchor`.
std::size_t underlying_free_cells(const PackingLayout& layout, const Footprint& fp,
                                  const Vec3i& anchor);

}  // namespace dpack
