#include "dpack/packing.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <deque>
#include <numeric>
#include <stdexcept>
#include <tuple>

#include "dpack/parallel.hpp"

namespace dpack {

// ---------------------------------------------------------------------------
// Box and items

BoxSpec BoxSpec::with_divisor(double base_w, double base_d, double divisor) {
  return {base_w, base_d, std::min(base_w, base_d) / divisor};
}

int BoxSpec::columns_x() const {
  return std::max(1, static_cast<int>(std::ceil(base_w / cell_size - 1e-9)));
}

int BoxSpec::columns_y() const {
  return std::max(1, static_cast<int>(std::ceil(base_d / cell_size - 1e-9)));
}

void BoxSpec::validate() const {
  if (!(base_w > 0.0) || !(base_d > 0.0)) throw InvalidInput("box base dimensions must be positive");
  if (!(cell_size > 0.0)) throw InvalidInput("cell size must be positive");
  if (base_w < cell_size || base_d < cell_size) {
    throw InvalidInput("box base must be at least one cell wide");
  }
}

std::string PackItem::label() const {
  std::string out;
  for (const auto& id : part_ids) {
    if (!out.empty()) out += '+';
    out += id;
  }
  return out;
}

PackItem make_pack_item(std::vector<std::string> part_ids, std::vector<TriMesh> meshes,
                        const ObbOptions& obb_opts) {
  PackItem item;
  item.part_ids = std::move(part_ids);
  item.meshes = std::move(meshes);
  std::vector<Vec3> all;
  for (const auto& m : item.meshes) {
    all.insert(all.end(), m.vertices.begin(), m.vertices.end());
    item.material_volume += mesh_volume(m);
  }
  item.obb = min_obb(all, obb_opts);
  return item;
}

const std::array<Mat3, 24>& axis_rotations() {
  static const std::array<Mat3, 24> rotations = [] {
    std::array<Mat3, 24> out;
    std::array<int, 3> perm{0, 1, 2};
    std::size_t n = 0;
    do {
      for (int signs = 0; signs < 8; ++signs) {
        Mat3 r = Mat3::Zero();
        for (int row = 0; row < 3; ++row) {
          r(row, perm[row]) = (signs >> row) & 1 ? -1.0 : 1.0;
        }
        if (r.determinant() > 0.0) out[n++] = r;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return out;
  }();
  return rotations;
}

// ---------------------------------------------------------------------------
// Footprints

namespace {

bool six_connected(const VoxelGrid& g) {
  const Vec3i d = g.dims();
  std::vector<std::uint8_t> seen(g.size(), 0);
  std::size_t total = 0;
  int sx = -1, sy = -1, sz = -1;
  for (int z = 0; z < d.z(); ++z)
    for (int y = 0; y < d.y(); ++y)
      for (int x = 0; x < d.x(); ++x)
        if (g.at(x, y, z)) {
          ++total;
          if (sx < 0) sx = x, sy = y, sz = z;
        }
  if (total == 0) return true;
  std::deque<Vec3i> queue{Vec3i(sx, sy, sz)};
  seen[g.index(sx, sy, sz)] = 1;
  std::size_t reached = 0;
  static const int kSteps[6][3] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
  while (!queue.empty()) {
    const Vec3i c = queue.front();
    queue.pop_front();
    ++reached;
    for (const auto& s : kSteps) {
      const int x = c.x() + s[0], y = c.y() + s[1], z = c.z() + s[2];
      if (!g.in_bounds(x, y, z) || !g.at(x, y, z)) continue;
      auto& flag = seen[g.index(x, y, z)];
      if (flag) continue;
      flag = 1;
      queue.emplace_back(x, y, z);
    }
  }
  return reached == total;
}

}  // namespace

Footprint make_footprint(const PackItem& item, int orientation, double cell_size,
                         const VoxelizeOptions& vox) {
  if (orientation < 0 || orientation >= 24) throw InvalidInput("orientation index out of range");
  const RigidTransform turn(Quat(axis_rotations()[orientation]), Vec3::Zero());
  const RigidTransform oriented = turn * item.obb.world_to_box();

  std::vector<TriMesh> posed;
  Aabb box;
  for (const auto& m : item.meshes) {
    posed.push_back(transform_mesh(m, oriented));
    box.extend(bounding_box(posed.back()));
  }
  Footprint fp;
  fp.orientation = orientation;
  fp.to_local = RigidTransform::from_translation(-box.min) * oriented;

  const Vec3 ext = box.extent();
  Vec3i dims;
  for (int k = 0; k < 3; ++k) {
    dims[k] = std::max(1, static_cast<int>(std::ceil(ext[k] / cell_size - 1e-9)));
  }
  fp.cells = VoxelGrid(Vec3::Zero(), cell_size, dims);
  for (auto& m : posed) {
    for (auto& v : m.vertices) v -= box.min;
    voxelize_into(fp.cells, m, vox);
  }
  fp.count = fp.cells.count();
  fp.connected = six_connected(fp.cells);
  return fp;
}

// ---------------------------------------------------------------------------
// Layout

PackingLayout::PackingLayout(const BoxSpec& box) : box_(box) {
  box_.validate();
  grid_ = VoxelGrid(Vec3::Zero(), box_.cell_size, Vec3i(box_.columns_x(), box_.columns_y(), 0));
  columns_.resize(static_cast<std::size_t>(box_.columns_x()) * box_.columns_y());
}

bool PackingLayout::occupied(int x, int y, int z) const {
  return grid_.in_bounds(x, y, z) && grid_.at(x, y, z);
}

int PackingLayout::owner(int x, int y, int z) const {
  return grid_.in_bounds(x, y, z) ? owner_[grid_.index(x, y, z)] : -1;
}

bool PackingLayout::fits(const Footprint& fp, const Vec3i& anchor) const {
  const Vec3i d = fp.dims();
  if (anchor.x() < 0 || anchor.y() < 0 || anchor.z() < 0) return false;
  if (anchor.x() + d.x() > box_.columns_x() || anchor.y() + d.y() > box_.columns_y()) return false;
  for (int k = 0; k < d.z(); ++k)
    for (int j = 0; j < d.y(); ++j)
      for (int i = 0; i < d.x(); ++i)
        if (fp.cells.at(i, j, k) && occupied(anchor.x() + i, anchor.y() + j, anchor.z() + k)) {
          return false;
        }
  return true;
}

void PackingLayout::insert(const Placement& placement, const Footprint& fp, double material_volume) {
  const Vec3i d = fp.dims();
  const Vec3i& a = placement.cell_anchor;
  if (!fits(fp, a)) throw std::logic_error("placement overlaps occupied cells or leaves the base");
  const int top = a.z() + d.z();
  if (top > grid_.dims().z()) {
    grid_.grow_z(top);
    owner_.resize(grid_.size(), -1);
  }
  const int id = static_cast<int>(placements_.size());
  const std::size_t words = static_cast<std::size_t>(top + 63) / 64;
  for (int k = 0; k < d.z(); ++k)
    for (int j = 0; j < d.y(); ++j)
      for (int i = 0; i < d.x(); ++i) {
        if (!fp.cells.at(i, j, k)) continue;
        const int x = a.x() + i, y = a.y() + j, z = a.z() + k;
        const auto idx = grid_.index(x, y, z);
        owner_[idx] = id;
        grid_.set(x, y, z);
        auto& col = columns_[static_cast<std::size_t>(x) + static_cast<std::size_t>(box_.columns_x()) * y];
        if (col.size() < words) col.resize(words, 0);
        col[z / 64] |= std::uint64_t{1} << (z % 64);
        height_cells_ = std::max(height_cells_, z + 1);
      }
  placements_.push_back(placement);
  height_history_.push_back(height_cells_);
  material_volume_ += material_volume;
}

// ---------------------------------------------------------------------------
// Holes

namespace {

struct HoleMap {
  std::vector<int> label;         // per cell below h; -1 when occupied
  std::vector<std::size_t> size;  // per label
};

HoleMap label_holes(const PackingLayout& layout) {
  const int nx = layout.box().columns_x();
  const int ny = layout.box().columns_y();
  const int nz = layout.height_cells();
  HoleMap map;
  map.label.assign(static_cast<std::size_t>(nx) * ny * nz, -1);
  auto idx = [&](int x, int y, int z) {
    return static_cast<std::size_t>(x) + static_cast<std::size_t>(nx) * (y + static_cast<std::size_t>(ny) * z);
  };
  std::vector<std::uint8_t> seen(map.label.size(), 0);
  std::deque<Vec3i> queue;
  static const int kSteps[6][3] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
  for (int z = 0; z < nz; ++z)
    for (int y = 0; y < ny; ++y)
      for (int x = 0; x < nx; ++x) {
        if (seen[idx(x, y, z)] || layout.occupied(x, y, z)) continue;
        const int label = static_cast<int>(map.size.size());
        std::size_t count = 0;
        queue.emplace_back(x, y, z);
        seen[idx(x, y, z)] = 1;
        while (!queue.empty()) {
          const Vec3i c = queue.front();
          queue.pop_front();
          map.label[idx(c.x(), c.y(), c.z())] = label;
          ++count;
          for (const auto& s : kSteps) {
            const int u = c.x() + s[0], v = c.y() + s[1], w = c.z() + s[2];
            if (u < 0 || v < 0 || w < 0 || u >= nx || v >= ny || w >= nz) continue;
            if (seen[idx(u, v, w)] || layout.occupied(u, v, w)) continue;
            seen[idx(u, v, w)] = 1;
            queue.emplace_back(u, v, w);
          }
        }
        map.size.push_back(count);
      }
  return map;
}

}  // namespace

std::vector<Hole> find_holes(const PackingLayout& layout) {
  const HoleMap map = label_holes(layout);
  const double cell3 = std::pow(layout.box().cell_size, 3);
  std::vector<Hole> holes(map.size.size());
  const int nx = layout.box().columns_x();
  const int ny = layout.box().columns_y();
  std::size_t i = 0;
  for (int z = 0; z < layout.height_cells(); ++z)
    for (int y = 0; y < ny; ++y)
      for (int x = 0; x < nx; ++x, ++i) {
        const int l = map.label[i];
        if (l >= 0) holes[l].cells.emplace_back(x, y, z);
      }
  for (std::size_t l = 0; l < holes.size(); ++l) {
    holes[l].volume = static_cast<double>(map.size[l]) * cell3;
    holes[l].anchor = holes[l].cells.front();
  }
  return holes;
}

// ---------------------------------------------------------------------------
// Ordering

std::vector<std::size_t> sort_groups(std::span<const PackItem> items) {
  // Quantize so that round-off does not decide ties.
  auto q = [](double v) { return std::llround(v * 1e9); };
  std::vector<std::size_t> order(items.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& ia = items[a];
    const auto& ib = items[b];
    const auto ka = std::make_tuple(-q(ia.obb.longest_edge()), -q(ia.obb.volume()));
    const auto kb = std::make_tuple(-q(ib.obb.longest_edge()), -q(ib.obb.volume()));
    if (ka != kb) return ka < kb;
    return ia.part_ids < ib.part_ids;
  });
  return order;
}

// ---------------------------------------------------------------------------
// Placement search

namespace {

using Words = std::vector<std::uint64_t>;

// out[z] = in[z + k] for z in [0, 64 * out.size())
void shift_down(const Words& in, std::size_t k, Words& out) {
  const std::size_t q = k / 64, r = k % 64;
  for (std::size_t w = 0; w < out.size(); ++w) {
    const std::size_t s = w + q;
    std::uint64_t v = s < in.size() ? in[s] >> r : 0;
    if (r != 0 && s + 1 < in.size()) v |= in[s + 1] << (64 - r);
    out[w] = v;
  }
}

// v[z] |= OR of v[z .. z + len - 1]
void smear(Words& v, std::size_t len, Words& tmp) {
  std::size_t span = 1;
  while (2 * span <= len) {
    shift_down(v, span, tmp);
    for (std::size_t w = 0; w < v.size(); ++w) v[w] |= tmp[w];
    span *= 2;
  }
  if (span < len) {
    shift_down(v, len - span, tmp);
    for (std::size_t w = 0; w < v.size(); ++w) v[w] |= tmp[w];
  }
}

bool bit(const Words& v, int z) {
  const auto w = static_cast<std::size_t>(z) / 64;
  return w < v.size() && ((v[w] >> (z % 64)) & 1u);
}

std::size_t ones_below(const Words& v, int z) {
  std::size_t n = 0;
  for (std::size_t w = 0; w < v.size() && static_cast<int>(w * 64) < z; ++w) {
    const int remaining = z - static_cast<int>(w * 64);
    const std::uint64_t mask = remaining >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << remaining) - 1);
    n += static_cast<std::size_t>(std::popcount(v[w] & mask));
  }
  return n;
}

struct FootColumn {
  int i = 0, j = 0;
  int lowest = 0;
  std::vector<std::pair<int, int>> runs;  // inclusive z ranges
};

std::vector<FootColumn> columns_of(const Footprint& fp) {
  std::vector<FootColumn> out;
  const Vec3i d = fp.dims();
  for (int j = 0; j < d.y(); ++j)
    for (int i = 0; i < d.x(); ++i) {
      FootColumn c{i, j, -1, {}};
      for (int k = 0; k < d.z(); ++k) {
        if (!fp.cells.at(i, j, k)) continue;
        if (c.lowest < 0) c.lowest = k;
        if (!c.runs.empty() && c.runs.back().second == k - 1) {
          c.runs.back().second = k;
        } else {
          c.runs.emplace_back(k, k);
        }
      }
      if (c.lowest >= 0) out.push_back(std::move(c));
    }
  return out;
}

// Ordered by (score, z, y, x, orientation).
struct Candidate {
  long long score = 0;
  Vec3i anchor = Vec3i::Zero();
  int orientation = 0;
  std::size_t footprint = 0;

  auto key() const {
    return std::make_tuple(score, anchor.z(), anchor.y(), anchor.x(), orientation);
  }
};

void keep_better(std::optional<Candidate>& best, const Candidate& c) {
  if (!best || c.key() < best->key()) best = c;
}

struct RuleBest {
  std::optional<Candidate> hole, below, raise;
};

std::size_t underlying_free(const PackingLayout& layout, const std::vector<FootColumn>& cols,
                            const Vec3i& anchor) {
  std::size_t free_cells = 0;
  for (const auto& c : cols) {
    const int z = anchor.z() + c.lowest;
    const auto& col = layout.column(anchor.x() + c.i, anchor.y() + c.j);
    free_cells += static_cast<std::size_t>(z) - ones_below(col, z);
  }
  return free_cells;
}

RuleBest search_footprint(const PackingLayout& layout, const HoleMap& holes, const Footprint& fp,
                          std::size_t fp_index) {
  RuleBest best;
  const int nx = layout.box().columns_x();
  const int ny = layout.box().columns_y();
  const int h = layout.height_cells();
  const Vec3i d = fp.dims();
  const auto cols = columns_of(fp);
  const std::size_t words = static_cast<std::size_t>(h + 1 + 63) / 64;
  Words blocked(words), tmp(words), scratch(words);

  auto label_at = [&](int x, int y, int z) {
    return holes.label[static_cast<std::size_t>(x) +
                       static_cast<std::size_t>(nx) * (y + static_cast<std::size_t>(ny) * z)];
  };
  // Any occupied cell works as the hole probe of a connected footprint.
  const FootColumn& probe = cols.front();

  for (int y = 0; y + d.y() <= ny; ++y) {
    for (int x = 0; x + d.x() <= nx; ++x) {
      std::fill(blocked.begin(), blocked.end(), 0);
      for (const auto& c : cols) {
        const auto& col = layout.column(x + c.i, y + c.j);
        if (col.empty()) continue;
        for (const auto& [k0, k1] : c.runs) {
          shift_down(col, static_cast<std::size_t>(k0), tmp);
          smear(tmp, static_cast<std::size_t>(k1 - k0 + 1), scratch);
          for (std::size_t w = 0; w < words; ++w) blocked[w] |= tmp[w];
        }
      }
      for (int z = 0; z <= h; ++z) {
        if (bit(blocked, z)) continue;
        const Vec3i anchor(x, y, z);
        const int top = z + d.z();
        if (top > h) {
          keep_better(best.raise, {top, anchor, fp.orientation, fp_index});
          break;  // higher z only raises h further
        }
        int label = label_at(x + probe.i, y + probe.j, z + probe.lowest);
        if (!fp.connected) {
          for (const auto& c : cols) {
            for (const auto& [k0, k1] : c.runs) {
              for (int k = k0; k <= k1 && label >= 0; ++k) {
                if (label_at(x + c.i, y + c.j, z + k) != label) label = -1;
              }
            }
          }
        }
        if (label >= 0) {
          const auto hole_cells = static_cast<long long>(holes.size[label]);
          const auto diff = std::llabs(hole_cells - static_cast<long long>(fp.count));
          keep_better(best.hole, {diff, anchor, fp.orientation, fp_index});
        } else {
          const auto ufv = static_cast<long long>(underlying_free(layout, cols, anchor));
          keep_better(best.below, {ufv, anchor, fp.orientation, fp_index});
        }
      }
    }
  }
  return best;
}

Placement make_placement(const Footprint& fp, const Vec3i& anchor, double cell,
                         std::size_t group_index, PlacementRule rule) {
  const RigidTransform pose =
      RigidTransform::from_translation(cell * anchor.cast<double>()) * fp.to_local;
  Placement p;
  p.group_index = group_index;
  p.orientation = fp.orientation;
  p.cell_anchor = anchor;
  p.rotation = pose.rotation();
  p.translation = pose.translation();
  p.rule = rule;
  return p;
}

}  // namespace

std::size_t underlying_free_cells(const PackingLayout& layout, const Footprint& fp,
                                  const Vec3i& anchor) {
  return underlying_free(layout, columns_of(fp), anchor);
}

std::vector<Footprint> candidate_footprints(const PackItem& item, const BoxSpec& box,
                                            std::span<const int> orientations,
                                            const VoxelizeOptions& vox) {
  std::vector<int> all;
  if (orientations.empty()) {
    all.resize(24);
    std::iota(all.begin(), all.end(), 0);
    orientations = all;
  }
  std::vector<int> sorted(orientations.begin(), orientations.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

  std::vector<Footprint> out;
  for (int o : sorted) {
    Footprint fp = make_footprint(item, o, box.cell_size, vox);
    if (fp.dims().x() > box.columns_x() || fp.dims().y() > box.columns_y()) continue;
    if (fp.count == 0) continue;
    const bool duplicate = std::any_of(out.begin(), out.end(), [&](const Footprint& other) {
      return other.cells == fp.cells;
    });
    if (!duplicate) out.push_back(std::move(fp));
  }
  return out;
}

PlacementChoice choose_placement(const PackingLayout& layout, const PackItem& item,
                                 std::size_t group_index, std::span<const Footprint> footprints,
                                 const PackOptions& opts) {
  if (footprints.empty()) {
    throw DoesNotFit("group '" + item.label() + "' does not fit the box base in any orientation");
  }
  const HoleMap holes = label_holes(layout);
  std::vector<RuleBest> per(footprints.size());
  parallel_for(footprints.size(), opts.threads, [&](std::size_t i) {
    per[i] = search_footprint(layout, holes, footprints[i], i);
  });

  RuleBest best;
  for (const auto& r : per) {
    if (r.hole) keep_better(best.hole, *r.hole);
    if (r.below) keep_better(best.below, *r.below);
    if (r.raise) keep_better(best.raise, *r.raise);
  }
  const double cell = layout.box().cell_size;
  auto finish = [&](const Candidate& c, PlacementRule rule) {
    const Footprint& fp = footprints[c.footprint];
    return PlacementChoice{make_placement(fp, c.anchor, cell, group_index, rule), fp};
  };
  if (best.hole) return finish(*best.hole, PlacementRule::Hole);
  if (best.below) return finish(*best.below, PlacementRule::BelowHeight);
  if (best.raise) return finish(*best.raise, PlacementRule::RaiseHeight);
  throw DoesNotFit("group '" + item.label() + "' has no feasible position");
}

Placement place_group(const PackingLayout& layout, const PackItem& item,
                      std::span<const int> orientations, const PackOptions& opts) {
  const auto fps = candidate_footprints(item, layout.box(), orientations, opts.voxelize);
  return choose_placement(layout, item, 0, fps, opts).placement;
}

PackingLayout pack_all(std::span<const PackItem> items, const BoxSpec& box, const PackOptions& opts) {
  PackingLayout layout(box);
  for (std::size_t idx : sort_groups(items)) {
    const auto fps = candidate_footprints(items[idx], box, {}, opts.voxelize);
    const auto choice = choose_placement(layout, items[idx], idx, fps, opts);
    layout.insert(choice.placement, choice.footprint, items[idx].material_volume);
  }
  return layout;
}

double utilization(const PackingLayout& layout) {
  if (layout.placements().empty() || layout.height_cells() == 0) {
    throw EmptyLayout("utilization of an empty layout");
  }
  const auto& b = layout.box();
  return layout.material_volume() / (b.base_w * b.base_d * layout.h());
}

}  // namespace dpack
