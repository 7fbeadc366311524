#include "dpack/disassembly.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "dpack/errors.hpp"
#include "dpack/parallel.hpp"

namespace dpack {

ObbOptions OptimizerResolution::obb_options() const {
  ObbOptions o;
  o.angular_step = angular_step;
  return o;
}

void OptimizerResolution::validate() const {
  if (!(angular_step > 0.0) || angular_step > kPi / 4.0) {
    throw InvalidInput("angular step must be in (0, 45] degrees");
  }
  if (param_steps < 2) throw InvalidInput("param_steps must be at least 2");
  if (!(rel_tol >= 0.0)) throw InvalidInput("optimizer tolerance must be non-negative");
  if (max_sweeps < 1) throw InvalidInput("max_sweeps must be at least 1");
  if (!(penetration_eps >= 0.0)) throw InvalidInput("penetration eps must be non-negative");
}

void SearchCriteria::validate() const {
  if (max_groups < 1) throw InvalidInput("max groups must be at least 1");
  if (!(target_efficiency >= 0.0 && target_efficiency <= 1.0)) {
    throw InvalidInput("target efficiency must be in [0, 1]");
  }
  if (beam_width < 1) throw InvalidInput("beam width must be at least 1");
  if (threads < 1) throw InvalidInput("threads must be at least 1");
  if (!(trial_divisor >= 1.0)) throw InvalidInput("trial divisor must be at least 1");
  resolution.validate();
}

std::vector<std::string> HierarchyNode::uncut_joints(const Mechanism& m) const {
  std::vector<std::string> out;
  for (const auto& j : m.joints) {
    if (!cut.count(j.id)) out.push_back(j.id);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Per-group optimizer

namespace {

struct Evaluation {
  bool admissible = false;
  double volume = 0.0;
  Obb obb;
  PoseMap poses;
};

class GroupEvaluator {
 public:
  GroupEvaluator(const Mechanism& m, const GroupSkeleton& g, const OptimizerResolution& res)
      : sub_(sub_mechanism(m, g)), res_(res), free_(sub_.free_joints()) {
    for (const auto& p : sub_.parts) hulls_.push_back(convex_hull(p.mesh.vertices).vertices);
  }

  const Mechanism& sub() const { return sub_; }
  const std::vector<std::string>& free_joints() const { return free_; }

  Configuration to_config(const std::vector<double>& x) const {
    Configuration c;
    for (std::size_t i = 0; i < free_.size(); ++i) c.values[free_[i]] = x[i];
    return c;
  }

  const Evaluation& operator()(const std::vector<double>& x) {
    auto it = memo_.find(x);
    if (it != memo_.end()) return it->second;
    return memo_.emplace(x, evaluate(x)).first->second;
  }

 private:
  Evaluation evaluate(const std::vector<double>& x) const {
    Evaluation e;
    try {
      e.poses = forward_kinematics(sub_, to_config(x));
    } catch (const LoopClosureViolation&) {
      return e;
    }
    if (!penetrating_pairs(sub_, e.poses, res_.penetration_eps).empty()) return e;
    std::vector<Vec3> pts;
    for (std::size_t i = 0; i < sub_.parts.size(); ++i) {
      const RigidTransform& pose = e.poses.at(sub_.parts[i].id);
      for (const auto& v : hulls_[i]) pts.push_back(pose * v);
    }
    e.obb = min_obb(pts, res_.obb_options());
    e.volume = e.obb.volume();
    e.admissible = true;
    return e;
  }

  Mechanism sub_;
  OptimizerResolution res_;
  std::vector<std::string> free_;
  std::vector<std::vector<Vec3>> hulls_;
  std::map<std::vector<double>, Evaluation> memo_;
};

// Strict improvement, so that ties keep the earlier point.
bool better(const Evaluation& cand, double current) {
  return cand.admissible && cand.volume < current - 1e-12 * std::abs(current);
}

std::vector<double> descend(GroupEvaluator& eval, std::vector<double> x,
                            const OptimizerResolution& res) {
  const auto& sub = eval.sub();
  double vol = eval(x).volume;
  for (int sweep = 0; sweep < res.max_sweeps; ++sweep) {
    const double before = vol;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const Joint& j = sub.joint(eval.free_joints()[i]);
      const double span = j.hi - j.lo;
      if (span <= 0.0) continue;
      const double h = span / (res.param_steps - 1);
      for (int s = 0; s < res.param_steps; ++s) {
        auto y = x;
        y[i] = s + 1 == res.param_steps ? j.hi : j.lo + h * s;
        const auto& e = eval(y);
        if (better(e, vol)) {
          x = std::move(y);
          vol = e.volume;
        }
      }
      // Refine between grid neighbours of the best point.
      for (double step = h / 2.0; step > h / 64.0; step /= 2.0) {
        for (double dir : {-1.0, 1.0}) {
          auto y = x;
          y[i] = std::clamp(x[i] + dir * step, j.lo, j.hi);
          if (y[i] == x[i]) continue;
          const auto& e = eval(y);
          if (better(e, vol)) {
            x = std::move(y);
            vol = e.volume;
          }
        }
      }
    }
    if (before - vol <= res.rel_tol * before) break;
  }
  return x;
}

}  // namespace

GroupOptimum minimize_group_obb(const Mechanism& m, const GroupSkeleton& g,
                                const OptimizerResolution& res, const Configuration* warm) {
  res.validate();
  GroupEvaluator eval(m, g, res);
  const auto& sub = eval.sub();
  const Configuration rest = rest_configuration(sub);

  std::vector<std::vector<double>> starts;
  std::vector<double> r;
  for (const auto& id : eval.free_joints()) r.push_back(rest.at(id));
  starts.push_back(r);
  if (warm) {
    std::vector<double> w;
    for (const auto& id : eval.free_joints()) {
      const Joint& j = sub.joint(id);
      auto it = warm->values.find(id);
      w.push_back(it == warm->values.end() ? rest.at(id) : std::clamp(it->second, j.lo, j.hi));
    }
    if (w != r) starts.push_back(std::move(w));
  }

  std::optional<std::vector<double>> best;
  double best_vol = 0.0;
  for (const auto& s : starts) {
    if (!eval(s).admissible) continue;
    auto x = descend(eval, s, res);
    const double v = eval(x).volume;
    if (!best || v < best_vol - 1e-12 * best_vol) {
      best = std::move(x);
      best_vol = v;
    }
  }
  if (!best) {
    std::string names;
    for (const auto& p : g.part_ids) names += (names.empty() ? "" : ", ") + p;
    throw NoAdmissibleConfiguration("group {" + names + "} penetrates at every start configuration");
  }
  const auto& e = eval(*best);
  return {eval.to_config(*best), e.obb, e.poses};
}

Group make_group(const Mechanism& m, const GroupSkeleton& g, GroupOptimum opt) {
  Group out;
  out.part_ids = g.part_ids;
  out.internal_joints = g.internal_joints;
  out.config = std::move(opt.config);
  out.part_poses = std::move(opt.poses);
  out.obb = opt.obb;
  for (const auto& id : g.part_ids) out.material_volume += mesh_volume(m.part(id).mesh);
  return out;
}

// ---------------------------------------------------------------------------
// Hierarchy

namespace {

using SkeletonKey = std::pair<std::vector<std::string>, std::vector<std::string>>;

SkeletonKey key_of(const GroupSkeleton& g) { return {g.part_ids, g.internal_joints}; }

Configuration combined_config(const HierarchyNode& node) {
  Configuration c;
  for (const auto& g : node.groups) c.values.insert(g.config.values.begin(), g.config.values.end());
  return c;
}

double sum_volumes(const std::vector<Group>& groups) {
  double v = 0.0;
  for (const auto& g : groups) v += g.obb.volume();
  return v;
}

}  // namespace

HierarchyNode root_node(const Mechanism& m, const OptimizerResolution& res) {
  HierarchyNode node;
  for (const auto& skel : split_by_joints(m, {})) {
    node.groups.push_back(make_group(m, skel, minimize_group_obb(m, skel, res)));
  }
  node.total_volume = sum_volumes(node.groups);
  return node;
}

HierarchyNode cut_joint(const Mechanism& m, const HierarchyNode& node, const std::string& joint,
                        const OptimizerResolution& res) {
  m.joint(joint);  // UnknownJoint
  if (node.cut.count(joint)) throw InvalidInput("joint '" + joint + "' is already cut");
  HierarchyNode child;
  child.parent_cut = node.cut;
  child.cut = node.cut;
  child.cut.insert(joint);
  std::map<SkeletonKey, const Group*> existing;
  for (const auto& g : node.groups) existing[key_of(g.skeleton())] = &g;
  const Configuration warm = combined_config(node);
  for (const auto& skel : split_by_joints(m, child.cut)) {
    auto it = existing.find(key_of(skel));
    if (it != existing.end()) {
      child.groups.push_back(*it->second);
    } else {
      child.groups.push_back(make_group(m, skel, minimize_group_obb(m, skel, res, &warm)));
    }
  }
  child.total_volume = sum_volumes(child.groups);
  return child;
}

double joint_cost(const Mechanism& m, const HierarchyNode& node, const std::string& joint,
                  const OptimizerResolution& res) {
  return node.total_volume - cut_joint(m, node, joint, res).total_volume;
}

std::vector<HierarchyNode> expand_node(const Mechanism& m, const HierarchyNode& node,
                                       const OptimizerResolution& res) {
  std::vector<HierarchyNode> children;
  for (const auto& j : node.uncut_joints(m)) children.push_back(cut_joint(m, node, j, res));
  std::stable_sort(children.begin(), children.end(), [](const auto& a, const auto& b) {
    return std::tie(a.total_volume, a.cut) < std::tie(b.total_volume, b.cut);
  });
  return children;
}

// ---------------------------------------------------------------------------
// Packing of nodes

double total_material_volume(const Mechanism& m) {
  double v = 0.0;
  for (const auto& p : m.parts) v += mesh_volume(p.mesh);
  return v;
}

std::vector<PackItem> pack_items(const Mechanism& m, const HierarchyNode& node) {
  std::vector<PackItem> items;
  for (const auto& g : node.groups) {
    PackItem item;
    item.part_ids = g.part_ids;
    for (const auto& id : g.part_ids) {
      item.meshes.push_back(transform_mesh(m.part(id).mesh, g.part_poses.at(id)));
    }
    item.obb = g.obb;
    item.material_volume = g.material_volume;
    items.push_back(std::move(item));
  }
  return items;
}

std::optional<PackingLayout> trial_pack(const Mechanism& m, const HierarchyNode& node,
                                        const BoxSpec& box, int threads) {
  const auto items = pack_items(m, node);
  PackOptions opts;
  opts.threads = threads;
  try {
    return pack_all(items, box, opts);
  } catch (const DoesNotFit&) {
    return std::nullopt;
  }
}

// ---------------------------------------------------------------------------
// Search

namespace {

bool rank_less(const HierarchyNode& a, const HierarchyNode& b) {
  const auto ka = std::make_tuple(a.total_volume, a.groups.size());
  const auto kb = std::make_tuple(b.total_volume, b.groups.size());
  if (ka != kb) return ka < kb;
  return a.cut < b.cut;
}

// Group optima are shared between nodes: a component gets optimized once, the
// first time any node asks for it, warm-started from that node's parent.
class GroupCache {
 public:
  GroupCache(const Mechanism& m, const OptimizerResolution& res, int threads)
      : m_(m), res_(res), threads_(threads) {}

  void request(const GroupSkeleton& g, const Configuration* warm) {
    const auto k = key_of(g);
    if (done_.count(k) || pending_keys_.count(k)) return;
    pending_keys_.insert(k);
    pending_.push_back({g, warm ? std::optional<Configuration>(*warm) : std::nullopt});
  }

  void resolve() {
    std::vector<Group> out(pending_.size());
    parallel_for(pending_.size(), threads_, [&](std::size_t i) {
      const auto& p = pending_[i];
      out[i] = make_group(m_, p.skeleton,
                          minimize_group_obb(m_, p.skeleton, res_, p.warm ? &*p.warm : nullptr));
    });
    for (std::size_t i = 0; i < out.size(); ++i) {
      done_.emplace(key_of(pending_[i].skeleton), std::move(out[i]));
    }
    pending_.clear();
    pending_keys_.clear();
  }

  const Group& get(const GroupSkeleton& g) const { return done_.at(key_of(g)); }

 private:
  struct Pending {
    GroupSkeleton skeleton;
    std::optional<Configuration> warm;
  };
  const Mechanism& m_;
  OptimizerResolution res_;
  int threads_;
  std::map<SkeletonKey, Group> done_;
  std::set<SkeletonKey> pending_keys_;
  std::vector<Pending> pending_;
};

}  // namespace

SearchResult bfs_disassemble(const Mechanism& m, double base_w, double base_d,
                             const SearchCriteria& criteria) {
  criteria.validate();
  const BoxSpec trial_box = BoxSpec::with_divisor(base_w, base_d, criteria.trial_divisor);
  trial_box.validate();

  GroupCache cache(m, criteria.resolution, criteria.threads);
  auto build = [&](std::set<std::string> cut, std::set<std::string> parent_cut,
                   const std::vector<GroupSkeleton>& skels) {
    HierarchyNode n;
    n.cut = std::move(cut);
    n.parent_cut = std::move(parent_cut);
    for (const auto& s : skels) n.groups.push_back(cache.get(s));
    n.total_volume = sum_volumes(n.groups);
    return n;
  };

  SearchResult result;
  std::vector<HierarchyNode> level_nodes;
  {
    const auto skels = split_by_joints(m, {});
    for (const auto& s : skels) cache.request(s, nullptr);
    cache.resolve();
    if (static_cast<int>(skels.size()) <= criteria.max_groups) {
      level_nodes.push_back(build({}, {}, skels));
    }
  }

  std::optional<std::size_t> accepted;
  for (int level = 0; level < criteria.max_groups && !level_nodes.empty(); ++level) {
    std::sort(level_nodes.begin(), level_nodes.end(), rank_less);
    if (static_cast<int>(level_nodes.size()) > criteria.beam_width) {
      level_nodes.resize(static_cast<std::size_t>(criteria.beam_width));
    }

    // Trial packs of the kept nodes.
    std::vector<std::optional<PackingLayout>> layouts(level_nodes.size());
    parallel_for(level_nodes.size(), criteria.threads, [&](std::size_t i) {
      layouts[i] = trial_pack(m, level_nodes[i], trial_box);
    });
    const double material = total_material_volume(m);
    for (std::size_t i = 0; i < level_nodes.size(); ++i) {
      ExploredNode e{level_nodes[i], level, std::nullopt, 0.0};
      if (layouts[i]) {
        e.trial_h = layouts[i]->h();
        e.efficiency = material / (base_w * base_d * layouts[i]->h());
      }
      result.explored.push_back(std::move(e));
      const auto& last = result.explored.back();
      if (last.efficiency && *last.efficiency >= criteria.target_efficiency) {
        accepted = result.explored.size() - 1;
        break;
      }
    }
    if (accepted || level + 1 >= criteria.max_groups) break;

    // Children of the kept nodes, parents visited in cut order.
    std::vector<const HierarchyNode*> parents;
    for (const auto& n : level_nodes) parents.push_back(&n);
    std::sort(parents.begin(), parents.end(),
              [](const HierarchyNode* a, const HierarchyNode* b) { return a->cut < b->cut; });
    struct ChildPlan {
      std::set<std::string> cut;
      std::set<std::string> parent_cut;
      std::vector<GroupSkeleton> skels;
    };
    std::vector<ChildPlan> plans;
    std::set<std::set<std::string>> seen;
    for (const HierarchyNode* p : parents) {
      const Configuration warm = combined_config(*p);
      for (const auto& j : p->uncut_joints(m)) {
        auto cut = p->cut;
        cut.insert(j);
        if (!seen.insert(cut).second) continue;
        auto skels = split_by_joints(m, cut);
        if (static_cast<int>(skels.size()) > criteria.max_groups) continue;
        for (const auto& s : skels) cache.request(s, &warm);
        plans.push_back({std::move(cut), p->cut, std::move(skels)});
      }
    }
    cache.resolve();
    std::vector<HierarchyNode> next;
    for (auto& plan : plans) {
      next.push_back(build(std::move(plan.cut), std::move(plan.parent_cut), plan.skels));
    }
    level_nodes = std::move(next);
  }

  if (accepted) {
    result.chosen = result.explored[*accepted].node;
    result.efficiency = *result.explored[*accepted].efficiency;
    return result;
  }
  const ExploredNode* best = nullptr;
  for (const auto& e : result.explored) {
    if (!e.efficiency) continue;
    if (!best) {
      best = &e;
      continue;
    }
    const auto ke = std::make_tuple(-*e.efficiency, e.node.groups.size());
    const auto kb = std::make_tuple(-*best->efficiency, best->node.groups.size());
    if (ke < kb || (ke == kb && e.node.cut < best->node.cut)) best = &e;
  }
  if (!best) {
    throw GroupTooLarge("no explored group set fits the " + std::to_string(base_w) + " x " +
                        std::to_string(base_d) + " base");
  }
  result.chosen = best->node;
  result.efficiency = *best->efficiency;
  return result;
}

}  // namespace dpack
