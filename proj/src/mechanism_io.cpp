#include "dpack/mechanism_io.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "dpack/mesh_io.hpp"
#include "json.hpp"

namespace dpack {
namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw InvalidInput(where + ": expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) throw InvalidInput(where + ": unknown field '" + key + "'");
  }
}

const json& require(const json& obj, const std::string& key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw InvalidInput(where + ": missing field '" + key + "'");
  return *it;
}

std::string get_string(const json& obj, const std::string& key, const std::string& where) {
  const json& v = require(obj, key, where);
  if (!v.is_string()) throw InvalidInput(where + ": '" + key + "' must be a string");
  return v.get<std::string>();
}

double get_number(const json& v, const std::string& what) {
  if (!v.is_number()) throw InvalidInput(what + " must be a number");
  return v.get<double>();
}

template <int N>
Eigen::Matrix<double, N, 1> get_vector(const json& obj, const std::string& key, const std::string& where) {
  const json& v = require(obj, key, where);
  if (!v.is_array() || v.size() != N) {
    throw InvalidInput(where + ": '" + key + "' must be an array of " + std::to_string(N) + " numbers");
  }
  Eigen::Matrix<double, N, 1> out;
  for (int i = 0; i < N; ++i) out[i] = get_number(v[i], where + ": '" + key + "'");
  return out;
}

RigidTransform parse_pose(const json& obj, const std::string& where) {
  reject_unknown(obj, {"quaternion", "translation"}, where);
  const auto q = get_vector<4>(obj, "quaternion", where);
  const auto t = get_vector<3>(obj, "translation", where);
  const double n = q.norm();
  if (std::abs(n - 1.0) > 1e-3) {
    std::ostringstream os;
    os << where << ": quaternion norm " << n << " is not within 1e-3 of 1";
    throw InvalidInput(os.str());
  }
  return {Quat(q[0], q[1], q[2], q[3]), t};
}

Part parse_part(const json& obj, const std::filesystem::path& base_dir, std::size_t index) {
  const std::string where = "parts[" + std::to_string(index) + "]";
  reject_unknown(obj, {"id", "mesh_path", "rest_pose"}, where);
  Part p;
  p.id = get_string(obj, "id", where);
  p.mesh = read_obj(base_dir / get_string(obj, "mesh_path", where));
  auto pose = obj.find("rest_pose");
  if (pose != obj.end()) p.rest_pose = parse_pose(*pose, where + ".rest_pose");
  return p;
}

Joint parse_joint(const json& obj, std::size_t index) {
  const std::string where = "joints[" + std::to_string(index) + "]";
  reject_unknown(obj, {"id", "kind", "part_a", "part_b", "anchor", "anchor_b", "axis", "axis_a",
                       "axis_b", "limits", "ratio"},
                 where);
  Joint j;
  j.id = get_string(obj, "id", where);
  const std::string kind = get_string(obj, "kind", where);
  const auto k = parse_joint_kind(kind);
  if (!k) throw InvalidInput(where + ": unknown joint kind '" + kind + "'");
  j.kind = *k;
  j.part_a = get_string(obj, "part_a", where);
  j.part_b = get_string(obj, "part_b", where);
  if (obj.contains("anchor")) j.anchor = get_vector<3>(obj, "anchor", where);

  if (j.kind == JointKind::Gear2Gear) {
    if (obj.contains("axis")) throw InvalidInput(where + ": Gear2Gear uses axis_a/axis_b, not axis");
    j.axis = get_vector<3>(obj, "axis_a", where);
    j.axis_b = get_vector<3>(obj, "axis_b", where);
    j.anchor = get_vector<3>(obj, "anchor", where);
    j.anchor_b = obj.contains("anchor_b") ? Vec3(get_vector<3>(obj, "anchor_b", where)) : j.anchor;
    j.ratio = get_number(require(obj, "ratio", where), where + ": 'ratio'");
  } else {
    for (const char* key : {"axis_a", "axis_b", "anchor_b", "ratio"}) {
      if (obj.contains(key)) {
        throw InvalidInput(where + ": field '" + key + "' only applies to Gear2Gear joints");
      }
    }
    if (j.kind != JointKind::Fixed) {
      j.axis = get_vector<3>(obj, "axis", where);
      j.anchor = get_vector<3>(obj, "anchor", where);
    } else if (obj.contains("axis")) {
      j.axis = get_vector<3>(obj, "axis", where);
    }
  }

  if (j.kind != JointKind::Fixed) {
    const auto lim = get_vector<2>(obj, "limits", where);
    j.lo = lim[0];
    j.hi = lim[1];
  } else if (obj.contains("limits")) {
    throw InvalidInput(where + ": Fixed joints carry no limits");
  }
  return j;
}

json pose_json(const RigidTransform& t) {
  const Quat& q = t.rotation();
  return {{"quaternion", {q.w(), q.x(), q.y(), q.z()}},
          {"translation", {t.translation().x(), t.translation().y(), t.translation().z()}}};
}

json vec_json(const Vec3& v) { return {v.x(), v.y(), v.z()}; }

}  // namespace

Mechanism parse_mechanism(const std::string& json_text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw InvalidInput(std::string("mechanism document is not valid JSON: ") + e.what());
  }
  reject_unknown(doc, {"parts", "joints", "driving_part"}, "mechanism");
  Mechanism m;
  const json& parts = require(doc, "parts", "mechanism");
  if (!parts.is_array()) throw InvalidInput("mechanism: 'parts' must be an array");
  for (std::size_t i = 0; i < parts.size(); ++i) m.parts.push_back(parse_part(parts[i], base_dir, i));
  if (doc.contains("joints")) {
    const json& joints = doc["joints"];
    if (!joints.is_array()) throw InvalidInput("mechanism: 'joints' must be an array");
    for (std::size_t i = 0; i < joints.size(); ++i) m.joints.push_back(parse_joint(joints[i], i));
  }
  m.driving_part = get_string(doc, "driving_part", "mechanism");
  return m;
}

Mechanism load_mechanism(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_mechanism(ss.str(), path.parent_path());
}

std::filesystem::path save_mechanism(const Mechanism& m, const std::filesystem::path& dir,
                                     const std::string& name) {
  std::filesystem::create_directories(dir / "meshes");
  json doc;
  doc["driving_part"] = m.driving_part;
  doc["parts"] = json::array();
  for (const auto& p : m.parts) {
    const std::string rel = "meshes/" + name + "_" + p.id + ".obj";
    write_obj(dir / rel, p.mesh);
    doc["parts"].push_back({{"id", p.id}, {"mesh_path", rel}, {"rest_pose", pose_json(p.rest_pose)}});
  }
  doc["joints"] = json::array();
  for (const auto& j : m.joints) {
    json jj = {{"id", j.id}, {"kind", std::string(to_string(j.kind))}, {"part_a", j.part_a},
               {"part_b", j.part_b}, {"anchor", vec_json(j.anchor)}};
    if (j.kind == JointKind::Gear2Gear) {
      jj["axis_a"] = vec_json(j.axis);
      jj["axis_b"] = vec_json(j.axis_b);
      jj["anchor_b"] = vec_json(j.anchor_b);
      jj["ratio"] = j.ratio;
    } else {
      jj["axis"] = vec_json(j.axis);
    }
    if (j.kind != JointKind::Fixed) jj["limits"] = {j.lo, j.hi};
    doc["joints"].push_back(jj);
  }
  const auto path = dir / (name + ".json");
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path.string());
  out << doc.dump(2) << '\n';
  return path;
}

}  // namespace dpack
