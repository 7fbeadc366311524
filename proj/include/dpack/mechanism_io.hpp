#pragma once

#include <filesystem>
#include <string>

#include "dpack/mechanism.hpp"

namespace dpack {

/// Loads a mechanism document. Mesh paths resolve against the document's
/// directory. Unknown fields are rejected; rest-pose quaternions within 1e-3
/// of unit length are normalized, others rejected. Throws InvalidInput.
/// The result is not validated against mechanism invariants; call
/// validate_mechanism() for that.
Mechanism load_mechanism(const std::filesystem::path& path);

/// Parses a document held in memory; `base_dir` anchors relative mesh paths.
Mechanism parse_mechanism(const std::string& json_text, const std::filesystem::path& base_dir);

/// Writes `<dir>/<name>.json` and one `<dir>/meshes/<part id>.obj` per part.
std::filesystem::path save_mechanism(const Mechanism& m, const std::filesystem::path& dir,
                                     const std::string& name);

}  // namespace dpack
