#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "dpack/disassembly.hpp"
#include "dpack/packing.hpp"

namespace dpack::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kInvalidInput = 2,
  kDoesNotFit = 3,
  kNoAdmissible = 4,
};

struct RunConfig {
  std::filesystem::path mechanism_path;
  double base_w = 1.0;
  double base_d = 1.0;
  int max_groups = 3;
  double target_efficiency = 0.8;
  int beam_width = 4;
  std::optional<double> cell_size;  // default min(W, D) / 64
  double angular_step_deg = 6.0;
  int param_steps = 32;
  std::filesystem::path out_dir = "out";
  bool dump_hierarchy = false;
  int threads = 1;

  /// Throws InvalidInput naming the first bad field.
  void validate() const;
  SearchCriteria criteria() const;
  BoxSpec final_box() const;
};

/// Parses "WxD" with decimal floats. Throws InvalidInput.
std::pair<double, double> parse_box(const std::string& text);

/// Full pipeline: validate, disassemble, pack, write artifacts.
int cmd_pack(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Disassembly only: metrics.json with the chosen node, chosen.json, and the
/// hierarchy dump when requested.
int cmd_disassemble(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Prints the minimum OBB of an OBJ mesh with 9 significant digits.
int cmd_obb(const std::filesystem::path& mesh_path, double angular_step_deg, std::ostream& out,
            std::ostream& err);

/// Writes a built-in fixture mechanism as `<dir>/<name>.json` plus meshes.
int cmd_fixture(const std::string& name, const std::filesystem::path& dir, std::ostream& out,
                std::ostream& err);

/// Command-line front end. Flags override the optional --config file.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dpack::cli
