#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "percolab/connectivity.hpp"
#include "percolab/estimate.hpp"
#include "percolab/models.hpp"

namespace percolab {

std::string_view version();

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes);

struct EventConfig {
  std::string kind = "point";  // point, q, half_space, constrained_half_space
  std::vector<Direction> directions;
  std::optional<Direction> cone_axis;  // q events; defaults to the direction itself
  double delta = 1.0;
  std::vector<double> n;
  double alpha = kDefaultAlpha;
  bool coarse = true;

  /// Event family N -> EventSpec along `s`.
  EventFamily family(const LatticeSpec& lattice, const Direction& s) const;
};

struct OutputConfig {
  std::filesystem::path dir = ".";
  std::string prefix;  // defaults to the subcommand name
};

/// Parsed experiment file. Sections absent from the file stay empty; each subcommand
/// states which ones it needs.
struct ExperimentConfig {
  std::uint64_t hash = 0;  // of the canonical JSON, so formatting does not matter
  std::filesystem::path base_dir;  // relative input paths resolve against this
  std::optional<ModelSpec> model;
  std::optional<EventConfig> event;
  std::optional<MCConfig> mc;
  OutputConfig output;
  std::string canonical;  // canonical JSON text, re-read by subcommand sections
};

/// Throws ConfigInvalid naming the offending key.
ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = ".");
ExperimentConfig load_config(const std::filesystem::path& path);

const std::vector<std::string>& subcommands();

struct RunOptions {
  std::optional<std::filesystem::path> output_dir;
  std::optional<int> workers;
};

struct RunReport {
  int status = 0;  // 0 when every check of the subcommand passed, 1 otherwise
  std::vector<std::filesystem::path> artifacts;
  std::string summary;
};

RunReport run(const std::string& subcommand, const ExperimentConfig& config, const RunOptions& options = {});
RunReport run(const std::string& subcommand, const std::filesystem::path& config_path, const RunOptions& options = {});

}  // namespace percolab
