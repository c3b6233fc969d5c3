#pragma once

// TOML run configuration shared by every subcommand.
//
//   name = "prop1"                      # optional label
//   [model]
//   family = "single_spike"             # see model_json.hpp for families
//   mixing = "independent_components"   # optional
//   [model.params]                      # family parameters
//   alpha = 1.5
//   [noise]
//   law = "gaussian"                    # gaussian | rademacher | uniform_std | scale_mixture
//   sigma = 3.0                         # scale_mixture only
//   [plan]
//   n = 10                              # or a list for sample-size grids
//   d_grid = [100, 1000, 10000]
//   replicates = 100
//   metrics = ["angles", "eigenvalue_ratios"]
//   tracked = [1, 2, 3]                 # default 1..n
//   tracked_groups = [[1, 2]]
//   k = 1                               # sphericity index for `spectrum`
//   ambient = false
//   [thresholds]                        # any field of hdlss::Thresholds
//   [run]
//   seed = 20090101
//   jobs = 0
//   out = "out"
//   formats = ["csv", "json", "text"]
//
// Unknown keys anywhere are errors reported with their line.

#include <filesystem>
#include <set>
#include <string>
#include <string_view>

#include "hdlss/harness.hpp"

namespace hdlss::cli {

inline constexpr std::string_view kSpecVersion = "1.0";

enum class OutputFormat { Csv, Json, Text };

std::string_view to_string(OutputFormat f) noexcept;
OutputFormat format_from_string(std::string_view name);

struct RunConfig {
  std::string name;
  ExperimentPlan plan;  // carries model, noise, seed, thresholds and jobs
  std::size_t k = 1;
  std::filesystem::path out_dir = "out";
  std::set<OutputFormat> formats{OutputFormat::Csv, OutputFormat::Json, OutputFormat::Text};

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Throws Error(Configuration) with "source:line: message" diagnostics.
RunConfig parse_config(std::string_view text, const std::string& source = "<config>");
RunConfig load_config(const std::filesystem::path& path);

/// Canonical TOML text; parse_config(dump_config(c)) reproduces c.
std::string dump_config(const RunConfig& config);

}  // namespace hdlss::cli
