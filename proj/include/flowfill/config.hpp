#pragma once

#include <string>

#include "flowfill/pipeline.hpp"

namespace flowfill {

// Run settings backed by a flat key-value text file ("key = value", '#'
// comments). Unknown keys are rejected.
struct RunConfig {
  PipelineConfig pipeline;
  std::string frames_dir;
  std::string masks_dir;
  std::string out_dir;
  // External ingestion paths. flow_dir switches to the file-backed estimator;
  // edges_dir supplies completed edge maps; fills_dir supplies single-image
  // fills for the external fallback.
  std::string flow_dir;
  std::string edges_dir;
  std::string fills_dir;
  double edge_binarize_threshold = 0.5;
};

RunConfig parse_config_text(const std::string& text);
RunConfig read_config_file(const std::string& path);

FusionDomain parse_domain(const std::string& value);
EdgeStrategy parse_edge_strategy(const std::string& value);

}  // namespace flowfill
