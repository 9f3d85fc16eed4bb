#include "flowfill/config.hpp"

#include <fstream>
#include <sstream>

#include "flowfill/errors.hpp"

namespace flowfill {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    size_t pos = 0;
    double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw DataError("config: bad numeric value for '" + key + "': " + value);
  }
}

int parse_int(const std::string& key, const std::string& value) {
  try {
    size_t pos = 0;
    int v = std::stoi(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw DataError("config: bad integer value for '" + key + "': " + value);
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw DataError("config: bad boolean value for '" + key + "': " + value);
}

std::vector<int> parse_int_list(const std::string& key, const std::string& value) {
  std::vector<int> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_int(key, item));
  }
  return out;
}

}  // namespace

FusionDomain parse_domain(const std::string& value) {
  if (value == "gradient") return FusionDomain::kGradient;
  if (value == "color") return FusionDomain::kColor;
  throw DataError("config: domain must be 'gradient' or 'color', got '" + value + "'");
}

EdgeStrategy parse_edge_strategy(const std::string& value) {
  if (value == "none") return EdgeStrategy::kNone;
  if (value == "link") return EdgeStrategy::kLink;
  if (value == "external") return EdgeStrategy::kExternal;
  throw DataError("config: edge_strategy must be none|link|external, got '" + value + "'");
}

RunConfig parse_config_text(const std::string& text) {
  RunConfig cfg;
  std::stringstream stream(text);
  std::string line;
  int line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw DataError("config: line " + std::to_string(line_no) + " is not 'key = value'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw DataError("config: empty key on line " + std::to_string(line_no));

    PipelineConfig& p = cfg.pipeline;
    if (key == "tau")
      p.chain.tau = parse_double(key, value);
    else if (key == "anchors")
      p.chain.nonlocal_anchors = parse_int_list(key, value);
    else if (key == "max_chain_length")
      p.chain.max_chain_length = parse_int(key, value);
    else if (key == "temperature")
      p.fusion.temperature = parse_double(key, value);
    else if (key == "domain")
      p.fusion.domain = parse_domain(value);
    else if (key == "fusion_solver_tolerance")
      p.fusion.solver_tolerance = parse_double(key, value);
    else if (key == "fusion_solver_max_iterations")
      p.fusion.max_iterations = parse_int(key, value);
    else if (key == "edge_strategy")
      p.edge_strategy = parse_edge_strategy(value);
    else if (key == "dilation_radius")
      p.dilation_radius = parse_int(key, value);
    else if (key == "max_pipeline_iterations")
      p.max_pipeline_iterations = parse_int(key, value);
    else if (key == "use_nonlocal")
      p.use_nonlocal = parse_bool(key, value);
    else if (key == "canny_sigma")
      p.canny_sigma = parse_double(key, value);
    else if (key == "canny_low")
      p.canny_low = parse_double(key, value);
    else if (key == "canny_high")
      p.canny_high = parse_double(key, value);
    else if (key == "flow_solver_tolerance")
      p.flow_solver_tolerance = parse_double(key, value);
    else if (key == "flow_solver_max_iterations")
      p.flow_solver_max_iterations = parse_int(key, value);
    else if (key == "fallback") {
      if (value == "diffusion")
        p.fallback = SingleImageFillMethod::kDiffusion;
      else if (value == "external")
        p.fallback = SingleImageFillMethod::kExternal;
      else
        throw DataError("config: fallback must be diffusion|external, got '" + value + "'");
    } else if (key == "threads")
      p.threads = parse_int(key, value);
    else if (key == "checkpoint_dir")
      p.checkpoint_dir = value;
    else if (key == "frames_dir")
      cfg.frames_dir = value;
    else if (key == "masks_dir")
      cfg.masks_dir = value;
    else if (key == "out_dir")
      cfg.out_dir = value;
    else if (key == "flow_dir")
      cfg.flow_dir = value;
    else if (key == "edges_dir")
      cfg.edges_dir = value;
    else if (key == "fills_dir")
      cfg.fills_dir = value;
    else if (key == "edge_binarize_threshold")
      cfg.edge_binarize_threshold = parse_double(key, value);
    else
      throw DataError("config: unknown key '" + key + "' on line " + std::to_string(line_no));
  }
  return cfg;
}

RunConfig read_config_file(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw DataError("config: cannot open " + path);
  std::stringstream buffer;
  buffer << file.rdbuf();
  return parse_config_text(buffer.str());
}

}  // namespace flowfill
