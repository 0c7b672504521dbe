#include "primitect/config.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <thread>

namespace primitect {

namespace {

std::string trim(const std::string& s) {
  const size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw InvalidInput("config: bad numeric value for " + key + ": " + v);
  }
}

int to_int(const std::string& key, const std::string& v) {
  const double d = to_double(key, v);
  const int i = static_cast<int>(d);
  if (static_cast<double>(i) != d) {
    throw InvalidInput("config: integer expected for " + key + ": " + v);
  }
  return i;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "on") return true;
  if (v == "false" || v == "0" || v == "off") return false;
  throw InvalidInput("config: boolean expected for " + key + ": " + v);
}

using Setter = std::function<void(PipelineConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"run.seed",
       [](PipelineConfig& c, const std::string& v) {
         c.seed = static_cast<unsigned>(to_int("seed", v));
       }},
      {"raster.cell_size",
       [](PipelineConfig& c, const std::string& v) { c.cell_size = to_double("cell_size", v); }},
      {"raster.interval",
       [](PipelineConfig& c, const std::string& v) { c.interval = to_double("interval", v); }},
      {"raster.base_elevation",
       [](PipelineConfig& c, const std::string& v) { c.base_elevation = to_double("base_elevation", v); }},
      {"ground.enabled",
       [](PipelineConfig& c, const std::string& v) { c.ground_filter = to_bool("enabled", v); }},
      {"ground.window",
       [](PipelineConfig& c, const std::string& v) { c.ground_window = to_int("window", v); }},
      {"ground.slope_tol",
       [](PipelineConfig& c, const std::string& v) { c.ground_slope_tol = to_double("slope_tol", v); }},
      {"extract.min_area",
       [](PipelineConfig& c, const std::string& v) { c.thresholds.min_area = to_double("min_area", v); }},
      {"extract.max_area",
       [](PipelineConfig& c, const std::string& v) { c.thresholds.max_area = to_double("max_area", v); }},
      {"extract.min_height",
       [](PipelineConfig& c, const std::string& v) { c.thresholds.min_height = to_double("min_height", v); }},
      {"extract.min_circularity",
       [](PipelineConfig& c, const std::string& v) {
         c.thresholds.min_circularity = to_double("min_circularity", v);
       }},
      {"division.n_resample",
       [](PipelineConfig& c, const std::string& v) { c.division.n_resample = to_int("n_resample", v); }},
      {"division.d_tilde_max",
       [](PipelineConfig& c, const std::string& v) { c.division.d_tilde_max = to_double("d_tilde_max", v); }},
      {"division.scale_jump_tol",
       [](PipelineConfig& c, const std::string& v) {
         c.division.scale_jump_tol = to_double("scale_jump_tol", v);
       }},
      {"division.mode",
       [](PipelineConfig& c, const std::string& v) {
         if (v == "pa") c.division.mode = DistanceMode::PA;
         else if (v == "mpa") c.division.mode = DistanceMode::MPA;
         else throw InvalidInput("config: mode must be pa or mpa, got " + v);
       }},
      {"fit.voxel",
       [](PipelineConfig& c, const std::string& v) { c.field_voxel = to_double("voxel", v); }},
      {"fit.pad",
       [](PipelineConfig& c, const std::string& v) { c.field_pad = to_double("pad", v); }},
      {"fit.accept_rms",
       [](PipelineConfig& c, const std::string& v) { c.selection.accept_rms = to_double("accept_rms", v); }},
      {"fit.discretize_res",
       [](PipelineConfig& c, const std::string& v) {
         c.selection.discretize_res = to_int("discretize_res", v);
       }},
      {"fit.fallback_max_corners",
       [](PipelineConfig& c, const std::string& v) {
         c.selection.fallback_max_corners = to_int("fallback_max_corners", v);
       }},
      {"ed.node_count",
       [](PipelineConfig& c, const std::string& v) { c.ed_node_count = to_int("node_count", v); }},
      {"ed.k",
       [](PipelineConfig& c, const std::string& v) { c.ed_k = to_int("k", v); }},
      {"ed.w_rot",
       [](PipelineConfig& c, const std::string& v) { c.weights.w_rot = to_double("w_rot", v); }},
      {"ed.w_reg",
       [](PipelineConfig& c, const std::string& v) { c.weights.w_reg = to_double("w_reg", v); }},
      {"ed.w_data",
       [](PipelineConfig& c, const std::string& v) { c.weights.w_data = to_double("w_data", v); }},
      {"ed.max_iter",
       [](PipelineConfig& c, const std::string& v) { c.lm.max_iter = to_int("max_iter", v); }},
      {"ed.rel_tol",
       [](PipelineConfig& c, const std::string& v) { c.lm.rel_tol = to_double("rel_tol", v); }},
      {"ed.mu0",
       [](PipelineConfig& c, const std::string& v) { c.lm.mu0 = to_double("mu0", v); }},
      {"benchmark.trials",
       [](PipelineConfig& c, const std::string& v) { c.bench_trials = to_int("trials", v); }},
      {"benchmark.sigma_scale",
       [](PipelineConfig& c, const std::string& v) { c.bench_sigma_scale = to_double("sigma_scale", v); }},
      {"output.mesh_res",
       [](PipelineConfig& c, const std::string& v) { c.mesh_res = to_int("mesh_res", v); }},
      {"output.sample_density",
       [](PipelineConfig& c, const std::string& v) { c.sample_density = to_double("sample_density", v); }},
  };
  return table;
}

}  // namespace

PipelineConfig parse_config(const std::string& text) {
  PipelineConfig cfg;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw InvalidInput("config line " + std::to_string(lineno) +
                           ": unterminated section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw InvalidInput("config line " + std::to_string(lineno) +
                         ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const std::string full = section + "." + key;
    const auto it = setters().find(full);
    if (it == setters().end()) {
      throw InvalidInput("config line " + std::to_string(lineno) +
                         ": unknown key " + full);
    }
    it->second(cfg, value);
  }
  return cfg;
}

PipelineConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot read config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_config(const PipelineConfig& c) {
  std::ostringstream out;
  auto num = [](double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return std::string(buf);
  };
  out << "[run]\nseed = " << c.seed << "\n";
  out << "[raster]\ncell_size = " << num(c.cell_size)
      << "\ninterval = " << num(c.interval)
      << "\nbase_elevation = " << num(c.base_elevation) << "\n";
  out << "[ground]\nenabled = " << (c.ground_filter ? "true" : "false")
      << "\nwindow = " << c.ground_window
      << "\nslope_tol = " << num(c.ground_slope_tol) << "\n";
  out << "[extract]\nmin_area = " << num(c.thresholds.min_area)
      << "\nmax_area = " << num(c.thresholds.max_area)
      << "\nmin_height = " << num(c.thresholds.min_height)
      << "\nmin_circularity = " << num(c.thresholds.min_circularity) << "\n";
  out << "[division]\nn_resample = " << c.division.n_resample
      << "\nd_tilde_max = " << num(c.division.d_tilde_max)
      << "\nscale_jump_tol = " << num(c.division.scale_jump_tol)
      << "\nmode = " << (c.division.mode == DistanceMode::PA ? "pa" : "mpa")
      << "\n";
  out << "[fit]\nvoxel = " << num(c.field_voxel)
      << "\npad = " << num(c.field_pad)
      << "\naccept_rms = " << num(c.selection.accept_rms)
      << "\ndiscretize_res = " << c.selection.discretize_res
      << "\nfallback_max_corners = " << c.selection.fallback_max_corners
      << "\n";
  out << "[ed]\nnode_count = " << c.ed_node_count << "\nk = " << c.ed_k
      << "\nw_rot = " << num(c.weights.w_rot)
      << "\nw_reg = " << num(c.weights.w_reg)
      << "\nw_data = " << num(c.weights.w_data)
      << "\nmax_iter = " << c.lm.max_iter << "\nrel_tol = " << num(c.lm.rel_tol)
      << "\nmu0 = " << num(c.lm.mu0) << "\n";
  out << "[benchmark]\ntrials = " << c.bench_trials
      << "\nsigma_scale = " << num(c.bench_sigma_scale) << "\n";
  out << "[output]\nmesh_res = " << c.mesh_res
      << "\nsample_density = " << num(c.sample_density) << "\n";
  return out.str();
}

std::string config_hash(const PipelineConfig& cfg) {
  const std::string text = serialize_config(cfg);
  unsigned long long h = 1469598103934665603ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx", h);
  return buf;
}

int thread_cap() {
  if (const char* env = std::getenv("PRIMITECT_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace primitect
