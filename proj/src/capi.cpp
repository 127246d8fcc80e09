#include "morsegraph.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <new>
#include <sstream>
#include <string>

#include "mg/pipeline.hpp"

struct mg_config {
  mg::Config config;
  std::string resolved;
};

struct mg_analysis {
  mg::Config config;
  mg::Analysis analysis;
  std::string summary;
};

struct mg_truth {
  mg::Config config;
  mg::TruthRun run;
};

namespace {

thread_local std::string g_last_error;

template <class Fn>
mg_status guard(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return MG_OK;
  } catch (const mg::ConfigError& e) {
    g_last_error = e.what();
    return MG_ERR_CONFIG;
  } catch (const mg::IoError& e) {
    g_last_error = e.what();
    return MG_ERR_IO;
  } catch (const mg::PropagationError& e) {
    g_last_error = e.what();
    return MG_ERR_PROPAGATION;
  } catch (const mg::DomainError& e) {
    g_last_error = e.what();
    return MG_ERR_DOMAIN;
  } catch (const mg::InvalidArgument& e) {
    g_last_error = e.what();
    return MG_ERR_INVALID_ARGUMENT;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return MG_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return MG_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return MG_ERR_INTERNAL;
  }
}

mg_status null_argument(const char* what) {
  g_last_error = std::string(what) + " must not be NULL";
  return MG_ERR_INVALID_ARGUMENT;
}

mg::ConfigOverrides overrides(int workers, int64_t seed) {
  mg::ConfigOverrides o;
  if (workers >= 0) o.workers = static_cast<unsigned>(workers);
  if (seed >= 0) o.seed = static_cast<std::uint64_t>(seed);
  return o;
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

mg::ComparisonReport from_c(const mg_report& r) {
  mg::ComparisonReport c;
  if (r.goal_node >= 0) c.goal_node = static_cast<std::uint32_t>(r.goal_node);
  c.tp_ratio = r.tp_ratio;
  c.fp_count = r.fp_count;
  c.unidentified_ratio = r.unidentified_ratio;
  c.propagation_steps = r.propagation_steps;
  c.roa_cubes = r.roa_cubes;
  c.tp_points = r.tp_points;
  c.reached_points = r.reached_points;
  c.lattice_points = r.lattice_points;
  return c;
}

mg_controller_stats to_c(const mg::ControllerStats& s) {
  return {s.successes, s.success_rate, s.mean_steps};
}

mg::ControllerStats from_c(const mg_controller_stats& s) {
  mg::ControllerStats c;
  c.successes = s.successes;
  c.success_rate = s.success_rate;
  c.mean_steps = s.mean_steps;
  return c;
}

}  // namespace

extern "C" {

const char* mg_last_error(void) { return g_last_error.c_str(); }

const char* mg_status_name(mg_status status) {
  switch (status) {
    case MG_OK: return "ok";
    case MG_ERR_INVALID_ARGUMENT: return "invalid argument";
    case MG_ERR_CONFIG: return "config error";
    case MG_ERR_IO: return "i/o error";
    case MG_ERR_PROPAGATION: return "propagation error";
    case MG_ERR_DOMAIN: return "domain error";
    case MG_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* mg_version(void) { return "1.0.0"; }

mg_status mg_config_load(const char* path, int workers, int64_t seed, mg_config** out) {
  if (!path) return null_argument("path");
  if (!out) return null_argument("out");
  *out = nullptr;
  return guard([&] {
    auto* c = new mg_config{mg::load_config(path, overrides(workers, seed)), {}};
    c->resolved = c->config.resolved.dump(2);
    *out = c;
  });
}

mg_status mg_config_parse(const char* text, const char* base_dir, int workers, int64_t seed,
                          mg_config** out) {
  if (!text) return null_argument("text");
  if (!out) return null_argument("out");
  *out = nullptr;
  return guard([&] {
    auto* c = new mg_config{
        mg::parse_config(text, "<config>", base_dir ? base_dir : ".", overrides(workers, seed)), {}};
    c->resolved = c->config.resolved.dump(2);
    *out = c;
  });
}

void mg_config_free(mg_config* config) { delete config; }

const char* mg_config_resolved(const mg_config* config) {
  return config ? config->resolved.c_str() : "";
}

mg_status mg_analyze(const mg_config* config, mg_analysis** out) {
  if (!config) return null_argument("config");
  if (!out) return null_argument("out");
  *out = nullptr;
  return guard([&] {
    auto* a = new mg_analysis{config->config, mg::run_analysis(config->config), {}};
    std::ostringstream os;
    mg::write_summary(os, a->config, a->analysis);
    a->summary = os.str();
    *out = a;
  });
}

void mg_analysis_free(mg_analysis* analysis) { delete analysis; }

mg_status mg_analysis_write(const mg_analysis* analysis, const char* dir) {
  if (!analysis) return null_argument("analysis");
  if (!dir) return null_argument("dir");
  return guard([&] { mg::write_analysis(analysis->config, analysis->analysis, dir); });
}

mg_status mg_analysis_write_dot(const mg_analysis* analysis, const char* path) {
  if (!analysis) return null_argument("analysis");
  return guard([&] {
    if (!path) {
      mg::write_dot(std::cout, analysis->analysis.mg);
      std::cout.flush();
      return;
    }
    const std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream os(p);
    if (!os) throw mg::IoError(std::string("cannot open '") + path + "' for writing");
    mg::write_dot(os, analysis->analysis.mg);
    os.flush();
    if (!os) throw mg::IoError(std::string("write failed for '") + path + "'");
  });
}

mg_status mg_analysis_write_roa(const mg_analysis* analysis, const char* dir) {
  if (!analysis) return null_argument("analysis");
  if (!dir) return null_argument("dir");
  return guard([&] { mg::write_roa_files(analysis->config, analysis->analysis, dir); });
}

uint64_t mg_analysis_cube_count(const mg_analysis* analysis) {
  return analysis ? analysis->analysis.grid.cube_count() : 0;
}

size_t mg_analysis_node_count(const mg_analysis* analysis) {
  return analysis ? analysis->analysis.mg.size() : 0;
}

int64_t mg_analysis_escape_node(const mg_analysis* analysis) {
  if (!analysis || !analysis->analysis.mg.star_node) return -1;
  return *analysis->analysis.mg.star_node;
}

size_t mg_analysis_minimal_nodes(const mg_analysis* analysis, uint32_t* nodes, size_t capacity) {
  if (!analysis) return 0;
  const auto minimal = mg::minimal_nodes(analysis->analysis.mg);
  for (size_t i = 0; nodes && i < minimal.size() && i < capacity; ++i) nodes[i] = minimal[i];
  return minimal.size();
}

size_t mg_analysis_node_cubes(const mg_analysis* analysis, uint32_t node) {
  if (!analysis || node >= analysis->analysis.mg.size()) return 0;
  return analysis->analysis.mg.nodes[node].cubes.size();
}

int64_t mg_analysis_goal_node(const mg_analysis* analysis) {
  if (!analysis || !analysis->analysis.goal.node) return -1;
  return *analysis->analysis.goal.node;
}

int64_t mg_analysis_roa_size(const mg_analysis* analysis, uint32_t node) {
  if (!analysis) return -1;
  for (const auto& [p, cubes] : analysis->analysis.assign.maximal_roas) {
    if (p == node) return static_cast<int64_t>(cubes.size());
  }
  return -1;
}

double mg_analysis_lipschitz(const mg_analysis* analysis) {
  return analysis ? analysis->analysis.lipschitz : 0.0;
}

double mg_analysis_unidentified_ratio(const mg_analysis* analysis) {
  return analysis ? analysis->analysis.unidentified : 0.0;
}

uint64_t mg_analysis_propagation_steps(const mg_analysis* analysis) {
  return analysis ? analysis->analysis.map->propagation_steps() : 0;
}

double mg_analysis_wall_time(const mg_analysis* analysis) {
  return analysis ? analysis->analysis.timing.total : 0.0;
}

const char* mg_analysis_summary(const mg_analysis* analysis) {
  return analysis ? analysis->summary.c_str() : "";
}

mg_status mg_ground_truth(const mg_config* config, mg_truth** out) {
  if (!config) return null_argument("config");
  if (!out) return null_argument("out");
  *out = nullptr;
  return guard([&] { *out = new mg_truth{config->config, mg::run_ground_truth(config->config)}; });
}

void mg_truth_free(mg_truth* truth) { delete truth; }

mg_status mg_truth_write(const mg_truth* truth, const char* dir) {
  if (!truth) return null_argument("truth");
  if (!dir) return null_argument("dir");
  return guard([&] { mg::write_ground_truth(truth->config, truth->run, dir); });
}

uint64_t mg_truth_point_count(const mg_truth* truth) {
  return truth ? truth->run.truth.point_count() : 0;
}

uint64_t mg_truth_reached_count(const mg_truth* truth) {
  return truth ? truth->run.truth.reached_count() : 0;
}

double mg_truth_wall_time(const mg_truth* truth) { return truth ? truth->run.seconds : 0.0; }

mg_status mg_compare_dirs(const char* analysis_dir, const char* truth_dir, const char* out_dir,
                          mg_report* out) {
  if (!analysis_dir) return null_argument("analysis_dir");
  if (!truth_dir) return null_argument("truth_dir");
  if (!out) return null_argument("out");
  return guard([&] {
    const mg::ComparisonReport r = mg::compare_dirs(analysis_dir, truth_dir);
    *out = mg_report{r.goal_node ? static_cast<int64_t>(*r.goal_node) : -1,
                     r.tp_ratio,
                     r.fp_count,
                     r.unidentified_ratio,
                     r.propagation_steps,
                     r.roa_cubes,
                     r.tp_points,
                     r.reached_points,
                     r.lattice_points};
    if (out_dir) {
      std::filesystem::create_directories(out_dir);
      const auto path = std::filesystem::path(out_dir) / "report.txt";
      std::ofstream os(path);
      if (!os) throw mg::IoError("cannot open '" + path.string() + "' for writing");
      mg::write_report(os, r);
      os.flush();
      if (!os) throw mg::IoError("write failed for '" + path.string() + "'");
    }
  });
}

mg_status mg_hybrid_eval(const mg_config* config, const char* out_dir, mg_hybrid_report* out) {
  if (!config) return null_argument("config");
  if (!out) return null_argument("out");
  return guard([&] {
    const mg::HybridReport r = mg::hybrid_eval(config->config);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    *out = mg_hybrid_report{r.samples,
                            to_c(r.hybrid),
                            to_c(r.primary),
                            to_c(r.fallback),
                            r.ratio_vs_primary.value_or(nan),
                            r.ratio_vs_fallback.value_or(nan),
                            r.common_primary,
                            r.common_fallback};
    if (out_dir) {
      std::filesystem::create_directories(out_dir);
      const auto path = std::filesystem::path(out_dir) / "hybrid.json";
      std::ofstream os(path);
      if (!os) throw mg::IoError("cannot open '" + path.string() + "' for writing");
      mg::write_hybrid_report(os, r);
      os.flush();
      if (!os) throw mg::IoError("write failed for '" + path.string() + "'");
      mg::write_manifest(out_dir, "hybrid-eval", config->config);
    }
  });
}

char* mg_report_table(const mg_report* report) {
  if (!report) return nullptr;
  std::ostringstream os;
  mg::write_report_table(os, from_c(*report));
  return dup_string(os.str());
}

char* mg_hybrid_table(const mg_hybrid_report* report) {
  if (!report) return nullptr;
  mg::HybridReport r;
  r.samples = report->samples;
  r.hybrid = from_c(report->hybrid);
  r.primary = from_c(report->primary);
  r.fallback = from_c(report->fallback);
  if (!std::isnan(report->ratio_vs_primary)) r.ratio_vs_primary = report->ratio_vs_primary;
  if (!std::isnan(report->ratio_vs_fallback)) r.ratio_vs_fallback = report->ratio_vs_fallback;
  r.common_primary = report->common_primary;
  r.common_fallback = report->common_fallback;
  std::ostringstream os;
  mg::write_hybrid_table(os, r);
  return dup_string(os.str());
}

void mg_string_free(char* text) { std::free(text); }

}  // extern "C"
