#include <cmath>
#include <cstdio>
#include <cstdint>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "morsegraph.h"

namespace {

struct Flags {
  std::string config;
  std::string out;
  std::string analysis;
  std::string truth;
  int workers = -1;
  int64_t seed = -1;
};

int fail(mg_status status) {
  std::fprintf(stderr, "morsegraph: %s: %s\n", mg_status_name(status), mg_last_error());
  return 1;
}

struct ConfigHandle {
  mg_config* ptr = nullptr;
  ~ConfigHandle() { mg_config_free(ptr); }
};

struct AnalysisHandle {
  mg_analysis* ptr = nullptr;
  ~AnalysisHandle() { mg_analysis_free(ptr); }
};

struct TruthHandle {
  mg_truth* ptr = nullptr;
  ~TruthHandle() { mg_truth_free(ptr); }
};

void print_table(char* text) {
  if (text) std::fputs(text, stdout);
  mg_string_free(text);
}

void print_analysis(const mg_analysis* a) {
  const size_t k = mg_analysis_node_count(a);
  std::vector<uint32_t> minimal(mg_analysis_minimal_nodes(a, nullptr, 0));
  mg_analysis_minimal_nodes(a, minimal.data(), minimal.size());
  std::printf("cubes              %llu\n", static_cast<unsigned long long>(mg_analysis_cube_count(a)));
  std::printf("Lipschitz bound    %.6g\n", mg_analysis_lipschitz(a));
  std::printf("Morse nodes        %zu\n", k);
  std::printf("minimal nodes     ");
  for (uint32_t p : minimal) std::printf(" %u", p);
  std::printf("\n");
  const int64_t goal = mg_analysis_goal_node(a);
  if (goal >= 0) {
    std::printf("goal node          %lld (%zu cubes, RoA %lld cubes)\n", static_cast<long long>(goal),
                mg_analysis_node_cubes(a, static_cast<uint32_t>(goal)),
                static_cast<long long>(mg_analysis_roa_size(a, static_cast<uint32_t>(goal))));
  } else {
    std::printf("goal node          none\n");
  }
  std::printf("unidentified       %.2f %%\n", 100 * mg_analysis_unidentified_ratio(a));
  std::printf("propagation steps  %llu\n",
              static_cast<unsigned long long>(mg_analysis_propagation_steps(a)));
  std::printf("wall time          %.2f s\n", mg_analysis_wall_time(a));
}

int load(const Flags& f, ConfigHandle& c) {
  const mg_status s = mg_config_load(f.config.c_str(), f.workers, f.seed, &c.ptr);
  return s == MG_OK ? 0 : fail(s);
}

int analyze(const Flags& f, AnalysisHandle& a) {
  ConfigHandle c;
  if (int rc = load(f, c)) return rc;
  const mg_status s = mg_analyze(c.ptr, &a.ptr);
  return s == MG_OK ? 0 : fail(s);
}

int cmd_analyze(const Flags& f) {
  AnalysisHandle a;
  if (int rc = analyze(f, a)) return rc;
  if (mg_status s = mg_analysis_write(a.ptr, f.out.c_str()); s != MG_OK) return fail(s);
  print_analysis(a.ptr);
  std::printf("artifacts          %s\n", f.out.c_str());
  return 0;
}

int cmd_ground_truth(const Flags& f) {
  ConfigHandle c;
  if (int rc = load(f, c)) return rc;
  TruthHandle t;
  if (mg_status s = mg_ground_truth(c.ptr, &t.ptr); s != MG_OK) return fail(s);
  if (mg_status s = mg_truth_write(t.ptr, f.out.c_str()); s != MG_OK) return fail(s);
  const auto points = mg_truth_point_count(t.ptr);
  const auto reached = mg_truth_reached_count(t.ptr);
  std::printf("lattice points     %llu\n", static_cast<unsigned long long>(points));
  std::printf("reached            %llu (%.2f %%)\n", static_cast<unsigned long long>(reached),
              points ? 100.0 * static_cast<double>(reached) / static_cast<double>(points) : 0.0);
  std::printf("wall time          %.2f s\n", mg_truth_wall_time(t.ptr));
  std::printf("artifacts          %s\n", f.out.c_str());
  return 0;
}

int cmd_compare(const Flags& f) {
  mg_report r;
  const char* out = f.out.empty() ? nullptr : f.out.c_str();
  if (mg_status s = mg_compare_dirs(f.analysis.c_str(), f.truth.c_str(), out, &r); s != MG_OK) {
    return fail(s);
  }
  print_table(mg_report_table(&r));
  if (r.goal_node < 0) std::fprintf(stderr, "morsegraph: warning: the analysis has no goal node\n");
  return 0;
}

int cmd_hybrid_eval(const Flags& f) {
  ConfigHandle c;
  if (int rc = load(f, c)) return rc;
  mg_hybrid_report r;
  const char* out = f.out.empty() ? nullptr : f.out.c_str();
  if (mg_status s = mg_hybrid_eval(c.ptr, out, &r); s != MG_OK) return fail(s);
  print_table(mg_hybrid_table(&r));
  return 0;
}

int cmd_export_dot(const Flags& f) {
  AnalysisHandle a;
  if (int rc = analyze(f, a)) return rc;
  const mg_status s = mg_analysis_write_dot(a.ptr, f.out.empty() ? nullptr : f.out.c_str());
  return s == MG_OK ? 0 : fail(s);
}

int cmd_export_roa(const Flags& f) {
  AnalysisHandle a;
  if (int rc = analyze(f, a)) return rc;
  if (mg_status s = mg_analysis_write_roa(a.ptr, f.out.c_str()); s != MG_OK) return fail(s);
  std::printf("artifacts          %s\n", f.out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Morse graphs and regions of attraction of sampled closed-loop dynamics"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(mg_version()));
  Flags f;
  app.add_option("--workers", f.workers, "worker threads (default: all cores)")->check(CLI::NonNegativeNumber);
  app.add_option("--seed", f.seed, "random seed override")->check(CLI::NonNegativeNumber);
  app.fallthrough();

  auto with_config = [&](CLI::App* sub, const std::string& out_default, const std::string& out_help) {
    sub->add_option("--config", f.config, "analysis config file")->required()->check(CLI::ExistingFile);
    auto* out = sub->add_option("--out", f.out, out_help);
    if (!out_default.empty()) out->default_val(out_default);
  };

  auto* analyze_cmd = app.add_subcommand("analyze", "compute the Morse graph and RoAs, write all artifacts");
  with_config(analyze_cmd, "out/analysis", "output directory");
  auto* truth_cmd = app.add_subcommand("ground-truth", "brute-force the reach set on a lattice");
  with_config(truth_cmd, "out/truth", "output directory");
  auto* compare_cmd = app.add_subcommand("compare", "score an analysis against a ground truth");
  compare_cmd->add_option("--analysis", f.analysis, "analysis directory")->required()->check(CLI::ExistingDirectory);
  compare_cmd->add_option("--truth", f.truth, "ground-truth directory")->required()->check(CLI::ExistingDirectory);
  compare_cmd->add_option("--out", f.out, "directory for report.txt");
  auto* hybrid_cmd = app.add_subcommand("hybrid-eval", "success rates of a hybrid controller and its parts");
  with_config(hybrid_cmd, "", "directory for hybrid.json");
  auto* dot_cmd = app.add_subcommand("export-dot", "write the Morse graph in DOT format");
  with_config(dot_cmd, "", "output file (default: stdout)");
  auto* roa_cmd = app.add_subcommand("export-roa", "write the RoA table, raster and cube sets");
  with_config(roa_cmd, "out/roa", "output directory");

  CLI11_PARSE(app, argc, argv);

  if (analyze_cmd->parsed()) return cmd_analyze(f);
  if (truth_cmd->parsed()) return cmd_ground_truth(f);
  if (compare_cmd->parsed()) return cmd_compare(f);
  if (hybrid_cmd->parsed()) return cmd_hybrid_eval(f);
  if (dot_cmd->parsed()) return cmd_export_dot(f);
  if (roa_cmd->parsed()) return cmd_export_roa(f);
  return 1;
}
