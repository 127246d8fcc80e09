#ifndef MORSEGRAPH_H
#define MORSEGRAPH_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(MG_BUILDING_LIBRARY)
#    define MG_API __declspec(dllexport)
#  else
#    define MG_API __declspec(dllimport)
#  endif
#else
#  define MG_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mg_status {
  MG_OK = 0,
  MG_ERR_INVALID_ARGUMENT = 1,
  MG_ERR_CONFIG = 2,
  MG_ERR_IO = 3,
  MG_ERR_PROPAGATION = 4,
  MG_ERR_DOMAIN = 5,
  MG_ERR_INTERNAL = 6
} mg_status;

typedef struct mg_config mg_config;
typedef struct mg_analysis mg_analysis;
typedef struct mg_truth mg_truth;

/* Message for the most recent failure on the calling thread. */
MG_API const char* mg_last_error(void);
MG_API const char* mg_status_name(mg_status status);
MG_API const char* mg_version(void);

/* workers < 0 and seed < 0 keep the values from the file. */
MG_API mg_status mg_config_load(const char* path, int workers, int64_t seed, mg_config** out);
MG_API mg_status mg_config_parse(const char* text, const char* base_dir, int workers, int64_t seed,
                                 mg_config** out);
MG_API void mg_config_free(mg_config* config);
/* Resolved configuration as JSON; owned by the handle. */
MG_API const char* mg_config_resolved(const mg_config* config);

MG_API mg_status mg_analyze(const mg_config* config, mg_analysis** out);
MG_API void mg_analysis_free(mg_analysis* analysis);
/* Every analysis artifact plus manifest.json. */
MG_API mg_status mg_analysis_write(const mg_analysis* analysis, const char* dir);
/* NULL path writes to stdout. */
MG_API mg_status mg_analysis_write_dot(const mg_analysis* analysis, const char* path);
/* roa.csv, roa.ppm and the per-node cube sets. */
MG_API mg_status mg_analysis_write_roa(const mg_analysis* analysis, const char* dir);

MG_API uint64_t mg_analysis_cube_count(const mg_analysis* analysis);
MG_API size_t mg_analysis_node_count(const mg_analysis* analysis);
/* -1 when there is no escape node. */
MG_API int64_t mg_analysis_escape_node(const mg_analysis* analysis);
/* Copies up to `capacity` ids into `nodes`; returns the total count. */
MG_API size_t mg_analysis_minimal_nodes(const mg_analysis* analysis, uint32_t* nodes, size_t capacity);
MG_API size_t mg_analysis_node_cubes(const mg_analysis* analysis, uint32_t node);
/* -1 when no unique minimal node meets the goal ball. */
MG_API int64_t mg_analysis_goal_node(const mg_analysis* analysis);
/* Cubes in the maximal RoA of a minimal node, or -1 for other nodes. */
MG_API int64_t mg_analysis_roa_size(const mg_analysis* analysis, uint32_t node);
MG_API double mg_analysis_lipschitz(const mg_analysis* analysis);
MG_API double mg_analysis_unidentified_ratio(const mg_analysis* analysis);
MG_API uint64_t mg_analysis_propagation_steps(const mg_analysis* analysis);
MG_API double mg_analysis_wall_time(const mg_analysis* analysis);
/* Summary JSON as written to summary.json; owned by the handle. */
MG_API const char* mg_analysis_summary(const mg_analysis* analysis);

MG_API mg_status mg_ground_truth(const mg_config* config, mg_truth** out);
MG_API void mg_truth_free(mg_truth* truth);
MG_API mg_status mg_truth_write(const mg_truth* truth, const char* dir);
MG_API uint64_t mg_truth_point_count(const mg_truth* truth);
MG_API uint64_t mg_truth_reached_count(const mg_truth* truth);
MG_API double mg_truth_wall_time(const mg_truth* truth);

typedef struct mg_report {
  int64_t goal_node; /* -1 when none */
  double tp_ratio;
  uint64_t fp_count;
  double unidentified_ratio;
  uint64_t propagation_steps;
  uint64_t roa_cubes;
  uint64_t tp_points;
  uint64_t reached_points;
  uint64_t lattice_points;
} mg_report;

/* Compares saved analysis and ground-truth directories. When out_dir is not
   NULL, report.txt is written there. */
MG_API mg_status mg_compare_dirs(const char* analysis_dir, const char* truth_dir,
                                 const char* out_dir, mg_report* out);

typedef struct mg_controller_stats {
  uint64_t successes;
  double success_rate;
  double mean_steps;
} mg_controller_stats;

typedef struct mg_hybrid_report {
  uint64_t samples;
  mg_controller_stats hybrid, primary, fallback;
  double ratio_vs_primary;  /* NaN when undefined */
  double ratio_vs_fallback; /* NaN when undefined */
  /* Starts where the hybrid and the other controller both succeed. */
  uint64_t common_primary, common_fallback;
} mg_hybrid_report;

/* When out_dir is not NULL, hybrid.json and manifest.json are written. */
MG_API mg_status mg_hybrid_eval(const mg_config* config, const char* out_dir, mg_hybrid_report* out);

/* Human-readable tables; free with mg_string_free. */
MG_API char* mg_report_table(const mg_report* report);
MG_API char* mg_hybrid_table(const mg_hybrid_report* report);
MG_API void mg_string_free(char* text);

#ifdef __cplusplus
}
#endif

#endif
