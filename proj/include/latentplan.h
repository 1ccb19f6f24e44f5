#ifndef LATENTPLAN_H
#define LATENTPLAN_H

#include <stddef.h>
#include <stdint.h>

#if defined(LP_BUILDING_LIBRARY)
#define LP_API __attribute__((visibility("default")))
#else
#define LP_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lp_status {
  LP_OK = 0,
  LP_ERR_INVALID_ARGUMENT = 1,
  LP_ERR_PARSE = 2,
  LP_ERR_ILLEGAL_MOVE = 3,
  LP_ERR_NUMERICAL = 4,
  LP_ERR_IO = 5,
  LP_ERR_DEGENERATE = 6,
  LP_ERR_CONFIG = 7,
  LP_ERR_SHAPE = 8,
  LP_ERR_UNBOUNDED = 9,
  LP_ERR_SETUP = 10,
  LP_ERR_INTERNAL = 100
} lp_status;

/* Message of the last failed call on this thread; empty after success. */
LP_API const char* lp_last_error(void);
LP_API const char* lp_status_name(lp_status status);
LP_API const char* lp_version(void);
/* Keeps large freed buffers mapped; call once at startup. */
LP_API void lp_tune_allocator(void);

typedef struct lp_dataset lp_dataset;
typedef struct lp_model lp_model;
typedef struct lp_axis lp_axis;
typedef struct lp_engine lp_engine;
typedef struct lp_projection lp_projection;

/* ---- datasets ---------------------------------------------------------- */

typedef struct lp_ingest_report {
  size_t rows;
  size_t accepted;
  size_t skipped;
} lp_ingest_report;

/* Rows are FEN<TAB>probability. white_relative = 0 reads the probability as
   the side to move's; non-zero reads it as White's. */
LP_API lp_status lp_dataset_ingest(const char* path, int white_relative, int shuffle, uint64_t seed,
                                   lp_dataset** out, lp_ingest_report* report);
/* Written White-relative. */
LP_API lp_status lp_dataset_write(const lp_dataset* ds, const char* path);
LP_API size_t lp_dataset_size(const lp_dataset* ds);
LP_API lp_status lp_dataset_split(const lp_dataset* ds, double holdout_fraction, lp_dataset** train,
                                  lp_dataset** holdout);
LP_API void lp_dataset_free(lp_dataset* ds);

/* ---- models ------------------------------------------------------------ */

/* preset: "tiny", "small" or "base". */
LP_API lp_status lp_model_init(const char* preset, uint64_t seed, lp_model** out);
LP_API lp_status lp_model_load(const char* path, lp_model** out);
LP_API lp_status lp_model_save(const lp_model* model, const char* path);
LP_API int lp_model_dim(const lp_model* model);
LP_API size_t lp_model_parameter_count(const lp_model* model);
/* out receives n rows of lp_model_dim floats. */
LP_API lp_status lp_model_embed_fens(const lp_model* model, const char* const* fens, size_t n, float* out);
LP_API void lp_model_free(lp_model* model);

typedef struct lp_train_options {
  double delta;
  double tau;
  double learning_rate;
  double momentum;
  int steps;
  int checkpoint_every;       /* 0: final checkpoint only */
  uint64_t seed;
  const char* checkpoint_dir; /* NULL: no checkpoint files */
  const char* loss_log;       /* NULL: no log file */
} lp_train_options;

LP_API void lp_train_options_default(lp_train_options* options);

/* Called after every step. */
typedef void (*lp_step_fn)(int step, double loss, void* user);

LP_API lp_status lp_train(const lp_dataset* ds, const char* preset, const lp_train_options* options,
                          lp_step_fn on_step, void* user, lp_model** out);

/* Mean held-out cosine of delta-positive and other pairs over random pairs. */
LP_API lp_status lp_pair_scan(const lp_model* model, const lp_dataset* ds, double delta, size_t pairs,
                              uint64_t seed, double* positive_mean, double* negative_mean);

/* ---- advantage axis ---------------------------------------------------- */

/* Mean embedding of rows with p_white == 1 minus that of rows with 0. */
LP_API lp_status lp_axis_from_dataset(const lp_model* model, const lp_dataset* ds, lp_axis** out);
LP_API lp_status lp_axis_load(const char* path, lp_axis** out);
LP_API lp_status lp_axis_save(const lp_axis* axis, const char* path);
LP_API double lp_axis_norm(const lp_axis* axis);
LP_API int lp_axis_dim(const lp_axis* axis);
LP_API void lp_axis_counts(const lp_axis* axis, uint64_t* white, uint64_t* black);
/* cos(z, a) for each FEN. */
LP_API lp_status lp_axis_score_fens(const lp_model* model, const lp_axis* axis, const char* const* fens, size_t n,
                                    double* out);
LP_API void lp_axis_free(lp_axis* axis);

/* ---- engine ------------------------------------------------------------ */

typedef struct lp_plan_options {
  int beam_width;
  int depth;
  int adversarial;
  int paper_literal;
  int max_depth;
} lp_plan_options;

LP_API void lp_plan_options_default(lp_plan_options* options);

/* The engine keeps its own references to model and axis. */
LP_API lp_status lp_engine_create(const lp_model* model, const lp_axis* axis, const lp_plan_options* options,
                                  lp_engine** out);
/* key=value config naming checkpoint, axis, beam_width, depth, ... */
LP_API lp_status lp_engine_load(const char* config_path, lp_engine** out);
/* history_fens: earlier positions of the game, oldest first (may be NULL).
   uci_move receives coordinate notation, at least 6 bytes. */
LP_API lp_status lp_engine_select(const lp_engine* engine, const char* fen, const char* const* history_fens,
                                  size_t history_len, char* uci_move, size_t uci_move_size, double* utility);
/* UCI protocol on stdin/stdout until quit or end of input. */
LP_API lp_status lp_engine_serve_stdio(const lp_engine* engine);
LP_API void lp_engine_free(lp_engine* engine);

/* ---- matches and ratings ----------------------------------------------- */

typedef struct lp_match_options {
  const char* opponent;             /* "random-mover", "material-greedy" or "uci:<command>" */
  const char* const* engine_options; /* "Name=value" for a UCI opponent */
  size_t engine_option_count;
  int games;
  int movetime_ms;
  uint64_t seed;
  const char* pgn_path;     /* NULL: not written */
  const char* summary_path; /* NULL: not written */
} lp_match_options;

typedef struct lp_match_result {
  int wins;
  int draws;
  int losses;
  double score;
} lp_match_result;

LP_API void lp_match_options_default(lp_match_options* options);
/* Called after each game (1-based) with the running tally. */
typedef void (*lp_game_fn)(int game, const lp_match_result* so_far, void* user);
LP_API lp_status lp_match_run(const lp_engine* engine, const lp_match_options* options, lp_game_fn on_game,
                              void* user, lp_match_result* out);

typedef struct lp_elo_result {
  double rating;
  double lower;
  double upper;
  double draw_nu;
} lp_elo_result;

LP_API lp_status lp_elo_estimate(const double* anchors, const int* wins, const int* draws, const int* losses,
                                 size_t n, lp_elo_result* out);

/* ---- visualisation ----------------------------------------------------- */

/* PCA fitted on the embeddings of up to max_points rows of ds. */
LP_API lp_status lp_projection_fit(const lp_model* model, const lp_dataset* ds, size_t max_points,
                                   lp_projection** out);
LP_API void lp_projection_explained(const lp_projection* p, double* first, double* second);
/* Any path may be NULL to skip that file. */
LP_API lp_status lp_viz_scatter(const lp_model* model, const lp_axis* axis, const lp_projection* p,
                                const lp_dataset* ds, size_t max_points, const char* svg_path,
                                const char* tsv_path);
/* moves: space-separated coordinate notation from the start position. */
LP_API lp_status lp_viz_trajectory(const lp_model* model, const lp_axis* axis, const lp_projection* p,
                                   const char* moves, const char* svg_path, const char* tsv_path);
LP_API void lp_projection_free(lp_projection* p);

#ifdef __cplusplus
}
#endif

#endif
