/* Exercises the C API from C. */
#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "latentplan.h"

static int failures = 0;

#define CHECK(cond)                                                   \
  do {                                                                \
    if (!(cond)) {                                                    \
      fprintf(stderr, "%s:%d: CHECK failed: %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                     \
    }                                                                 \
  } while (0)

#define CHECK_OK(call)                                                                      \
  do {                                                                                      \
    lp_status s_ = (call);                                                                  \
    if (s_ != LP_OK) {                                                                      \
      fprintf(stderr, "%s:%d: %s -> %s: %s\n", __FILE__, __LINE__, #call, lp_status_name(s_), \
              lp_last_error());                                                             \
      ++failures;                                                                           \
    }                                                                                       \
  } while (0)

static void on_game(int game, const lp_match_result* r, void* user) {
  (void)r;
  *(int*)user = game;
}

int main(int argc, char** argv) {
  const char* dir = argc > 1 ? argv[1] : ".";
  char data_path[512], model_path[512], axis_path[512], svg_path[512], tsv_path[512];
  snprintf(data_path, sizeof data_path, "%s/capi_data.tsv", dir);
  snprintf(model_path, sizeof model_path, "%s/capi_model.lpck", dir);
  snprintf(axis_path, sizeof axis_path, "%s/capi_axis.lpax", dir);
  snprintf(svg_path, sizeof svg_path, "%s/capi_traj.svg", dir);
  snprintf(tsv_path, sizeof tsv_path, "%s/capi_traj.tsv", dir);

  lp_tune_allocator();
  CHECK(strlen(lp_version()) > 0);

  /* errors */
  lp_model* model = NULL;
  CHECK(lp_model_init("huge", 1, &model) == LP_ERR_CONFIG);
  CHECK(model == NULL);
  CHECK(strstr(lp_last_error(), "huge") != NULL);
  CHECK(lp_model_init("tiny", 1, NULL) == LP_ERR_INVALID_ARGUMENT);
  CHECK(lp_model_load("/nonexistent/model.lpck", &model) == LP_ERR_IO);

  CHECK_OK(lp_model_init("tiny", 7, &model));
  CHECK(lp_last_error()[0] == '\0');
  CHECK(lp_model_dim(model) == 128);
  CHECK(lp_model_parameter_count(model) > 100000);

  const char* fens[3] = {"rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1",
                         "rnbqkbnr/pppppppp/8/8/4P3/8/PPPP1PPP/RNBQKBNR b KQkq - 0 1",
                         "4k3/8/8/8/8/8/8/4K2R w K - 0 1"};
  float z[3 * 128];
  CHECK_OK(lp_model_embed_fens(model, fens, 3, z));
  for (int i = 0; i < 3; ++i) {
    double n = 0;
    for (int j = 0; j < 128; ++j) n += (double)z[i * 128 + j] * z[i * 128 + j];
    CHECK(fabs(n - 1) < 1e-4);
  }
  const char* bad[1] = {"not a fen"};
  CHECK(lp_model_embed_fens(model, bad, 1, z) == LP_ERR_PARSE);

  CHECK_OK(lp_model_save(model, model_path));
  lp_model* loaded = NULL;
  CHECK_OK(lp_model_load(model_path, &loaded));
  float z2[3 * 128];
  CHECK_OK(lp_model_embed_fens(loaded, fens, 3, z2));
  CHECK(memcmp(z, z2, sizeof z2) == 0);
  lp_model_free(loaded);

  /* dataset: side-to-move probabilities */
  FILE* f = fopen(data_path, "w");
  CHECK(f != NULL);
  fprintf(f, "# toy\n");
  fprintf(f, "4k3/8/8/8/8/8/8/QQ2K3 w - - 0 1\t1\n");
  fprintf(f, "4k3/8/8/8/8/8/8/RR2K3 b - - 0 1\t0\n");
  fprintf(f, "qq2k3/8/8/8/8/8/8/4K3 w - - 0 1\t0\n");
  fprintf(f, "rr2k3/8/8/8/8/8/8/4K3 b - - 0 1\t1\n");
  fprintf(f, "%s\t0.5\n", fens[0]);
  fprintf(f, "%s\t0.45\n", fens[1]);
  fprintf(f, "broken row\n");
  fclose(f);
  lp_dataset* ds = NULL;
  lp_ingest_report rep;
  CHECK_OK(lp_dataset_ingest(data_path, 0, 0, 0, &ds, &rep));
  CHECK(rep.accepted == 6 && rep.skipped == 1);
  CHECK(lp_dataset_size(ds) == 6);

  lp_axis* axis = NULL;
  CHECK_OK(lp_axis_from_dataset(model, ds, &axis));
  uint64_t w = 0, b = 0;
  lp_axis_counts(axis, &w, &b);
  CHECK(w == 2 && b == 2);
  CHECK(lp_axis_norm(axis) > 0);
  CHECK_OK(lp_axis_save(axis, axis_path));
  lp_axis* axis2 = NULL;
  CHECK_OK(lp_axis_load(axis_path, &axis2));
  CHECK(lp_axis_dim(axis2) == 128);
  double scores[3];
  CHECK_OK(lp_axis_score_fens(model, axis2, fens, 3, scores));
  for (int i = 0; i < 3; ++i) CHECK(scores[i] >= -1 && scores[i] <= 1);
  lp_axis_free(axis2);

  /* engine */
  lp_plan_options plan;
  lp_plan_options_default(&plan);
  CHECK(plan.beam_width == 3 && plan.depth == 2 && plan.adversarial == 1);
  plan.depth = 1;
  lp_engine* engine = NULL;
  CHECK_OK(lp_engine_create(model, axis, &plan, &engine));
  char move[8];
  double utility = 0;
  CHECK_OK(lp_engine_select(engine, fens[0], NULL, 0, move, sizeof move, &utility));
  CHECK(strlen(move) == 4);
  CHECK(lp_engine_select(engine, "7k/6Q1/6K1/8/8/8/8/8 b - - 0 1", NULL, 0, move, sizeof move, NULL) ==
        LP_ERR_INVALID_ARGUMENT);
  plan.beam_width = 0;
  lp_engine* broken = NULL;
  CHECK(lp_engine_create(model, axis, &plan, &broken) == LP_ERR_CONFIG);

  lp_match_options mo;
  lp_match_options_default(&mo);
  mo.games = 2;
  int last = 0;
  lp_match_result mr;
  CHECK_OK(lp_match_run(engine, &mo, on_game, &last, &mr));
  CHECK(last == 2);
  CHECK(mr.wins + mr.draws + mr.losses == 2);
  mo.opponent = "grandmaster";
  CHECK(lp_match_run(engine, &mo, NULL, NULL, &mr) == LP_ERR_CONFIG);
  mo.opponent = "uci:/nonexistent/engine";
  CHECK(lp_match_run(engine, &mo, NULL, NULL, &mr) == LP_ERR_SETUP);

  /* ratings */
  double anchors[1] = {2000};
  int wins[1] = {50}, draws[1] = {0}, losses[1] = {50};
  lp_elo_result elo;
  CHECK_OK(lp_elo_estimate(anchors, wins, draws, losses, 1, &elo));
  CHECK(fabs(elo.rating - 2000) < 5);
  int none[1] = {0}, all[1] = {10};
  CHECK(lp_elo_estimate(anchors, none, all, none, 1, &elo) == LP_ERR_UNBOUNDED);

  /* plots */
  lp_projection* proj = NULL;
  CHECK_OK(lp_projection_fit(model, ds, 100, &proj));
  double e1 = 0, e2 = 0;
  lp_projection_explained(proj, &e1, &e2);
  CHECK(e1 >= e2 && e2 > 0 && e1 + e2 <= 1 + 1e-9);
  CHECK_OK(lp_viz_trajectory(model, axis, proj, "e2e4 e7e5 g1f3", svg_path, tsv_path));
  CHECK(lp_viz_trajectory(model, axis, proj, "e2e4 e2e4", NULL, NULL) == LP_ERR_ILLEGAL_MOVE);
  CHECK(strstr(lp_last_error(), "ply 2") != NULL);
  CHECK_OK(lp_viz_scatter(model, axis, proj, ds, 100, svg_path, NULL));

  lp_projection_free(proj);
  lp_engine_free(engine);
  lp_axis_free(axis);
  lp_dataset_free(ds);
  lp_model_free(model);
  /* freeing NULL is harmless */
  lp_model_free(NULL);
  lp_engine_free(NULL);

  if (failures) fprintf(stderr, "%d check(s) failed\n", failures);
  else printf("all C API checks passed\n");
  return failures ? 1 : 0;
}
