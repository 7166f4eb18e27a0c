/*
 * C interface to the dilemma evaluation library.
 *
 * All functions return mm_status (MM_OK on success); on failure
 * mm_last_error() describes what went wrong for the calling thread.
 * Strings returned through char** out-parameters are heap-allocated and
 * must be released with mm_string_free().
 */
#ifndef MMEVAL_H
#define MMEVAL_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mm_status {
  MM_OK = 0,
  MM_ERR_INTERNAL = 1,
  MM_ERR_USAGE = 2,     /* bad config or arguments */
  MM_ERR_EMPTY = 3,     /* command produced no usable result */
  MM_ERR_TRANSPORT = 4, /* nothing could be queried */
  MM_ERR_IO = 5
} mm_status;

const char* mm_library_version(void);
const char* mm_generator_version(void);
const char* mm_ruleset_version(void);

/* Message for the most recent failure on this thread ("" when none). */
const char* mm_last_error(void);

void mm_string_free(char* s);

/* ---------- scenario decks ---------- */

typedef struct mm_deck mm_deck;

/* generate_config_json carries the generation settings, e.g.
 * {"count":1000,"seed":42}. */
mm_status mm_deck_generate(const char* generate_config_json, mm_deck** out_deck);
mm_status mm_deck_load(const char* path, mm_deck** out_deck);
mm_status mm_deck_save(const mm_deck* deck, const char* path);
size_t mm_deck_size(const mm_deck* deck);
/* One deck line (scenario JSON). */
mm_status mm_deck_scenario_json(const mm_deck* deck, size_t index, char** out_json);
/* Number of scenarios violating a structural invariant; 0 means all valid. */
mm_status mm_deck_validate(const mm_deck* deck, size_t* out_violations);
void mm_deck_free(mm_deck* deck);

/* ---------- primitives ---------- */

/* Full prompt text for one scenario; with_rationale is 0 or 1. */
mm_status mm_render_prompt(const mm_deck* deck, size_t index, int with_rationale,
                           char** out_text);

/* Classifies a raw completion: 1 = Case 1, 2 = Case 2, 0 = no definitive
 * selection. Total over strings. */
int mm_classify(const char* raw_text);

/* Euclidean distance between two nine-attribute preference vectors. */
mm_status mm_distance(const double a[9], const double b[9], double* out_distance);

/* ---------- pipeline commands ---------- */
/* config_json is the full config document (the command reads its own
 * section); out_result_json receives a summary object. */

mm_status mm_cmd_generate(const char* config_json, char** out_result_json);
mm_status mm_cmd_run(const char* config_json, char** out_result_json);
mm_status mm_cmd_analyze(const char* config_json, char** out_result_json);
mm_status mm_cmd_compare(const char* config_json, char** out_result_json);
mm_status mm_cmd_rationale(const char* config_json, char** out_result_json);
mm_status mm_cmd_report(const char* config_json, char** out_result_json);
/* Re-validates a labeled completion corpus against the classifier. */
mm_status mm_cmd_corpus(const char* config_json, char** out_result_json);

#ifdef __cplusplus
}
#endif

#endif /* MMEVAL_H */
