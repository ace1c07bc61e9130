/* C interface of the one-shot coding laboratory.
 *
 * All functionality is driven through JSON: create a run with a subcommand
 * name and a configuration document, execute it, then read the report back
 * as a JSON string owned by the handle. Errors are returned as status
 * codes; the last message is retrievable per thread.
 */
#ifndef OSCL_H
#define OSCL_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum oscl_status {
  OSCL_OK = 0,
  OSCL_ERR_CONFIG = 1,   /* malformed config, bad parameters, unknown command */
  OSCL_ERR_PREMISE = 2,  /* strict mode and a theorem premise failed */
  OSCL_ERR_INTERNAL = 3
} oscl_status;

typedef struct oscl_run oscl_run; /* opaque */

const char* oscl_version(void);

/* Creates a run. `config_json` must be a JSON object (may be "{}"). */
oscl_status oscl_run_create(const char* subcommand, const char* config_json, oscl_run** out);

/* Optional overrides applied before execution: "seed", "trials", "workers",
 * "strict" (nonzero enables strict premise checking). */
oscl_status oscl_run_set_u64(oscl_run* run, const char* key, uint64_t value);

oscl_status oscl_run_execute(oscl_run* run);

/* Report of the last execution; owned by the handle, valid until destroy.
 * NULL before the first execution. */
const char* oscl_run_report_json(const oscl_run* run);

/* CSV rendering of sweep reports; empty string when not applicable. */
const char* oscl_run_report_csv(const oscl_run* run);

void oscl_run_destroy(oscl_run* run);

/* Thread-local message describing the most recent failure. */
const char* oscl_last_error(void);

#ifdef __cplusplus
}
#endif

#endif /* OSCL_H */
