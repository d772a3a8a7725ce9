#ifndef SOC_FFI_H
#define SOC_FFI_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Outcome of `soc_verify`; values match the `socv` exit codes.
typedef enum SocOutcome {
  SOC_OUTCOME_PROVEN = 0,
  SOC_OUTCOME_COUNTEREXAMPLE = 2,
  SOC_OUTCOME_UNKNOWN = 3,
} SocOutcome;

typedef enum SocStatus {
  SOC_STATUS_OK = 0,
  SOC_STATUS_NULL_ARGUMENT = 1,
  SOC_STATUS_INVALID_UTF8 = 2,
  SOC_STATUS_IO = 3,
  // Parse, type or elaboration errors.
  SOC_STATUS_REJECTED = 4,
  // Unknown scenario, capacity exhausted or a bad choice value.
  SOC_STATUS_EVAL = 5,
  SOC_STATUS_SOLVER = 6,
  SOC_STATUS_MODEL = 7,
  SOC_STATUS_INTERNAL = 8,
} SocStatus;

// Outcome of a concrete run or replay; values match the `socv` exit codes.
typedef enum SocVerdict {
  SOC_VERDICT_PASSED = 0,
  SOC_VERDICT_ASSERTION_FAILED = 2,
  SOC_VERDICT_ASSUME_INFEASIBLE = 4,
} SocVerdict;

// A checked and elaborated model.
typedef struct SocProgram SocProgram;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or null. The pointer
// stays valid until the next call into the library on this thread.
const char *soc_last_error(void);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not have been freed.
void soc_string_free(char *s);

// Loads and checks the model at `path`.
//
// # Safety
// `path` must be a nul-terminated string; `out` must be writable.
enum SocStatus soc_program_load(const char *path, struct SocProgram **out);

// Checks model source held in memory; `name` is used in diagnostics.
//
// # Safety
// `name` and `source` must be nul-terminated strings; `out` must be writable.
enum SocStatus soc_program_from_source(const char *name,
                                       const char *source,
                                       struct SocProgram **out);

// # Safety
// `p` must come from a load function and not have been freed. Null is ignored.
void soc_program_free(struct SocProgram *p);

// The elaborated instance tree, one node per line.
//
// # Safety
// `p` must be a live handle; `out` must be writable.
enum SocStatus soc_dump_tree(const struct SocProgram *p, char **out);

// Runs `scenario` with seeded random choices. `capacity` 0 selects the
// default sparse-array capacity. Any of the out-pointers may be null;
// `location` receives null when the run passed.
//
// # Safety
// `p` must be a live handle and `scenario` a nul-terminated string.
enum SocStatus soc_run(const struct SocProgram *p,
                       const char *scenario,
                       uint64_t seed,
                       size_t capacity,
                       enum SocVerdict *verdict,
                       char **transcript,
                       char **location);

// Replays a model file's text, as written by `soc_verify` or `socv verify`.
//
// # Safety
// `p` must be a live handle; `scenario` and `model` nul-terminated strings.
enum SocStatus soc_trace(const struct SocProgram *p,
                         const char *scenario,
                         const char *model,
                         size_t capacity,
                         enum SocVerdict *verdict,
                         char **transcript,
                         char **location);

// Searches for a counterexample. A null `solver` uses `SOC_SOLVER` or the
// default z3 command; `timeout_secs` 0 means 300 s. On a counterexample
// `model` receives the model file text and `transcript` the replayed
// output; on `Unknown`, `transcript` receives the reason. Out-pointers
// that do not apply are set to null.
//
// # Safety
// `p` must be a live handle; `scenario` and a non-null `solver` must be
// nul-terminated strings.
enum SocStatus soc_verify(const struct SocProgram *p,
                          const char *scenario,
                          const char *solver,
                          uint64_t timeout_secs,
                          size_t capacity,
                          enum SocOutcome *outcome,
                          char **model,
                          char **transcript);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SOC_FFI_H */
