#include <stdio.h>
#include <string.h>

#include "soc_ffi.h"

static const char *SRC =
    "module Main {\n"
    "  mut fn s() {\n"
    "    let x = any<BitInt(4)>;\n"
    "    assert(x != 5u4)\n"
    "  }\n"
    "}\n";

int main(void) {
  SocProgram *p = NULL;
  if (soc_program_from_source("smoke.soc", SRC, &p) != SOC_STATUS_OK) {
    fprintf(stderr, "load: %s\n", soc_last_error());
    return 10;
  }
  SocOutcome outcome;
  char *model = NULL;
  if (soc_verify(p, "s", NULL, 60, 0, &outcome, &model, NULL) != SOC_STATUS_OK) {
    fprintf(stderr, "verify: %s\n", soc_last_error());
    return 11;
  }
  if (outcome != SOC_OUTCOME_COUNTEREXAMPLE || model == NULL) return 12;

  SocVerdict verdict;
  char *where = NULL;
  if (soc_trace(p, "s", model, 0, &verdict, NULL, &where) != SOC_STATUS_OK) return 13;
  if (verdict != SOC_VERDICT_ASSERTION_FAILED) return 14;
  if (strcmp(where, "FAILED ASSERTION at smoke.soc:4") != 0) return 15;

  if (soc_run(p, "nope", 0, 0, &verdict, NULL, NULL) != SOC_STATUS_EVAL) return 16;
  if (soc_last_error() == NULL) return 17;

  printf("%s\n", where);
  soc_string_free(where);
  soc_string_free(model);
  soc_program_free(p);
  return 0;
}
