/* SPDX-License-Identifier: Apache-2.0 */
#include <stdio.h>
#include <string.h>
#include "arena.h"

int main(void) {
    const char *src =
        "fun abs_diff(a: int, b: int) -> int {\n"
        "  if (a > b) { return a - b; }\n"
        "  return b - a;\n"
        "}\n";
    ArenaUnit *unit = NULL;
    if (arena_unit_parse(src, &unit) != ARENA_STATUS_OK) return 1;
    char *out = NULL;
    if (arena_unit_evaluate(unit, "abs_diff", "[5, 3]", 1000, &out) != ARENA_STATUS_OK) return 2;
    int ok = strstr(out, "\"value\":2") != NULL;
    arena_string_free(out);
    if (arena_unit_parse("fun (", &unit) != ARENA_STATUS_COMPILE_ERROR) return 3;
    char *code = arena_last_error_code();
    ok = ok && strcmp(code, "SYNTAX_ERROR") == 0;
    arena_string_free(code);
    printf("%s\n", ok ? "ok" : "bad");
    return ok ? 0 : 4;
}
