#include <stdio.h>
#include <string.h>
#include "primegrid.h"

#define CHECK(x) do { if (!(x)) { fprintf(stderr, "failed: %s\n", #x); return 1; } } while (0)

int main(void) {
    PgTrail *t = NULL;
    CHECK(pg_trail_compute(100, 16, &t) == PG_STATUS_OK);
    CHECK(pg_trail_prime_count(t) == 25);
    uint64_t stops[32];
    size_t n = 0;
    CHECK(pg_trail_stops(t, stops, 32, &n) == PG_STATUS_OK);
    CHECK(n == 25 && stops[9] == 57);
    CHECK(pg_trail_stops(t, stops, 4, &n) == PG_STATUS_BUFFER_TOO_SMALL && n == 25);
    pg_trail_free(t);

    uint32_t norm = 0;
    CHECK(pg_norm_inf(0, &norm) == PG_STATUS_DOMAIN);
    char msg[128];
    CHECK(pg_last_error(msg, sizeof msg) > 0 && strlen(msg) > 0);

    PgConstants c;
    CHECK(pg_constants(&c) == PG_STATUS_OK && c.c > 1.7052 && c.c < 1.7053);
    printf("ok %s\n", pg_version());
    return 0;
}
