/* Build: cc examples/smoke.c -Iinclude ../../target/debug/libfinsler_ffi.a -lm -lpthread -ldl -o smoke */
#include <stdio.h>
#include "finsler.h"

int main(void) {
    FinslerMetric *m = NULL;
    FinslerBundle *b = NULL;
    double x[4] = {0, 1, 0, 0}, y[4] = {1, 1, 1, 1}, basis[16];
    size_t mu = 0;

    if (finsler_metric_builtin("ex1", &m) != FINSLER_STATUS_OK ||
        finsler_bundle_compute(m, x, y, 0, 0, &b) != FINSLER_STATUS_OK ||
        finsler_nullity(b, "chern-h", 0, 1e-8, basis, &mu) != FINSLER_STATUS_OK) {
        fprintf(stderr, "error: %s\n", finsler_last_error());
        return 1;
    }
    printf("nullity index %zu\n", mu);

    double y_bad[4] = {0, 1, 1, 1};
    FinslerBundle *bad = NULL;
    FinslerStatus s = finsler_bundle_compute(m, x, y_bad, 0, 0, &bad);
    printf("status %d: %s\n", (int)s, finsler_last_error());

    finsler_bundle_free(b);
    finsler_metric_free(m);
    return 0;
}
