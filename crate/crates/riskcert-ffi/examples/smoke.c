#include <assert.h>
#include <math.h>
#include <stdio.h>
#include "riskcert.h"

int main(void) {
    double values[100];
    for (int i = 0; i < 100; i++) values[i] = (i + 1) / 100.0;

    RcBatch *batch = NULL;
    assert(rc_batch_new(values, 100, &batch) == RC_STATUS_OK);
    assert(rc_batch_len(batch) == 100);

    RcBoundResult out;
    assert(rc_var_bound(batch, 0.7, 0.2, &out) == RC_STATUS_OK);
    assert(out.k_index == 75);
    assert(fabs(out.value - 0.75) < 1e-12);
    assert(!out.defaulted);
    rc_batch_free(batch);

    assert(rc_failure_prob_bound(0, 10, 0.2, &out) == RC_STATUS_OK);
    assert(fabs(out.value - 0.1486600774792154) < 1e-12);

    uint64_t n = 0;
    assert(rc_var_required_n(0.7, 0.2, &n) == RC_STATUS_OK && n == 5);

    assert(rc_var_bound(NULL, 0.7, 0.2, &out) == RC_STATUS_NULL_POINTER);
    printf("ffi smoke: all assertions passed\n");
    return 0;
}
