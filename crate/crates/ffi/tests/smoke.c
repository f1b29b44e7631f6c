#include <math.h>
#include <stdio.h>
#include <string.h>

#include "halfspace_thermal.h"

int main(void) {
    HtProblem *p = ht_problem_from_json(
        "{\"T0\": 1, \"T0_prime\": 1, \"f0\": {\"type\": \"step\"}, \"g0\": {\"type\": \"step\"}}");
    if (p == NULL) {
        return 10;
    }
    double v = 0.0, e = 0.0;
    if (ht_temperature(p, 0.05, 0.5, 0.02, &v, &e) != HT_STATUS_OK || !(v > 0.0 && v < 1.0)) {
        return 11;
    }
    if (ht_temperature(p, -1.0, 0.0, 0.02, &v, NULL) != HT_STATUS_INVALID_INPUT) {
        return 12;
    }
    char msg[128];
    if (ht_last_error_message(msg, sizeof msg) == 0 || strstr(msg, "half-space") == NULL) {
        return 13;
    }
    double id = 0.0;
    if (ht_identity_integral(-1.0, 1e-12, &id, NULL) != HT_STATUS_OK || fabs(id - 1.0) > 1e-10) {
        return 14;
    }
    ht_problem_free(p);
    printf("%.12e\n", v);
    return 0;
}
