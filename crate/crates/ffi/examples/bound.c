/* Minimal C consumer: compute the displacement sensitivity limit.
 *
 * Build (from the workspace root, after `cargo build --release -p qcrb-ffi`):
 *   cc crates/ffi/examples/bound.c -Icrates/ffi/include \
 *      -Ltarget/release -lqcrb_ffi -lm -o bound_demo
 *   LD_LIBRARY_PATH=target/release ./bound_demo
 */
#include <stdio.h>
#include <stdlib.h>

#include "qcrb.h"

int main(void) {
    const char *config =
        "{\"model\": \"displacement\","
        " \"params\": {\"N\": 1e6, \"w\": 1.0},"
        " \"grid\": {\"min\": -8, \"max\": 8, \"points\": 1024}}";

    qcrb_model *model = NULL;
    if (qcrb_model_from_json(config, &model) != QCRB_STATUS_OK) {
        fprintf(stderr, "config error: %s\n", qcrb_last_error_message());
        return 1;
    }

    qcrb_bound_report report;
    if (qcrb_bound(model, 1, &report) != QCRB_STATUS_OK) {
        fprintf(stderr, "bound error: %s\n", qcrb_last_error_message());
        qcrb_model_free(model);
        return 1;
    }
    printf("delta_theta_min = %.9e (expect w/(2 sqrt N) = 5e-4)\n", report.delta_theta_min);
    printf("gamma_inv_11    = %.9e\n", report.gamma_inv_11);

    char *json = NULL;
    if (qcrb_bound_json(model, 1, &json) == QCRB_STATUS_OK) {
        printf("report: %s\n", json);
        qcrb_string_free(json);
    }
    qcrb_model_free(model);
    return 0;
}
