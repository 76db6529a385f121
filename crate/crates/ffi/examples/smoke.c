/* Minimal C client: calibrate, derive the reservoir and run one cycle. */
#include <stdio.h>
#include "photon_engine.h"

int main(void) {
    PeParams *p = pe_params_experimental();
    double theta = 0.0;
    if (pe_calibrate_theta(p, 8000.0, &theta) != PE_STATUS_OK) {
        fprintf(stderr, "%s\n", pe_last_error_message());
        return 1;
    }
    PeReservoir r;
    if (pe_reservoir_derive(p, theta, PE_PHASE_COHERENT, &r) != PE_STATUS_OK) {
        return 2;
    }
    PeFieldState *s = NULL;
    if (pe_steady_state(p, theta, PE_PHASE_COHERENT, 40, &s) != PE_STATUS_OK) {
        return 3;
    }
    double n = 0.0, g2 = 0.0;
    pe_state_stats(s, &n, &g2);
    PeCycleLedger l;
    if (pe_cycle_run(p, theta, 0.5e6, 1.0e6, 0, &l) != PE_STATUS_OK) {
        return 4;
    }
    printf("version %s\n", pe_version());
    printf("theta %.6f T_R %.1f n %.6f g2 %.6f W_out %.4e eta %.5f\n", theta, r.t_r, n, g2, l.w_out, l.eta);
    pe_state_free(s);
    pe_params_free(p);
    return 0;
}
