#include <math.h>
#include <stdio.h>

#include "gridform.h"

int main(void) {
    GfSystemParams params = gf_params_benchmark();
    GfDesign *design = NULL;
    if (gf_design_new(&params, 0.707, 1.0, 20.0, GF_PLACEMENT_DECOUPLED_VOLTAGE, &design) != GF_STATUS_OK) {
        fprintf(stderr, "design: %s\n", gf_last_error_message());
        return 1;
    }
    double k[6];
    gf_design_gain(design, k);

    GfTrajectory *traj = NULL;
    if (gf_design_simulate_step(design, GF_SETPOINT_P_SET, 1.0, 1.0, 6.0, 1e-3, 10, &traj) != GF_STATUS_OK) {
        fprintf(stderr, "simulate: %s\n", gf_last_error_message());
        return 1;
    }
    GfStepMetrics m;
    if (gf_trajectory_step_metrics(traj, GF_SIGNAL_P, 1.0, 0.02, &m) != GF_STATUS_OK) {
        return 1;
    }
    printf("k22=%.4f overshoot=%.3f settling=%.4f final=%.6f samples=%zu\n", k[4], m.overshoot, m.settling_time,
           m.final_value, gf_trajectory_len(traj));
    gf_trajectory_free(traj);
    gf_design_free(design);

    params.d_p = 0.0;
    if (gf_design_new(&params, 0.707, 1.0, 20.0, GF_PLACEMENT_DEFAULT, &design) != GF_STATUS_UNCONTROLLABLE || design) {
        return 1;
    }
    return fabs(m.final_value - 1.0) < 1e-3 ? 0 : 1;
}
