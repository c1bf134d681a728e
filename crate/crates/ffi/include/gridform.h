#ifndef GRIDFORM_H
#define GRIDFORM_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GfPlacement {
  GF_PLACEMENT_DECOUPLED_VOLTAGE = 0,
  GF_PLACEMENT_DEFAULT = 1,
} GfPlacement;

typedef enum GfSetpoint {
  GF_SETPOINT_P_SET = 0,
  GF_SETPOINT_Q_SET = 1,
  GF_SETPOINT_OMEGA_SET = 2,
  GF_SETPOINT_V_SET = 3,
} GfSetpoint;

typedef enum GfSignal {
  GF_SIGNAL_DELTA = 0,
  GF_SIGNAL_OMEGA = 1,
  GF_SIGNAL_V = 2,
  GF_SIGNAL_P = 3,
  GF_SIGNAL_Q = 4,
  GF_SIGNAL_E1 = 5,
  GF_SIGNAL_E2 = 6,
} GfSignal;

typedef enum GfStatus {
  GF_STATUS_OK = 0,
  GF_STATUS_NULL_POINTER = 1,
  GF_STATUS_INVALID_ARGUMENT = 2,
  GF_STATUS_NO_EQUILIBRIUM = 3,
  GF_STATUS_UNCONTROLLABLE = 4,
  GF_STATUS_PLACEMENT_FAILED = 5,
  GF_STATUS_NUMERICAL_BLOWUP = 6,
  GF_STATUS_NOT_SETTLED = 7,
  GF_STATUS_PANIC = 8,
} GfStatus;

// A completed design for one performance specification.
typedef struct GfDesign GfDesign;

typedef struct GfTrajectory GfTrajectory;

// Per-unit system data; `omega_b` in rad/s.
typedef struct GfSystemParams {
  double omega_b;
  double omega_g;
  double v_g;
  double r_g;
  double x_g;
  double d_p;
  double d_q;
  double omega_set;
  double p_set;
  double q_set;
  double v_set;
} GfSystemParams;

typedef struct GfSample {
  double t;
  double delta;
  double omega;
  double v;
  double p;
  double q;
  double e1;
  double e2;
} GfSample;

typedef struct GfStepMetrics {
  double overshoot;
  double settling_time;
  double peak_time;
  double final_value;
} GfStepMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Benchmark converter parameters.
struct GfSystemParams gf_params_benchmark(void);

// Message of the last failed call on this thread, or NULL. The pointer stays
// valid until the next failing call on the same thread.
const char *gf_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *gf_version(void);

// Runs the full design for damping `xi`, settling time `ts` (s) and third
// pole `-a` (1/s). On success `*out` owns a new handle.
//
// # Safety
// `params` must be NULL or point to a valid `GfSystemParams`; `out` must be
// NULL or writable.
enum GfStatus gf_design_new(const struct GfSystemParams *params,
                            double xi,
                            double ts,
                            double a,
                            enum GfPlacement placement,
                            struct GfDesign **out);

// # Safety
// `design` must be NULL or a handle from [`gf_design_new`] not yet freed.
void gf_design_free(struct GfDesign *design);

// Writes the equilibrium power angle (rad) and voltage (p.u.).
//
// # Safety
// `design` must be a live handle; `delta0` and `v0` must be writable.
enum GfStatus gf_design_operating_point(const struct GfDesign *design, double *delta0, double *v0);

// Writes `[k_pdelta, k_pv, k_qdelta, k_qv]`.
//
// # Safety
// `out` must hold 4 doubles.
enum GfStatus gf_design_linearized_gains(const struct GfDesign *design, double *out);

// Writes `A` (3x3) and `B` (3x2), row-major.
//
// # Safety
// `a` must hold 9 doubles and `b` 6.
enum GfStatus gf_design_state_space(const struct GfDesign *design, double *a, double *b);

// Writes the feedback gain `K` (2x3), row-major.
//
// # Safety
// `out` must hold 6 doubles.
enum GfStatus gf_design_gain(const struct GfDesign *design, double *out);

// Writes the closed-loop eigenvalues, sorted by real then imaginary part.
//
// # Safety
// `re` and `im` must each hold 3 doubles.
enum GfStatus gf_design_eigenvalues(const struct GfDesign *design, double *re, double *im);

// Simulates the nonlinear closed loop with one setpoint step of `target` to
// `value` at `event_time`. On success `*out` owns a new trajectory.
//
// # Safety
// `design` must be a live handle; `out` must be writable.
enum GfStatus gf_design_simulate_step(const struct GfDesign *design,
                                      enum GfSetpoint target,
                                      double event_time,
                                      double value,
                                      double t_end,
                                      double dt,
                                      size_t record_every,
                                      struct GfTrajectory **out);

// # Safety
// `traj` must be NULL or a handle not yet freed.
void gf_trajectory_free(struct GfTrajectory *traj);

// Number of recorded samples; 0 for NULL.
//
// # Safety
// `traj` must be NULL or a live handle.
size_t gf_trajectory_len(const struct GfTrajectory *traj);

// # Safety
// `traj` must be a live handle; `out` must be writable.
enum GfStatus gf_trajectory_sample(const struct GfTrajectory *traj,
                                   size_t index,
                                   struct GfSample *out);

// Overshoot, settling and peak time of `signal` for a step at `event_time`,
// with settling band `band` (fraction of the step).
//
// # Safety
// `traj` must be a live handle; `out` must be writable.
enum GfStatus gf_trajectory_step_metrics(const struct GfTrajectory *traj,
                                         enum GfSignal signal,
                                         double event_time,
                                         double band,
                                         struct GfStepMetrics *out);

// Percent overshoot of a second-order pair with damping `xi` in (0, 1).
//
// # Safety
// `out` must be writable.
enum GfStatus gf_po_from_damping(double xi, double *out);

// Damping ratio giving percent overshoot `po` in (0, 100).
//
// # Safety
// `out` must be writable.
enum GfStatus gf_damping_from_po(double po, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GRIDFORM_H */
