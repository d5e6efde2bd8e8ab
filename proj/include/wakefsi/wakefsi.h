/*
 * wakefsi C API.
 *
 * Every function that can fail returns a wf_status; on failure a message is
 * available from wf_last_error() on the calling thread. Objects are opaque
 * handles released with their *_free function. Handles are not internally
 * synchronized, but distinct handles may be used from different threads.
 *
 * Matrices passed across the boundary are column-major unless stated.
 */
#ifndef WAKEFSI_H
#define WAKEFSI_H

#include <stddef.h>

#if defined(WAKEFSI_BUILDING)
#define WAKEFSI_API __attribute__((visibility("default")))
#else
#define WAKEFSI_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum wf_status {
    WF_OK = 0,
    WF_ERR_INVALID_ARGUMENT = 1,
    WF_ERR_SIZE_MISMATCH = 2,
    WF_ERR_NON_FINITE = 3,
    WF_ERR_OUT_OF_RANGE = 4,
    WF_ERR_IO = 5,
    WF_ERR_SINGULAR = 6,
    WF_ERR_NUMERICAL = 7,
    WF_ERR_INTERNAL = 8
} wf_status;

WAKEFSI_API const char* wf_version(void);
WAKEFSI_API const char* wf_status_name(wf_status status);
/* Message of the last failed call on this thread; "" if none. */
WAKEFSI_API const char* wf_last_error(void);

/* ---- grids, snapshot sets, planes -------------------------------------- */

typedef struct wf_grid {
    size_t nx, ny, nz;
    double dx, dy, dz;
    double origin[3];
} wf_grid;

typedef enum wf_axis { WF_AXIS_X = 0, WF_AXIS_Y = 1, WF_AXIS_Z = 2 } wf_axis;

typedef struct wf_plane {
    wf_axis axis;
    double offset;
    char label[32];
} wf_plane;

typedef struct wf_snapshot_set wf_snapshot_set;

WAKEFSI_API wf_status wf_set_load(const char* dir, wf_snapshot_set** out);
WAKEFSI_API wf_status wf_set_save(const wf_snapshot_set* set, const char* dir);
WAKEFSI_API void wf_set_free(wf_snapshot_set* set);

/* Empty set (no fields) on a grid with the given strictly increasing times. */
WAKEFSI_API wf_status wf_set_create(const wf_grid* grid, const double* times, size_t n_times,
                                    wf_snapshot_set** out);
/* Appends a field. `data` holds n_times blocks of cells*components values. */
WAKEFSI_API wf_status wf_set_add_field(wf_snapshot_set* set, const char* name, size_t components,
                                       const double* data, size_t len);

WAKEFSI_API wf_status wf_set_grid(const wf_snapshot_set* set, wf_grid* out);
WAKEFSI_API size_t wf_set_snapshot_count(const wf_snapshot_set* set);
WAKEFSI_API size_t wf_set_field_count(const wf_snapshot_set* set);
/* NULL when the index is out of range. */
WAKEFSI_API const char* wf_set_field_name(const wf_snapshot_set* set, size_t field);
WAKEFSI_API size_t wf_set_field_components(const wf_snapshot_set* set, size_t field);
WAKEFSI_API wf_status wf_set_field_index(const wf_snapshot_set* set, const char* name, size_t* out);
WAKEFSI_API wf_status wf_set_time(const wf_snapshot_set* set, size_t snapshot, double* out);
/* Borrowed pointer, valid while the set lives. */
WAKEFSI_API wf_status wf_set_data(const wf_snapshot_set* set, size_t field, size_t snapshot,
                                  const double** data, size_t* len);

WAKEFSI_API wf_status wf_set_sample_plane(const wf_snapshot_set* set, wf_axis axis, double offset,
                                          wf_snapshot_set** out);

enum {
    WF_DERIVE_GRADIENT = 1u,
    WF_DERIVE_STRAIN_RATE = 2u,
    WF_DERIVE_ROTATION_RATE = 4u,
    WF_DERIVE_Q_CRITERION = 8u
};
/* Fields "gradient", "strain_rate", "rotation_rate" (9 components) and
 * "q_criterion" (1) computed from a 3-component field. */
WAKEFSI_API wf_status wf_set_derive(const wf_snapshot_set* set, const char* field, unsigned flags,
                                    wf_snapshot_set** out);

/* Writes up to `capacity` planes and returns the number in the layout. */
WAKEFSI_API size_t wf_default_wake_planes(double rotor_diameter, double hub_height, double rotor_x,
                                          wf_plane* out, size_t capacity);

/* ---- synthetic fields --------------------------------------------------- */

typedef struct wf_wake_params {
    double u_inf;
    double rotor_rpm;
    double rotor_diameter;
    double hub_height;
    double rotor_x;
    int blades;
    double deficit_amplitude;
    double deficit_growth;
    double tip_vortex_amplitude;
    double tip_decay_length;
    double tower_wake_amplitude;
    double tower_strouhal;
    double tower_diameter;
    unsigned long long seed;
} wf_wake_params;

WAKEFSI_API void wf_wake_params_default(wf_wake_params* out);
WAKEFSI_API wf_status wf_wake_params_validate(const wf_wake_params* p);
WAKEFSI_API wf_status wf_wake_velocity(const wf_wake_params* p, const double point[3], double t,
                                       double out[3]);
/* Field "u" (3 components) at each time. */
WAKEFSI_API wf_status wf_synth_wake(const wf_wake_params* p, const wf_grid* grid, const double* times,
                                    size_t n_times, wf_snapshot_set** out);

typedef enum wf_trig { WF_TRIG_COS = 0, WF_TRIG_SIN = 1 } wf_trig;
typedef enum wf_temporal_kind {
    WF_TEMPORAL_CONSTANT = 0,
    WF_TEMPORAL_SINE = 1,
    WF_TEMPORAL_VALUES = 2
} wf_temporal_kind;

typedef struct wf_separable_term {
    int wavenumber[3];
    wf_trig kind[3];
    wf_temporal_kind temporal;
    double amplitude;
    double frequency;
    double phase;
    const double* values; /* WF_TEMPORAL_VALUES: one per time */
    size_t n_values;
} wf_separable_term;

/* Scalar field `field`; sigma_out (may be NULL) receives n_terms norms. */
WAKEFSI_API wf_status wf_synth_separable(const wf_grid* grid, const wf_separable_term* terms,
                                         size_t n_terms, const double* times, size_t n_times,
                                         const char* field, wf_snapshot_set** out,
                                         double* sigma_out);

/* u = constant + gradient * x, gradient row-major 3x3. */
WAKEFSI_API wf_status wf_synth_affine(const double gradient[9], const double constant[3],
                                      const wf_grid* grid, wf_snapshot_set** out);

/* ---- POD ----------------------------------------------------------------- */

typedef struct wf_pod wf_pod;

typedef enum wf_pod_method { WF_POD_SNAPSHOTS = 0, WF_POD_SVD = 1 } wf_pod_method;

typedef struct wf_pod_options {
    const char* field;
    int component;          /* -1 keeps every component */
    int subtract_mean;
    const double* weights;  /* NULL for the unweighted inner product */
    size_t n_weights;
    wf_pod_method method;
} wf_pod_options;

WAKEFSI_API void wf_pod_options_default(wf_pod_options* out);
WAKEFSI_API wf_status wf_pod_compute(const wf_snapshot_set* set, const wf_pod_options* opts,
                                     wf_pod** out);
/* Decomposes a rows x cols column-major matrix directly. */
WAKEFSI_API wf_status wf_pod_from_matrix(const double* data, size_t rows, size_t cols,
                                         const double* weights, int subtract_mean,
                                         wf_pod_method method, wf_pod** out);
WAKEFSI_API void wf_pod_free(wf_pod* pod);

WAKEFSI_API size_t wf_pod_rank(const wf_pod* pod);
WAKEFSI_API size_t wf_pod_rows(const wf_pod* pod);
WAKEFSI_API size_t wf_pod_snapshots(const wf_pod* pod);
/* Borrowed, length rank. */
WAKEFSI_API const double* wf_pod_singular_values(const wf_pod* pod);
/* Borrowed column of length rows. */
WAKEFSI_API wf_status wf_pod_mode(const wf_pod* pod, size_t n, const double** data);
/* rank x snapshots, row-major. */
WAKEFSI_API wf_status wf_pod_coefficients(const wf_pod* pod, double* out, size_t len);
WAKEFSI_API wf_status wf_pod_cumulative_energy(const wf_pod* pod, size_t n_modes, double* retained);
/* rows x snapshots, column-major. */
WAKEFSI_API wf_status wf_pod_reconstruct(const wf_pod* pod, size_t n_modes, double* out, size_t len);
WAKEFSI_API wf_status wf_pod_project(const wf_pod* pod, const double* snapshot, size_t len,
                                     size_t n_modes, double* out);
WAKEFSI_API wf_status wf_pod_layout(const wf_pod* pod, wf_grid* grid, size_t* components);
WAKEFSI_API wf_status wf_pod_save(const wf_pod* pod, const char* dir);
WAKEFSI_API wf_status wf_pod_load(const char* dir, wf_pod** out);
WAKEFSI_API wf_status wf_pod_reconstruct_set(const wf_pod* pod, size_t n_modes, wf_snapshot_set** out);

/* ---- FSI ----------------------------------------------------------------- */

typedef struct wf_coupling_config {
    double tol;
    int max_inner;
    double omega0;
    double omega_min;
    double omega_max;
    int aitken_enabled;
    int relative_residual;
} wf_coupling_config;

WAKEFSI_API void wf_coupling_config_default(wf_coupling_config* out);
WAKEFSI_API wf_status wf_aitken_update(double omega_k, const double* r_k, const double* r_k1, size_t n,
                                       const wf_coupling_config* cfg, double* omega_out);

typedef enum wf_fsi_kind { WF_FSI_PISTON = 0, WF_FSI_CHAIN = 1 } wf_fsi_kind;
typedef enum wf_chain_load { WF_CHAIN_AERO = 0, WF_CHAIN_CONSTANT = 1 } wf_chain_load;

typedef struct wf_fsi_problem {
    wf_fsi_kind kind;
    /* piston */
    double piston_mass, piston_stiffness, piston_damping, added_mass, d0, v0;
    /* chain */
    int chain_nodes;
    double node_mass, chain_stiffness, damping_alpha;
    wf_chain_load chain_load;
    double rho, u_inf, chord, lift_coefficient, span, constant_load;
    /* integration */
    double beta, gamma, dt, end_time;
    int ramp_steps;
    double ramp_factor;
    wf_coupling_config coupling;
} wf_fsi_problem;

WAKEFSI_API void wf_fsi_problem_default(wf_fsi_problem* out, wf_fsi_kind kind);

typedef struct wf_fsi_result wf_fsi_result;

WAKEFSI_API wf_status wf_fsi_run(const wf_fsi_problem* problem, wf_fsi_result** out);
WAKEFSI_API void wf_fsi_free(wf_fsi_result* result);
WAKEFSI_API size_t wf_fsi_rows(const wf_fsi_result* result);
WAKEFSI_API size_t wf_fsi_dofs(const wf_fsi_result* result);
/* Any output pointer may be NULL; arrays have wf_fsi_dofs entries. */
WAKEFSI_API wf_status wf_fsi_row(const wf_fsi_result* result, size_t row, double* t, double* d,
                                 double* v, double* a, double* force, int* inner_iterations);
WAKEFSI_API size_t wf_fsi_failed_steps(const wf_fsi_result* result);
/* NULL unless the run was cut short after unconverged steps overflowed. */
WAKEFSI_API const char* wf_fsi_aborted(const wf_fsi_result* result);
WAKEFSI_API wf_status wf_fsi_write_csv(const wf_fsi_result* result, const char* history_path,
                                       const char* trace_path);

/* ---- mesh morphing ------------------------------------------------------ */

typedef struct wf_rbf wf_rbf;

typedef enum wf_rbf_kernel {
    WF_RBF_DEFAULT = 0, /* thin-plate in 2D, cubic in 3D */
    WF_RBF_THIN_PLATE = 1,
    WF_RBF_CUBIC = 2
} wf_rbf_kernel;

/* positions and displacements: n x dim, row-major. */
WAKEFSI_API wf_status wf_rbf_build(size_t dim, const double* positions, const double* displacements,
                                   size_t n, wf_rbf_kernel kernel, wf_rbf** out);
WAKEFSI_API wf_status wf_rbf_build_from_csv(const char* path, wf_rbf_kernel kernel, wf_rbf** out);
WAKEFSI_API void wf_rbf_free(wf_rbf* rbf);
WAKEFSI_API size_t wf_rbf_dim(const wf_rbf* rbf);
WAKEFSI_API wf_status wf_rbf_evaluate(const wf_rbf* rbf, const double* point, double* out);

typedef struct wf_mesh_validity {
    double min_jacobian;
    size_t inverted_cells;
    size_t cells;
} wf_mesh_validity;

/* Number of lattice vertices of a grid in 2D (nz ignored) or 3D. */
WAKEFSI_API size_t wf_lattice_node_count(const wf_grid* grid, size_t dim);
/* Vertex coordinates, node_count x dim row-major, i fastest. */
WAKEFSI_API wf_status wf_lattice_nodes(const wf_grid* grid, size_t dim, double* out, size_t len);
/* Morphs the lattice vertices; `out` (may be NULL) receives node_count x dim. */
WAKEFSI_API wf_status wf_morph_lattice(const wf_grid* grid, const wf_rbf* rbf, double* out,
                                       size_t len, wf_mesh_validity* validity);
WAKEFSI_API wf_status wf_mesh_validity_check(const wf_grid* grid, size_t dim, const double* morphed,
                                             size_t len, wf_mesh_validity* out);
/* Field "displacement" (3 components) evaluated at cell centers, time 0. */
WAKEFSI_API wf_status wf_morph_displacement_set(const wf_grid* grid, const wf_rbf* rbf,
                                                wf_snapshot_set** out);

#ifdef __cplusplus
}
#endif

#endif /* WAKEFSI_H */
