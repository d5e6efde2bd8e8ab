#include "wakefsi/wakefsi.h"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "wakefsi/derived.hpp"
#include "wakefsi/error.hpp"
#include "wakefsi/field_io.hpp"
#include "wakefsi/fsi_problems.hpp"
#include "wakefsi/morph.hpp"
#include "wakefsi/pod_io.hpp"
#include "wakefsi/sampling.hpp"
#include "wakefsi/synth.hpp"

using namespace wakefsi;

struct wf_snapshot_set {
    SnapshotSet set;
};

struct wf_pod {
    PodArchive archive;
};

struct wf_fsi_result {
    FsiHistory history;
};

struct wf_rbf {
    RbfInterpolant f;
};

namespace {

thread_local std::string g_last_error;

wf_status to_status(ErrorCode c) {
    switch (c) {
    case ErrorCode::InvalidArgument: return WF_ERR_INVALID_ARGUMENT;
    case ErrorCode::SizeMismatch: return WF_ERR_SIZE_MISMATCH;
    case ErrorCode::NonFinite: return WF_ERR_NON_FINITE;
    case ErrorCode::OutOfRange: return WF_ERR_OUT_OF_RANGE;
    case ErrorCode::Io: return WF_ERR_IO;
    case ErrorCode::Singular: return WF_ERR_SINGULAR;
    case ErrorCode::Numerical: return WF_ERR_NUMERICAL;
    }
    return WF_ERR_INTERNAL;
}

template <class F>
wf_status guarded(F&& body) {
    try {
        body();
        g_last_error.clear();
        return WF_OK;
    } catch (const Error& e) {
        g_last_error = e.what();
        return to_status(e.code());
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return WF_ERR_INTERNAL;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return WF_ERR_INTERNAL;
    }
}

void need(const void* p, const char* what) {
    if (!p) fail(ErrorCode::InvalidArgument, std::string(what) + " must not be NULL");
}

StructuredGrid to_grid(const wf_grid* g) {
    need(g, "grid");
    StructuredGrid out;
    out.nx = g->nx;
    out.ny = g->ny;
    out.nz = g->nz;
    out.dx = g->dx;
    out.dy = g->dy;
    out.dz = g->dz;
    out.origin = {g->origin[0], g->origin[1], g->origin[2]};
    out.validate();
    return out;
}

wf_grid from_grid(const StructuredGrid& g) {
    wf_grid out;
    out.nx = g.nx;
    out.ny = g.ny;
    out.nz = g.nz;
    out.dx = g.dx;
    out.dy = g.dy;
    out.dz = g.dz;
    for (int i = 0; i < 3; ++i) out.origin[i] = g.origin[i];
    return out;
}

std::vector<double> to_vector(const double* p, std::size_t n, const char* what) {
    if (n > 0) need(p, what);
    return n > 0 ? std::vector<double>(p, p + n) : std::vector<double>{};
}

Axis to_axis(wf_axis a) {
    require(a == WF_AXIS_X || a == WF_AXIS_Y || a == WF_AXIS_Z, ErrorCode::InvalidArgument,
            "unknown axis");
    return static_cast<Axis>(a);
}

WakeModelParams to_wake(const wf_wake_params* p) {
    need(p, "wake params");
    WakeModelParams w;
    w.u_inf = p->u_inf;
    w.rotor_rpm = p->rotor_rpm;
    w.rotor_diameter = p->rotor_diameter;
    w.hub_height = p->hub_height;
    w.rotor_x = p->rotor_x;
    w.blades = p->blades;
    w.deficit_amplitude = p->deficit_amplitude;
    w.deficit_growth = p->deficit_growth;
    w.tip_vortex_amplitude = p->tip_vortex_amplitude;
    w.tip_decay_length = p->tip_decay_length;
    w.tower_wake_amplitude = p->tower_wake_amplitude;
    w.tower_strouhal = p->tower_strouhal;
    w.tower_diameter = p->tower_diameter;
    w.seed = p->seed;
    return w;
}

CouplingConfig to_coupling(const wf_coupling_config& c) {
    CouplingConfig out;
    out.tol = c.tol;
    out.max_inner = c.max_inner;
    out.omega0 = c.omega0;
    out.omega_min = c.omega_min;
    out.omega_max = c.omega_max;
    out.aitken_enabled = c.aitken_enabled != 0;
    out.relative_residual = c.relative_residual != 0;
    return out;
}

wf_coupling_config from_coupling(const CouplingConfig& c) {
    wf_coupling_config out;
    out.tol = c.tol;
    out.max_inner = c.max_inner;
    out.omega0 = c.omega0;
    out.omega_min = c.omega_min;
    out.omega_max = c.omega_max;
    out.aitken_enabled = c.aitken_enabled ? 1 : 0;
    out.relative_residual = c.relative_residual ? 1 : 0;
    return out;
}

Eigen::MatrixXd row_major(const double* p, std::size_t rows, std::size_t cols) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c)
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = p[r * cols + c];
    return m;
}

void copy_out(const Eigen::MatrixXd& m, double* out, std::size_t len) {
    need(out, "output buffer");
    require(len == static_cast<std::size_t>(m.size()), ErrorCode::SizeMismatch,
            "output buffer holds " + std::to_string(len) + " values, need " + std::to_string(m.size()));
    for (Eigen::Index c = 0; c < m.cols(); ++c)
        for (Eigen::Index r = 0; r < m.rows(); ++r) out[c * m.rows() + r] = m(r, c);
}

std::size_t rank_arg(const wf_pod* pod, std::size_t n) {
    need(pod, "pod");
    require(n <= static_cast<std::size_t>(pod->archive.result.rank()), ErrorCode::OutOfRange,
            "requested " + std::to_string(n) + " modes but rank is " +
                std::to_string(pod->archive.result.rank()));
    return n;
}

}  // namespace

extern "C" {

const char* wf_version(void) { return "1.0.0"; }

const char* wf_status_name(wf_status s) {
    switch (s) {
    case WF_OK: return "ok";
    case WF_ERR_INVALID_ARGUMENT: return "invalid argument";
    case WF_ERR_SIZE_MISMATCH: return "size mismatch";
    case WF_ERR_NON_FINITE: return "non-finite value";
    case WF_ERR_OUT_OF_RANGE: return "out of range";
    case WF_ERR_IO: return "i/o error";
    case WF_ERR_SINGULAR: return "singular system";
    case WF_ERR_NUMERICAL: return "numerical failure";
    case WF_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

const char* wf_last_error(void) { return g_last_error.c_str(); }

/* ---- sets ---- */

wf_status wf_set_load(const char* dir, wf_snapshot_set** out) {
    return guarded([&] {
        need(dir, "dir");
        need(out, "out");
        *out = new wf_snapshot_set{load_snapshot_set(dir)};
    });
}

wf_status wf_set_save(const wf_snapshot_set* set, const char* dir) {
    return guarded([&] {
        need(set, "set");
        need(dir, "dir");
        save_snapshot_set(set->set, dir);
    });
}

void wf_set_free(wf_snapshot_set* set) { delete set; }

wf_status wf_set_create(const wf_grid* grid, const double* times, size_t n_times,
                        wf_snapshot_set** out) {
    return guarded([&] {
        need(out, "out");
        SnapshotSet s;
        s.grid = to_grid(grid);
        s.times = to_vector(times, n_times, "times");
        for (std::size_t i = 0; i < s.times.size(); ++i) {
            require(std::isfinite(s.times[i]), ErrorCode::NonFinite, "non-finite time");
            if (i > 0)
                require(s.times[i] > s.times[i - 1], ErrorCode::InvalidArgument,
                        "times must be strictly increasing");
        }
        *out = new wf_snapshot_set{std::move(s)};
    });
}

wf_status wf_set_add_field(wf_snapshot_set* set, const char* name, size_t components,
                           const double* data, size_t len) {
    return guarded([&] {
        need(set, "set");
        need(name, "name");
        require(components >= 1, ErrorCode::InvalidArgument, "components must be >= 1");
        SnapshotSet& s = set->set;
        const std::size_t block = s.grid.cell_count() * components;
        require(len == block * s.times.size(), ErrorCode::SizeMismatch,
                "field data holds " + std::to_string(len) + " values, expected " +
                    std::to_string(block * s.times.size()));
        if (len > 0) need(data, "data");
        std::vector<FieldSnapshot> snaps;
        for (std::size_t t = 0; t < s.times.size(); ++t) {
            FieldSnapshot f(s.grid, components, s.times[t]);
            std::memcpy(f.data.data(), data + t * block, block * sizeof(double));
            f.validate();
            snaps.push_back(std::move(f));
        }
        s.add_field(name, std::move(snaps));
        if (s.fields.size() > 1 && s.pattern.find("{field}") == std::string::npos)
            s.pattern = "{field}_{index}.bin";
    });
}

wf_status wf_set_grid(const wf_snapshot_set* set, wf_grid* out) {
    return guarded([&] {
        need(set, "set");
        need(out, "out");
        *out = from_grid(set->set.grid);
    });
}

size_t wf_set_snapshot_count(const wf_snapshot_set* set) { return set ? set->set.snapshot_count() : 0; }

size_t wf_set_field_count(const wf_snapshot_set* set) { return set ? set->set.fields.size() : 0; }

const char* wf_set_field_name(const wf_snapshot_set* set, size_t field) {
    if (!set || field >= set->set.fields.size()) return nullptr;
    return set->set.fields[field].name.c_str();
}

size_t wf_set_field_components(const wf_snapshot_set* set, size_t field) {
    if (!set || field >= set->set.fields.size()) return 0;
    return set->set.fields[field].components;
}

wf_status wf_set_field_index(const wf_snapshot_set* set, const char* name, size_t* out) {
    return guarded([&] {
        need(set, "set");
        need(name, "name");
        need(out, "out");
        *out = set->set.field_index(name);
    });
}

wf_status wf_set_time(const wf_snapshot_set* set, size_t snapshot, double* out) {
    return guarded([&] {
        need(set, "set");
        need(out, "out");
        require(snapshot < set->set.times.size(), ErrorCode::OutOfRange, "snapshot index out of range");
        *out = set->set.times[snapshot];
    });
}

wf_status wf_set_data(const wf_snapshot_set* set, size_t field, size_t snapshot, const double** data,
                      size_t* len) {
    return guarded([&] {
        need(set, "set");
        need(data, "data");
        require(field < set->set.fields.size(), ErrorCode::OutOfRange, "field index out of range");
        require(snapshot < set->set.times.size(), ErrorCode::OutOfRange, "snapshot index out of range");
        const FieldSnapshot& f = set->set.snapshots[field][snapshot];
        *data = f.data.data();
        if (len) *len = f.data.size();
    });
}

wf_status wf_set_sample_plane(const wf_snapshot_set* set, wf_axis axis, double offset,
                              wf_snapshot_set** out) {
    return guarded([&] {
        need(set, "set");
        need(out, "out");
        PlaneSpec plane{to_axis(axis), offset, ""};
        *out = new wf_snapshot_set{sample_plane(set->set, plane)};
    });
}

wf_status wf_set_derive(const wf_snapshot_set* set, const char* field, unsigned flags,
                        wf_snapshot_set** out) {
    return guarded([&] {
        need(set, "set");
        need(field, "field");
        need(out, "out");
        require(flags != 0 && (flags & ~0xFu) == 0, ErrorCode::InvalidArgument,
                "derive: no valid quantity requested");
        const SnapshotSet& src = set->set;
        const std::size_t fi = src.field_index(field);
        std::vector<FieldSnapshot> grad, strain, rot, q;
        for (const FieldSnapshot& u : src.snapshots[fi]) {
            FieldSnapshot g = compute_gradient(u);
            if (flags & WF_DERIVE_STRAIN_RATE) strain.push_back(compute_strain_rate(g));
            if (flags & WF_DERIVE_ROTATION_RATE) rot.push_back(compute_rotation_rate(g));
            if (flags & WF_DERIVE_Q_CRITERION) q.push_back(compute_q_criterion(g));
            if (flags & WF_DERIVE_GRADIENT) grad.push_back(std::move(g));
        }
        SnapshotSet r;
        r.grid = src.grid;
        r.times = src.times;
        r.pattern = "{field}_{index}.bin";
        if (flags & WF_DERIVE_GRADIENT) r.add_field("gradient", std::move(grad));
        if (flags & WF_DERIVE_STRAIN_RATE) r.add_field("strain_rate", std::move(strain));
        if (flags & WF_DERIVE_ROTATION_RATE) r.add_field("rotation_rate", std::move(rot));
        if (flags & WF_DERIVE_Q_CRITERION) r.add_field("q_criterion", std::move(q));
        *out = new wf_snapshot_set{std::move(r)};
    });
}

size_t wf_default_wake_planes(double rotor_diameter, double hub_height, double rotor_x, wf_plane* out,
                              size_t capacity) {
    const auto planes = default_wake_planes(rotor_diameter, hub_height, rotor_x);
    for (std::size_t i = 0; i < planes.size() && i < capacity && out; ++i) {
        out[i].axis = static_cast<wf_axis>(planes[i].axis);
        out[i].offset = planes[i].offset;
        std::snprintf(out[i].label, sizeof out[i].label, "%s", planes[i].label.c_str());
    }
    return planes.size();
}

/* ---- synth ---- */

void wf_wake_params_default(wf_wake_params* out) {
    if (!out) return;
    const WakeModelParams w;
    out->u_inf = w.u_inf;
    out->rotor_rpm = w.rotor_rpm;
    out->rotor_diameter = w.rotor_diameter;
    out->hub_height = w.hub_height;
    out->rotor_x = w.rotor_x;
    out->blades = w.blades;
    out->deficit_amplitude = w.deficit_amplitude;
    out->deficit_growth = w.deficit_growth;
    out->tip_vortex_amplitude = w.tip_vortex_amplitude;
    out->tip_decay_length = w.tip_decay_length;
    out->tower_wake_amplitude = w.tower_wake_amplitude;
    out->tower_strouhal = w.tower_strouhal;
    out->tower_diameter = w.tower_diameter;
    out->seed = w.seed;
}

wf_status wf_wake_params_validate(const wf_wake_params* p) {
    return guarded([&] { to_wake(p).validate(); });
}

wf_status wf_wake_velocity(const wf_wake_params* p, const double point[3], double t, double out[3]) {
    return guarded([&] {
        need(point, "point");
        need(out, "out");
        const auto u = wake_velocity(to_wake(p), {point[0], point[1], point[2]}, t);
        for (int i = 0; i < 3; ++i) out[i] = u[i];
    });
}

wf_status wf_synth_wake(const wf_wake_params* p, const wf_grid* grid, const double* times, size_t n_times,
                        wf_snapshot_set** out) {
    return guarded([&] {
        need(out, "out");
        *out = new wf_snapshot_set{
            generate_wake_set(to_wake(p), to_grid(grid), to_vector(times, n_times, "times"))};
    });
}

wf_status wf_synth_separable(const wf_grid* grid, const wf_separable_term* terms, size_t n_terms,
                             const double* times, size_t n_times, const char* field,
                             wf_snapshot_set** out, double* sigma_out) {
    return guarded([&] {
        need(out, "out");
        if (n_terms > 0) need(terms, "terms");
        SeparableSpec spec;
        spec.grid = to_grid(grid);
        if (field) spec.field = field;
        for (std::size_t i = 0; i < n_terms; ++i) {
            const wf_separable_term& t = terms[i];
            SeparableTerm term;
            for (int a = 0; a < 3; ++a) {
                term.shape.wavenumber[a] = t.wavenumber[a];
                require(t.kind[a] == WF_TRIG_COS || t.kind[a] == WF_TRIG_SIN, ErrorCode::InvalidArgument,
                        "separable: unknown trig kind");
                term.shape.kind[a] = t.kind[a] == WF_TRIG_SIN ? Trig::Sin : Trig::Cos;
            }
            switch (t.temporal) {
            case WF_TEMPORAL_CONSTANT: term.coefficient.kind = TemporalKind::Constant; break;
            case WF_TEMPORAL_SINE: term.coefficient.kind = TemporalKind::Sine; break;
            case WF_TEMPORAL_VALUES: term.coefficient.kind = TemporalKind::Values; break;
            default: fail(ErrorCode::InvalidArgument, "separable: unknown temporal kind");
            }
            term.coefficient.amplitude = t.amplitude;
            term.coefficient.frequency = t.frequency;
            term.coefficient.phase = t.phase;
            term.coefficient.values = to_vector(t.values, t.n_values, "values");
            spec.terms.push_back(std::move(term));
        }
        SeparableField f = generate_separable_field(spec, to_vector(times, n_times, "times"));
        if (sigma_out)
            for (std::size_t i = 0; i < f.sigma.size(); ++i) sigma_out[i] = f.sigma[i];
        *out = new wf_snapshot_set{std::move(f.set)};
    });
}

wf_status wf_synth_affine(const double gradient[9], const double constant[3], const wf_grid* grid,
                          wf_snapshot_set** out) {
    return guarded([&] {
        need(gradient, "gradient");
        need(constant, "constant");
        need(out, "out");
        Eigen::Matrix3d g;
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) g(r, c) = gradient[3 * r + c];
        SnapshotSet s;
        s.grid = to_grid(grid);
        s.times = {0.0};
        s.pattern = "u_{index}.bin";
        s.add_field("u", {generate_affine_field(g, {constant[0], constant[1], constant[2]}, s.grid, 0.0)});
        *out = new wf_snapshot_set{std::move(s)};
    });
}

/* ---- POD ---- */

void wf_pod_options_default(wf_pod_options* out) {
    if (!out) return;
    out->field = "u";
    out->component = -1;
    out->subtract_mean = 0;
    out->weights = nullptr;
    out->n_weights = 0;
    out->method = WF_POD_SNAPSHOTS;
}

static PodResult run_pod(const SnapshotMatrix& m, wf_pod_method method) {
    switch (method) {
    case WF_POD_SNAPSHOTS: return pod_method_of_snapshots(m);
    case WF_POD_SVD: return pod_direct_svd(m);
    }
    fail(ErrorCode::InvalidArgument, "unknown pod method");
}

wf_status wf_pod_compute(const wf_snapshot_set* set, const wf_pod_options* opts, wf_pod** out) {
    return guarded([&] {
        need(set, "set");
        need(opts, "options");
        need(out, "out");
        need(opts->field, "options.field");
        const SnapshotSet& s = set->set;
        const std::size_t fi = s.field_index(opts->field);
        std::optional<std::size_t> comp;
        if (opts->component >= 0) {
            require(static_cast<std::size_t>(opts->component) < s.fields[fi].components,
                    ErrorCode::OutOfRange, "pod: component index out of range");
            comp = static_cast<std::size_t>(opts->component);
        }
        std::optional<Eigen::VectorXd> w;
        if (opts->weights) {
            w = Eigen::Map<const Eigen::VectorXd>(opts->weights, static_cast<Eigen::Index>(opts->n_weights));
        }
        const SnapshotMatrix m = assemble_snapshot_matrix(s, opts->field, comp, opts->subtract_mean != 0, w);
        PodArchive a;
        a.result = run_pod(m, opts->method);
        a.grid = s.grid;
        a.field = opts->field;
        a.components = comp ? 1 : s.fields[fi].components;
        a.times = s.times;
        *out = new wf_pod{std::move(a)};
    });
}

wf_status wf_pod_from_matrix(const double* data, size_t rows, size_t cols, const double* weights,
                             int subtract_mean, wf_pod_method method, wf_pod** out) {
    return guarded([&] {
        need(data, "data");
        need(out, "out");
        require(rows >= 1 && cols >= 1, ErrorCode::InvalidArgument, "pod: empty matrix");
        SnapshotMatrix m;
        m.data = Eigen::Map<const Eigen::MatrixXd>(data, static_cast<Eigen::Index>(rows),
                                                   static_cast<Eigen::Index>(cols));
        if (weights) m.weights = Eigen::Map<const Eigen::VectorXd>(weights, static_cast<Eigen::Index>(rows));
        if (subtract_mean) {
            // Two passes keep the row sums at rounding level.
            Eigen::VectorXd mean = m.data.rowwise().mean();
            m.data.colwise() -= mean;
            const Eigen::VectorXd resid = m.data.rowwise().mean();
            m.data.colwise() -= resid;
            m.mean = mean + resid;
            m.mean_subtracted = true;
        }
        PodArchive a;
        a.result = run_pod(m, method);
        a.grid.nx = rows;
        a.field = "x";
        for (std::size_t s = 0; s < cols; ++s) a.times.push_back(static_cast<double>(s));
        *out = new wf_pod{std::move(a)};
    });
}

void wf_pod_free(wf_pod* pod) { delete pod; }

size_t wf_pod_rank(const wf_pod* pod) { return pod ? static_cast<size_t>(pod->archive.result.rank()) : 0; }
size_t wf_pod_rows(const wf_pod* pod) { return pod ? static_cast<size_t>(pod->archive.result.rows()) : 0; }
size_t wf_pod_snapshots(const wf_pod* pod) {
    return pod ? static_cast<size_t>(pod->archive.result.snapshots()) : 0;
}

const double* wf_pod_singular_values(const wf_pod* pod) {
    return pod ? pod->archive.result.singular_values.data() : nullptr;
}

wf_status wf_pod_mode(const wf_pod* pod, size_t n, const double** data) {
    return guarded([&] {
        need(pod, "pod");
        need(data, "data");
        require(n < static_cast<std::size_t>(pod->archive.result.rank()), ErrorCode::OutOfRange,
                "mode index out of range");
        *data = pod->archive.result.modes.col(static_cast<Eigen::Index>(n)).data();
    });
}

wf_status wf_pod_coefficients(const wf_pod* pod, double* out, size_t len) {
    return guarded([&] {
        need(pod, "pod");
        copy_out(pod->archive.result.temporal_coeffs.transpose(), out, len);
    });
}

wf_status wf_pod_cumulative_energy(const wf_pod* pod, size_t n_modes, double* retained) {
    return guarded([&] {
        need(retained, "retained");
        *retained = cumulative_energy(pod->archive.result, rank_arg(pod, n_modes));
    });
}

wf_status wf_pod_reconstruct(const wf_pod* pod, size_t n_modes, double* out, size_t len) {
    return guarded([&] {
        const SnapshotMatrix m = reconstruct(pod->archive.result, rank_arg(pod, n_modes));
        copy_out(m.data, out, len);
    });
}

wf_status wf_pod_project(const wf_pod* pod, const double* snapshot, size_t len, size_t n_modes,
                         double* out) {
    return guarded([&] {
        need(snapshot, "snapshot");
        need(out, "out");
        const std::size_t n = rank_arg(pod, n_modes);
        const Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(snapshot, static_cast<Eigen::Index>(len));
        const Eigen::VectorXd a = project(x, pod->archive.result, n);
        for (Eigen::Index i = 0; i < a.size(); ++i) out[i] = a(i);
    });
}

wf_status wf_pod_layout(const wf_pod* pod, wf_grid* grid, size_t* components) {
    return guarded([&] {
        need(pod, "pod");
        if (grid) *grid = from_grid(pod->archive.grid);
        if (components) *components = pod->archive.components;
    });
}

wf_status wf_pod_save(const wf_pod* pod, const char* dir) {
    return guarded([&] {
        need(pod, "pod");
        need(dir, "dir");
        save_pod(pod->archive, dir);
    });
}

wf_status wf_pod_load(const char* dir, wf_pod** out) {
    return guarded([&] {
        need(dir, "dir");
        need(out, "out");
        *out = new wf_pod{load_pod(dir)};
    });
}

wf_status wf_pod_reconstruct_set(const wf_pod* pod, size_t n_modes, wf_snapshot_set** out) {
    return guarded([&] {
        need(out, "out");
        *out = new wf_snapshot_set{reconstruct_set(pod->archive, rank_arg(pod, n_modes))};
    });
}

/* ---- FSI ---- */

void wf_coupling_config_default(wf_coupling_config* out) {
    if (out) *out = from_coupling(CouplingConfig{});
}

wf_status wf_aitken_update(double omega_k, const double* r_k, const double* r_k1, size_t n,
                           const wf_coupling_config* cfg, double* omega_out) {
    return guarded([&] {
        need(cfg, "config");
        need(omega_out, "omega_out");
        const auto a = Eigen::Map<const Eigen::VectorXd>(r_k, static_cast<Eigen::Index>(n));
        const auto b = Eigen::Map<const Eigen::VectorXd>(r_k1, static_cast<Eigen::Index>(n));
        *omega_out = aitken_update(omega_k, a, b, to_coupling(*cfg));
    });
}

void wf_fsi_problem_default(wf_fsi_problem* out, wf_fsi_kind kind) {
    if (!out) return;
    const FsiProblem p;
    out->kind = kind;
    out->piston_mass = p.piston.mass;
    out->piston_stiffness = p.piston.stiffness;
    out->piston_damping = p.piston.damping;
    out->added_mass = p.piston.added_mass;
    out->d0 = p.piston.d0;
    out->v0 = p.piston.v0;
    out->chain_nodes = p.chain.nodes;
    out->node_mass = p.chain.node_mass;
    out->chain_stiffness = p.chain.stiffness;
    out->damping_alpha = p.chain.damping_alpha;
    out->chain_load = p.chain.load == ChainLoad::Constant ? WF_CHAIN_CONSTANT : WF_CHAIN_AERO;
    out->rho = p.chain.aero.rho;
    out->u_inf = p.chain.aero.u_inf;
    out->chord = p.chain.aero.chord;
    out->lift_coefficient = p.chain.aero.lift_coefficient;
    out->span = p.chain.aero.span;
    out->constant_load = p.chain.constant_load;
    out->beta = p.newmark.beta;
    out->gamma = p.newmark.gamma;
    out->dt = p.newmark.dt;
    out->end_time = p.end_time;
    out->ramp_steps = p.ramp_steps;
    out->ramp_factor = p.ramp_factor;
    out->coupling = from_coupling(p.coupling);
}

wf_status wf_fsi_run(const wf_fsi_problem* problem, wf_fsi_result** out) {
    return guarded([&] {
        need(problem, "problem");
        need(out, "out");
        const wf_fsi_problem& c = *problem;
        FsiProblem p;
        require(c.kind == WF_FSI_PISTON || c.kind == WF_FSI_CHAIN, ErrorCode::InvalidArgument,
                "fsi: unknown problem kind");
        p.kind = c.kind == WF_FSI_PISTON ? FsiProblemKind::Piston : FsiProblemKind::CantileverChain;
        p.piston = {c.piston_mass, c.piston_stiffness, c.piston_damping, c.added_mass, c.d0, c.v0};
        p.chain.nodes = c.chain_nodes;
        p.chain.node_mass = c.node_mass;
        p.chain.stiffness = c.chain_stiffness;
        p.chain.damping_alpha = c.damping_alpha;
        require(c.chain_load == WF_CHAIN_AERO || c.chain_load == WF_CHAIN_CONSTANT,
                ErrorCode::InvalidArgument, "fsi: unknown chain load");
        p.chain.load = c.chain_load == WF_CHAIN_CONSTANT ? ChainLoad::Constant : ChainLoad::Aero;
        p.chain.aero = {c.rho, c.u_inf, c.chord, c.lift_coefficient, c.span};
        p.chain.constant_load = c.constant_load;
        p.newmark = {c.beta, c.gamma, c.dt};
        p.coupling = to_coupling(c.coupling);
        p.end_time = c.end_time;
        p.ramp_steps = c.ramp_steps;
        p.ramp_factor = c.ramp_factor;
        *out = new wf_fsi_result{run_fsi(p)};
    });
}

void wf_fsi_free(wf_fsi_result* result) { delete result; }

size_t wf_fsi_rows(const wf_fsi_result* r) { return r ? r->history.t.size() : 0; }

size_t wf_fsi_dofs(const wf_fsi_result* r) {
    return r && !r->history.d.empty() ? static_cast<size_t>(r->history.d.front().size()) : 0;
}

wf_status wf_fsi_row(const wf_fsi_result* r, size_t row, double* t, double* d, double* v, double* a,
                     double* force, int* inner_iterations) {
    return guarded([&] {
        need(r, "result");
        const FsiHistory& h = r->history;
        require(row < h.t.size(), ErrorCode::OutOfRange, "fsi: row out of range");
        auto put = [](const Eigen::VectorXd& x, double* dst) {
            if (dst)
                for (Eigen::Index i = 0; i < x.size(); ++i) dst[i] = x(i);
        };
        if (t) *t = h.t[row];
        put(h.d[row], d);
        put(h.v[row], v);
        put(h.a[row], a);
        put(h.force[row], force);
        if (inner_iterations) *inner_iterations = h.inner_iterations[row];
    });
}

size_t wf_fsi_failed_steps(const wf_fsi_result* r) {
    if (!r) return 0;
    std::size_t n = 0;
    for (const StepTrace& s : r->history.trace.steps) n += s.converged ? 0 : 1;
    return n;
}

const char* wf_fsi_aborted(const wf_fsi_result* r) {
    if (!r || r->history.aborted.empty()) return nullptr;
    return r->history.aborted.c_str();
}

wf_status wf_fsi_write_csv(const wf_fsi_result* r, const char* history_path, const char* trace_path) {
    return guarded([&] {
        need(r, "result");
        if (history_path) write_history_csv(r->history, history_path);
        if (trace_path) write_trace_csv(r->history, trace_path);
    });
}

/* ---- morph ---- */

static RbfKernel pick_kernel(wf_rbf_kernel k, Eigen::Index dim) {
    switch (k) {
    case WF_RBF_DEFAULT: return default_kernel(dim);
    case WF_RBF_THIN_PLATE: return RbfKernel::ThinPlate;
    case WF_RBF_CUBIC: return RbfKernel::Cubic;
    }
    fail(ErrorCode::InvalidArgument, "unknown rbf kernel");
}

wf_status wf_rbf_build(size_t dim, const double* positions, const double* displacements, size_t n,
                       wf_rbf_kernel kernel, wf_rbf** out) {
    return guarded([&] {
        need(out, "out");
        require(dim == 2 || dim == 3, ErrorCode::InvalidArgument, "rbf: dimension must be 2 or 3");
        if (n > 0) {
            need(positions, "positions");
            need(displacements, "displacements");
        }
        ControlPoints cp{row_major(positions, n, dim), row_major(displacements, n, dim)};
        *out = new wf_rbf{build_rbf(cp, pick_kernel(kernel, static_cast<Eigen::Index>(dim)))};
    });
}

wf_status wf_rbf_build_from_csv(const char* path, wf_rbf_kernel kernel, wf_rbf** out) {
    return guarded([&] {
        need(path, "path");
        need(out, "out");
        const ControlPoints cp = read_control_points_csv(path);
        *out = new wf_rbf{build_rbf(cp, pick_kernel(kernel, cp.dim()))};
    });
}

void wf_rbf_free(wf_rbf* rbf) { delete rbf; }

size_t wf_rbf_dim(const wf_rbf* rbf) { return rbf ? static_cast<size_t>(rbf->f.dim()) : 0; }

wf_status wf_rbf_evaluate(const wf_rbf* rbf, const double* point, double* out) {
    return guarded([&] {
        need(rbf, "rbf");
        need(point, "point");
        need(out, "out");
        const Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(point, rbf->f.dim());
        const Eigen::VectorXd s = rbf->f.evaluate(x);
        for (Eigen::Index i = 0; i < s.size(); ++i) out[i] = s(i);
    });
}

size_t wf_lattice_node_count(const wf_grid* grid, size_t dim) {
    if (!grid || (dim != 2 && dim != 3)) return 0;
    return (grid->nx + 1) * (grid->ny + 1) * (dim == 3 ? grid->nz + 1 : 1);
}

wf_status wf_lattice_nodes(const wf_grid* grid, size_t dim, double* out, size_t len) {
    return guarded([&] {
        const NodeLattice lat = node_lattice(to_grid(grid), static_cast<int>(dim));
        copy_out(lat.coords.transpose(), out, len);
    });
}

wf_status wf_morph_lattice(const wf_grid* grid, const wf_rbf* rbf, double* out, size_t len,
                           wf_mesh_validity* validity) {
    return guarded([&] {
        need(rbf, "rbf");
        const NodeLattice lat = node_lattice(to_grid(grid), static_cast<int>(rbf->f.dim()));
        const Eigen::MatrixXd moved = morph_nodes(lat.coords, rbf->f);
        if (out) copy_out(moved.transpose(), out, len);
        if (validity) {
            const MeshValidity v = check_mesh_validity(lat, moved);
            *validity = {v.min_jacobian, v.inverted_cells, v.cells};
        }
    });
}

wf_status wf_mesh_validity_check(const wf_grid* grid, size_t dim, const double* morphed, size_t len,
                                 wf_mesh_validity* out) {
    return guarded([&] {
        need(morphed, "morphed");
        need(out, "out");
        const NodeLattice lat = node_lattice(to_grid(grid), static_cast<int>(dim));
        require(len == static_cast<std::size_t>(lat.coords.size()), ErrorCode::SizeMismatch,
                "morphed coordinates hold " + std::to_string(len) + " values, expected " +
                    std::to_string(lat.coords.size()));
        const Eigen::MatrixXd x = row_major(morphed, static_cast<std::size_t>(lat.coords.rows()), dim);
        const MeshValidity v = check_mesh_validity(lat, x);
        *out = {v.min_jacobian, v.inverted_cells, v.cells};
    });
}

wf_status wf_morph_displacement_set(const wf_grid* grid, const wf_rbf* rbf, wf_snapshot_set** out) {
    return guarded([&] {
        need(rbf, "rbf");
        need(out, "out");
        SnapshotSet s;
        s.grid = to_grid(grid);
        s.times = {0.0};
        s.pattern = "displacement_{index}.bin";
        FieldSnapshot f(s.grid, 3, 0.0);
        const Eigen::Index dim = rbf->f.dim();
        for (std::size_t k = 0; k < s.grid.nz; ++k)
            for (std::size_t j = 0; j < s.grid.ny; ++j)
                for (std::size_t i = 0; i < s.grid.nx; ++i) {
                    const auto c = s.grid.cell_center(i, j, k);
                    Eigen::VectorXd x(dim);
                    for (Eigen::Index a = 0; a < dim; ++a) x(a) = c[static_cast<std::size_t>(a)];
                    const Eigen::VectorXd u = rbf->f.evaluate(x);
                    for (Eigen::Index a = 0; a < dim; ++a) f.at(i, j, k, static_cast<std::size_t>(a)) = u(a);
                }
        s.add_field("displacement", {std::move(f)});
        *out = new wf_snapshot_set{std::move(s)};
    });
}

}  // extern "C"
