// wakefsi command-line front end. Talks to the library only through the C API.
#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "wakefsi/wakefsi.h"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

enum Exit { kOk = 0, kInternal = 1, kConfig = 2, kNonConvergence = 3, kIo = 4 };

struct Failure : std::runtime_error {
    Failure(int code, const std::string& msg) : std::runtime_error(msg), code(code) {}
    int code;
};

int exit_for(wf_status s) {
    switch (s) {
    case WF_OK: return kOk;
    case WF_ERR_INVALID_ARGUMENT:
    case WF_ERR_SIZE_MISMATCH:
    case WF_ERR_NON_FINITE:
    case WF_ERR_OUT_OF_RANGE: return kConfig;
    case WF_ERR_IO: return kIo;
    case WF_ERR_SINGULAR:
    case WF_ERR_NUMERICAL: return kNonConvergence;
    default: return kInternal;
    }
}

void check(wf_status s, const std::string& what) {
    if (s != WF_OK) throw Failure(exit_for(s), what + ": " + wf_last_error());
}

template <class T, void (*Free)(T*)>
struct Handle {
    T* p = nullptr;
    Handle() = default;
    Handle(const Handle&) = delete;
    Handle& operator=(const Handle&) = delete;
    Handle(Handle&& o) noexcept : p(o.p) { o.p = nullptr; }
    ~Handle() { Free(p); }
    T** out() { return &p; }
    T* get() const { return p; }
};
using SetHandle = Handle<wf_snapshot_set, wf_set_free>;
using PodHandle = Handle<wf_pod, wf_pod_free>;
using FsiHandle = Handle<wf_fsi_result, wf_fsi_free>;
using RbfHandle = Handle<wf_rbf, wf_rbf_free>;

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::ofstream open_out(const fs::path& p, bool binary = false) {
    std::ofstream f(p, binary ? std::ios::binary | std::ios::trunc : std::ios::trunc);
    if (!f) throw Failure(kIo, "cannot write " + p.string());
    return f;
}

void write_json(const fs::path& p, const json& j) {
    auto f = open_out(p);
    f << j.dump(2) << '\n';
    if (!f) throw Failure(kIo, "write failed for " + p.string());
}

// ---------------------------------------------------------------------------
// Options: every flag mirrors a key of the flat JSON config; flags win.

class Options {
public:
    explicit Options(CLI::App* app) : app_(app) {}

    template <class T>
    void add(const std::string& key, const std::string& help, const T& fallback) {
        auto holder = std::make_shared<T>(fallback);
        CLI::Option* opt = app_->add_option(flag_name(key), *holder, help + "  [key: " + key + "]");
        opt->capture_default_str();
        keys_.insert(key);
        defaults_[key] = fallback;
        readers_.push_back([this, key, holder, opt] {
            if (opt->count() > 0) values_[key] = *holder;
        });
    }

    void flag(const std::string& key, const std::string& help) {
        auto holder = std::make_shared<bool>(false);
        CLI::Option* opt = app_->add_flag(flag_name(key), *holder, help + "  [key: " + key + "]");
        keys_.insert(key);
        defaults_[key] = false;
        readers_.push_back([this, key, holder, opt] {
            if (opt->count() > 0) values_[key] = *holder;
        });
    }

    // Merge order: built-in defaults, config file, explicit flags.
    void resolve(const json& config, const std::set<std::string>& globals) {
        values_ = defaults_;
        for (auto it = config.begin(); it != config.end(); ++it) {
            if (globals.count(it.key())) continue;
            if (!keys_.count(it.key()))
                throw Failure(kConfig, "unknown config key '" + it.key() + "' for '" + app_->get_name() + "'");
            values_[it.key()] = it.value();
        }
        for (auto& r : readers_) r();
    }

    bool has(const std::string& key) const { return values_.contains(key) && !values_.at(key).is_null(); }

    template <class T>
    T get(const std::string& key) const {
        try {
            return values_.at(key).get<T>();
        } catch (const json::exception&) {
            throw Failure(kConfig, "invalid value for '" + key + "'");
        }
    }

    // Structured values may arrive as JSON text from the command line.
    json structured(const std::string& key) const {
        const json& v = values_.at(key);
        if (!v.is_string()) return v;
        const auto& text = v.get_ref<const std::string&>();
        if (text.empty()) return json();
        try {
            return json::parse(text);
        } catch (const json::exception&) {
            throw Failure(kConfig, "'" + key + "' is not valid JSON");
        }
    }

private:
    static std::string flag_name(std::string key) {
        std::replace(key.begin(), key.end(), '_', '-');
        return "--" + key;
    }

    CLI::App* app_;
    std::set<std::string> keys_;
    json defaults_ = json::object();
    json values_ = json::object();
    std::vector<std::function<void()>> readers_;
};

struct Globals {
    std::string config;
    std::string out;
    bool force = false;
    int threads = 1;
};

json read_config(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) throw Failure(kIo, "cannot read config " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw Failure(kConfig, "config " + path + " is not valid JSON: " + e.what());
    }
    if (!j.is_object()) throw Failure(kConfig, "config " + path + " must be a JSON object");
    return j;
}

fs::path prepare_out(const Globals& g) {
    if (g.out.empty()) throw Failure(kConfig, "--out is required");
    const fs::path out(g.out);
    std::error_code ec;
    if (fs::exists(out, ec)) {
        if (!fs::is_directory(out, ec)) throw Failure(kIo, out.string() + " exists and is not a directory");
        if (!fs::is_empty(out, ec) && !g.force)
            throw Failure(kConfig, "output directory " + out.string() + " is not empty; pass --force to overwrite");
    }
    fs::create_directories(out, ec);
    if (ec) throw Failure(kIo, "cannot create " + out.string() + ": " + ec.message());
    return out;
}

void require_input(const std::string& key, const std::string& path) {
    if (path.empty()) throw Failure(kConfig, "'" + key + "' is required");
    if (!fs::exists(path)) throw Failure(kIo, "input " + path + " does not exist");
}

// ---------------------------------------------------------------------------
// Grid and wake parameters shared by synth and pod.

void add_wake_options(Options& o) {
    wf_wake_params w;
    wf_wake_params_default(&w);
    o.add("u_inf", "free-stream speed [m/s]", w.u_inf);
    o.add("rotor_rpm", "rotor speed [rpm]", w.rotor_rpm);
    o.add("rotor_diameter", "rotor diameter D [m]", w.rotor_diameter);
    o.add("hub_height", "hub height [m]", w.hub_height);
    o.add("rotor_x", "streamwise rotor position [m]", w.rotor_x);
    o.add("blades", "blade count", w.blades);
    o.add("deficit_amplitude", "velocity deficit amplitude (fraction of u_inf)", w.deficit_amplitude);
    o.add("deficit_growth", "wake growth rate", w.deficit_growth);
    o.add("tip_vortex_amplitude", "tip vortex amplitude [m/s]", w.tip_vortex_amplitude);
    o.add("tip_decay_length", "tip vortex decay length [m]", w.tip_decay_length);
    o.add("tower_wake_amplitude", "tower shedding amplitude [m/s]", w.tower_wake_amplitude);
    o.add("tower_strouhal", "tower shedding Strouhal number", w.tower_strouhal);
    o.add("tower_diameter", "tower diameter [m]", w.tower_diameter);
    o.add("seed", "random seed", static_cast<unsigned long long>(w.seed));
}

wf_wake_params wake_from(const Options& o) {
    wf_wake_params w;
    w.u_inf = o.get<double>("u_inf");
    w.rotor_rpm = o.get<double>("rotor_rpm");
    w.rotor_diameter = o.get<double>("rotor_diameter");
    w.hub_height = o.get<double>("hub_height");
    w.rotor_x = o.get<double>("rotor_x");
    w.blades = o.get<int>("blades");
    w.deficit_amplitude = o.get<double>("deficit_amplitude");
    w.deficit_growth = o.get<double>("deficit_growth");
    w.tip_vortex_amplitude = o.get<double>("tip_vortex_amplitude");
    w.tip_decay_length = o.get<double>("tip_decay_length");
    w.tower_wake_amplitude = o.get<double>("tower_wake_amplitude");
    w.tower_strouhal = o.get<double>("tower_strouhal");
    w.tower_diameter = o.get<double>("tower_diameter");
    w.seed = o.get<unsigned long long>("seed");
    return w;
}

// Spacing and origin left at 0 are derived from the rotor: 4D x 2D x 2 hub
// heights, with x cell centres on multiples of D / (nx / 4) from -D/2.
void add_grid_options(Options& o, std::size_t nx, std::size_t ny, std::size_t nz) {
    o.add("nx", "cells along x", nx);
    o.add("ny", "cells along y", ny);
    o.add("nz", "cells along z", nz);
    o.add("dx", "spacing along x [m] (0 = derived from the rotor)", 0.0);
    o.add("dy", "spacing along y [m] (0 = derived)", 0.0);
    o.add("dz", "spacing along z [m] (0 = derived)", 0.0);
    o.add("origin", "grid origin x y z [m] (empty = derived)", std::vector<double>{});
}

wf_grid grid_from(const Options& o, double rotor_diameter, double hub_height, double rotor_x) {
    wf_grid g{};
    g.nx = o.get<std::size_t>("nx");
    g.ny = o.get<std::size_t>("ny");
    g.nz = o.get<std::size_t>("nz");
    if (g.nx == 0 || g.ny == 0 || g.nz == 0) throw Failure(kConfig, "nx, ny and nz must be >= 1");
    const double d = rotor_diameter;
    g.dx = o.get<double>("dx") > 0 ? o.get<double>("dx") : 4.0 * d / static_cast<double>(g.nx);
    g.dy = o.get<double>("dy") > 0 ? o.get<double>("dy") : 2.0 * d / static_cast<double>(g.ny);
    g.dz = o.get<double>("dz") > 0 ? o.get<double>("dz") : 2.0 * hub_height / static_cast<double>(g.nz);
    const auto origin = o.get<std::vector<double>>("origin");
    if (origin.empty()) {
        g.origin[0] = rotor_x - 0.5 * d - 0.5 * g.dx;
        g.origin[1] = -d;
        g.origin[2] = 0.0;
    } else if (origin.size() == 3) {
        std::copy(origin.begin(), origin.end(), g.origin);
    } else {
        throw Failure(kConfig, "origin needs 3 values");
    }
    return g;
}

std::vector<double> make_times(const Options& o) {
    const auto s = o.get<long long>("snapshots");
    const double dt = o.get<double>("dt");
    const double t0 = o.get<double>("t0");
    if (s < 1) throw Failure(kConfig, "snapshots must be >= 1");
    if (!(dt > 0.0)) throw Failure(kConfig, "dt must be > 0");
    std::vector<double> t(static_cast<std::size_t>(s));
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = t0 + static_cast<double>(i) * dt;
    return t;
}

// ---------------------------------------------------------------------------
// synth

wf_separable_term term_from(const json& j, std::vector<std::vector<double>>& storage) {
    wf_separable_term t{};
    try {
        const auto k = j.value("wavenumber", std::vector<int>{0, 0, 0});
        const auto kinds = j.value("trig", std::vector<std::string>{"cos", "cos", "cos"});
        if (k.size() != 3 || kinds.size() != 3) throw Failure(kConfig, "terms: wavenumber and trig need 3 entries");
        for (int a = 0; a < 3; ++a) {
            t.wavenumber[a] = k[a];
            if (kinds[a] != "cos" && kinds[a] != "sin") throw Failure(kConfig, "terms: trig must be cos or sin");
            t.kind[a] = kinds[a] == "sin" ? WF_TRIG_SIN : WF_TRIG_COS;
        }
        const std::string temporal = j.value("temporal", std::string("constant"));
        t.amplitude = j.value("amplitude", 1.0);
        t.frequency = j.value("frequency", 0.0);
        t.phase = j.value("phase", 0.0);
        if (temporal == "constant") {
            t.temporal = WF_TEMPORAL_CONSTANT;
        } else if (temporal == "sine") {
            t.temporal = WF_TEMPORAL_SINE;
        } else if (temporal == "values") {
            t.temporal = WF_TEMPORAL_VALUES;
            storage.push_back(j.at("values").get<std::vector<double>>());
            t.values = storage.back().data();
            t.n_values = storage.back().size();
        } else {
            throw Failure(kConfig, "terms: temporal must be constant, sine or values");
        }
    } catch (const json::exception& e) {
        throw Failure(kConfig, std::string("terms: ") + e.what());
    }
    return t;
}

int cmd_synth(const Globals& g, const Options& o) {
    const std::string kind = o.get<std::string>("kind");
    wf_wake_params w = wake_from(o);
    check(wf_wake_params_validate(&w), "synth");
    const wf_grid grid = grid_from(o, w.rotor_diameter, w.hub_height, w.rotor_x);
    const std::vector<double> times = make_times(o);
    SetHandle set;
    json summary{{"kind", kind}};
    if (kind == "wake") {
        check(wf_synth_wake(&w, &grid, times.data(), times.size(), set.out()), "synth");
    } else if (kind == "separable") {
        const json terms = o.structured("terms");
        if (!terms.is_array() || terms.empty()) throw Failure(kConfig, "separable synth needs a non-empty 'terms' array");
        std::vector<std::vector<double>> storage;
        storage.reserve(terms.size());
        std::vector<wf_separable_term> ts;
        for (const auto& t : terms) ts.push_back(term_from(t, storage));
        std::vector<double> sigma(ts.size());
        check(wf_synth_separable(&grid, ts.data(), ts.size(), times.data(), times.size(),
                                 o.get<std::string>("field").c_str(), set.out(), sigma.data()),
              "synth");
        summary["term_norms"] = sigma;
    } else if (kind == "affine") {
        const auto grad = o.get<std::vector<double>>("gradient");
        const auto c = o.get<std::vector<double>>("constant");
        if (grad.size() != 9 || c.size() != 3) throw Failure(kConfig, "affine synth needs 9 gradient and 3 constant values");
        check(wf_synth_affine(grad.data(), c.data(), &grid, set.out()), "synth");
    } else {
        throw Failure(kConfig, "kind must be wake, separable or affine");
    }
    const fs::path out = prepare_out(g);
    check(wf_set_save(set.get(), out.c_str()), "synth");
    summary["snapshots"] = wf_set_snapshot_count(set.get());
    summary["grid"] = {{"nx", grid.nx}, {"ny", grid.ny}, {"nz", grid.nz},
                       {"dx", grid.dx}, {"dy", grid.dy}, {"dz", grid.dz},
                       {"origin", {grid.origin[0], grid.origin[1], grid.origin[2]}}};
    write_json(out / "synth.json", summary);
    return kOk;
}

// ---------------------------------------------------------------------------
// pod

struct PlaneJob {
    std::string label;
    std::optional<wf_plane> plane;  // empty: the whole volume
    json result;
    int code = kOk;
    std::string error;
};

std::optional<wf_plane> parse_plane(const std::string& spec) {
    // axis:offset[:label]
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() < 2 || parts.size() > 3) throw Failure(kConfig, "plane '" + spec + "' must be axis:offset[:label]");
    wf_plane p{};
    const std::string& a = parts[0];
    if (a == "x" || a == "X") p.axis = WF_AXIS_X;
    else if (a == "y" || a == "Y") p.axis = WF_AXIS_Y;
    else if (a == "z" || a == "Z") p.axis = WF_AXIS_Z;
    else throw Failure(kConfig, "plane '" + spec + "': unknown axis");
    try {
        std::size_t used = 0;
        p.offset = std::stod(parts[1], &used);
        if (used != parts[1].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
        throw Failure(kConfig, "plane '" + spec + "': bad offset");
    }
    const std::string label = parts.size() == 3 ? parts[2] : a + "_" + parts[1];
    if (label.empty() || label.size() >= sizeof p.label || label.find('/') != std::string::npos)
        throw Failure(kConfig, "plane '" + spec + "': bad label");
    std::snprintf(p.label, sizeof p.label, "%s", label.c_str());
    return p;
}

// 8-bit binary PGM of one component on the plane, highest second-axis
// coordinate on the top row.
json write_heatmap(const fs::path& pgm, const double* mode, const wf_grid& g, std::size_t comps,
                   std::size_t comp, std::optional<wf_axis> normal) {
    const std::size_t n[3] = {g.nx, g.ny, g.nz};
    int ax_w = 0, ax_h = 1;
    if (normal) {
        ax_w = *normal == WF_AXIS_X ? 1 : 0;
        ax_h = *normal == WF_AXIS_Z ? 1 : 2;
    }
    const std::size_t fixed_k = normal ? 0 : g.nz / 2;
    const std::size_t w = n[ax_w], h = n[ax_h];
    std::vector<double> v(w * h);
    for (std::size_t r = 0; r < h; ++r)
        for (std::size_t c = 0; c < w; ++c) {
            std::size_t idx[3] = {0, 0, fixed_k};
            if (normal) idx[*normal] = 0;
            idx[ax_w] = c;
            idx[ax_h] = h - 1 - r;
            const std::size_t cell = (idx[2] * g.ny + idx[1]) * g.nx + idx[0];
            v[r * w + c] = mode[cell * comps + comp];
        }
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    const double vmin = *lo, vmax = *hi;
    std::string pixels(v.size(), '\0');
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double s = vmax > vmin ? (v[i] - vmin) / (vmax - vmin) : 0.0;
        pixels[i] = static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * s)));
    }
    auto f = open_out(pgm, true);
    f << "P5\n" << w << ' ' << h << "\n255\n";
    f.write(pixels.data(), static_cast<std::streamsize>(pixels.size()));
    if (!f) throw Failure(kIo, "write failed for " + pgm.string());
    return {{"width", w}, {"height", h}, {"component", comp}, {"min", vmin}, {"max", vmax}};
}

void run_plane(PlaneJob& job, const wf_snapshot_set* set, const Options& o, const fs::path& out) {
    SetHandle plane;
    const wf_snapshot_set* source = set;
    if (job.plane) {
        check(wf_set_sample_plane(set, job.plane->axis, job.plane->offset, plane.out()), "plane " + job.label);
        source = plane.get();
    }
    wf_pod_options opts;
    wf_pod_options_default(&opts);
    const std::string field = o.get<std::string>("field");
    opts.field = field.c_str();
    opts.component = o.get<int>("component");
    opts.subtract_mean = o.get<bool>("subtract_mean") ? 1 : 0;
    const std::string method = o.get<std::string>("method");
    if (method != "snapshots" && method != "svd") throw Failure(kConfig, "method must be snapshots or svd");
    opts.method = method == "svd" ? WF_POD_SVD : WF_POD_SNAPSHOTS;
    PodHandle pod;
    check(wf_pod_compute(source, &opts, pod.out()), "pod " + job.label);

    const fs::path dir = out / job.label;
    fs::create_directories(dir);
    const std::size_t rank = wf_pod_rank(pod.get());
    const double* sigma = wf_pod_singular_values(pod.get());
    double total = 0.0;
    for (std::size_t i = 0; i < rank; ++i) total += sigma[i] * sigma[i];
    {
        auto csv = open_out(dir / "energy.csv");
        csv << "mode_index,sigma,energy_fraction,cumulative_retained,cumulative_loss\n";
        for (std::size_t i = 0; i < rank; ++i) {
            double retained = 0.0;
            check(wf_pod_cumulative_energy(pod.get(), i + 1, &retained), "pod");
            csv << i + 1 << ',' << num(sigma[i]) << ',' << num(sigma[i] * sigma[i] / total) << ','
                << num(retained) << ',' << num(1.0 - retained) << '\n';
        }
        if (!csv) throw Failure(kIo, "write failed for energy.csv");
    }
    check(wf_pod_save(pod.get(), (dir / "modes").c_str()), "pod");

    wf_grid g{};
    std::size_t comps = 0;
    check(wf_pod_layout(pod.get(), &g, &comps), "pod");
    const int c = o.get<int>("heatmap_component");
    if (c < 0 || static_cast<std::size_t>(c) >= comps) throw Failure(kConfig, "heatmap_component out of range");
    json heatmaps = json::array();
    for (std::size_t m = 0; m < std::min<std::size_t>(3, rank); ++m) {
        const double* mode = nullptr;
        check(wf_pod_mode(pod.get(), m, &mode), "pod");
        const std::string stem = "mode_" + std::to_string(m + 1);
        std::optional<wf_axis> normal;
        if (job.plane) normal = job.plane->axis;
        json side = write_heatmap(dir / (stem + ".pgm"), mode, g, comps, static_cast<std::size_t>(c), normal);
        side["mode"] = m + 1;
        write_json(dir / (stem + ".json"), side);
        heatmaps.push_back(stem + ".pgm");
    }

    json retained = json::object(), loss = json::object();
    for (long long n : o.get<std::vector<long long>>("n_modes")) {
        if (n < 0) throw Failure(kConfig, "n_modes entries must be >= 0");
        // Counts beyond the rank keep everything.
        double r = 0.0;
        check(wf_pod_cumulative_energy(pod.get(), std::min(static_cast<std::size_t>(n), rank), &r), "pod");
        retained[std::to_string(n)] = r;
        loss[std::to_string(n)] = 1.0 - r;
    }
    job.result = {{"label", job.label}};
    if (job.plane) {
        const char* axes = "xyz";
        job.result["axis"] = std::string(1, axes[job.plane->axis]);
        job.result["offset"] = job.plane->offset;
    }
    job.result["rank"] = rank;
    job.result["sigma"] = std::vector<double>(sigma, sigma + rank);
    job.result["retained"] = retained;
    job.result["loss"] = loss;
    job.result["heatmaps"] = heatmaps;
}

int cmd_pod(const Globals& g, const Options& o) {
    const std::string input = o.get<std::string>("input");
    require_input("input", input);
    std::vector<PlaneJob> jobs;
    if (o.get<bool>("volume")) {
        jobs.push_back({"volume", std::nullopt, {}, kOk, {}});
    }
    const auto specs = o.get<std::vector<std::string>>("planes");
    for (const auto& s : specs) {
        auto p = parse_plane(s);
        jobs.push_back({p->label, p, {}, kOk, {}});
    }
    if (jobs.empty()) {
        wf_plane planes[32];
        const std::size_t n = wf_default_wake_planes(o.get<double>("rotor_diameter"), o.get<double>("hub_height"),
                                                     o.get<double>("rotor_x"), planes, 32);
        for (std::size_t i = 0; i < std::min<std::size_t>(n, 32); ++i) jobs.push_back({planes[i].label, planes[i], {}, kOk, {}});
    }
    std::set<std::string> labels;
    for (const auto& j : jobs)
        if (!labels.insert(j.label).second) throw Failure(kConfig, "duplicate plane label '" + j.label + "'");
    for (long long n : o.get<std::vector<long long>>("n_modes"))
        if (n < 0) throw Failure(kConfig, "n_modes entries must be >= 0");

    SetHandle set;
    check(wf_set_load(input.c_str(), set.out()), "pod");
    const fs::path out = prepare_out(g);

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next++) < jobs.size();) {
            try {
                run_plane(jobs[i], set.get(), o, out);
            } catch (const Failure& f) {
                jobs[i].code = f.code;
                jobs[i].error = f.what();
            } catch (const std::exception& e) {
                jobs[i].code = kIo;
                jobs[i].error = jobs[i].label + ": " + e.what();
            }
        }
    };
    const std::size_t nthreads = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(1, g.threads)), 1, jobs.size());
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < nthreads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (const auto& j : jobs)
        if (j.code != kOk) throw Failure(j.code, j.error);

    json summary{{"input", input},
                 {"field", o.get<std::string>("field")},
                 {"component", o.get<int>("component")},
                 {"subtract_mean", o.get<bool>("subtract_mean")},
                 {"method", o.get<std::string>("method")}};
    json planes = json::array();
    for (const auto& j : jobs) planes.push_back(j.result);
    summary["planes"] = planes;
    write_json(out / "pod.json", summary);
    return kOk;
}

// ---------------------------------------------------------------------------
// reconstruct

int cmd_reconstruct(const Globals& g, const Options& o) {
    const std::string modes = o.get<std::string>("modes");
    require_input("modes", modes);
    const auto n = o.get<long long>("n_modes");
    if (n < 0) throw Failure(kConfig, "n_modes must be >= 0");
    PodHandle pod;
    check(wf_pod_load(modes.c_str(), pod.out()), "reconstruct");
    SetHandle set;
    check(wf_pod_reconstruct_set(pod.get(), static_cast<std::size_t>(n), set.out()), "reconstruct");
    double retained = 0.0;
    check(wf_pod_cumulative_energy(pod.get(), static_cast<std::size_t>(n), &retained), "reconstruct");
    const fs::path out = prepare_out(g);
    check(wf_set_save(set.get(), out.c_str()), "reconstruct");
    write_json(out / "reconstruct.json", {{"modes", modes},
                                          {"n_modes", n},
                                          {"rank", wf_pod_rank(pod.get())},
                                          {"retained", retained},
                                          {"loss", 1.0 - retained}});
    return kOk;
}

// ---------------------------------------------------------------------------
// derive

int cmd_derive(const Globals& g, const Options& o) {
    const std::string input = o.get<std::string>("input");
    require_input("input", input);
    unsigned flags = 0;
    for (const auto& q : o.get<std::vector<std::string>>("quantities")) {
        if (q == "gradient") flags |= WF_DERIVE_GRADIENT;
        else if (q == "strain_rate") flags |= WF_DERIVE_STRAIN_RATE;
        else if (q == "rotation_rate") flags |= WF_DERIVE_ROTATION_RATE;
        else if (q == "q_criterion") flags |= WF_DERIVE_Q_CRITERION;
        else throw Failure(kConfig, "unknown quantity '" + q + "'");
    }
    if (flags == 0) throw Failure(kConfig, "quantities must not be empty");
    SetHandle set, derived;
    check(wf_set_load(input.c_str(), set.out()), "derive");
    check(wf_set_derive(set.get(), o.get<std::string>("field").c_str(), flags, derived.out()), "derive");
    const fs::path out = prepare_out(g);
    check(wf_set_save(derived.get(), out.c_str()), "derive");
    json fields = json::array();
    for (std::size_t f = 0; f < wf_set_field_count(derived.get()); ++f) {
        double lo = INFINITY, hi = -INFINITY;
        for (std::size_t s = 0; s < wf_set_snapshot_count(derived.get()); ++s) {
            const double* d = nullptr;
            std::size_t len = 0;
            check(wf_set_data(derived.get(), f, s, &d, &len), "derive");
            for (std::size_t i = 0; i < len; ++i) {
                lo = std::min(lo, d[i]);
                hi = std::max(hi, d[i]);
            }
        }
        fields.push_back({{"name", wf_set_field_name(derived.get(), f)}, {"min", lo}, {"max", hi}});
    }
    write_json(out / "derive.json", {{"input", input}, {"field", o.get<std::string>("field")}, {"outputs", fields}});
    return kOk;
}

// ---------------------------------------------------------------------------
// fsi

void add_fsi_options(Options& o) {
    wf_fsi_problem p;
    wf_fsi_problem_default(&p, WF_FSI_PISTON);
    o.add("problem", "model problem: piston or chain", std::string("piston"));
    o.add("mass", "piston mass [kg]", p.piston_mass);
    o.add("stiffness", "piston stiffness [N/m]", p.piston_stiffness);
    o.add("damping", "piston damping [N s/m]", p.piston_damping);
    o.add("added_mass", "fluid added mass [kg]", p.added_mass);
    o.add("d0", "initial piston displacement [m]", p.d0);
    o.add("v0", "initial piston velocity [m/s]", p.v0);
    o.add("nodes", "chain node count", p.chain_nodes);
    o.add("node_mass", "chain node mass [kg]", p.node_mass);
    o.add("chain_stiffness", "chain spring stiffness [N/m]", p.chain_stiffness);
    o.add("damping_alpha", "mass-proportional damping [1/s]", p.damping_alpha);
    o.add("load", "chain load: aero or constant", std::string(p.chain_load == WF_CHAIN_CONSTANT ? "constant" : "aero"));
    o.add("rho", "air density [kg/m^3]", p.rho);
    o.add("u_inf", "wind speed [m/s]", p.u_inf);
    o.add("chord", "chord [m]", p.chord);
    o.add("lift_coefficient", "force coefficient", p.lift_coefficient);
    o.add("span", "span per node [m]", p.span);
    o.add("constant_load", "constant nodal load [N]", p.constant_load);
    o.add("beta", "Newmark beta", p.beta);
    o.add("gamma", "Newmark gamma", p.gamma);
    o.add("dt", "time step [s]", p.dt);
    o.add("end_time", "end time [s]", p.end_time);
    o.add("ramp_steps", "steps of the stiffness ramp", p.ramp_steps);
    o.add("ramp_factor", "initial stiffness multiplier", p.ramp_factor);
    o.add("tol", "interface residual tolerance", p.coupling.tol);
    o.add("max_inner", "maximum inner iterations", p.coupling.max_inner);
    o.add("omega0", "initial relaxation", p.coupling.omega0);
    o.add("omega_min", "lower relaxation clamp", p.coupling.omega_min);
    o.add("omega_max", "upper relaxation clamp", p.coupling.omega_max);
    o.add("aitken", "Aitken relaxation on/off", p.coupling.aitken_enabled != 0);
    o.add("relative_residual", "use the relative interface residual", p.coupling.relative_residual != 0);
}

int cmd_fsi(const Globals& g, const Options& o) {
    const std::string problem = o.get<std::string>("problem");
    if (problem != "piston" && problem != "chain") throw Failure(kConfig, "problem must be piston or chain");
    wf_fsi_problem p;
    wf_fsi_problem_default(&p, problem == "piston" ? WF_FSI_PISTON : WF_FSI_CHAIN);
    p.piston_mass = o.get<double>("mass");
    p.piston_stiffness = o.get<double>("stiffness");
    p.piston_damping = o.get<double>("damping");
    p.added_mass = o.get<double>("added_mass");
    p.d0 = o.get<double>("d0");
    p.v0 = o.get<double>("v0");
    p.chain_nodes = o.get<int>("nodes");
    p.node_mass = o.get<double>("node_mass");
    p.chain_stiffness = o.get<double>("chain_stiffness");
    p.damping_alpha = o.get<double>("damping_alpha");
    const std::string load = o.get<std::string>("load");
    if (load != "aero" && load != "constant") throw Failure(kConfig, "load must be aero or constant");
    p.chain_load = load == "constant" ? WF_CHAIN_CONSTANT : WF_CHAIN_AERO;
    p.rho = o.get<double>("rho");
    p.u_inf = o.get<double>("u_inf");
    p.chord = o.get<double>("chord");
    p.lift_coefficient = o.get<double>("lift_coefficient");
    p.span = o.get<double>("span");
    p.constant_load = o.get<double>("constant_load");
    p.beta = o.get<double>("beta");
    p.gamma = o.get<double>("gamma");
    p.dt = o.get<double>("dt");
    p.end_time = o.get<double>("end_time");
    p.ramp_steps = o.get<int>("ramp_steps");
    p.ramp_factor = o.get<double>("ramp_factor");
    p.coupling.tol = o.get<double>("tol");
    p.coupling.max_inner = o.get<int>("max_inner");
    p.coupling.omega0 = o.get<double>("omega0");
    p.coupling.omega_min = o.get<double>("omega_min");
    p.coupling.omega_max = o.get<double>("omega_max");
    p.coupling.aitken_enabled = o.get<bool>("aitken") ? 1 : 0;
    p.coupling.relative_residual = o.get<bool>("relative_residual") ? 1 : 0;

    FsiHandle r;
    check(wf_fsi_run(&p, r.out()), "fsi");
    const fs::path out = prepare_out(g);
    check(wf_fsi_write_csv(r.get(), (out / "history.csv").c_str(), (out / "trace.csv").c_str()), "fsi");
    const std::size_t failed = wf_fsi_failed_steps(r.get());
    int max_inner = 0;
    for (std::size_t row = 1; row < wf_fsi_rows(r.get()); ++row) {
        int it = 0;
        check(wf_fsi_row(r.get(), row, nullptr, nullptr, nullptr, nullptr, nullptr, &it), "fsi");
        max_inner = std::max(max_inner, it);
    }
    const char* aborted = wf_fsi_aborted(r.get());
    json summary{{"problem", problem},
                 {"steps", wf_fsi_rows(r.get()) - 1},
                 {"dofs", wf_fsi_dofs(r.get())},
                 {"failed_steps", failed},
                 {"max_inner_iterations", max_inner},
                 {"converged", failed == 0}};
    if (aborted) summary["aborted"] = aborted;
    write_json(out / "fsi.json", summary);
    if (failed > 0) {
        std::cerr << "fsi: " << failed << " coupling step(s) did not converge";
        if (aborted) std::cerr << "; run stopped at " << aborted;
        std::cerr << '\n';
        return kNonConvergence;
    }
    return kOk;
}

// ---------------------------------------------------------------------------
// morph

int cmd_morph(const Globals& g, const Options& o) {
    const auto dim = o.get<std::size_t>("dim");
    if (dim != 2 && dim != 3) throw Failure(kConfig, "dim must be 2 or 3");
    const std::string k = o.get<std::string>("kernel");
    wf_rbf_kernel kernel;
    if (k == "default") kernel = WF_RBF_DEFAULT;
    else if (k == "thin_plate") kernel = WF_RBF_THIN_PLATE;
    else if (k == "cubic") kernel = WF_RBF_CUBIC;
    else throw Failure(kConfig, "kernel must be default, thin_plate or cubic");

    wf_grid grid{};
    grid.nx = o.get<std::size_t>("nx");
    grid.ny = o.get<std::size_t>("ny");
    grid.nz = o.get<std::size_t>("nz");
    grid.dx = o.get<double>("dx");
    grid.dy = o.get<double>("dy");
    grid.dz = o.get<double>("dz");
    const auto origin = o.get<std::vector<double>>("origin");
    if (origin.size() != 3) throw Failure(kConfig, "origin needs 3 values");
    std::copy(origin.begin(), origin.end(), grid.origin);

    RbfHandle rbf;
    const std::string csv = o.get<std::string>("control_points_csv");
    const json inline_points = o.structured("control_points");
    if (!csv.empty()) {
        require_input("control_points_csv", csv);
        check(wf_rbf_build_from_csv(csv.c_str(), kernel, rbf.out()), "morph");
        if (wf_rbf_dim(rbf.get()) != dim) throw Failure(kConfig, "control point dimension differs from dim");
    } else if (inline_points.is_array() && !inline_points.empty()) {
        std::vector<double> pos, disp;
        for (const auto& row : inline_points) {
            std::vector<double> v;
            try {
                v = row.get<std::vector<double>>();
            } catch (const json::exception&) {
                throw Failure(kConfig, "control_points rows must be numeric arrays");
            }
            if (v.size() != 2 * dim) throw Failure(kConfig, "control_points rows need " + std::to_string(2 * dim) + " values");
            pos.insert(pos.end(), v.begin(), v.begin() + static_cast<long>(dim));
            disp.insert(disp.end(), v.begin() + static_cast<long>(dim), v.end());
        }
        check(wf_rbf_build(dim, pos.data(), disp.data(), inline_points.size(), kernel, rbf.out()), "morph");
    } else {
        throw Failure(kConfig, "morph needs control_points or control_points_csv");
    }

    const std::size_t n = wf_lattice_node_count(&grid, dim);
    if (n == 0) throw Failure(kConfig, "invalid grid: " + std::string(wf_last_error()));
    std::vector<double> morphed(n * dim);
    wf_mesh_validity v{};
    check(wf_morph_lattice(&grid, rbf.get(), morphed.data(), morphed.size(), &v), "morph");
    SetHandle disp;
    check(wf_morph_displacement_set(&grid, rbf.get(), disp.out()), "morph");

    const fs::path out = prepare_out(g);
    {
        auto f = open_out(out / "nodes.csv");
        f << (dim == 2 ? "x,y\n" : "x,y,z\n");
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t c = 0; c < dim; ++c) f << (c ? "," : "") << num(morphed[i * dim + c]);
            f << '\n';
        }
        if (!f) throw Failure(kIo, "write failed for nodes.csv");
    }
    check(wf_set_save(disp.get(), (out / "displacement").c_str()), "morph");
    write_json(out / "validity.json", {{"dim", dim},
                                       {"nodes", n},
                                       {"cells", v.cells},
                                       {"inverted_cells", v.inverted_cells},
                                       {"min_jacobian", v.min_jacobian},
                                       {"valid", v.inverted_cells == 0}});
    if (v.inverted_cells > 0) {
        std::cerr << "morph: " << v.inverted_cells << " inverted cell(s)\n";
        return kNonConvergence;
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"wakefsi: wake snapshot POD, partitioned FSI model problems and RBF mesh morphing"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(wf_version()));
    Globals g;
    CLI::Option* opt_config = app.add_option("--config", g.config, "JSON config; keys mirror the flags")->check(CLI::ExistingFile);
    CLI::Option* opt_out = app.add_option("--out", g.out, "output directory  [key: out]");
    CLI::Option* opt_force = app.add_flag("--force", g.force, "overwrite a non-empty output directory  [key: force]");
    CLI::Option* opt_threads = app.add_option("--threads", g.threads, "worker threads  [key: threads]")->check(CLI::PositiveNumber);
    (void)opt_config;

    struct Sub {
        CLI::App* app;
        std::unique_ptr<Options> opts;
        std::function<int(const Globals&, const Options&)> run;
    };
    std::vector<Sub> subs;
    auto make = [&](const std::string& name, const std::string& desc, auto&& run) -> Options& {
        CLI::App* sub = app.add_subcommand(name, desc);
        sub->fallthrough();
        subs.push_back({sub, std::make_unique<Options>(sub), run});
        return *subs.back().opts;
    };

    {
        Options& o = make("synth", "write a synthetic snapshot set", cmd_synth);
        o.add("kind", "generator: wake, separable or affine", std::string("wake"));
        add_wake_options(o);
        add_grid_options(o, 32, 24, 24);
        o.add("snapshots", "number of snapshots", 64LL);
        o.add("dt", "snapshot interval [s]", 0.1);
        o.add("t0", "first snapshot time [s]", 0.0);
        o.add("field", "field name (separable)", std::string("s"));
        o.add("gradient", "velocity gradient, 9 values row-major (affine)", std::vector<double>(9, 0.0));
        o.add("constant", "constant velocity, 3 values (affine)", std::vector<double>(3, 0.0));
        o.add("terms", "separable terms as a JSON array", std::string());
    }
    {
        Options& o = make("pod", "POD of a snapshot set on planes", cmd_pod);
        o.add("input", "snapshot set directory", std::string());
        o.add("field", "field to decompose", std::string("u"));
        o.add("component", "component to keep (-1 = all)", -1);
        o.flag("subtract_mean", "subtract the temporal mean first");
        o.add("method", "snapshots or svd", std::string("snapshots"));
        o.add("planes", "planes as axis:offset[:label] (default: the standard wake planes)", std::vector<std::string>{});
        o.flag("volume", "also decompose the whole volume");
        o.add("n_modes", "mode counts for the retained/loss summary", std::vector<long long>{1, 2, 3, 5, 10});
        o.add("heatmap_component", "component drawn in the heatmaps", 0);
        wf_wake_params w;
        wf_wake_params_default(&w);
        o.add("rotor_diameter", "rotor diameter for the default planes [m]", w.rotor_diameter);
        o.add("hub_height", "hub height for the default planes [m]", w.hub_height);
        o.add("rotor_x", "rotor position for the default planes [m]", w.rotor_x);
    }
    {
        Options& o = make("reconstruct", "rebuild snapshots from saved modes", cmd_reconstruct);
        o.add("modes", "mode directory written by pod", std::string());
        o.add("n_modes", "number of modes to keep", 1LL);
    }
    {
        Options& o = make("derive", "velocity gradient, strain/rotation rate and Q", cmd_derive);
        o.add("input", "snapshot set directory", std::string());
        o.add("field", "3-component velocity field", std::string("u"));
        o.add("quantities", "any of gradient strain_rate rotation_rate q_criterion",
              std::vector<std::string>{"gradient", "strain_rate", "rotation_rate", "q_criterion"});
    }
    {
        Options& o = make("fsi", "run a partitioned FSI model problem", cmd_fsi);
        add_fsi_options(o);
    }
    {
        Options& o = make("morph", "RBF morph of a structured lattice", cmd_morph);
        o.add("dim", "2 or 3", std::size_t{2});
        o.add("kernel", "default, thin_plate or cubic", std::string("default"));
        o.add("nx", "cells along x", std::size_t{32});
        o.add("ny", "cells along y", std::size_t{32});
        o.add("nz", "cells along z (3D)", std::size_t{1});
        o.add("dx", "spacing along x", 1.0 / 32.0);
        o.add("dy", "spacing along y", 1.0 / 32.0);
        o.add("dz", "spacing along z", 1.0);
        o.add("origin", "lattice origin x y z", std::vector<double>{0.0, 0.0, 0.0});
        o.add("control_points_csv", "CSV of x,y[,z],dx,dy[,dz]", std::string());
        o.add("control_points", "JSON array of rows [x, y(, z), dx, dy(, dz)]", std::string());
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    try {
        json config = read_config(g.config);
        const std::set<std::string> globals{"out", "force", "threads"};
        if (config.contains("out") && opt_out->count() == 0) g.out = config.at("out").get<std::string>();
        if (config.contains("force") && opt_force->count() == 0) g.force = config.at("force").get<bool>();
        if (config.contains("threads") && opt_threads->count() == 0) g.threads = config.at("threads").get<int>();
        if (g.threads < 1) throw Failure(kConfig, "threads must be >= 1");
        for (auto& s : subs) {
            if (!s.app->parsed()) continue;
            s.opts->resolve(config, globals);
            return s.run(g, *s.opts);
        }
        return kConfig;
    } catch (const Failure& f) {
        std::cerr << "error: " << f.what() << '\n';
        return f.code;
    } catch (const json::exception& e) {
        std::cerr << "error: bad config value: " << e.what() << '\n';
        return kConfig;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInternal;
    }
}
