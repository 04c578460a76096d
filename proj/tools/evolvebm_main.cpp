// evolvebm: simulation of Brownian motion under time-evolving Riemannian
// metrics, with rate-functional and large-deviation diagnostics.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>

#include "evolvebm/action.hpp"
#include "evolvebm/config.hpp"
#include "evolvebm/errors.hpp"
#include "evolvebm/framebundle.hpp"
#include "evolvebm/geometry.hpp"
#include "evolvebm/io.hpp"
#include "evolvebm/ldp.hpp"
#include "evolvebm/parallel.hpp"
#include "evolvebm/sampler.hpp"

using nlohmann::json;

namespace {

using namespace evolvebm;

// Options accumulated from flags, then backfilled from --config and the
// environment (flags win over config, config wins over EVOLVEBM_SEED).
struct Options {
    std::optional<std::string> family;
    std::optional<std::string> params_text;
    std::map<std::string, double> params;
    std::optional<int> dim;
    std::optional<double> epsilon;
    std::optional<std::string> eps_text;
    std::vector<double> eps_list;
    std::optional<std::size_t> n_steps;
    std::optional<std::size_t> n_samples;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::optional<std::string> scheme;
    std::optional<std::string> path_in;
    std::optional<std::string> control_in;
    std::optional<std::string> init_in;
    std::optional<std::string> out;
    std::optional<std::string> table_out;
    std::optional<std::string> frames_out;
    std::optional<std::string> path_out;
    std::optional<std::string> x0_text;
    std::optional<std::string> x1_text;
    std::optional<double> delta;
    std::optional<double> radius;
    std::optional<double> t0;
    std::optional<double> window;
    std::optional<double> smoothing_width;
    std::optional<double> lattice_lo;
    std::optional<double> lattice_hi;
    std::optional<int> lattice_points;
    std::optional<int> time_samples;
    std::optional<std::size_t> n_grid;
    std::optional<std::size_t> sub_steps;
    std::optional<int> reorth_every;
    std::optional<double> g_tol;
    std::optional<std::string> function_name;
    std::optional<std::string> config_file;
};

template <typename T>
void backfill(std::optional<T>& slot, const json& cfg, const char* key) {
    if (!slot && cfg.contains(key)) slot = cfg.at(key).get<T>();
}

void merge_config(Options& o) {
    if (!o.config_file) return;
    const json cfg = load_config_file(*o.config_file);
    backfill(o.family, cfg, "family");
    if (o.params.empty() && cfg.contains("params")) {
        for (const auto& [k, v] : cfg.at("params").items()) o.params[k] = v.get<double>();
    }
    backfill(o.dim, cfg, "dim");
    backfill(o.epsilon, cfg, "epsilon");
    if (o.eps_list.empty() && cfg.contains("eps_list")) {
        for (const auto& e : cfg.at("eps_list")) o.eps_list.push_back(e.get<double>());
    }
    backfill(o.n_steps, cfg, "n_steps");
    backfill(o.n_samples, cfg, "n_samples");
    backfill(o.seed, cfg, "seed");
    backfill(o.threads, cfg, "threads");
    backfill(o.scheme, cfg, "scheme");
    backfill(o.path_in, cfg, "path");
    backfill(o.control_in, cfg, "control");
    backfill(o.init_in, cfg, "init");
    backfill(o.out, cfg, "out");
    backfill(o.table_out, cfg, "table_out");
    backfill(o.frames_out, cfg, "frames_out");
    backfill(o.path_out, cfg, "path_out");
    backfill(o.delta, cfg, "delta");
    backfill(o.radius, cfg, "radius");
    backfill(o.t0, cfg, "t0");
    backfill(o.window, cfg, "window");
    backfill(o.smoothing_width, cfg, "smoothing_width");
    backfill(o.lattice_lo, cfg, "lattice_lo");
    backfill(o.lattice_hi, cfg, "lattice_hi");
    backfill(o.lattice_points, cfg, "lattice_points");
    backfill(o.time_samples, cfg, "time_samples");
    backfill(o.n_grid, cfg, "n_grid");
    backfill(o.sub_steps, cfg, "sub_steps");
    backfill(o.reorth_every, cfg, "reorth_every");
    backfill(o.g_tol, cfg, "g_tol");
    backfill(o.function_name, cfg, "function");
    if (!o.x0_text && cfg.contains("x0")) {
        std::string t;
        for (const auto& e : cfg.at("x0")) t += (t.empty() ? "" : ",") + format_double(e.get<double>());
        o.x0_text = t;
    }
    if (!o.x1_text && cfg.contains("x1")) {
        std::string t;
        for (const auto& e : cfg.at("x1")) t += (t.empty() ? "" : ",") + format_double(e.get<double>());
        o.x1_text = t;
    }
}

void finalize(Options& o) {
    merge_config(o);
    if (o.params_text) {
        // flag string wins over config params wholesale
        o.params = parse_params(*o.params_text);
    }
    if (o.eps_text) o.eps_list = parse_double_list(*o.eps_text);
    if (o.scheme && *o.scheme != "heun") {
        throw ConfigError("'scheme' must be one of: heun");
    }
    if (!o.seed) {
        if (const char* env = std::getenv("EVOLVEBM_SEED")) {
            try {
                o.seed = static_cast<std::uint64_t>(std::stoull(env));
            } catch (const std::exception&) {
                throw ConfigError("EVOLVEBM_SEED is not a valid unsigned integer");
            }
        }
    }
}

std::unique_ptr<MetricFamily> build_family(const Options& o) {
    std::vector<std::string> missing;
    if (!o.family) missing.push_back("missing required option 'family'");
    if (!missing.empty()) throw ConfigError(std::move(missing));
    auto fam = make_family(*o.family, o.params);
    if (o.dim && *o.dim != fam->dim()) {
        throw ConfigError("family '" + *o.family + "' has dimension " +
                          std::to_string(fam->dim()) + ", config says " + std::to_string(*o.dim));
    }
    return fam;
}

Eigen::VectorXd parse_point(const std::string& text, int dim, const char* what) {
    const auto vals = parse_double_list(text);
    if (dim > 0 && static_cast<int>(vals.size()) != dim) {
        throw ConfigError(std::string(what) + " has " + std::to_string(vals.size()) +
                          " coordinates, expected " + std::to_string(dim));
    }
    Eigen::VectorXd v(vals.size());
    for (std::size_t i = 0; i < vals.size(); ++i) v[static_cast<int>(i)] = vals[i];
    return v;
}

json vector_to_json(const Eigen::VectorXd& v) {
    json a = json::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

void emit(const json& summary) { std::cout << summary.dump() << "\n"; }

// ---------------------------------------------------------------------------

int run_list_families() {
    json out = json::array();
    for (const auto& d : list_families()) {
        json params = json::object();
        for (const auto& p : d.params) {
            params[p.name] = {{"required", p.required}, {"description", p.description}};
            if (!p.required) params[p.name]["default"] = p.default_value;
        }
        out.push_back(
            {{"family", d.id}, {"dim", d.dim}, {"description", d.description}, {"params", params}});
    }
    emit(out);
    return 0;
}

int run_simulate(const Options& o) {
    auto fam = build_family(o);
    const std::size_t n = o.n_steps.value_or(1000);
    const std::size_t n_samples = o.n_samples.value_or(1);
    const double eps = o.epsilon.value_or(1.0);
    const std::uint64_t seed = o.seed.value_or(0);
    const unsigned threads = o.threads.value_or(1);
    const int d = fam->dim();

    Eigen::VectorXd x0 = o.x0_text ? parse_point(*o.x0_text, d, "x0")
                                   : Eigen::VectorXd::Zero(d);
    require_in_chart(*fam, x0, "simulate");  // before the worker pool starts
    const Frame u0 = default_frame(*fam, 0.0, x0);

    struct SliceAgg {
        Eigen::VectorXd sum;
        Eigen::VectorXd sumsq;
    };
    struct ChunkAgg {
        std::vector<SliceAgg> slices;
        std::size_t aborted = 0;
    };
    const std::size_t chunk = kDefaultChunk;
    const std::size_t n_chunks = (n_samples + chunk - 1) / chunk;
    std::vector<ChunkAgg> agg(n_chunks);
    std::string first_csv;

    parallel_chunks(n_samples, chunk, threads, [&](std::size_t lo, std::size_t hi) {
        ChunkAgg local;
        local.slices.assign(n + 1, {Eigen::VectorXd::Zero(d), Eigen::VectorXd::Zero(d)});
        for (std::size_t i = lo; i < hi; ++i) {
            NoiseConfig noise{seed, i, n, eps, false};
            GbmOptions gopts;
            gopts.keep_frames = false;
            gopts.reorthonormalize_every = o.reorth_every.value_or(0);
            const SamplePath sp = sample_gbm(*fam, u0, noise, gopts);
            if (sp.aborted) ++local.aborted;
            for (std::size_t k = 0; k <= n; ++k) {
                local.slices[k].sum += sp.path.points[k];
                local.slices[k].sumsq += sp.path.points[k].cwiseAbs2();
            }
            if (i == 0 && o.path_out) first_csv = path_to_csv(sp.path);
        }
        agg[lo / chunk] = std::move(local);
    });

    json slices = json::array();
    std::size_t aborted = 0;
    Eigen::VectorXd final_var = Eigen::VectorXd::Zero(d);
    for (std::size_t k = 0; k <= n; ++k) {
        Eigen::VectorXd sum = Eigen::VectorXd::Zero(d);
        Eigen::VectorXd sumsq = Eigen::VectorXd::Zero(d);
        for (const auto& a : agg) {
            sum += a.slices[k].sum;
            sumsq += a.slices[k].sumsq;
        }
        const double cnt = static_cast<double>(n_samples);
        const Eigen::VectorXd mean = sum / cnt;
        Eigen::VectorXd var = Eigen::VectorXd::Zero(d);
        if (n_samples > 1) {
            var = (sumsq - sum.cwiseAbs2() / cnt) / (cnt - 1.0);
            var = var.cwiseMax(0.0);
        }
        if (k == n) final_var = var;
        slices.push_back({{"t", static_cast<double>(k) / static_cast<double>(n)},
                          {"mean", vector_to_json(mean)},
                          {"var", vector_to_json(var)}});
    }
    for (const auto& a : agg) aborted += a.aborted;

    json report = {{"family", *o.family},      {"params", o.params},
                   {"epsilon", eps},           {"n_steps", n},
                   {"n_samples", n_samples},   {"seed", seed},
                   {"scheme", o.scheme.value_or("heun")}, {"x0", vector_to_json(x0)},
                   {"aborted", aborted},       {"slices", slices}};
    const std::string out_path = o.out.value_or("simulate.json");
    atomic_write_file(out_path, report.dump(2) + "\n");
    if (o.path_out) atomic_write_file(*o.path_out, first_csv);

    emit({{"subcommand", "simulate"},
          {"out", out_path},
          {"n_samples", n_samples},
          {"aborted", aborted},
          {"final_variance", vector_to_json(final_var)}});
    return 0;
}

int run_lift(const Options& o, bool anti) {
    auto fam = build_family(o);
    if (!o.path_in) throw ConfigError("missing required option 'path'");
    const Path gamma = path_from_csv(read_file(*o.path_in));
    const Frame u0 = default_frame(*fam, 0.0, gamma.points.front());
    LiftOptions lopts;
    lopts.reorthonormalize_every = o.reorth_every.value_or(0);

    if (anti) {
        const ControlPath w = antidevelop(*fam, gamma, u0, lopts);
        const std::string out_path = o.out.value_or("antidevelop.csv");
        atomic_write_file(out_path, control_to_csv(w));
        emit({{"subcommand", "antidevelop"},
              {"out", out_path},
              {"grid", w.segments()},
              {"final", vector_to_json(w.values.back())}});
        return 0;
    }
    const FramePath lift = horizontal_lift(*fam, gamma, u0, lopts);
    double max_defect = 0.0;
    for (const auto& f : lift.frames) {
        max_defect = std::max(max_defect, orthonormality_defect(*fam, f));
    }
    const std::string out_path = o.out.value_or("lift.csv");
    atomic_write_file(out_path, frames_to_csv(lift));
    emit({{"subcommand", "lift"},
          {"out", out_path},
          {"grid", lift.segments()},
          {"max_defect", max_defect},
          {"reorth_every", lift.reorthonormalize_every}});
    return 0;
}

int run_develop(const Options& o) {
    auto fam = build_family(o);
    if (!o.control_in) throw ConfigError("missing required option 'control'");
    const ControlPath w = control_from_csv(read_file(*o.control_in));
    const Eigen::VectorXd x0 = o.x0_text ? parse_point(*o.x0_text, fam->dim(), "x0")
                                         : Eigen::VectorXd::Zero(fam->dim());
    const Frame u0 = default_frame(*fam, 0.0, x0);
    LiftOptions lopts;
    lopts.reorthonormalize_every = o.reorth_every.value_or(0);
    const Development dev = develop(*fam, w, u0, lopts);
    const std::string out_path = o.out.value_or("develop.csv");
    atomic_write_file(out_path, path_to_csv(dev.path));
    if (o.frames_out) atomic_write_file(*o.frames_out, frames_to_csv(dev.frames));
    emit({{"subcommand", "develop"},
          {"out", out_path},
          {"grid", dev.path.segments()},
          {"final", vector_to_json(dev.path.points.back())}});
    return 0;
}

int run_action(const Options& o) {
    auto fam = build_family(o);
    if (!o.path_in) throw ConfigError("missing required option 'path'");
    const Path gamma = path_from_csv(read_file(*o.path_in));
    const ActionValue a = action_manifold(*fam, gamma);
    json summary = {{"value", a.infinite ? json("infinity") : json(a.value)},
                    {"grid", a.grid},
                    {"quadrature", a.quadrature}};
    if (o.out) atomic_write_file(*o.out, summary.dump(2) + "\n");
    emit(summary);
    return 0;
}

int run_minimize(const Options& o) {
    auto fam = build_family(o);
    if (!o.x0_text || !o.x1_text) {
        std::vector<std::string> missing;
        if (!o.x0_text) missing.push_back("missing required option 'x0'");
        if (!o.x1_text) missing.push_back("missing required option 'x1'");
        throw ConfigError(std::move(missing));
    }
    const Eigen::VectorXd x0 = parse_point(*o.x0_text, fam->dim(), "x0");
    const Eigen::VectorXd x1 = parse_point(*o.x1_text, fam->dim(), "x1");
    const std::size_t n = o.n_grid.value_or(200);
    MinimizeOptions mopts;
    if (o.g_tol) mopts.gradient_tolerance = *o.g_tol;
    if (o.init_in) mopts.initial = path_from_csv(read_file(*o.init_in));

    const MinimizerReport rep = minimize_action(*fam, x0, x1, n, mopts);
    json report = {{"action", rep.action.value},
                   {"grid", n},
                   {"iterations", rep.iterations},
                   {"grad_sup_norm", rep.grad_sup_norm},
                   {"converged", rep.converged}};
    const std::string out_path = o.out.value_or("minimize.json");
    atomic_write_file(out_path, report.dump(2) + "\n");
    const std::string path_out = o.path_out.value_or("minimize.csv");
    atomic_write_file(path_out, path_to_csv(rep.path));
    report["out"] = out_path;
    report["path_out"] = path_out;
    emit(report);
    return rep.converged ? 0 : 3;
}

json estimate_to_json(const MCEstimate& est) {
    json j = {{"epsilon", est.epsilon},
              {"n_samples", est.n_samples},
              {"hits", est.hits},
              {"aborted", est.aborted},
              {"p_hat", est.p_hat},
              {"std_error", est.std_error},
              {"below_resolution", est.below_resolution},
              {"exit_time_quantiles", est.exit_time_quantiles}};
    if (est.log_scaled) j["log_scaled"] = *est.log_scaled;
    return j;
}

int run_verify_ldp(const Options& o) {
    auto fam = build_family(o);
    if (!o.path_in) throw ConfigError("missing required option 'path'");
    if (!o.delta) throw ConfigError("missing required option 'delta'");
    if (o.eps_list.empty()) throw ConfigError("missing required option 'eps' (ladder)");
    const Path gamma = path_from_csv(read_file(*o.path_in));
    const LadderReport rep =
        ladder_report(*fam, gamma, *o.delta, o.eps_list, o.n_samples.value_or(10000),
                      o.seed.value_or(0), o.threads.value_or(1));

    json estimates = json::array();
    for (const auto& est : rep.estimates) estimates.push_back(estimate_to_json(est));
    json report = {{"delta", rep.delta},
                   {"action", rep.action},
                   {"seed", o.seed.value_or(0)},
                   {"n_samples", o.n_samples.value_or(10000)},
                   {"estimates", estimates},
                   {"fitted_rungs", rep.fitted_rungs},
                   {"kendall_tau_gap", rep.kendall_tau_gap}};
    if (rep.intercept) {
        report["intercept"] = *rep.intercept;
        report["slope"] = *rep.slope;
        report["gap"] = *rep.gap;
    }
    const std::string out_path = o.out.value_or("ladder.json");
    atomic_write_file(out_path, report.dump(2) + "\n");

    std::string table = "epsilon,p_hat,se,eps_log_p\n";
    for (const auto& est : rep.estimates) {
        table += format_double(est.epsilon) + "," + format_double(est.p_hat) + "," +
                 format_double(est.std_error) + ",";
        table += est.log_scaled ? format_double(*est.log_scaled) : std::string("");
        table += "\n";
    }
    const std::string table_path = o.table_out.value_or("ladder.csv");
    atomic_write_file(table_path, table);

    json summary = {{"subcommand", "verify-ldp"},
                    {"out", out_path},
                    {"table_out", table_path},
                    {"action", rep.action}};
    if (rep.intercept) summary["intercept"] = *rep.intercept;
    emit(summary);
    return 0;
}

int run_containment(const Options& o) {
    auto fam = build_family(o);
    const Eigen::VectorXd x0 = o.x0_text ? parse_point(*o.x0_text, fam->dim(), "x0")
                                         : Eigen::VectorXd::Zero(fam->dim());
    LatticeSpec spec;
    spec.lo = o.lattice_lo.value_or(-2.0);
    spec.hi = o.lattice_hi.value_or(2.0);
    spec.points_per_axis = o.lattice_points.value_or(41);
    const ContainmentProfile prof = containment_profile(
        *fam, x0, spec, o.smoothing_width.value_or(1e-3), o.time_samples.value_or(21));

    std::string csv = "upsilon";
    for (int i = 1; i <= fam->dim(); ++i) csv = "x" + std::to_string(i) + "," + csv;
    csv += "\n";
    for (std::size_t i = 0; i < prof.lattice.size(); ++i) {
        for (int c = 0; c < fam->dim(); ++c) csv += format_double(prof.lattice[i][c]) + ",";
        csv += format_double(prof.upsilon[i]) + "\n";
    }
    const std::string out_path = o.out.value_or("containment.csv");
    atomic_write_file(out_path, csv);

    emit({{"subcommand", "containment"},
          {"out", out_path},
          {"sup_hamiltonian", prof.sup_hamiltonian},
          {"upsilon_zero_at_x0", prof.upsilon_zero_at_x0},
          {"sublevel_radii_monotone", prof.sublevel_radii_monotone},
          {"lattice_points", prof.lattice.size()}});
    return 0;
}

int run_generator_check(const Options& o) {
    auto fam = build_family(o);
    const Eigen::VectorXd x0 = o.x0_text ? parse_point(*o.x0_text, fam->dim(), "x0")
                                         : Eigen::VectorXd::Zero(fam->dim());
    const std::string fname = o.function_name.value_or("coord1");
    TestFunction f;
    if (fname == "coord1" || (fname == "coord2" && fam->dim() >= 2)) {
        const int c = (fname == "coord1") ? 0 : 1;
        f.value = [c](const Eigen::VectorXd& x) { return x[c]; };
        f.gradient = [c](const Eigen::VectorXd& x) {
            Eigen::VectorXd g = Eigen::VectorXd::Zero(x.size());
            g[c] = 1.0;
            return g;
        };
        f.hessian = [](const Eigen::VectorXd& x) {
            return Eigen::MatrixXd::Zero(x.size(), x.size()).eval();
        };
    } else if (fname == "sqnorm") {
        f.value = [](const Eigen::VectorXd& x) { return x.squaredNorm(); };
        f.gradient = [](const Eigen::VectorXd& x) { return (2.0 * x).eval(); };
        f.hessian = [](const Eigen::VectorXd& x) {
            return (2.0 * Eigen::MatrixXd::Identity(x.size(), x.size())).eval();
        };
    } else {
        throw ConfigError("'function' must be coord1, coord2 or sqnorm (coord2 needs dim 2)");
    }

    const GeneratorCheck gc = generator_check(
        *fam, f, x0, o.t0.value_or(0.0), o.epsilon.value_or(1.0), o.window.value_or(1e-3),
        o.n_samples.value_or(10000), o.seed.value_or(0), o.sub_steps.value_or(16),
        o.threads.value_or(1));
    json summary = {{"subcommand", "generator-check"}, {"empirical", gc.empirical},
                    {"analytic", gc.analytic},         {"std_error", gc.std_error},
                    {"n_samples", gc.n_samples},       {"aborted", gc.aborted}};
    if (o.out) atomic_write_file(*o.out, summary.dump(2) + "\n");
    emit(summary);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Brownian motion on manifolds with time-evolving metrics"};
    app.require_subcommand(1);

    Options o;
    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--family", o.family, "metric family id");
        cmd->add_option("--params", o.params_text, "family parameters, e.g. a=1,b=1");
        cmd->add_option("--dim", o.dim, "chart dimension (checked against the family)");
        cmd->add_option("--seed", o.seed, "RNG seed (default: EVOLVEBM_SEED or 0)");
        cmd->add_option("--threads", o.threads, "worker threads (results are independent of it)");
        cmd->add_option("--config", o.config_file, "JSON config file (flags win)");
        cmd->add_option("--out", o.out, "output file");
    };

    CLI::App* simulate = app.add_subcommand("simulate", "sample g(t)-Brownian motion");
    add_common(simulate);
    simulate->add_option("--epsilon", o.epsilon, "noise scale");
    simulate->add_option("--n-steps", o.n_steps, "integration grid");
    simulate->add_option("--n-samples", o.n_samples, "trajectory count");
    simulate->add_option("--x0", o.x0_text, "start point, comma separated");
    simulate->add_option("--scheme", o.scheme, "integration scheme (heun)");
    simulate->add_option("--reorth-every", o.reorth_every, "re-orthonormalize every K steps");
    simulate->add_option("--path-out", o.path_out, "CSV of the stream-0 trajectory");

    CLI::App* lift = app.add_subcommand("lift", "horizontal lift of a path CSV");
    add_common(lift);
    lift->add_option("--path", o.path_in, "input path CSV");
    lift->add_option("--reorth-every", o.reorth_every, "re-orthonormalize every K steps");

    CLI::App* antidev = app.add_subcommand("antidevelop", "anti-development of a path CSV");
    add_common(antidev);
    antidev->add_option("--path", o.path_in, "input path CSV");
    antidev->add_option("--reorth-every", o.reorth_every, "re-orthonormalize every K steps");

    CLI::App* dev = app.add_subcommand("develop", "development of a control CSV onto the chart");
    add_common(dev);
    dev->add_option("--control", o.control_in, "input control CSV");
    dev->add_option("--x0", o.x0_text, "base point of the initial frame");
    dev->add_option("--frames-out", o.frames_out, "also write the frame path CSV");
    dev->add_option("--reorth-every", o.reorth_every, "re-orthonormalize every K steps");

    CLI::App* act = app.add_subcommand("action", "manifold action of a path CSV");
    add_common(act);
    act->add_option("--path", o.path_in, "input path CSV");

    CLI::App* minimize = app.add_subcommand("minimize", "fixed-endpoint action minimizer");
    add_common(minimize);
    minimize->add_option("--x0", o.x0_text, "start point");
    minimize->add_option("--x1", o.x1_text, "end point");
    minimize->add_option("--n", o.n_grid, "grid segments");
    minimize->add_option("--init", o.init_in, "initial path CSV");
    minimize->add_option("--g-tol", o.g_tol, "gradient sup-norm tolerance");
    minimize->add_option("--path-out", o.path_out, "minimizer path CSV");

    CLI::App* ldp = app.add_subcommand("verify-ldp", "tube-probability ladder report");
    add_common(ldp);
    ldp->add_option("--path", o.path_in, "reference path CSV");
    ldp->add_option("--delta", o.delta, "tube radius");
    ldp->add_option("--eps", o.eps_text, "decreasing epsilon ladder, comma separated");
    ldp->add_option("--n-samples", o.n_samples, "samples per rung");
    ldp->add_option("--table-out", o.table_out, "CSV table output");

    CLI::App* contain = app.add_subcommand("containment", "good-containment diagnostics");
    add_common(contain);
    contain->add_option("--x0", o.x0_text, "reference point");
    contain->add_option("--lattice-lo", o.lattice_lo, "lattice lower bound per axis");
    contain->add_option("--lattice-hi", o.lattice_hi, "lattice upper bound per axis");
    contain->add_option("--lattice-points", o.lattice_points, "lattice points per axis");
    contain->add_option("--width", o.smoothing_width, "radius smoothing width");
    contain->add_option("--time-samples", o.time_samples, "time grid for the sup");

    CLI::App* gen = app.add_subcommand("generator-check", "empirical vs analytic generator");
    add_common(gen);
    gen->add_option("--x0", o.x0_text, "evaluation point");
    gen->add_option("--t0", o.t0, "evaluation time");
    gen->add_option("--epsilon", o.epsilon, "noise scale");
    gen->add_option("--window", o.window, "time window h");
    gen->add_option("--function", o.function_name, "test function: coord1|coord2|sqnorm");
    gen->add_option("--n-samples", o.n_samples, "sample count");
    gen->add_option("--sub-steps", o.sub_steps, "integrator sub-steps inside the window");

    CLI::App* families = app.add_subcommand("list-families", "registry of metric families");
    (void)families;

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        finalize(o);
        if (app.got_subcommand("list-families")) return run_list_families();
        if (app.got_subcommand("simulate")) return run_simulate(o);
        if (app.got_subcommand("lift")) return run_lift(o, false);
        if (app.got_subcommand("antidevelop")) return run_lift(o, true);
        if (app.got_subcommand("develop")) return run_develop(o);
        if (app.got_subcommand("action")) return run_action(o);
        if (app.got_subcommand("minimize")) return run_minimize(o);
        if (app.got_subcommand("verify-ldp")) return run_verify_ldp(o);
        if (app.got_subcommand("containment")) return run_containment(o);
        if (app.got_subcommand("generator-check")) return run_generator_check(o);
        std::cerr << "no subcommand\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << e.what() << "\n";
        return 4;
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
