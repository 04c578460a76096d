#include "evolvebm/sampler.hpp"

#include <cmath>
#include <sstream>

#include "evolvebm/numerics.hpp"
#include "evolvebm/parallel.hpp"

namespace evolvebm {

namespace {

constexpr double kBlowUpLimit = 1e9;

bool state_finite(const Eigen::VectorXd& x, const Eigen::MatrixXd& e) {
    return x.allFinite() && e.allFinite() && x.norm() <= kBlowUpLimit && e.norm() <= kBlowUpLimit;
}

void check_initial_frame(const MetricFamily& fam, const Frame& u0, const char* who) {
    require_in_chart(fam, u0.base, who);
    Frame at0 = u0;
    at0.time = 0.0;
    const double defect = orthonormality_defect(fam, at0);
    if (defect > 1e-6) {
        std::ostringstream os;
        os << who << ": initial frame is not g(0)-orthonormal (defect " << defect << ")";
        throw NonOrthonormalStartError(os.str());
    }
}

}  // namespace

GbmStepper::GbmStepper(const MetricFamily& fam)
    : fam_(&fam), spatially_constant_(fam.spatially_constant()) {
    const int d = fam.dim();
    m_.resize(d, d);
    drift_.resize(d, d);
    e_pred_.resize(d, d);
    diff_.resize(d, d);
    flow0_.resize(d);
    flow1_.resize(d);
    x_pred_.resize(d);
}

// Stratonovich-Heun: Euler predictor, trapezoidal corrector for the horizontal
// (diffusion) fields. The vertical drift -1/2 E (E^T d_t g E) is evaluated at
// the midpoint time with the pre-step state, which keeps the deterministic
// part first order (the scheme is weak order 1 overall).
void GbmStepper::step(double t, double h, Eigen::VectorXd& x, Eigen::MatrixXd& e,
                      const Eigen::VectorXd& dw) {
    const Eigen::MatrixXd dg_mid = metric_dt(*fam_, t + 0.5 * h, x);
    m_.noalias() = e.transpose() * dg_mid * e;
    drift_.noalias() = -0.5 * e * m_;

    flow0_.noalias() = e * dw;
    if (spatially_constant_) {
        // no connection terms: the frame moves by the vertical drift alone
        e_pred_ = e + drift_ * h;
        flow1_.noalias() = e_pred_ * dw;
        x += 0.5 * (flow0_ + flow1_);
        e += drift_ * h;
        return;
    }

    const auto gamma0 = christoffel(*fam_, t, x);
    diff_ = -christoffel_apply(gamma0, flow0_, e);

    x_pred_ = x + flow0_;
    e_pred_ = e + diff_ + drift_ * h;

    const auto gamma1 = christoffel(*fam_, t + h, x_pred_);
    flow1_.noalias() = e_pred_ * dw;

    x += 0.5 * (flow0_ + flow1_);
    e += 0.5 * (diff_ - christoffel_apply(gamma1, flow1_, e_pred_)) + drift_ * h;
}

SamplePath sample_gbm(const MetricFamily& fam, const Frame& u0, const NoiseConfig& noise,
                      const GbmOptions& opts) {
    if (!(noise.epsilon > 0.0)) throw Error("sample_gbm: epsilon must be > 0");
    if (noise.n_steps == 0) throw Error("sample_gbm: n_steps must be >= 1");
    check_initial_frame(fam, u0, "sample_gbm");
    const std::size_t n = noise.n_steps;
    const int d = fam.dim();
    const double h = 1.0 / static_cast<double>(n);
    const double sqrt_h = std::sqrt(h);
    const double sqrt_eps = std::sqrt(noise.epsilon);

    SamplePath out;
    out.seed = noise.seed;
    out.stream_id = noise.stream_id;
    out.path.points.assign(n + 1, u0.base);
    if (opts.keep_frames) {
        out.frame_path.emplace();
        out.frame_path->reorthonormalize_every = opts.reorthonormalize_every;
        out.frame_path->frames.assign(n + 1, Frame{0.0, u0.base, u0.basis});
    }

    NormalStream stream(noise.seed, noise.stream_id);
    GbmStepper stepper(fam);
    Eigen::VectorXd x = u0.base;
    Eigen::MatrixXd e = u0.basis;
    Eigen::VectorXd dw = Eigen::VectorXd::Zero(d);

    for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) * h;
        if (!noise.zero_noise) {
            for (int i = 0; i < d; ++i) {
                // base increment sqrt(h) xi, then sqrt(eps): the scale-eps noise
                // is exactly sqrt(eps) times the scale-1 noise.
                dw[i] = sqrt_eps * (sqrt_h * stream.normal(k * static_cast<std::size_t>(d) +
                                                           static_cast<std::size_t>(i)));
            }
        }
        try {
            stepper.step(t, h, x, e, dw);
        } catch (const OutOfChartError&) {
            out.aborted = true;
            out.abort_reason = AbortReason::ChartExit;
            out.abort_time = t;
        }
        if (!out.aborted && !state_finite(x, e)) {
            out.aborted = true;
            out.abort_reason = AbortReason::BlowUp;
            out.abort_time = t;
        }
        if (!out.aborted && !fam.chart_domain().contains(x)) {
            out.aborted = true;
            out.abort_reason = AbortReason::ChartExit;
            out.abort_time = static_cast<double>(k + 1) * h;
        }
        if (out.aborted) {
            // freeze at the last in-chart state
            for (std::size_t j = k + 1; j <= n; ++j) {
                out.path.points[j] = out.path.points[k];
                if (out.frame_path) out.frame_path->frames[j] = out.frame_path->frames[k];
            }
            return out;
        }
        if (opts.reorthonormalize_every > 0 &&
            (k + 1) % static_cast<std::size_t>(opts.reorthonormalize_every) == 0) {
            try {
                e = gram_schmidt_g(fam, static_cast<double>(k + 1) * h, x, e).basis;
            } catch (const Error&) {
                out.aborted = true;
                out.abort_reason = AbortReason::BlowUp;
                out.abort_time = static_cast<double>(k + 1) * h;
                for (std::size_t j = k + 1; j <= n; ++j) {
                    out.path.points[j] = out.path.points[k];
                    if (out.frame_path) out.frame_path->frames[j] = out.frame_path->frames[k];
                }
                return out;
            }
        }
        out.path.points[k + 1] = x;
        if (out.frame_path) {
            out.frame_path->frames[k + 1] = Frame{static_cast<double>(k + 1) * h, x, e};
        }
    }
    return out;
}

SamplePath sample_scalar_reference(const MetricFamily& fam, double x0, const NoiseConfig& noise) {
    if (fam.dim() != 1) throw Error("sample_scalar_reference: family must be one-dimensional");
    if (!(noise.epsilon > 0.0)) throw Error("sample_scalar_reference: epsilon must be > 0");
    if (noise.n_steps == 0) throw Error("sample_scalar_reference: n_steps must be >= 1");
    const std::size_t n = noise.n_steps;
    const double h = 1.0 / static_cast<double>(n);
    const double sqrt_eps = std::sqrt(noise.epsilon);

    ChartPoint origin(1);
    origin[0] = 0.0;
    auto inv_g = [&](double r) { return 1.0 / fam.metric(clamp_time(r), origin)(0, 0); };

    // psi(t_k) increments by adaptive Simpson; per-segment tolerance keeps the
    // cumulative quadrature error well under 1e-12.
    std::vector<double> dpsi(n);
    for (std::size_t k = 0; k < n; ++k) {
        dpsi[k] = adaptive_simpson(inv_g, static_cast<double>(k) * h,
                                   static_cast<double>(k + 1) * h, 1e-15, 30);
    }

    SamplePath out;
    out.seed = noise.seed;
    out.stream_id = noise.stream_id;
    out.path.points.assign(n + 1, Eigen::VectorXd::Constant(1, x0));
    NormalStream stream(noise.seed, noise.stream_id);
    double x = x0;
    for (std::size_t k = 0; k < n; ++k) {
        const double xi = noise.zero_noise ? 0.0 : stream.normal(k);
        x += sqrt_eps * (std::sqrt(dpsi[k]) * xi);
        out.path.points[k + 1][0] = x;
    }
    return out;
}

SamplePath sample_euclidean(const DriftFn& b, const DiffusionFn& sigma, const Eigen::VectorXd& x0,
                            double epsilon, const NoiseConfig& noise, SdeScheme scheme) {
    if (!(epsilon >= 0.0)) throw Error("sample_euclidean: epsilon must be >= 0");
    if (noise.n_steps == 0) throw Error("sample_euclidean: n_steps must be >= 1");
    const std::size_t n = noise.n_steps;
    const int d = static_cast<int>(x0.size());
    const double h = 1.0 / static_cast<double>(n);
    const double sqrt_h = std::sqrt(h);
    const double sqrt_eps = std::sqrt(epsilon);

    SamplePath out;
    out.seed = noise.seed;
    out.stream_id = noise.stream_id;
    out.path.points.assign(n + 1, x0);
    NormalStream stream(noise.seed, noise.stream_id);
    Eigen::VectorXd x = x0;
    Eigen::VectorXd dw = Eigen::VectorXd::Zero(d);

    for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) * h;
        if (!noise.zero_noise) {
            for (int i = 0; i < d; ++i) {
                dw[i] = sqrt_eps * (sqrt_h * stream.normal(k * static_cast<std::size_t>(d) +
                                                           static_cast<std::size_t>(i)));
            }
        }
        if (scheme == SdeScheme::Ito) {
            x += b(t, x) * h + sigma(t, x) * dw;
        } else {
            const Eigen::VectorXd b0 = b(t, x);
            const Eigen::MatrixXd s0 = sigma(t, x);
            const Eigen::VectorXd xp = x + b0 * h + s0 * dw;
            x += 0.5 * (b0 + b(t + h, xp)) * h + 0.5 * ((s0 + sigma(t + h, xp)) * dw);
        }
        if (!x.allFinite() || x.norm() > kBlowUpLimit) {
            out.aborted = true;
            out.abort_reason = AbortReason::BlowUp;
            out.abort_time = t;
            for (std::size_t j = k + 1; j <= n; ++j) out.path.points[j] = out.path.points[k];
            return out;
        }
        out.path.points[k + 1] = x;
    }
    return out;
}

double laplace_beltrami(const MetricFamily& fam, const TestFunction& f, double t,
                        const ChartPoint& x) {
    const int d = fam.dim();
    const Eigen::MatrixXd g = metric_eval(fam, t, x);
    Eigen::LLT<Eigen::MatrixXd> llt(g);
    if (llt.info() != Eigen::Success) {
        throw SingularMetricError("laplace_beltrami: metric not positive definite");
    }
    const auto gamma = christoffel(fam, t, x);
    const Eigen::VectorXd grad = f.gradient(x);
    Eigen::MatrixXd a = f.hessian(x);
    for (int k = 0; k < d; ++k) a -= grad[k] * gamma[static_cast<std::size_t>(k)];
    return llt.solve(a).trace();
}

GeneratorCheck generator_check(const MetricFamily& fam, const TestFunction& f,
                               const ChartPoint& x0, double t0, double epsilon, double h,
                               std::size_t n_samples, std::uint64_t seed, std::size_t sub_steps,
                               unsigned n_threads) {
    if (!(h > 0.0)) throw Error("generator_check: window h must be > 0");
    require_in_chart(fam, x0, "generator_check");
    const Frame u0 = default_frame(fam, t0, x0);
    const int d = fam.dim();
    const double dt = h / static_cast<double>(sub_steps);
    const double sqrt_dt = std::sqrt(dt);
    const double sqrt_eps = std::sqrt(epsilon);
    const double f0 = f.value(x0);

    struct ChunkAgg {
        double sum = 0.0;
        double sumsq = 0.0;
        std::size_t count = 0;
        std::size_t aborted = 0;
    };
    const std::size_t chunk = kDefaultChunk;
    std::vector<ChunkAgg> agg((n_samples + chunk - 1) / chunk);

    parallel_chunks(n_samples, chunk, n_threads, [&](std::size_t lo, std::size_t hi) {
        ChunkAgg local;
        GbmStepper stepper(fam);
        Eigen::VectorXd dw(d);
        for (std::size_t i = lo; i < hi; ++i) {
            NormalStream stream(seed, i);
            Eigen::VectorXd x = x0;
            Eigen::MatrixXd e = u0.basis;
            bool ok = true;
            for (std::size_t k = 0; k < sub_steps && ok; ++k) {
                for (int c = 0; c < d; ++c) {
                    dw[c] = sqrt_eps * (sqrt_dt * stream.normal(k * static_cast<std::size_t>(d) +
                                                                static_cast<std::size_t>(c)));
                }
                try {
                    stepper.step(t0 + static_cast<double>(k) * dt, dt, x, e, dw);
                } catch (const OutOfChartError&) {
                    ok = false;
                }
                ok = ok && state_finite(x, e) && fam.chart_domain().contains(x);
            }
            if (!ok) {
                ++local.aborted;
                continue;
            }
            const double v = f.value(x);
            local.sum += v;
            local.sumsq += v * v;
            ++local.count;
        }
        agg[lo / chunk] = local;
    });

    double sum = 0.0, sumsq = 0.0;
    std::size_t count = 0, aborted = 0;
    for (const auto& a : agg) {
        sum += a.sum;
        sumsq += a.sumsq;
        count += a.count;
        aborted += a.aborted;
    }
    GeneratorCheck result;
    result.n_samples = count;
    result.aborted = aborted;
    result.analytic = 0.5 * epsilon * laplace_beltrami(fam, f, t0, x0);
    if (count > 0) {
        const double mean = sum / static_cast<double>(count);
        result.empirical = (mean - f0) / h;
        if (count > 1) {
            const double var =
                (sumsq - sum * sum / static_cast<double>(count)) / static_cast<double>(count - 1);
            result.std_error = std::sqrt(std::max(0.0, var) / static_cast<double>(count)) / h;
        }
    }
    return result;
}

}  // namespace evolvebm
