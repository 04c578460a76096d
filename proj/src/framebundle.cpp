#include "evolvebm/framebundle.hpp"

#include <cmath>
#include <sstream>

#include "evolvebm/numerics.hpp"

namespace evolvebm {

Eigen::MatrixXd transport_rhs(const MetricFamily& fam, double t, const ChartPoint& x,
                              const Eigen::VectorXd& v, const Eigen::MatrixXd& basis) {
    const auto gamma = christoffel(fam, t, x);
    const Eigen::MatrixXd g = metric_eval(fam, t, x);
    const Eigen::MatrixXd dg = metric_dt(fam, t, x);
    Eigen::LLT<Eigen::MatrixXd> llt(g);
    if (llt.info() != Eigen::Success) {
        throw SingularMetricError("transport_rhs: metric not positive definite");
    }
    return -christoffel_apply(gamma, v, basis) - 0.5 * llt.solve(dg * basis);
}

Frame default_frame(const MetricFamily& fam, double t, const ChartPoint& x) {
    const Eigen::MatrixXd g = metric_eval(fam, t, x);
    return Frame{clamp_time(t), x, sym_inverse_sqrt(g)};
}

double orthonormality_defect(const MetricFamily& fam, const Frame& frame) {
    const Eigen::MatrixXd g = metric_eval(fam, frame.time, frame.base);
    const int d = fam.dim();
    const Eigen::MatrixXd defect =
        frame.basis.transpose() * g * frame.basis - Eigen::MatrixXd::Identity(d, d);
    return defect.cwiseAbs().maxCoeff();
}

Frame gram_schmidt_g(const MetricFamily& fam, double t, const ChartPoint& x,
                     const Eigen::MatrixXd& basis) {
    const Eigen::MatrixXd g = metric_eval(fam, t, x);
    Eigen::LLT<Eigen::MatrixXd> llt(g);
    if (llt.info() != Eigen::Success) {
        throw SingularMetricError("gram_schmidt_g: metric not positive definite");
    }
    const int d = fam.dim();
    Eigen::MatrixXd e = basis;
    // Modified Gram-Schmidt, run twice for a defect at the rounding floor.
    for (int pass = 0; pass < 2; ++pass) {
        for (int j = 0; j < d; ++j) {
            Eigen::VectorXd v = e.col(j);
            for (int i = 0; i < j; ++i) {
                v -= (e.col(i).dot(g * v)) * e.col(i);
            }
            const double norm = std::sqrt(v.dot(g * v));
            if (!(norm > 1e-14 * (1.0 + basis.col(j).norm()))) {
                std::ostringstream os;
                os << "gram_schmidt_g: column " << j << " is degenerate";
                throw DegenerateBasisError(os.str());
            }
            e.col(j) = v / norm;
        }
    }
    return Frame{clamp_time(t), x, e};
}

namespace {

void check_start(const MetricFamily& fam, const Path& gamma, const Frame& u0,
                 const LiftOptions& opts) {
    gamma.validate();
    for (const auto& p : gamma.points) require_in_chart(fam, p, "horizontal_lift");
    if ((u0.base - gamma.points.front()).norm() > 1e-12 * (1.0 + gamma.points.front().norm())) {
        throw Error("horizontal_lift: initial frame is not based at gamma(0)");
    }
    Frame at0 = u0;
    at0.time = 0.0;
    const double defect = orthonormality_defect(fam, at0);
    if (defect > opts.start_tolerance) {
        std::ostringstream os;
        os << "initial frame is not g(0)-orthonormal (defect " << defect << " > "
           << opts.start_tolerance << ")";
        throw NonOrthonormalStartError(os.str());
    }
}

// Midpoint of segment k by Lagrange cubic through four neighbouring grid
// points (quadratic/linear fallback on very short paths). Fourth order on
// smooth curves, which keeps the RK4 stage positions from limiting accuracy.
Eigen::VectorXd segment_midpoint(const std::vector<Eigen::VectorXd>& p, std::size_t k) {
    const std::size_t n = p.size() - 1;
    if (n == 1) return 0.5 * (p[0] + p[1]);
    if (n == 2) {
        if (k == 0) return 0.375 * p[0] + 0.75 * p[1] - 0.125 * p[2];
        return -0.125 * p[0] + 0.75 * p[1] + 0.375 * p[2];
    }
    if (k == 0) return 0.3125 * p[0] + 0.9375 * p[1] - 0.3125 * p[2] + 0.0625 * p[3];
    if (k == n - 1)
        return 0.0625 * p[n - 3] - 0.3125 * p[n - 2] + 0.9375 * p[n - 1] + 0.3125 * p[n];
    return (-p[k - 1] + 9.0 * p[k] + 9.0 * p[k + 1] - p[k + 2]) / 16.0;
}

}  // namespace

FramePath horizontal_lift(const MetricFamily& fam, const Path& gamma, const Frame& u0,
                          const LiftOptions& opts) {
    check_start(fam, gamma, u0, opts);
    const std::size_t n = gamma.segments();
    const double h = gamma.step();
    const auto& pts = gamma.points;
    auto node_velocity = [&](std::size_t k) {
        return grid_velocity([&](std::size_t j) { return pts[j]; }, n, k, h);
    };

    FramePath out;
    out.reorthonormalize_every = opts.reorthonormalize_every;
    out.frames.reserve(n + 1);
    Eigen::MatrixXd e = u0.basis;
    out.frames.push_back(Frame{0.0, pts[0], e});

    Eigen::VectorXd v_right = node_velocity(0);
    for (std::size_t k = 0; k < n; ++k) {
        const double t0 = gamma.time(k);
        const double t1 = gamma.time(k + 1);
        const double tm = 0.5 * (t0 + t1);
        const Eigen::VectorXd v0 = v_right;
        const Eigen::VectorXd v1 = node_velocity(k + 1);
        const Eigen::VectorXd vm = (pts[k + 1] - pts[k]) / h;
        const Eigen::VectorXd xm = segment_midpoint(pts, k);

        const Eigen::MatrixXd k1 = transport_rhs(fam, t0, pts[k], v0, e);
        const Eigen::MatrixXd k2 = transport_rhs(fam, tm, xm, vm, e + 0.5 * h * k1);
        const Eigen::MatrixXd k3 = transport_rhs(fam, tm, xm, vm, e + 0.5 * h * k2);
        const Eigen::MatrixXd k4 = transport_rhs(fam, t1, pts[k + 1], v1, e + h * k3);
        e += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        v_right = v1;

        if (opts.reorthonormalize_every > 0 &&
            (k + 1) % static_cast<std::size_t>(opts.reorthonormalize_every) == 0) {
            e = gram_schmidt_g(fam, t1, pts[k + 1], e).basis;
        }
        out.frames.push_back(Frame{t1, pts[k + 1], e});
    }
    return out;
}

ControlPath antidevelop(const MetricFamily& fam, const Path& gamma, const Frame& u0,
                        const LiftOptions& opts) {
    const FramePath lift = horizontal_lift(fam, gamma, u0, opts);
    const std::size_t n = gamma.segments();
    const int d = fam.dim();

    ControlPath w;
    w.values.reserve(n + 1);
    w.values.push_back(Eigen::VectorXd::Zero(d));
    for (std::size_t k = 0; k < n; ++k) {
        const Eigen::MatrixXd e_mid = 0.5 * (lift.frames[k].basis + lift.frames[k + 1].basis);
        const Eigen::VectorXd dgamma = gamma.points[k + 1] - gamma.points[k];
        // w_{k+1} = w_k + E_mid^{-1} gamma'_mid h;  h cancels against the velocity.
        w.values.push_back(w.values.back() + e_mid.partialPivLu().solve(dgamma));
    }
    return w;
}

Development develop(const MetricFamily& fam, const ControlPath& w, const Frame& u0,
                    const LiftOptions& opts) {
    if (w.values.size() < 2) throw Error("develop: control path needs at least two grid points");
    require_in_chart(fam, u0.base, "develop");
    {
        Frame at0 = u0;
        at0.time = 0.0;
        const double defect = orthonormality_defect(fam, at0);
        if (defect > opts.start_tolerance) {
            std::ostringstream os;
            os << "develop: initial frame is not g(0)-orthonormal (defect " << defect << ")";
            throw NonOrthonormalStartError(os.str());
        }
    }
    const std::size_t n = w.segments();
    const double h = w.step();
    const double blowup_limit = 1e9;

    Development out;
    out.frames.reorthonormalize_every = opts.reorthonormalize_every;
    out.frames.frames.reserve(n + 1);
    Eigen::VectorXd x = u0.base;
    Eigen::MatrixXd e = u0.basis;
    out.frames.frames.push_back(Frame{0.0, x, e});

    for (std::size_t k = 0; k < n; ++k) {
        const double t0 = w.time(k);
        const double tm = t0 + 0.5 * h;
        const double t1 = w.time(k + 1);
        const Eigen::VectorXd wdot = (w.values[k + 1] - w.values[k]) / h;

        auto rhs = [&](double t, const Eigen::VectorXd& xx, const Eigen::MatrixXd& ee,
                       Eigen::VectorXd& dx, Eigen::MatrixXd& de) {
            dx = ee * wdot;
            de = transport_rhs(fam, t, xx, dx, ee);
        };
        Eigen::VectorXd dx1, dx2, dx3, dx4;
        Eigen::MatrixXd de1, de2, de3, de4;
        rhs(t0, x, e, dx1, de1);
        rhs(tm, x + 0.5 * h * dx1, e + 0.5 * h * de1, dx2, de2);
        rhs(tm, x + 0.5 * h * dx2, e + 0.5 * h * de2, dx3, de3);
        rhs(t1, x + h * dx3, e + h * de3, dx4, de4);
        x += (h / 6.0) * (dx1 + 2.0 * dx2 + 2.0 * dx3 + dx4);
        e += (h / 6.0) * (de1 + 2.0 * de2 + 2.0 * de3 + de4);

        if (!x.allFinite() || !e.allFinite() || x.norm() > blowup_limit ||
            e.norm() > blowup_limit) {
            std::ostringstream os;
            os << "develop: numerical explosion at t = " << t1;
            throw BlowUpError(os.str());
        }
        require_in_chart(fam, x, "develop");
        if (opts.reorthonormalize_every > 0 &&
            (k + 1) % static_cast<std::size_t>(opts.reorthonormalize_every) == 0) {
            e = gram_schmidt_g(fam, t1, x, e).basis;
        }
        out.frames.frames.push_back(Frame{t1, x, e});
    }
    out.path = out.frames.project();
    return out;
}

}  // namespace evolvebm
