#pragma once

#include <Eigen/Dense>

#include "evolvebm/geometry.hpp"
#include "evolvebm/paths.hpp"

namespace evolvebm {

// Right-hand side of the time-dependent parallel transport equation for a
// frame matrix E along a curve with chart velocity v:
//   dE/dt column i = -Gamma(t,x)(v, E e_i) - 1/2 G^{-1} (d_t g) E e_i.
Eigen::MatrixXd transport_rhs(const MetricFamily& fam, double t, const ChartPoint& x,
                              const Eigen::VectorXd& v, const Eigen::MatrixXd& basis);

// Canonical initial frame: the g(t,x)-symmetric inverse square root G^{-1/2}.
Frame default_frame(const MetricFamily& fam, double t, const ChartPoint& x);

// sup-norm of E^T G(t,x) E - I.
double orthonormality_defect(const MetricFamily& fam, const Frame& frame);

// Gram-Schmidt in the g(t,x) inner product; idempotent on orthonormal frames.
Frame gram_schmidt_g(const MetricFamily& fam, double t, const ChartPoint& x,
                     const Eigen::MatrixXd& basis);

struct LiftOptions {
    int reorthonormalize_every = 0;  // re-project to the orthonormal bundle every K steps
    double start_tolerance = 1e-6;   // allowed orthonormality defect of the initial frame
};

// Horizontal lift of a discrete curve: RK4 on transport_rhs with grid
// velocities (central differences, one-sided at the ends) and cubic midpoint
// interpolation of the base curve.
FramePath horizontal_lift(const MetricFamily& fam, const Path& gamma, const Frame& u0,
                          const LiftOptions& opts = {});

// Anti-development w(t) = int u(s)^{-1} gamma'(s) ds via midpoint frames and
// velocities; w_0 = 0.
ControlPath antidevelop(const MetricFamily& fam, const Path& gamma, const Frame& u0,
                        const LiftOptions& opts = {});

struct Development {
    FramePath frames;
    Path path;
};

// Development of a control curve onto the chart: RK4 on
//   dx/dt = E w'(t),   dE/dt = transport_rhs(t, x, E w', E),
// treating w as piecewise linear. Throws OutOfChart if the path leaves the
// chart and BlowUp on numerical explosion.
Development develop(const MetricFamily& fam, const ControlPath& w, const Frame& u0,
                    const LiftOptions& opts = {});

}  // namespace evolvebm
