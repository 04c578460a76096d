#pragma once

// Shared fixtures and independent oracles for the test suites. Oracles here
// re-derive quantities from raw metric evaluations (finite differences,
// reference integrators) and stay off the library code paths they check.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "evolvebm/geometry.hpp"
#include "evolvebm/paths.hpp"

namespace testhelp {

using evolvebm::ChartPoint;
using evolvebm::MetricFamily;
using evolvebm::Path;

inline std::unique_ptr<MetricFamily> scalar1d(double a = 1.0, double b = 1.0) {
    return evolvebm::make_family("scalar1d", {{"a", a}, {"b", b}});
}
inline std::unique_ptr<MetricFamily> conformal_plane(double kappa = -1.0) {
    return evolvebm::make_family("conformal_plane", {{"kappa", kappa}});
}
inline std::unique_ptr<MetricFamily> shrink_sphere(double rate = 0.5) {
    return evolvebm::make_family("shrink_sphere", {{"rate", rate}});
}
inline std::unique_ptr<MetricFamily> flat_torus(double a1 = 1.0, double b1 = 0.5, double a2 = 2.0,
                                                double b2 = -0.5) {
    return evolvebm::make_family("flat_torus",
                                 {{"a1", a1}, {"b1", b1}, {"a2", a2}, {"b2", b2}});
}
// time-constant metrics
inline std::unique_ptr<MetricFamily> static_line() { return scalar1d(1.0, 0.0); }
inline std::unique_ptr<MetricFamily> static_plane() {
    return flat_torus(1.0, 0.0, 1.0, 0.0);
}

// Central finite difference of the raw metric in time (independent of the
// library's derivative plumbing).
inline Eigen::MatrixXd fd_metric_dt(const MetricFamily& fam, double t, const ChartPoint& x,
                                    double h = 1e-4) {
    const double t0 = std::clamp(t, h, 1.0 - h);
    return (fam.metric(t0 + h, x) - fam.metric(t0 - h, x)) / (2.0 * h);
}

inline std::vector<Eigen::MatrixXd> fd_metric_dx(const MetricFamily& fam, double t,
                                                 const ChartPoint& x, double h = 1e-4) {
    std::vector<Eigen::MatrixXd> out;
    for (int k = 0; k < fam.dim(); ++k) {
        ChartPoint xp = x, xm = x;
        xp[k] += h;
        xm[k] -= h;
        out.push_back((fam.metric(t, xp) - fam.metric(t, xm)) / (2.0 * h));
    }
    return out;
}

// Brute-force Christoffel symbols from finite-difference spatial derivatives.
inline std::vector<Eigen::MatrixXd> fd_christoffel(const MetricFamily& fam, double t,
                                                   const ChartPoint& x) {
    const int d = fam.dim();
    const auto dg = fd_metric_dx(fam, t, x);
    const Eigen::MatrixXd ginv = fam.metric(t, x).inverse();
    std::vector<Eigen::MatrixXd> gamma(static_cast<std::size_t>(d),
                                       Eigen::MatrixXd::Zero(d, d));
    for (int k = 0; k < d; ++k) {
        for (int i = 0; i < d; ++i) {
            for (int j = 0; j < d; ++j) {
                double s = 0.0;
                for (int m = 0; m < d; ++m) {
                    s += 0.5 * ginv(k, m) * (dg[i](m, j) + dg[j](m, i) - dg[m](i, j));
                }
                gamma[static_cast<std::size_t>(k)](i, j) = s;
            }
        }
    }
    return gamma;
}

// Smooth low-order Fourier test curve anchored at x_c: gamma(0) = x_c.
struct SmoothCurve {
    ChartPoint center;
    std::vector<Eigen::VectorXd> sin_coef;  // 3 modes
    std::vector<Eigen::VectorXd> cos_coef;

    Eigen::VectorXd at(double t) const {
        Eigen::VectorXd x = center;
        for (int m = 1; m <= 3; ++m) {
            x += sin_coef[m - 1] * std::sin(m * M_PI * t) +
                 cos_coef[m - 1] * (std::cos(m * M_PI * t) - 1.0);
        }
        return x;
    }
    Eigen::VectorXd velocity(double t) const {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(center.size());
        for (int m = 1; m <= 3; ++m) {
            v += sin_coef[m - 1] * (m * M_PI * std::cos(m * M_PI * t)) -
                 cos_coef[m - 1] * (m * M_PI * std::sin(m * M_PI * t));
        }
        return v;
    }
    Path sample(std::size_t n) const {
        Path p;
        p.points.reserve(n + 1);
        for (std::size_t k = 0; k <= n; ++k) {
            p.points.push_back(at(static_cast<double>(k) / static_cast<double>(n)));
        }
        return p;
    }
};

inline SmoothCurve random_curve(int dim, std::mt19937& rng, double amplitude,
                                const ChartPoint& center) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    SmoothCurve c;
    c.center = center;
    for (int m = 0; m < 3; ++m) {
        Eigen::VectorXd a(dim), b(dim);
        for (int i = 0; i < dim; ++i) {
            a[i] = u(rng) * amplitude / (m + 1.0);
            b[i] = u(rng) * amplitude / (m + 1.0);
        }
        c.sin_coef.push_back(a);
        c.cos_coef.push_back(b);
    }
    return c;
}

inline SmoothCurve random_curve(int dim, std::mt19937& rng, double amplitude = 0.6) {
    return random_curve(dim, rng, amplitude, Eigen::VectorXd::Zero(dim));
}

// Classical (frozen-metric) parallel transport: RK4 on
// dE/dt col_i = -Gamma(t, gamma(t))(gamma'(t), E e_i) with exact curve data
// and finite-difference Christoffels; omits the time-derivative term, so it
// matches the evolving-metric transport only for static metrics.
inline Eigen::MatrixXd classical_transport(const MetricFamily& fam, const SmoothCurve& curve,
                                           const Eigen::MatrixXd& e0, std::size_t n) {
    const double h = 1.0 / static_cast<double>(n);
    Eigen::MatrixXd e = e0;
    auto rhs = [&](double t, const Eigen::MatrixXd& ee) {
        const auto gamma = fd_christoffel(fam, t, curve.at(t));
        const Eigen::VectorXd v = curve.velocity(t);
        Eigen::MatrixXd out(ee.rows(), ee.cols());
        for (int k = 0; k < ee.rows(); ++k) {
            out.row(k) = (v.transpose() * gamma[static_cast<std::size_t>(k)]) * ee;
        }
        return (-out).eval();
    };
    for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) * h;
        const Eigen::MatrixXd k1 = rhs(t, e);
        const Eigen::MatrixXd k2 = rhs(t + 0.5 * h, e + 0.5 * h * k1);
        const Eigen::MatrixXd k3 = rhs(t + 0.5 * h, e + 0.5 * h * k2);
        const Eigen::MatrixXd k4 = rhs(t + h, e + h * k3);
        e += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return e;
}

// Two-sample Kolmogorov-Smirnov distance.
inline double ks_distance(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j]) ++i;
        else ++j;
        const double fa = static_cast<double>(i) / a.size();
        const double fb = static_cast<double>(j) / b.size();
        d = std::max(d, std::abs(fa - fb));
    }
    return d;
}

inline double sup_distance(const Path& a, const Path& b) {
    double d = 0.0;
    for (std::size_t k = 0; k < a.points.size(); ++k) {
        d = std::max(d, (a.points[k] - b.points[k]).cwiseAbs().maxCoeff());
    }
    return d;
}

}  // namespace testhelp
