#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "evolvebm/framebundle.hpp"
#include "evolvebm/numerics.hpp"
#include "test_helpers.hpp"

using namespace evolvebm;
using namespace testhelp;

namespace {

ChartPoint pt1(double x) { return Eigen::VectorXd::Constant(1, x); }
ChartPoint pt2(double x, double y) {
    ChartPoint p(2);
    p << x, y;
    return p;
}

Path constant_path(const ChartPoint& x, std::size_t n) {
    Path p;
    p.points.assign(n + 1, x);
    return p;
}

}  // namespace

TEST_CASE("transport_rhs closed forms") {
    auto flat = static_plane();
    const Eigen::MatrixXd rhs =
        transport_rhs(*flat, 0.3, pt2(0.1, 0.2), pt2(0.5, -0.7), Eigen::MatrixXd::Identity(2, 2));
    CHECK(rhs.norm() == doctest::Approx(0.0));

    // 1-D: dE/dt = -1/2 (b/(a+bt)) E at zero velocity
    auto s = scalar1d();
    const double t = 0.4;
    Eigen::MatrixXd e(1, 1);
    e(0, 0) = 1.0 / std::sqrt(1.0 + t);
    const Eigen::MatrixXd got = transport_rhs(*s, t, pt1(0.0), pt1(0.0), e);
    CHECK(got(0, 0) == doctest::Approx(-0.5 / (1.0 + t) * e(0, 0)).epsilon(1e-14));
}

TEST_CASE("transport_rhs agrees with the all-finite-difference oracle") {
    auto sph = shrink_sphere(0.5);
    std::mt19937 rng(31);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_real_distribution<double> ut(0.0, 1.0);
    for (int trial = 0; trial < 15; ++trial) {
        const ChartPoint x = pt2(u(rng), u(rng));
        const Eigen::VectorXd v = pt2(u(rng), u(rng));
        Eigen::MatrixXd e(2, 2);
        e << 1.0 + 0.2 * u(rng), 0.3 * u(rng), 0.3 * u(rng), 1.0 + 0.2 * u(rng);
        const double t = ut(rng);

        const Eigen::MatrixXd got = transport_rhs(*sph, t, x, v, e);
        // oracle: rebuild the right-hand side from raw metric samples only
        const auto gamma_fd = fd_christoffel(*sph, t, x);
        Eigen::MatrixXd oracle(2, 2);
        for (int k = 0; k < 2; ++k) {
            oracle.row(k) = -(v.transpose() * gamma_fd[static_cast<std::size_t>(k)]) * e;
        }
        oracle -= 0.5 * sph->metric(t, x).inverse() * fd_metric_dt(*sph, t, x) * e;
        CHECK((got - oracle).cwiseAbs().maxCoeff() < 1e-6);
    }
}

TEST_CASE("horizontal_lift of a constant path in a static metric is constant") {
    auto flat = static_plane();
    const ChartPoint x = pt2(0.4, -0.3);
    const Frame u0 = default_frame(*flat, 0.0, x);
    const FramePath lift = horizontal_lift(*flat, constant_path(x, 100), u0);
    for (const auto& f : lift.frames) {
        CHECK((f.basis - u0.basis).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
    }
}

TEST_CASE("horizontal_lift solves the scalar transport ODE") {
    // constant path in scalar1d{1,1}: E(t) = E(0) (1+t)^{-1/2}
    auto s = scalar1d();
    const Frame u0 = default_frame(*s, 0.0, pt1(0.0));
    REQUIRE(u0.basis(0, 0) == doctest::Approx(1.0));
    const FramePath lift = horizontal_lift(*s, constant_path(pt1(0.0), 1000), u0);
    CHECK(lift.frames.back().basis(0, 0) ==
          doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-10));
}

TEST_CASE("horizontal_lift stays orthonormal on a great-circle segment") {
    auto sph = shrink_sphere(0.5);
    // geodesics through the south pole are straight chart lines through 0
    Path gamma;
    const std::size_t n = 10000;
    for (std::size_t k = 0; k <= n; ++k) {
        const double t = static_cast<double>(k) / static_cast<double>(n);
        gamma.points.push_back(pt2(std::tan(0.6 * t), 0.0));
    }
    const Frame u0 = default_frame(*sph, 0.0, gamma.points.front());
    const FramePath lift = horizontal_lift(*sph, gamma, u0);
    double max_defect = 0.0;
    for (const auto& f : lift.frames) {
        max_defect = std::max(max_defect, orthonormality_defect(*sph, f));
    }
    CHECK(max_defect <= 1e-5);
}

TEST_CASE("inner products are preserved along lifts (all families)") {
    std::mt19937 rng(2024);
    const std::size_t n = 4000;
    const double tol = 1e-5 * (1.0 + static_cast<double>(n) / (static_cast<double>(n) * n));
    std::vector<std::unique_ptr<MetricFamily>> fams;
    fams.push_back(scalar1d());
    fams.push_back(conformal_plane(-0.5));
    fams.push_back(shrink_sphere(0.5));
    fams.push_back(flat_torus());
    for (const auto& fam : fams) {
        CAPTURE(fam->family_id());
        const SmoothCurve curve = random_curve(fam->dim(), rng, 0.5);
        const Path gamma = curve.sample(n);
        const Frame u0 = default_frame(*fam, 0.0, gamma.points.front());
        const FramePath lift = horizontal_lift(*fam, gamma, u0);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        Eigen::VectorXd a(fam->dim()), b(fam->dim());
        for (int i = 0; i < fam->dim(); ++i) {
            a[i] = u(rng);
            b[i] = u(rng);
        }
        const double ref = (u0.basis * a)
                               .dot(metric_eval(*fam, 0.0, gamma.points.front()) * (u0.basis * b));
        for (std::size_t k = 0; k <= n; k += 400) {
            const Frame& f = lift.frames[k];
            const double val =
                (f.basis * a).dot(metric_eval(*fam, f.time, f.base) * (f.basis * b));
            CHECK(std::abs(val - ref) <= tol);
        }
    }
}

TEST_CASE("static-metric lift reduces to classical parallel transport") {
    // static round sphere: curvature without a time derivative
    auto sph = shrink_sphere(0.0);
    std::mt19937 rng(7);
    SmoothCurve curve = random_curve(2, rng, 0.0);
    curve.sin_coef[0] = pt2(0.35, -0.2);   // gentle single-mode curve
    curve.cos_coef[0] = pt2(0.1, 0.25);
    const std::size_t n = 20000;
    const Path gamma = curve.sample(n);
    const Frame u0 = default_frame(*sph, 0.0, gamma.points.front());
    const FramePath lift = horizontal_lift(*sph, gamma, u0);
    const Eigen::MatrixXd classical = classical_transport(*sph, curve, u0.basis, n);
    CHECK((lift.frames.back().basis - classical).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("antidevelop closed forms") {
    auto flat = static_plane();
    const ChartPoint x = pt2(0.2, 0.6);
    const Frame u0{0.0, x, Eigen::MatrixXd::Identity(2, 2)};

    const ControlPath wconst = antidevelop(*flat, constant_path(x, 50), u0);
    for (const auto& v : wconst.values) CHECK(v.norm() == 0.0);

    // straight line with identity frames: w(t) = gamma(t) - gamma(0)
    Path line;
    const std::size_t n = 64;
    for (std::size_t k = 0; k <= n; ++k) {
        const double t = static_cast<double>(k) / static_cast<double>(n);
        line.points.push_back(pt2(0.2 + 0.7 * t, 0.6 - 0.4 * t));
    }
    const ControlPath w = antidevelop(*flat, line, u0);
    for (std::size_t k = 0; k <= n; ++k) {
        CHECK((w.values[k] - (line.points[k] - line.points[0])).cwiseAbs().maxCoeff() < 1e-13);
    }
    CHECK(w.values[0].norm() == 0.0);
}

TEST_CASE("development inverts anti-development on the sphere") {
    auto sph = shrink_sphere(0.5);
    std::mt19937 rng(88);
    const SmoothCurve curve = random_curve(2, rng, 0.5);
    const std::size_t n = 10000;
    const Path gamma = curve.sample(n);
    const Frame u0 = default_frame(*sph, 0.0, gamma.points.front());
    const ControlPath w = antidevelop(*sph, gamma, u0);
    const Development dev = develop(*sph, w, u0);
    CHECK(sup_distance(dev.path, gamma) <= 1e-6);
}

TEST_CASE("develop closed forms") {
    auto flat = static_plane();
    const std::size_t n = 100;

    ControlPath zero;
    zero.values.assign(n + 1, pt2(0.0, 0.0));
    const ChartPoint x0 = pt2(-0.3, 0.4);
    const Frame u0{0.0, x0, Eigen::MatrixXd::Identity(2, 2)};
    const Development still = develop(*flat, zero, u0);
    for (const auto& p : still.path.points) CHECK((p - x0).norm() == doctest::Approx(0.0));
    for (const auto& f : still.frames.frames) {
        CHECK((f.basis - Eigen::MatrixXd::Identity(2, 2)).norm() == doctest::Approx(0.0));
    }

    // w(t) = (t, 0): unit-speed straight line
    ControlPath wline;
    for (std::size_t k = 0; k <= n; ++k) {
        const double t = static_cast<double>(k) / static_cast<double>(n);
        wline.values.push_back(pt2(t, 0.0));
    }
    const Development dev = develop(*flat, wline, u0);
    for (std::size_t k = 0; k <= n; ++k) {
        const double t = static_cast<double>(k) / static_cast<double>(n);
        CHECK((dev.path.points[k] - pt2(x0[0] + t, x0[1])).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("develop produces unit-speed paths on the shrinking sphere") {
    auto sph = shrink_sphere(0.5);
    const std::size_t n = 10000;
    ControlPath w;
    for (std::size_t k = 0; k <= n; ++k) {
        const double t = static_cast<double>(k) / static_cast<double>(n);
        w.values.push_back(pt2(t, 0.0));
    }
    const Frame u0 = default_frame(*sph, 0.0, pt2(0.0, 0.0));
    const Development dev = develop(*sph, w, u0);
    const double h = 1.0 / static_cast<double>(n);
    for (std::size_t k = 400; k < n; k += 400) {
        const Eigen::VectorXd v = (dev.path.points[k + 1] - dev.path.points[k - 1]) / (2.0 * h);
        const double t = static_cast<double>(k) * h;
        const double speed = std::sqrt(v.dot(metric_eval(*sph, t, dev.path.points[k]) * v));
        CHECK(std::abs(speed - 1.0) <= 1e-6);
    }
}

TEST_CASE("develop exits the chart on a long geodesic") {
    auto sph = shrink_sphere(0.0);
    const std::size_t n = 4000;
    ControlPath w;
    for (std::size_t k = 0; k <= n; ++k) {
        const double t = static_cast<double>(k) / static_cast<double>(n);
        w.values.push_back(pt2(5.0 * t, 0.0));  // arclength 5 > distance to the chart edge
    }
    const Frame u0 = default_frame(*sph, 0.0, pt2(0.0, 0.0));
    CHECK_THROWS_AS(develop(*sph, w, u0), OutOfChartError);
}

TEST_CASE("speed identity between controls and paths") {
    auto sph = shrink_sphere(0.5);
    std::mt19937 rng(12);
    const SmoothCurve curve = random_curve(2, rng, 0.4);
    const std::size_t n = 4000;
    const Path gamma = curve.sample(n);
    const Frame u0 = default_frame(*sph, 0.0, gamma.points.front());
    const ControlPath w = antidevelop(*sph, gamma, u0);
    const double h = 1.0 / static_cast<double>(n);
    for (std::size_t k = 200; k < n; k += 200) {
        const Eigen::VectorXd wdot = (w.values[k + 1] - w.values[k - 1]) / (2.0 * h);
        const Eigen::VectorXd gdot = (gamma.points[k + 1] - gamma.points[k - 1]) / (2.0 * h);
        const double t = static_cast<double>(k) * h;
        const double gspeed =
            std::sqrt(gdot.dot(metric_eval(*sph, t, gamma.points[k]) * gdot));
        CHECK(std::abs(wdot.norm() - gspeed) <= 1e-5);
    }
}

TEST_CASE("orthonormality_defect closed forms") {
    auto sph = shrink_sphere(0.5);
    const ChartPoint x = pt2(0.3, -0.6);
    const Frame f = default_frame(*sph, 0.2, x);
    CHECK(orthonormality_defect(*sph, f) <= 1e-14);
    Frame doubled = f;
    doubled.basis *= 2.0;
    CHECK(orthonormality_defect(*sph, doubled) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("gram_schmidt_g orthonormalizes and is idempotent") {
    auto flat = static_plane();
    const ChartPoint x = pt2(0.0, 0.0);
    const Frame id = gram_schmidt_g(*flat, 0.0, x, Eigen::MatrixXd::Identity(2, 2));
    CHECK((id.basis - Eigen::MatrixXd::Identity(2, 2)).norm() == 0.0);

    Eigen::MatrixXd diag(2, 2);
    diag << 2.0, 0.0, 0.0, 3.0;
    CHECK((gram_schmidt_g(*flat, 0.0, x, diag).basis - Eigen::MatrixXd::Identity(2, 2)).norm() ==
          doctest::Approx(0.0));

    auto sph = shrink_sphere(0.5);
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        Eigen::MatrixXd e(2, 2);
        e << 1.0 + u(rng), u(rng), u(rng), 1.0 + u(rng);
        if (std::abs(e.determinant()) < 0.05) continue;
        const ChartPoint x2 = pt2(0.5 * u(rng), 0.5 * u(rng));
        const Frame f = gram_schmidt_g(*sph, 0.3, x2, e);
        CHECK(orthonormality_defect(*sph, f) <= 1e-12);
        const Frame again = gram_schmidt_g(*sph, 0.3, x2, f.basis);
        CHECK((again.basis - f.basis).cwiseAbs().maxCoeff() <= 1e-12);
    }
    Eigen::MatrixXd degenerate(2, 2);
    degenerate << 1.0, 1.0, 1.0, 1.0;
    CHECK_THROWS_AS(gram_schmidt_g(*flat, 0.0, x, degenerate), DegenerateBasisError);
}

TEST_CASE("lift rejects a non-orthonormal start") {
    auto s = scalar1d();
    Frame bad{0.0, pt1(0.0), Eigen::MatrixXd::Constant(1, 1, 2.0)};
    CHECK_THROWS_AS(horizontal_lift(*s, constant_path(pt1(0.0), 10), bad),
                    NonOrthonormalStartError);
}

TEST_CASE("optional re-orthonormalization is recorded and tightens defects") {
    auto sph = shrink_sphere(0.5);
    std::mt19937 rng(55);
    const SmoothCurve curve = random_curve(2, rng, 0.5);
    const Path gamma = curve.sample(2000);
    const Frame u0 = default_frame(*sph, 0.0, gamma.points.front());
    LiftOptions opts;
    opts.reorthonormalize_every = 50;
    const FramePath lift = horizontal_lift(*sph, gamma, u0, opts);
    CHECK(lift.reorthonormalize_every == 50);
    CHECK(orthonormality_defect(*sph, lift.frames.back()) <= 1e-9);
}
