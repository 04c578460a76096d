#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "evolvebm/geometry.hpp"
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

std::vector<std::unique_ptr<MetricFamily>> all_families() {
    std::vector<std::unique_ptr<MetricFamily>> fams;
    fams.push_back(scalar1d());
    fams.push_back(conformal_plane());
    fams.push_back(shrink_sphere());
    fams.push_back(flat_torus());
    return fams;
}

std::vector<ChartPoint> lattice_for(const MetricFamily& fam) {
    std::vector<ChartPoint> pts;
    if (fam.dim() == 1) {
        for (int i = -5; i <= 5; ++i) pts.push_back(pt1(0.4 * i));
    } else {
        for (int i = -3; i <= 3; ++i) {
            for (int j = -3; j <= 3; ++j) pts.push_back(pt2(0.5 * i, 0.5 * j));
        }
    }
    return pts;
}

}  // namespace

TEST_CASE("metric_eval matches closed forms") {
    auto s = scalar1d();
    CHECK(metric_eval(*s, 0.5, pt1(0.0))(0, 0) == doctest::Approx(1.5).epsilon(1e-15));

    auto c = conformal_plane(-1.0);
    const Eigen::MatrixXd g = metric_eval(*c, 0.0, pt2(0.7, -2.3));
    CHECK((g - Eigen::MatrixXd::Identity(2, 2)).norm() == doctest::Approx(0.0));

    // round unit sphere at the chart origin: 4 * I
    auto sph = shrink_sphere(0.5);
    const Eigen::MatrixXd g0 = metric_eval(*sph, 0.0, pt2(0.0, 0.0));
    CHECK((g0 - 4.0 * Eigen::MatrixXd::Identity(2, 2)).norm() == doctest::Approx(0.0));
}

TEST_CASE("metric_eval clamps time outside [0,1]") {
    auto s = scalar1d();
    CHECK(metric_eval(*s, -0.5, pt1(0.0))(0, 0) == metric_eval(*s, 0.0, pt1(0.0))(0, 0));
    CHECK(metric_eval(*s, 1.7, pt1(0.0))(0, 0) == metric_eval(*s, 1.0, pt1(0.0))(0, 0));
}

TEST_CASE("metric symmetry and positive definiteness on a (t,x) lattice") {
    for (const auto& fam : all_families()) {
        CAPTURE(fam->family_id());
        for (const auto& x : lattice_for(*fam)) {
            for (int ti = 0; ti <= 20; ++ti) {
                const double t = ti / 20.0;
                const Eigen::MatrixXd g = metric_eval(*fam, t, x);
                CHECK((g - g.transpose()).cwiseAbs().maxCoeff() == 0.0);
                Eigen::LLT<Eigen::MatrixXd> llt(g);
                CHECK(llt.info() == Eigen::Success);
                const Eigen::MatrixXd dg = metric_dt(*fam, t, x);
                CHECK((dg - dg.transpose()).cwiseAbs().maxCoeff() == 0.0);
            }
        }
    }
}

TEST_CASE("metric_dt matches closed forms and the finite-difference oracle") {
    auto s = scalar1d();
    CHECK(metric_dt(*s, 0.3, pt1(1.0))(0, 0) == doctest::Approx(1.0).epsilon(1e-15));

    auto stat = static_plane();
    CHECK(metric_dt(*stat, 0.6, pt2(0.4, -0.2)).norm() == doctest::Approx(0.0));

    auto sph = shrink_sphere(0.5);
    const ChartPoint x = pt2(1.0, 0.0);
    const Eigen::MatrixXd analytic = metric_dt(*sph, 0.25, x);
    const Eigen::MatrixXd fd = fd_metric_dt(*sph, 0.25, x, 1e-4);
    CHECK((analytic - fd).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("metric_dt analytic vs finite-difference mode on all families") {
    std::mt19937 rng(71);
    std::uniform_real_distribution<double> ut(0.05, 0.95);
    for (const auto& fam : all_families()) {
        CAPTURE(fam->family_id());
        fam->time_derivative_mode = DerivativeMode::FiniteDifference;
        for (const auto& x : lattice_for(*fam)) {
            const double t = ut(rng);
            const Eigen::MatrixXd fd = metric_dt(*fam, t, x);
            fam->time_derivative_mode = DerivativeMode::Analytic;
            const Eigen::MatrixXd an = metric_dt(*fam, t, x);
            fam->time_derivative_mode = DerivativeMode::FiniteDifference;
            const double scale = std::max(1.0, an.cwiseAbs().maxCoeff());
            CHECK((fd - an).cwiseAbs().maxCoeff() / scale < 1e-6);
        }
    }
}

TEST_CASE("christoffel vanishes for spatially constant families") {
    auto s = scalar1d();
    CHECK(christoffel(*s, 0.4, pt1(2.0))[0](0, 0) == 0.0);
    auto ft = flat_torus();
    for (const auto& m : christoffel(*ft, 0.7, pt2(1.0, -1.0))) CHECK(m.norm() == 0.0);
}

TEST_CASE("christoffel matches the brute-force finite-difference oracle") {
    auto sph = shrink_sphere(0.5);
    std::mt19937 rng(12);
    std::uniform_real_distribution<double> u(-1.2, 1.2);
    std::uniform_real_distribution<double> ut(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const ChartPoint x = pt2(u(rng), u(rng));
        const double t = ut(rng);
        const auto got = christoffel(*sph, t, x);
        const auto want = fd_christoffel(*sph, t, x);
        for (int k = 0; k < 2; ++k) {
            CHECK((got[k] - want[k]).cwiseAbs().maxCoeff() < 1e-6);
        }
    }
    // a fixed point away from the chart origin
    const auto got = christoffel(*sph, 0.0, pt2(1.0, 0.0));
    const auto want = fd_christoffel(*sph, 0.0, pt2(1.0, 0.0));
    for (int k = 0; k < 2; ++k) CHECK((got[k] - want[k]).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("christoffel slices are exactly symmetric as stored") {
    auto sph = shrink_sphere(0.5);
    const auto gamma = christoffel(*sph, 0.3, pt2(0.7, -0.4));
    for (const auto& m : gamma) CHECK((m - m.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("christoffel in finite-difference spatial mode agrees with analytic") {
    auto sph = shrink_sphere(0.5);
    const ChartPoint x = pt2(0.6, 0.3);
    const auto analytic = christoffel(*sph, 0.2, x);
    sph->spatial_derivative_mode = DerivativeMode::FiniteDifference;
    const auto fd = christoffel(*sph, 0.2, x);
    for (int k = 0; k < 2; ++k) CHECK((analytic[k] - fd[k]).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("sharp raises indices") {
    auto flat = static_plane();
    const TangentVector v = sharp(*flat, 0.0, pt2(0.0, 0.0), pt2(1.0, 2.0));
    CHECK(v.components[0] == doctest::Approx(1.0));
    CHECK(v.components[1] == doctest::Approx(2.0));

    auto s = scalar1d();
    CHECK(sharp(*s, 1.0, pt1(0.0), pt1(3.0)).components[0] == doctest::Approx(1.5));

    // pairing identity <omega^#, z>_g = omega(z) on basis vectors
    auto sph = shrink_sphere(0.5);
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const ChartPoint x = pt2(0.3, 0.4);
    for (int trial = 0; trial < 10; ++trial) {
        const Eigen::VectorXd omega = pt2(u(rng), u(rng));
        const TangentVector v = sharp(*sph, 0.1, x, omega);
        const Eigen::MatrixXd g = metric_eval(*sph, 0.1, x);
        for (int i = 0; i < 2; ++i) {
            const Eigen::VectorXd z = Eigen::VectorXd::Unit(2, i);
            CHECK(std::abs(v.components.dot(g * z) - omega.dot(z)) < 1e-12);
        }
    }
}

TEST_CASE("dominating_metric closed forms") {
    auto stat = static_plane();
    CHECK(dominating_metric(*stat, 21)(pt2(0.3, 0.4)) == doctest::Approx(1.05).epsilon(1e-12));

    auto s = scalar1d();
    CHECK(dominating_metric(*s, 21)(pt1(0.7)) == doctest::Approx(2.1).epsilon(1e-12));

    auto sph = shrink_sphere(0.5);
    CHECK(dominating_metric(*sph, 21)(pt2(0.5, -0.5)) == doctest::Approx(1.05).epsilon(1e-12));
}

TEST_CASE("dominating_metric bounds the evolving metric on random triples") {
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_real_distribution<double> ut(0.0, 1.0);
    for (const auto& fam : all_families()) {
        CAPTURE(fam->family_id());
        const DominatingScale c = dominating_metric(*fam, 21);
        const int d = fam->dim();
        for (int trial = 0; trial < 250; ++trial) {
            ChartPoint x(d);
            Eigen::VectorXd v(d);
            for (int i = 0; i < d; ++i) {
                x[i] = 1.5 * u(rng);
                v[i] = u(rng);
            }
            const double t = ut(rng);
            const double lhs = v.dot(metric_eval(*fam, t, x) * v);
            const double rhs = c(x) * v.dot(metric_eval(*fam, 0.0, x) * v);
            CHECK(lhs <= rhs * (1.0 + 1e-12));
        }
    }
}

TEST_CASE("chart_distance closed forms and symmetry") {
    auto flat = static_plane();
    CHECK(chart_distance(*flat, 0.0, pt2(0.0, 0.0), pt2(3.0, 4.0)) == doctest::Approx(5.0));
    CHECK(chart_distance(*flat, 0.0, pt2(1.0, 1.0), pt2(1.0, 1.0)) == 0.0);

    auto s = scalar1d();
    CHECK(chart_distance(*s, 1.0, pt1(0.0), pt1(2.0)) ==
          doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-14));
    CHECK(chart_distance(*s, 1.0, pt1(2.0), pt1(0.0)) ==
          chart_distance(*s, 1.0, pt1(0.0), pt1(2.0)));
}

TEST_CASE("out-of-chart points are rejected") {
    auto sph = shrink_sphere(0.5);
    CHECK_THROWS_AS(metric_eval(*sph, 0.0, pt2(11.0, 0.0)), OutOfChartError);
    CHECK_THROWS_AS(chart_distance(*sph, 0.0, pt2(9.9, 0.0), pt2(10.5, 0.0)), OutOfChartError);
    CHECK_NOTHROW(metric_eval(*sph, 0.0, pt2(9.9, 0.0)));
}

TEST_CASE("registry rejects unknown families and bad parameters") {
    CHECK_THROWS_AS(make_family("moebius", {}), ConfigError);
    try {
        make_family("scalar1d", {{"a", 1.0}, {"zz", 2.0}});
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        // both the missing 'b' and the unknown 'zz' must be reported
        CHECK(e.violations().size() == 2);
    }
    CHECK_THROWS_AS(make_family("scalar1d", {{"a", 1.0}, {"b", -2.0}}), ConfigError);
    CHECK_THROWS_AS(make_family("shrink_sphere", {{"rate", 1.5}}), ConfigError);
    CHECK_NOTHROW(make_family("shrink_sphere", {{"rate", -0.5}}));
    CHECK(list_families().size() == 4);
}
