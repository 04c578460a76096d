#include "evolvebm/ldp.hpp"

#include <algorithm>
#include <cmath>

#include "evolvebm/action.hpp"
#include "evolvebm/framebundle.hpp"
#include "evolvebm/numerics.hpp"
#include "evolvebm/parallel.hpp"
#include "evolvebm/sampler.hpp"

namespace evolvebm {

namespace {

constexpr double kBlowUpLimit = 1e9;

struct TrajectoryOutcome {
    bool hit = false;
    bool aborted = false;
    double exit_time = 0.0;  // first tube exit (or abort) among misses
};

std::vector<double> quantiles(std::vector<double>& v, const std::vector<double>& qs) {
    std::vector<double> out;
    if (v.empty()) return out;
    std::sort(v.begin(), v.end());
    out.reserve(qs.size());
    for (double q : qs) {
        const double pos = q * static_cast<double>(v.size() - 1);
        const std::size_t i = static_cast<std::size_t>(pos);
        const double frac = pos - static_cast<double>(i);
        const double val =
            (i + 1 < v.size()) ? (1.0 - frac) * v[i] + frac * v[i + 1] : v.back();
        out.push_back(val);
    }
    return out;
}

}  // namespace

MCEstimate tube_probability(const MetricFamily& fam, const Path& gamma, double delta,
                            double epsilon, std::size_t n_samples, std::uint64_t seed,
                            unsigned n_threads) {
    gamma.validate();
    if (!(delta > 0.0)) throw Error("tube_probability: delta must be > 0");
    for (const auto& p : gamma.points) require_in_chart(fam, p, "tube_probability");
    const std::size_t n = gamma.segments();
    const int d = fam.dim();
    const double h = gamma.step();
    const double sqrt_h = std::sqrt(h);
    const double sqrt_eps = std::sqrt(epsilon);
    const Frame u0 = default_frame(fam, 0.0, gamma.points.front());

    std::vector<TrajectoryOutcome> outcome(n_samples);
    parallel_chunks(n_samples, kDefaultChunk, n_threads, [&](std::size_t lo, std::size_t hi) {
        GbmStepper stepper(fam);
        Eigen::VectorXd dw(d);
        for (std::size_t i = lo; i < hi; ++i) {
            NormalStream stream(seed, i);
            Eigen::VectorXd x = gamma.points.front();
            Eigen::MatrixXd e = u0.basis;
            TrajectoryOutcome& res = outcome[i];
            res.hit = true;
            for (std::size_t k = 0; k < n; ++k) {
                const double t = static_cast<double>(k) * h;
                for (int c = 0; c < d; ++c) {
                    dw[c] = sqrt_eps * (sqrt_h * stream.normal(k * static_cast<std::size_t>(d) +
                                                               static_cast<std::size_t>(c)));
                }
                bool inside_chart = true;
                try {
                    stepper.step(t, h, x, e, dw);
                } catch (const OutOfChartError&) {
                    inside_chart = false;
                }
                inside_chart = inside_chart && x.allFinite() && e.allFinite() &&
                               x.norm() <= kBlowUpLimit && fam.chart_domain().contains(x);
                const double t1 = static_cast<double>(k + 1) * h;
                if (!inside_chart) {
                    res.hit = false;
                    res.aborted = true;
                    res.exit_time = t1;
                    break;
                }
                if (chart_distance(fam, t1, x, gamma.points[k + 1]) > delta) {
                    res.hit = false;
                    res.exit_time = t1;
                    break;  // a miss is final; the remainder of the path is irrelevant
                }
            }
        }
    });

    MCEstimate est;
    est.epsilon = epsilon;
    est.n_samples = n_samples;
    std::vector<double> exit_times;
    for (const auto& res : outcome) {
        if (res.hit) ++est.hits;
        else exit_times.push_back(res.exit_time);
        if (res.aborted) ++est.aborted;
    }
    est.p_hat = n_samples ? static_cast<double>(est.hits) / static_cast<double>(n_samples) : 0.0;
    est.std_error =
        n_samples ? std::sqrt(est.p_hat * (1.0 - est.p_hat) / static_cast<double>(n_samples))
                  : 0.0;
    if (est.hits > 0) {
        est.log_scaled = epsilon * std::log(est.p_hat);
    } else {
        est.below_resolution = true;
    }
    est.exit_time_quantiles = quantiles(exit_times, {0.1, 0.25, 0.5, 0.75, 0.9});
    return est;
}

LadderReport ladder_report(const MetricFamily& fam, const Path& gamma, double delta,
                           const std::vector<double>& eps_list, std::size_t n_samples,
                           std::uint64_t seed, unsigned n_threads) {
    if (eps_list.empty()) throw Error("ladder_report: empty epsilon ladder");
    for (std::size_t i = 0; i + 1 < eps_list.size(); ++i) {
        if (!(eps_list[i] > eps_list[i + 1])) {
            throw Error("ladder_report: epsilon ladder must be strictly decreasing");
        }
    }
    LadderReport report;
    report.reference = gamma;
    report.delta = delta;
    report.action = action_manifold(fam, gamma).value;
    for (double eps : eps_list) {
        report.estimates.push_back(
            tube_probability(fam, gamma, delta, eps, n_samples, seed, n_threads));
    }

    // least-squares line of eps*ln(p_hat) against eps over resolvable rungs
    std::vector<double> xs, ys, gaps;
    for (const auto& est : report.estimates) {
        if (est.log_scaled) {
            xs.push_back(est.epsilon);
            ys.push_back(*est.log_scaled);
            gaps.push_back(std::abs(*est.log_scaled + report.action));
        }
    }
    report.fitted_rungs = xs.size();
    if (xs.size() >= 2) {
        double mx = 0.0, my = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            mx += xs[i];
            my += ys[i];
        }
        mx /= static_cast<double>(xs.size());
        my /= static_cast<double>(xs.size());
        double sxx = 0.0, sxy = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            sxx += (xs[i] - mx) * (xs[i] - mx);
            sxy += (xs[i] - mx) * (ys[i] - my);
        }
        const double slope = sxy / sxx;
        report.slope = slope;
        report.intercept = my - slope * mx;
        report.gap = *report.intercept + report.action;
        report.kendall_tau_gap = kendall_tau(gaps, xs);
    }
    return report;
}

ContainmentProfile containment_profile(const MetricFamily& fam, const ChartPoint& x0,
                                       const LatticeSpec& lattice, double smoothing_width,
                                       int time_samples) {
    require_in_chart(fam, x0, "containment_profile");
    const int d = fam.dim();
    const double w = std::max(0.0, smoothing_width);
    // Radius proxy in the dominating metric c(x) g(0,x); the sup over the time
    // grid is used directly (no safety factor: this is a proxy, not a bound).
    DominatingScale scale(fam, time_samples, 1.0);

    auto radius_sq = [&](const ChartPoint& x) {
        const ChartPoint mid = 0.5 * (x + x0);
        const Eigen::VectorXd dvec = x - x0;
        return scale(mid) * dvec.dot(fam.metric(0.0, mid) * dvec);
    };
    // r~ = sqrt(q + w^2) - w: twice differentiable, vanishes exactly at x0.
    auto upsilon = [&](const ChartPoint& x) {
        const double r = std::sqrt(radius_sq(x) + w * w) - w;
        return std::log1p(r * r);
    };

    ContainmentProfile profile;
    profile.x0 = x0;
    profile.smoothing_width = w;
    profile.upsilon_zero_at_x0 = (upsilon(x0) == 0.0);

    const int per_axis = std::max(2, lattice.points_per_axis);
    std::vector<ChartPoint> points;
    if (d == 1) {
        for (int i = 0; i < per_axis; ++i) {
            ChartPoint p(1);
            p[0] = lattice.lo + (lattice.hi - lattice.lo) * i / (per_axis - 1);
            points.push_back(p);
        }
    } else {
        for (int i = 0; i < per_axis; ++i) {
            for (int j = 0; j < per_axis; ++j) {
                ChartPoint p(2);
                p[0] = lattice.lo + (lattice.hi - lattice.lo) * i / (per_axis - 1);
                p[1] = lattice.lo + (lattice.hi - lattice.lo) * j / (per_axis - 1);
                points.push_back(p);
            }
        }
    }

    const double grad_h = 1e-5;
    double sup_h = 0.0;
    for (const auto& p : points) {
        if (!fam.chart_domain().contains(p)) continue;  // lattice clipped to the chart
        bool stencil_ok = true;
        Eigen::VectorXd grad(d);
        for (int k = 0; k < d && stencil_ok; ++k) {
            ChartPoint pp = p, pm = p;
            pp[k] += grad_h;
            pm[k] -= grad_h;
            if (!fam.chart_domain().contains(pp) || !fam.chart_domain().contains(pm)) {
                stencil_ok = false;
                break;
            }
            grad[k] = (upsilon(pp) - upsilon(pm)) / (2.0 * grad_h);
        }
        if (!stencil_ok) continue;
        profile.lattice.push_back(p);
        profile.upsilon.push_back(upsilon(p));
        for (int i = 0; i < time_samples; ++i) {
            const double t = static_cast<double>(i) / static_cast<double>(time_samples - 1);
            const Eigen::MatrixXd g = fam.metric(t, p);
            Eigen::LLT<Eigen::MatrixXd> llt(g);
            if (llt.info() != Eigen::Success) {
                throw SingularMetricError("containment_profile: metric not positive definite");
            }
            sup_h = std::max(sup_h, 0.5 * grad.dot(llt.solve(grad)));
        }
    }
    profile.sup_hamiltonian = sup_h;

    // Sublevel radii must grow with the threshold (compact sublevel sets).
    double umax = 0.0;
    for (double u : profile.upsilon) umax = std::max(umax, u);
    const int levels = 8;
    double prev_radius = 0.0;
    profile.sublevel_radii_monotone = true;
    for (int l = 1; l <= levels; ++l) {
        const double c = umax * static_cast<double>(l) / static_cast<double>(levels);
        double radius = 0.0;
        for (std::size_t i = 0; i < profile.lattice.size(); ++i) {
            if (profile.upsilon[i] <= c) {
                radius = std::max(radius, (profile.lattice[i] - x0).cwiseAbs().maxCoeff());
            }
        }
        profile.sublevel_thresholds.push_back(c);
        profile.sublevel_radii.push_back(radius);
        if (radius < prev_radius) profile.sublevel_radii_monotone = false;
        prev_radius = radius;
    }
    return profile;
}

ExitReport exit_statistics(const MetricFamily& fam, const ChartPoint& x0, double radius,
                           const std::vector<double>& eps_list, std::size_t n_samples,
                           std::uint64_t seed, std::size_t n_steps, unsigned n_threads) {
    require_in_chart(fam, x0, "exit_statistics");
    if (!(radius > 0.0)) throw Error("exit_statistics: radius must be > 0");
    const int d = fam.dim();
    const double h = 1.0 / static_cast<double>(n_steps);
    const double sqrt_h = std::sqrt(h);
    const Frame u0 = default_frame(fam, 0.0, x0);

    ExitReport report;
    report.radius = radius;
    for (double eps : eps_list) {
        const double sqrt_eps = std::sqrt(eps);
        std::vector<std::uint8_t> exited(n_samples, 0);
        parallel_chunks(n_samples, kDefaultChunk, n_threads, [&](std::size_t lo, std::size_t hi) {
            GbmStepper stepper(fam);
            Eigen::VectorXd dw(d);
            for (std::size_t i = lo; i < hi; ++i) {
                NormalStream stream(seed, i);
                Eigen::VectorXd x = x0;
                Eigen::MatrixXd e = u0.basis;
                for (std::size_t k = 0; k < n_steps; ++k) {
                    const double t = static_cast<double>(k) * h;
                    for (int c = 0; c < d; ++c) {
                        dw[c] =
                            sqrt_eps * (sqrt_h * stream.normal(k * static_cast<std::size_t>(d) +
                                                               static_cast<std::size_t>(c)));
                    }
                    bool ok = true;
                    try {
                        stepper.step(t, h, x, e, dw);
                    } catch (const OutOfChartError&) {
                        ok = false;
                    }
                    ok = ok && x.allFinite() && e.allFinite() && x.norm() <= kBlowUpLimit &&
                         fam.chart_domain().contains(x);
                    // leaving the chart certainly means leaving the ball
                    if (!ok || chart_distance(fam, 0.0, x0, x) > radius) {
                        exited[i] = 1;
                        break;
                    }
                }
            }
        });
        ExitEstimate est;
        est.epsilon = eps;
        est.n_samples = n_samples;
        for (auto f : exited) est.exits += f;
        est.p_hat =
            n_samples ? static_cast<double>(est.exits) / static_cast<double>(n_samples) : 0.0;
        est.std_error =
            n_samples ? std::sqrt(est.p_hat * (1.0 - est.p_hat) / static_cast<double>(n_samples))
                      : 0.0;
        if (est.exits > 0) est.log_scaled = eps * std::log(est.p_hat);
        else est.below_resolution = true;
        report.estimates.push_back(est);
    }

    // Scaled log-probabilities should drift down along the ladder; adjacent
    // pairs can blip by prefactor effects, so the headline check is
    // first-vs-last with 2 joint standard errors of slack.
    auto v_se = [](const ExitEstimate& e) {
        return e.epsilon * e.std_error / std::max(e.p_hat, 1e-300);
    };
    const ExitEstimate* first = nullptr;
    const ExitEstimate* last = nullptr;
    for (auto& est : report.estimates) {
        if (!est.log_scaled) continue;
        if (!first) first = &est;
        last = &est;
    }
    for (std::size_t i = 0; i + 1 < report.estimates.size(); ++i) {
        const auto& a = report.estimates[i];
        const auto& b = report.estimates[i + 1];
        if (a.log_scaled && b.log_scaled) {
            const double slack = 2.0 * std::hypot(v_se(a), v_se(b));
            report.pair_decreasing.push_back(*b.log_scaled <= *a.log_scaled + slack);
        } else {
            report.pair_decreasing.push_back(false);
        }
    }
    if (first && last && first != last) {
        const double slack = 2.0 * std::hypot(v_se(*first), v_se(*last));
        report.trend_decreasing = *last->log_scaled <= *first->log_scaled + slack;
    }
    return report;
}

}  // namespace evolvebm
