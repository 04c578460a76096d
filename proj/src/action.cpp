#include "evolvebm/action.hpp"

#include <cmath>
#include <sstream>

#include "evolvebm/numerics.hpp"

namespace evolvebm {

ActionValue action_manifold(const MetricFamily& fam, const Path& gamma) {
    gamma.validate();
    const std::size_t n = gamma.segments();
    const double h = gamma.step();
    KahanSum sum;
    for (std::size_t k = 0; k < n; ++k) {
        const Eigen::VectorXd mid = 0.5 * (gamma.points[k] + gamma.points[k + 1]);
        const double tm = (gamma.time(k) + gamma.time(k + 1)) * 0.5;
        const Eigen::MatrixXd g = metric_eval(fam, tm, mid);
        const Eigen::VectorXd v = (gamma.points[k + 1] - gamma.points[k]) / h;
        sum.add(0.5 * v.dot(g * v) * h);
    }
    return ActionValue{sum.value(), false, "midpoint", n, ""};
}

// Quadrature nodes are the segment midpoints, matching action_manifold, so
// that with b = 0, sigma = I the two functionals agree to rounding.
ActionValue action_fw(const DriftFn& b, const DiffusionFn& sigma, const Path& gamma) {
    gamma.validate();
    const std::size_t n = gamma.segments();
    const double h = gamma.step();

    KahanSum sum;
    for (std::size_t k = 0; k < n; ++k) {
        const double tm = (gamma.time(k) + gamma.time(k + 1)) * 0.5;
        const Eigen::VectorXd mid = 0.5 * (gamma.points[k] + gamma.points[k + 1]);
        const Eigen::VectorXd gdot = (gamma.points[k + 1] - gamma.points[k]) / h;
        const Eigen::MatrixXd sig = sigma(tm, mid);
        Eigen::FullPivLU<Eigen::MatrixXd> lu(sig);
        if (!lu.isInvertible()) {
            std::ostringstream os;
            os << "singular diffusion at node " << k << " (t = " << tm << ")";
            return ActionValue{0.0, true, "midpoint", n, os.str()};
        }
        const Eigen::VectorXd phidot = lu.solve(gdot - b(tm, mid));
        sum.add(0.5 * phidot.squaredNorm() * h);
    }
    return ActionValue{sum.value(), false, "midpoint", n, ""};
}

ActionValue control_action(const ControlPath& w) {
    const std::size_t n = w.segments();
    if (n == 0) return ActionValue{0.0, false, "midpoint", 0, ""};
    const double h = w.step();
    KahanSum sum;
    for (std::size_t k = 0; k < n; ++k) {
        sum.add(0.5 * (w.values[k + 1] - w.values[k]).squaredNorm() / h);
    }
    return ActionValue{sum.value(), false, "midpoint", n, ""};
}

namespace {

// Discrete action and its gradient with respect to the interior nodes.
// S = sum_k 1/(2h) d_k^T G(t_mid, m_k) d_k with d_k = x_{k+1} - x_k,
// m_k = (x_k + x_{k+1})/2. The dG/dx term enters through the midpoints.
struct DiscreteAction {
    const MetricFamily& fam;
    double h;

    double value(const std::vector<Eigen::VectorXd>& x) const {
        KahanSum sum;
        for (std::size_t k = 0; k + 1 < x.size(); ++k) {
            const Eigen::VectorXd d = x[k + 1] - x[k];
            const Eigen::VectorXd m = 0.5 * (x[k] + x[k + 1]);
            const double tm = (static_cast<double>(k) + 0.5) * h;
            sum.add(0.5 * d.dot(metric_eval(fam, tm, m) * d) / h);
        }
        return sum.value();
    }

    // grad[j-1] corresponds to interior node j.
    void gradient(const std::vector<Eigen::VectorXd>& x,
                  std::vector<Eigen::VectorXd>& grad) const {
        const std::size_t n = x.size() - 1;
        const int dim = static_cast<int>(x[0].size());
        std::vector<Eigen::VectorXd> flow(n);   // G(m_k) d_k / h
        std::vector<Eigen::VectorXd> quad(n);   // (T_k)_l = d_k^T dG_l(m_k) d_k
        for (std::size_t k = 0; k < n; ++k) {
            const Eigen::VectorXd d = x[k + 1] - x[k];
            const Eigen::VectorXd m = 0.5 * (x[k] + x[k + 1]);
            const double tm = (static_cast<double>(k) + 0.5) * h;
            flow[k] = metric_eval(fam, tm, m) * d / h;
            const auto dg = metric_dx(fam, tm, m);
            Eigen::VectorXd t(dim);
            for (int l = 0; l < dim; ++l) t[l] = d.dot(dg[static_cast<std::size_t>(l)] * d);
            quad[k] = t;
        }
        grad.resize(n - 1);
        for (std::size_t j = 1; j < n; ++j) {
            grad[j - 1] = flow[j - 1] - flow[j] + 0.25 / h * (quad[j - 1] + quad[j]);
        }
    }
};

double sup_norm(const std::vector<Eigen::VectorXd>& g) {
    double m = 0.0;
    for (const auto& v : g) m = std::max(m, v.cwiseAbs().maxCoeff());
    return m;
}

}  // namespace

MinimizerReport minimize_action(const MetricFamily& fam, const ChartPoint& x0,
                                const ChartPoint& x1, std::size_t n,
                                const MinimizeOptions& opts) {
    require_in_chart(fam, x0, "minimize_action");
    require_in_chart(fam, x1, "minimize_action");
    if (n < 2) throw Error("minimize_action: need at least 2 segments");
    const double h = 1.0 / static_cast<double>(n);

    std::vector<Eigen::VectorXd> x(n + 1);
    if (opts.initial) {
        const Path& init = *opts.initial;
        if (init.segments() != n) throw Error("minimize_action: initial path grid mismatch");
        if ((init.points.front() - x0).norm() > 1e-12 ||
            (init.points.back() - x1).norm() > 1e-12) {
            throw Error("minimize_action: initial path does not match the endpoints");
        }
        x = init.points;
    } else {
        const Eigen::VectorXd span = x1 - x0;
        for (std::size_t k = 0; k <= n; ++k) {
            x[k] = x0 + (static_cast<double>(k) * h) * span;
        }
    }

    DiscreteAction problem{fam, h};
    auto safe_value = [&](const std::vector<Eigen::VectorXd>& pts, double& out) {
        try {
            out = problem.value(pts);
            return std::isfinite(out);
        } catch (const OutOfChartError&) {
            return false;  // step rejected by the line search
        }
    };

    double f = 0.0;
    if (!safe_value(x, f)) throw OutOfChartError("minimize_action: initial path leaves the chart");
    std::vector<Eigen::VectorXd> grad, prev_grad, prev_interior;
    problem.gradient(x, grad);
    double gsup = sup_norm(grad);

    const double c1 = 1e-4;
    double step = h;  // replaced by the Barzilai-Borwein step after iteration 1
    std::size_t iter = 0;
    std::vector<Eigen::VectorXd> trial = x;

    while (gsup > opts.gradient_tolerance && iter < opts.max_iterations) {
        ++iter;
        double gg = 0.0;
        for (const auto& v : grad) gg += v.squaredNorm();

        if (!prev_grad.empty()) {
            // BB1 step (s,s)/(s,y), safeguarded.
            double ss = 0.0, sy = 0.0;
            for (std::size_t j = 0; j < grad.size(); ++j) {
                const Eigen::VectorXd s = x[j + 1] - prev_interior[j];
                const Eigen::VectorXd y = grad[j] - prev_grad[j];
                ss += s.squaredNorm();
                sy += s.dot(y);
            }
            step = (sy > 1e-300) ? std::clamp(ss / sy, 1e-12, 1e3) : h;
        }
        prev_interior.resize(grad.size());
        for (std::size_t j = 0; j < grad.size(); ++j) prev_interior[j] = x[j + 1];
        prev_grad = grad;

        bool accepted = false;
        double alpha = step;
        for (int bt = 0; bt < 60; ++bt) {
            for (std::size_t j = 0; j < grad.size(); ++j) trial[j + 1] = x[j + 1] - alpha * grad[j];
            double ftrial = 0.0;
            if (safe_value(trial, ftrial) && ftrial <= f - c1 * alpha * gg) {
                x.swap(trial);
                f = ftrial;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) break;  // step underflow: gradient is at the rounding floor
        problem.gradient(x, grad);
        gsup = sup_norm(grad);
    }

    MinimizerReport report;
    report.path.points = std::move(x);
    report.action = action_manifold(fam, report.path);
    report.iterations = iter;
    report.grad_sup_norm = gsup;
    report.converged = gsup <= opts.gradient_tolerance;
    return report;
}

}  // namespace evolvebm
