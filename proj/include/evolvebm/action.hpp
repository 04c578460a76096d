#pragma once

#include <optional>
#include <string>

#include "evolvebm/geometry.hpp"
#include "evolvebm/paths.hpp"
#include "evolvebm/sampler.hpp"

namespace evolvebm {

// Nonnegative action value. Infinity is an explicit marker (never a sentinel
// float) and is set when the functional's domain condition fails.
struct ActionValue {
    double value = 0.0;
    bool infinite = false;
    std::string quadrature;  // rule id
    std::size_t grid = 0;
    std::string diagnostic;  // reason when infinite
};

// Schilder-type manifold action 1/2 int |gamma'(t)|^2_{g(t)} dt,
// midpoint-rule with per-segment velocities.
ActionValue action_manifold(const MetricFamily& fam, const Path& gamma);

// Freidlin-Wentzell action for dX = b dt + sigma dW with invertible sigma:
// reconstructs phi'(t_k) = sigma^{-1}(gamma'_k - b) at the nodes and applies
// the trapezoidal rule; infinite with a diagnostic if sigma is singular at a node.
ActionValue action_fw(const DriftFn& b, const DiffusionFn& sigma, const Path& gamma);

// 1/2 int |w'|^2 dt for a control path (midpoint velocities).
ActionValue control_action(const ControlPath& w);

struct MinimizerReport {
    Path path;
    ActionValue action;
    std::size_t iterations = 0;
    double grad_sup_norm = 0.0;
    bool converged = false;
};

struct MinimizeOptions {
    double gradient_tolerance = 1e-8;
    std::size_t max_iterations = 100000;
    std::optional<Path> initial;  // straight chart segment when absent
};

// Fixed-endpoint minimization of the discrete manifold action over interior
// nodes: gradient descent with Barzilai-Borwein trial steps and Armijo
// backtracking; trial steps leaving the chart are rejected.
MinimizerReport minimize_action(const MetricFamily& fam, const ChartPoint& x0,
                                const ChartPoint& x1, std::size_t n,
                                const MinimizeOptions& opts = {});

}  // namespace evolvebm
