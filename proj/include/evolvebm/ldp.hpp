#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "evolvebm/geometry.hpp"
#include "evolvebm/paths.hpp"

namespace evolvebm {

// Monte Carlo tube (or exit) probability estimate at one noise scale.
struct MCEstimate {
    double epsilon = 0.0;
    std::size_t n_samples = 0;
    std::size_t hits = 0;
    std::size_t aborted = 0;
    double p_hat = 0.0;
    double std_error = 0.0;                  // of p_hat
    std::optional<double> log_scaled;        // eps * ln(p_hat); absent when hits == 0
    bool below_resolution = false;           // hits == 0
    std::vector<double> exit_time_quantiles; // of first tube exit, among misses
};

struct LadderReport {
    Path reference;
    double delta = 0.0;
    double action = 0.0;  // manifold action of the reference path
    std::vector<MCEstimate> estimates;
    std::optional<double> intercept;  // linear fit of log_scaled vs eps at eps=0
    std::optional<double> slope;
    std::optional<double> gap;        // intercept - (-action)
    double kendall_tau_gap = 0.0;     // |log_scaled + action| vs eps, fitted rungs
    std::size_t fitted_rungs = 0;
};

struct ContainmentProfile {
    ChartPoint x0;
    double smoothing_width = 0.0;
    std::vector<ChartPoint> lattice;
    std::vector<double> upsilon;      // containment function on the lattice
    double sup_hamiltonian = 0.0;     // sup over (t, lattice) of 1/2 |d Upsilon|^2_{g(t)}
    bool upsilon_zero_at_x0 = false;
    bool sublevel_radii_monotone = false;
    std::vector<double> sublevel_thresholds;
    std::vector<double> sublevel_radii;  // max |x - x0| with Upsilon <= c
};

struct ExitEstimate {
    double epsilon = 0.0;
    std::size_t n_samples = 0;
    std::size_t exits = 0;
    double p_hat = 0.0;
    double std_error = 0.0;
    std::optional<double> log_scaled;
    bool below_resolution = false;
};

struct ExitReport {
    double radius = 0.0;
    std::vector<ExitEstimate> estimates;
    bool trend_decreasing = false;          // last rung vs first rung within 2 joint s.e.
    std::vector<bool> pair_decreasing;      // adjacent-pair diagnostics
};

// Fraction of sample_gbm trajectories staying within chart_distance delta of
// gamma at every grid point; aborted trajectories count as misses. The
// sampling grid is gamma's grid and trajectory i uses RNG stream seed+i, so
// comparisons at equal seeds are coupled.
MCEstimate tube_probability(const MetricFamily& fam, const Path& gamma, double delta,
                            double epsilon, std::size_t n_samples, std::uint64_t seed,
                            unsigned n_threads = 1);

// Runs tube_probability per epsilon (decreasing ladder) and linearly fits
// eps * ln p_hat against eps over the resolvable rungs.
LadderReport ladder_report(const MetricFamily& fam, const Path& gamma, double delta,
                           const std::vector<double>& eps_list, std::size_t n_samples,
                           std::uint64_t seed, unsigned n_threads = 1);

struct LatticeSpec {
    double lo = -2.0;
    double hi = 2.0;
    int points_per_axis = 41;
};

// Good-containment diagnostics: Upsilon = log(1 + r~^2) with r~ a smoothed
// dominating-metric radius; evaluates the Hamiltonian 1/2 |d Upsilon|^2_{g(t)}
// over a (t, lattice) grid.
ContainmentProfile containment_profile(const MetricFamily& fam, const ChartPoint& x0,
                                       const LatticeSpec& lattice, double smoothing_width,
                                       int time_samples = 21);

// P(X^eps exits the chart_distance-at-t=0 ball of the given radius before t=1)
// for each epsilon, with eps * ln scaling.
ExitReport exit_statistics(const MetricFamily& fam, const ChartPoint& x0, double radius,
                           const std::vector<double>& eps_list, std::size_t n_samples,
                           std::uint64_t seed, std::size_t n_steps = 2000,
                           unsigned n_threads = 1);

}  // namespace evolvebm
