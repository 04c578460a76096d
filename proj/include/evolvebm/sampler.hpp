#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>

#include "evolvebm/framebundle.hpp"
#include "evolvebm/geometry.hpp"
#include "evolvebm/paths.hpp"
#include "evolvebm/rng.hpp"

namespace evolvebm {

// Reproducible noise source for one trajectory. The driving increments are
// sqrt(eps) * sqrt(h) * xi with xi a pure function of (seed, stream_id, step),
// so the scale-eps increments equal sqrt(eps) times the scale-1 increments
// exactly, and results do not depend on scheduling.
struct NoiseConfig {
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;
    std::size_t n_steps = 1000;
    double epsilon = 1.0;
    bool zero_noise = false;  // diagnostic: forces dW = 0 (pure drift)
};

enum class AbortReason { None, ChartExit, BlowUp };

// Low-level single-step integrator of the frame-bundle SDE (Stratonovich-Heun),
// shared by the samplers and the Monte Carlo estimators. Reuses its workspace,
// so one instance per trajectory loop avoids per-step allocation.
class GbmStepper {
  public:
    explicit GbmStepper(const MetricFamily& fam);

    // Advances (x, basis) over [t, t+h] with Brownian increment dw. Throws
    // OutOfChartError if a stage point leaves the chart.
    void step(double t, double h, Eigen::VectorXd& x, Eigen::MatrixXd& basis,
              const Eigen::VectorXd& dw);

  private:
    const MetricFamily* fam_;
    bool spatially_constant_;
    Eigen::MatrixXd m_, drift_, e_pred_, diff_;
    Eigen::VectorXd flow0_, flow1_, x_pred_;
};

struct SamplePath {
    Path path;
    std::optional<FramePath> frame_path;
    bool aborted = false;
    AbortReason abort_reason = AbortReason::None;
    double abort_time = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;
};

struct GbmOptions {
    bool keep_frames = true;
    int reorthonormalize_every = 0;
    double t_start = 0.0;  // process started at (t_start, u0.base)
    double horizon = 1.0;  // integrates over [t_start, t_start + horizon]
};

// g(t)-Brownian motion (eps-rescaled) via Stratonovich-Heun on the frame
// bundle SDE: diffusion through the horizontal fields, vertical drift
// -1/2 E (E^T d_t g E). Chart exits abort the trajectory (recorded, not fatal).
SamplePath sample_gbm(const MetricFamily& fam, const Frame& u0, const NoiseConfig& noise,
                      const GbmOptions& opts = {});

// Exact-law 1-D reference process sqrt(eps) W_psi(t) with psi(t) = int 1/g;
// psi by adaptive quadrature to 1e-12. Requires a d=1 family.
SamplePath sample_scalar_reference(const MetricFamily& fam, double x0, const NoiseConfig& noise);

using DriftFn = std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)>;
using DiffusionFn = std::function<Eigen::MatrixXd(double, const Eigen::VectorXd&)>;

enum class SdeScheme { Ito, Stratonovich };

// Euclidean time-inhomogeneous diffusion dX = b dt + sqrt(eps) sigma dW by
// Euler-Maruyama (Ito) or Heun (Stratonovich). b and sigma are the caller's
// responsibility to keep Lipschitz; no check is attempted.
SamplePath sample_euclidean(const DriftFn& b, const DiffusionFn& sigma, const Eigen::VectorXd& x0,
                            double epsilon, const NoiseConfig& noise,
                            SdeScheme scheme = SdeScheme::Ito);

// Smooth scalar test function with analytic chart derivatives.
struct TestFunction {
    std::function<double(const Eigen::VectorXd&)> value;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;
    std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> hessian;
};

struct GeneratorCheck {
    double empirical = 0.0;  // (E[f(X_{t0+h})] - f(x0)) / h
    double analytic = 0.0;   // (eps/2) * Laplace-Beltrami^{t0} f (x0)
    double std_error = 0.0;  // MC standard error of the empirical value
    std::size_t n_samples = 0;
    std::size_t aborted = 0;
};

// Short-time generator consistency check of sample_gbm against
// Delta_M^t f = g^{ij} (d_i d_j f - Gamma^k_ij d_k f).
GeneratorCheck generator_check(const MetricFamily& fam, const TestFunction& f,
                               const ChartPoint& x0, double t0, double epsilon, double h,
                               std::size_t n_samples, std::uint64_t seed = 0,
                               std::size_t sub_steps = 16, unsigned n_threads = 1);

// Analytic Laplace-Beltrami of f for the frozen metric g(t).
double laplace_beltrami(const MetricFamily& fam, const TestFunction& f, double t,
                        const ChartPoint& x);

}  // namespace evolvebm
