#pragma once

#include <Eigen/Dense>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "evolvebm/errors.hpp"

namespace evolvebm {

using ChartPoint = Eigen::VectorXd;

struct TangentVector {
    ChartPoint base;
    Eigen::VectorXd components;
};

// Where the single global chart of a family is valid.
struct ChartDomain {
    enum class Kind { Unbounded, Ball };
    Kind kind = Kind::Unbounded;
    double radius = 0.0;  // Ball only

    bool contains(const ChartPoint& x) const {
        return kind == Kind::Unbounded || x.norm() < radius;
    }
    std::string describe() const;
};

enum class DerivativeMode { Analytic, FiniteDifference };

// A registered time-dependent metric family g(t,x) on one coordinate chart.
// Evaluation clamps t to [0,1] (the family is extended constantly outside).
// Concrete families implement the analytic metric and its derivatives; the
// finite-difference mode overrides the derivative kind with central stencils.
class MetricFamily {
  public:
    virtual ~MetricFamily() = default;

    virtual const std::string& family_id() const = 0;
    virtual int dim() const = 0;
    virtual const std::map<std::string, double>& params() const = 0;
    virtual const ChartDomain& chart_domain() const = 0;

    DerivativeMode time_derivative_mode = DerivativeMode::Analytic;
    DerivativeMode spatial_derivative_mode = DerivativeMode::Analytic;

    // Raw evaluations at clamped time, no domain checks. x must have size dim().
    virtual Eigen::MatrixXd metric(double t, const ChartPoint& x) const = 0;
    virtual Eigen::MatrixXd metric_time_derivative(double t, const ChartPoint& x) const = 0;
    // out[k](i,j) = d g_ij / d x_k
    virtual std::vector<Eigen::MatrixXd> metric_spatial_derivative(double t,
                                                                   const ChartPoint& x) const = 0;
    // True when g does not depend on x (all Christoffel symbols vanish);
    // lets the integrators skip the connection terms.
    virtual bool spatially_constant() const { return false; }
};

// Finite-difference step sizes (central differences).
inline constexpr double kTimeStep = 1e-4;
inline constexpr double kSpaceStep = 1e-4;

double clamp_time(double t);
void require_in_chart(const MetricFamily& fam, const ChartPoint& x, const char* where);

// g(t,x) as a symmetric positive definite matrix. OutOfChart if x is not in
// the chart domain.
Eigen::MatrixXd metric_eval(const MetricFamily& fam, double t, const ChartPoint& x);

// Time derivative of the metric, honoring the family's derivative mode.
Eigen::MatrixXd metric_dt(const MetricFamily& fam, double t, const ChartPoint& x);

// Spatial derivatives d g_ij / d x_k, honoring the family's derivative mode.
std::vector<Eigen::MatrixXd> metric_dx(const MetricFamily& fam, double t, const ChartPoint& x);

// Christoffel symbols of the Levi-Civita connection of the frozen metric g(t):
// result[k](i,j) = Gamma^k_ij, each slice exactly symmetric.
std::vector<Eigen::MatrixXd> christoffel(const MetricFamily& fam, double t, const ChartPoint& x);

// Gamma(t,x)(v,z)^k = Gamma^k_ij v^i z^j applied to matrix columns; helper for
// transport and the frame-bundle fields.
Eigen::MatrixXd christoffel_apply(const std::vector<Eigen::MatrixXd>& gamma,
                                  const Eigen::VectorXd& v, const Eigen::MatrixXd& cols);

// Raise an index: v = G(t,x)^{-1} omega.
TangentVector sharp(const MetricFamily& fam, double t, const ChartPoint& x,
                    const Eigen::VectorXd& omega);

// Conformal scaling field c(x) >= 1 making c(x) g(0,x) dominate g(t,x) over a
// uniform time grid (largest generalized eigenvalue sweep times a safety factor).
class DominatingScale {
  public:
    DominatingScale(const MetricFamily& fam, int time_samples, double safety = 1.05);
    double operator()(const ChartPoint& x) const;
    int time_samples() const { return time_samples_; }
    double safety() const { return safety_; }

  private:
    const MetricFamily* fam_;
    int time_samples_;
    double safety_;
};

DominatingScale dominating_metric(const MetricFamily& fam, int time_samples);

// Midpoint-frozen-metric surrogate for the Riemannian distance d_t; accurate
// to O(|x-y|^2) for nearby points.
double chart_distance(const MetricFamily& fam, double t, const ChartPoint& x,
                      const ChartPoint& y);

// --- registry -------------------------------------------------------------

struct FamilyParamSpec {
    std::string name;
    bool required = true;
    double default_value = 0.0;
    std::string description;
};

struct FamilyDescriptor {
    std::string id;
    int dim;
    std::string description;
    std::vector<FamilyParamSpec> params;
};

const std::vector<FamilyDescriptor>& list_families();

// Instantiates a built-in family; ConfigError on unknown id, unknown/missing
// parameters, or parameter values that break positive definiteness on [0,1].
std::unique_ptr<MetricFamily> make_family(const std::string& id,
                                          const std::map<std::string, double>& params);

}  // namespace evolvebm
