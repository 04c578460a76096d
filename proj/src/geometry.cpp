#include "evolvebm/geometry.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <sstream>

namespace evolvebm {

std::string ChartDomain::describe() const {
    if (kind == Kind::Unbounded) return "unbounded";
    std::ostringstream os;
    os << "ball |x| < " << radius;
    return os.str();
}

double clamp_time(double t) { return std::clamp(t, 0.0, 1.0); }

void require_in_chart(const MetricFamily& fam, const ChartPoint& x, const char* where) {
    if (x.size() != fam.dim()) {
        std::ostringstream os;
        os << where << ": point has dimension " << x.size() << ", family " << fam.family_id()
           << " expects " << fam.dim();
        throw Error(os.str());
    }
    if (!fam.chart_domain().contains(x)) {
        std::ostringstream os;
        os << where << ": point (";
        for (int i = 0; i < x.size(); ++i) os << (i ? "," : "") << x[i];
        os << ") outside chart domain (" << fam.chart_domain().describe() << ") of "
           << fam.family_id();
        throw OutOfChartError(os.str());
    }
}

// --- built-in families ------------------------------------------------------

namespace {

class FamilyBase : public MetricFamily {
  public:
    FamilyBase(std::string id, int dim, std::map<std::string, double> params, ChartDomain domain)
        : id_(std::move(id)), dim_(dim), params_(std::move(params)), domain_(domain) {}

    const std::string& family_id() const override { return id_; }
    int dim() const override { return dim_; }
    const std::map<std::string, double>& params() const override { return params_; }
    const ChartDomain& chart_domain() const override { return domain_; }

  protected:
    double param(const std::string& k) const { return params_.at(k); }

  private:
    std::string id_;
    int dim_;
    std::map<std::string, double> params_;
    ChartDomain domain_;
};

// g(t) = a + b t on R.
class Scalar1D final : public FamilyBase {
  public:
    explicit Scalar1D(std::map<std::string, double> p)
        : FamilyBase("scalar1d", 1, std::move(p), {}) {}

    Eigen::MatrixXd metric(double t, const ChartPoint&) const override {
        Eigen::MatrixXd g(1, 1);
        g(0, 0) = param("a") + param("b") * t;
        return g;
    }
    Eigen::MatrixXd metric_time_derivative(double, const ChartPoint&) const override {
        Eigen::MatrixXd g(1, 1);
        g(0, 0) = param("b");
        return g;
    }
    std::vector<Eigen::MatrixXd> metric_spatial_derivative(double, const ChartPoint&) const override {
        return {Eigen::MatrixXd::Zero(1, 1)};
    }
    bool spatially_constant() const override { return true; }
};

// g(t) = e^{2 kappa t} delta on R^2.
class ConformalPlane final : public FamilyBase {
  public:
    explicit ConformalPlane(std::map<std::string, double> p)
        : FamilyBase("conformal_plane", 2, std::move(p), {}) {}

    Eigen::MatrixXd metric(double t, const ChartPoint&) const override {
        return std::exp(2.0 * param("kappa") * t) * Eigen::MatrixXd::Identity(2, 2);
    }
    Eigen::MatrixXd metric_time_derivative(double t, const ChartPoint&) const override {
        const double k = param("kappa");
        return 2.0 * k * std::exp(2.0 * k * t) * Eigen::MatrixXd::Identity(2, 2);
    }
    std::vector<Eigen::MatrixXd> metric_spatial_derivative(double, const ChartPoint&) const override {
        return {Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Zero(2, 2)};
    }
    bool spatially_constant() const override { return true; }
};

// (1 - rate t) times the round unit-sphere metric 4/(1+|x|^2)^2 delta in the
// stereographic chart; chart valid on |x| < rmax.
class ShrinkSphere final : public FamilyBase {
  public:
    explicit ShrinkSphere(const std::map<std::string, double>& p)
        : FamilyBase("shrink_sphere", 2, p, ChartDomain{ChartDomain::Kind::Ball, p.at("rmax")}) {}

    static double round_factor(const ChartPoint& x) {
        const double s = 1.0 + x.squaredNorm();
        return 4.0 / (s * s);
    }

    Eigen::MatrixXd metric(double t, const ChartPoint& x) const override {
        return (1.0 - param("rate") * t) * round_factor(x) * Eigen::MatrixXd::Identity(2, 2);
    }
    Eigen::MatrixXd metric_time_derivative(double, const ChartPoint& x) const override {
        return -param("rate") * round_factor(x) * Eigen::MatrixXd::Identity(2, 2);
    }
    std::vector<Eigen::MatrixXd> metric_spatial_derivative(double t, const ChartPoint& x) const override {
        const double s = 1.0 + x.squaredNorm();
        const double lam = 1.0 - param("rate") * t;
        std::vector<Eigen::MatrixXd> out;
        out.reserve(2);
        for (int k = 0; k < 2; ++k) {
            // d/dx_k [4 (1+|x|^2)^{-2}] = -16 x_k (1+|x|^2)^{-3}
            out.push_back(lam * (-16.0 * x[k] / (s * s * s)) * Eigen::MatrixXd::Identity(2, 2));
        }
        return out;
    }
};

// Diagonal metric diag(a1 + b1 t, a2 + b2 t) on the (unrolled) flat torus.
class FlatTorus final : public FamilyBase {
  public:
    explicit FlatTorus(std::map<std::string, double> p)
        : FamilyBase("flat_torus", 2, std::move(p), {}) {}

    Eigen::MatrixXd metric(double t, const ChartPoint&) const override {
        Eigen::MatrixXd g = Eigen::MatrixXd::Zero(2, 2);
        g(0, 0) = param("a1") + param("b1") * t;
        g(1, 1) = param("a2") + param("b2") * t;
        return g;
    }
    Eigen::MatrixXd metric_time_derivative(double, const ChartPoint&) const override {
        Eigen::MatrixXd g = Eigen::MatrixXd::Zero(2, 2);
        g(0, 0) = param("b1");
        g(1, 1) = param("b2");
        return g;
    }
    std::vector<Eigen::MatrixXd> metric_spatial_derivative(double, const ChartPoint&) const override {
        return {Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Zero(2, 2)};
    }
    bool spatially_constant() const override { return true; }
};

}  // namespace

// --- registry ---------------------------------------------------------------

const std::vector<FamilyDescriptor>& list_families() {
    static const std::vector<FamilyDescriptor> families = {
        {"scalar1d",
         1,
         "g(t) = a + b t on the real line",
         {{"a", true, 0.0, "metric value at t=0 (must be > 0)"},
          {"b", true, 0.0, "linear time slope (a + b must be > 0)"}}},
        {"conformal_plane",
         2,
         "g(t) = exp(2 kappa t) * identity on the plane",
         {{"kappa", true, 0.0, "conformal exponent rate"}}},
        {"shrink_sphere",
         2,
         "(1 - rate t) times the round unit sphere in one stereographic chart",
         {{"rate", true, 0.0, "shrinking rate (must be < 1)"},
          {"rmax", false, 10.0, "chart radius |x| < rmax"}}},
        {"flat_torus",
         2,
         "diagonal metric diag(a1 + b1 t, a2 + b2 t)",
         {{"a1", true, 0.0, "axis-1 value at t=0 (must be > 0)"},
          {"b1", true, 0.0, "axis-1 slope (a1 + b1 must be > 0)"},
          {"a2", true, 0.0, "axis-2 value at t=0 (must be > 0)"},
          {"b2", true, 0.0, "axis-2 slope (a2 + b2 must be > 0)"}}},
    };
    return families;
}

std::unique_ptr<MetricFamily> make_family(const std::string& id,
                                          const std::map<std::string, double>& params) {
    const FamilyDescriptor* desc = nullptr;
    for (const auto& d : list_families()) {
        if (d.id == id) {
            desc = &d;
            break;
        }
    }
    std::vector<std::string> violations;
    if (!desc) {
        std::string known;
        for (const auto& d : list_families()) known += (known.empty() ? "" : ", ") + d.id;
        violations.push_back("unknown metric family '" + id + "' (known: " + known + ")");
        throw ConfigError(std::move(violations));
    }

    std::map<std::string, double> full;
    for (const auto& spec : desc->params) {
        auto it = params.find(spec.name);
        if (it != params.end()) {
            full[spec.name] = it->second;
        } else if (spec.required) {
            violations.push_back("family '" + id + "': missing required parameter '" +
                                 spec.name + "'");
        } else {
            full[spec.name] = spec.default_value;
        }
    }
    for (const auto& [k, v] : params) {
        (void)v;
        bool known = false;
        for (const auto& spec : desc->params) known |= (spec.name == k);
        if (!known) violations.push_back("family '" + id + "': unknown parameter '" + k + "'");
    }
    if (!violations.empty()) throw ConfigError(std::move(violations));

    auto positive_on_unit = [&](const char* a, const char* b, const std::string& label) {
        if (!(full[a] > 0.0)) violations.push_back("family '" + id + "': " + label + " requires " +
                                                   a + " > 0");
        if (!(full[a] + full[b] > 0.0))
            violations.push_back("family '" + id + "': " + label + " requires " + a + " + " + b +
                                 " > 0");
    };
    if (id == "scalar1d") {
        positive_on_unit("a", "b", "positive definiteness on [0,1]");
    } else if (id == "shrink_sphere") {
        if (!(full["rate"] < 1.0))
            violations.push_back("family 'shrink_sphere': rate must be < 1");
        if (!(full["rmax"] > 0.0))
            violations.push_back("family 'shrink_sphere': rmax must be > 0");
    } else if (id == "flat_torus") {
        positive_on_unit("a1", "b1", "positive definiteness on [0,1]");
        positive_on_unit("a2", "b2", "positive definiteness on [0,1]");
    }
    if (!violations.empty()) throw ConfigError(std::move(violations));

    if (id == "scalar1d") return std::make_unique<Scalar1D>(std::move(full));
    if (id == "conformal_plane") return std::make_unique<ConformalPlane>(std::move(full));
    if (id == "shrink_sphere") return std::make_unique<ShrinkSphere>(full);
    return std::make_unique<FlatTorus>(std::move(full));
}

// --- operations --------------------------------------------------------------

Eigen::MatrixXd metric_eval(const MetricFamily& fam, double t, const ChartPoint& x) {
    require_in_chart(fam, x, "metric_eval");
    return fam.metric(clamp_time(t), x);
}

Eigen::MatrixXd metric_dt(const MetricFamily& fam, double t, const ChartPoint& x) {
    require_in_chart(fam, x, "metric_dt");
    const double tc = clamp_time(t);
    if (fam.time_derivative_mode == DerivativeMode::Analytic) {
        return fam.metric_time_derivative(tc, x);
    }
    // Central stencil kept inside [0,1] so the clamped extension is never sampled.
    const double t0 = std::clamp(tc, kTimeStep, 1.0 - kTimeStep);
    return (fam.metric(t0 + kTimeStep, x) - fam.metric(t0 - kTimeStep, x)) / (2.0 * kTimeStep);
}

std::vector<Eigen::MatrixXd> metric_dx(const MetricFamily& fam, double t, const ChartPoint& x) {
    require_in_chart(fam, x, "metric_dx");
    const double tc = clamp_time(t);
    if (fam.spatial_derivative_mode == DerivativeMode::Analytic) {
        return fam.metric_spatial_derivative(tc, x);
    }
    std::vector<Eigen::MatrixXd> out;
    out.reserve(static_cast<std::size_t>(fam.dim()));
    for (int k = 0; k < fam.dim(); ++k) {
        ChartPoint xp = x, xm = x;
        xp[k] += kSpaceStep;
        xm[k] -= kSpaceStep;
        out.push_back((fam.metric(tc, xp) - fam.metric(tc, xm)) / (2.0 * kSpaceStep));
    }
    return out;
}

std::vector<Eigen::MatrixXd> christoffel(const MetricFamily& fam, double t, const ChartPoint& x) {
    const int d = fam.dim();
    const Eigen::MatrixXd g = metric_eval(fam, t, x);
    Eigen::LLT<Eigen::MatrixXd> llt(g);
    if (llt.info() != Eigen::Success) {
        throw SingularMetricError("christoffel: metric not positive definite at the given point");
    }
    const auto dg = metric_dx(fam, t, x);

    // lower[m](i,j) = 1/2 (d_i g_mj + d_j g_mi - d_m g_ij); symmetric in (i,j).
    std::vector<Eigen::MatrixXd> lower(static_cast<std::size_t>(d));
    for (int m = 0; m < d; ++m) {
        Eigen::MatrixXd L(d, d);
        for (int i = 0; i < d; ++i) {
            for (int j = i; j < d; ++j) {
                const double v = 0.5 * (dg[static_cast<std::size_t>(i)](m, j) +
                                        dg[static_cast<std::size_t>(j)](m, i) -
                                        dg[static_cast<std::size_t>(m)](i, j));
                L(i, j) = v;
                L(j, i) = v;
            }
        }
        lower[static_cast<std::size_t>(m)] = L;
    }

    const Eigen::MatrixXd ginv = llt.solve(Eigen::MatrixXd::Identity(d, d));
    std::vector<Eigen::MatrixXd> gamma(static_cast<std::size_t>(d));
    for (int k = 0; k < d; ++k) {
        Eigen::MatrixXd G(d, d);
        for (int i = 0; i < d; ++i) {
            for (int j = i; j < d; ++j) {
                double v = 0.0;
                for (int m = 0; m < d; ++m) v += ginv(k, m) * lower[static_cast<std::size_t>(m)](i, j);
                G(i, j) = v;
                G(j, i) = v;
            }
        }
        gamma[static_cast<std::size_t>(k)] = G;
    }
    return gamma;
}

Eigen::MatrixXd christoffel_apply(const std::vector<Eigen::MatrixXd>& gamma,
                                  const Eigen::VectorXd& v, const Eigen::MatrixXd& cols) {
    const int d = static_cast<int>(gamma.size());
    Eigen::MatrixXd out(d, cols.cols());
    for (int k = 0; k < d; ++k) {
        out.row(k) = (v.transpose() * gamma[static_cast<std::size_t>(k)]) * cols;
    }
    return out;
}

TangentVector sharp(const MetricFamily& fam, double t, const ChartPoint& x,
                    const Eigen::VectorXd& omega) {
    const Eigen::MatrixXd g = metric_eval(fam, t, x);
    Eigen::LLT<Eigen::MatrixXd> llt(g);
    if (llt.info() != Eigen::Success) {
        throw SingularMetricError("sharp: metric not positive definite at the given point");
    }
    return TangentVector{x, llt.solve(omega)};
}

DominatingScale::DominatingScale(const MetricFamily& fam, int time_samples, double safety)
    : fam_(&fam), time_samples_(std::max(2, time_samples)), safety_(safety) {}

double DominatingScale::operator()(const ChartPoint& x) const {
    require_in_chart(*fam_, x, "dominating_metric");
    const Eigen::MatrixXd g0 = fam_->metric(0.0, x);
    double sup = 1.0;
    for (int i = 0; i < time_samples_; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(time_samples_ - 1);
        const Eigen::MatrixXd gt = fam_->metric(t, x);
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(gt, g0,
                                                                     Eigen::EigenvaluesOnly);
        sup = std::max(sup, es.eigenvalues().maxCoeff());
    }
    return safety_ * sup;
}

DominatingScale dominating_metric(const MetricFamily& fam, int time_samples) {
    return DominatingScale(fam, time_samples);
}

double chart_distance(const MetricFamily& fam, double t, const ChartPoint& x,
                      const ChartPoint& y) {
    require_in_chart(fam, x, "chart_distance");
    require_in_chart(fam, y, "chart_distance");
    const ChartPoint mid = 0.5 * (x + y);
    require_in_chart(fam, mid, "chart_distance (midpoint)");
    const Eigen::VectorXd d = x - y;
    const double q = d.dot(fam.metric(clamp_time(t), mid) * d);
    return std::sqrt(std::max(0.0, q));
}

}  // namespace evolvebm
