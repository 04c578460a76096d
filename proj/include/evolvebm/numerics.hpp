#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <functional>
#include <vector>

namespace evolvebm {

// Compensated (Kahan) accumulator for long quadrature sums.
class KahanSum {
  public:
    void add(double x) {
        const double y = x - c_;
        const double t = s_ + y;
        c_ = (t - s_) - y;
        s_ = t;
    }
    double value() const { return s_; }

  private:
    double s_ = 0.0;
    double c_ = 0.0;
};

// Adaptive Simpson quadrature of f on [a,b] to absolute tolerance tol.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol, int max_depth = 50);

// Symmetric inverse square root of a symmetric positive definite matrix.
Eigen::MatrixXd sym_inverse_sqrt(const Eigen::MatrixXd& m);

// Kendall rank correlation of two equally long sequences (tau-a, ties count 0).
double kendall_tau(const std::vector<double>& x, const std::vector<double>& y);

// Second-order discrete velocity at node k of a uniformly gridded sequence
// (central differences inside, one-sided three-point stencils at the ends).
template <typename Getter>
Eigen::VectorXd grid_velocity(const Getter& pt, std::size_t n, std::size_t k, double h) {
    if (n == 1) return (pt(1) - pt(0)) / h;
    if (k == 0) return (-3.0 * pt(0) + 4.0 * pt(1) - pt(2)) / (2.0 * h);
    if (k == n) return (3.0 * pt(n) - 4.0 * pt(n - 1) + pt(n - 2)) / (2.0 * h);
    return (pt(k + 1) - pt(k - 1)) / (2.0 * h);
}

}  // namespace evolvebm
