#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "evolvebm/errors.hpp"

namespace evolvebm {

// Discrete curve on the uniform grid t_k = k/n, k = 0..n, in chart coordinates.
struct Path {
    std::vector<Eigen::VectorXd> points;

    std::size_t segments() const { return points.empty() ? 0 : points.size() - 1; }
    double time(std::size_t k) const {
        return static_cast<double>(k) / static_cast<double>(segments());
    }
    double step() const { return 1.0 / static_cast<double>(segments()); }
    int dim() const { return points.empty() ? 0 : static_cast<int>(points.front().size()); }

    void validate() const {
        if (points.size() < 2) throw Error("Path needs at least two grid points");
    }
};

// Control curve w in R^d on the same grid; w_0 = 0 for anti-developments.
struct ControlPath {
    std::vector<Eigen::VectorXd> values;

    std::size_t segments() const { return values.empty() ? 0 : values.size() - 1; }
    double time(std::size_t k) const {
        return static_cast<double>(k) / static_cast<double>(segments());
    }
    double step() const { return 1.0 / static_cast<double>(segments()); }
    int dim() const { return values.empty() ? 0 : static_cast<int>(values.front().size()); }
};

// A frame u: R^d -> T_x M. Column i of basis holds the chart components of
// u e_i; time is the instant at which the frame is (meant to be) g(t)-orthonormal.
struct Frame {
    double time = 0.0;
    Eigen::VectorXd base;
    Eigen::MatrixXd basis;
};

struct FramePath {
    std::vector<Frame> frames;
    int reorthonormalize_every = 0;  // 0 = off; recorded for reproducibility

    std::size_t segments() const { return frames.empty() ? 0 : frames.size() - 1; }
    double time(std::size_t k) const {
        return static_cast<double>(k) / static_cast<double>(segments());
    }

    Path project() const {
        Path p;
        p.points.reserve(frames.size());
        for (const auto& f : frames) p.points.push_back(f.base);
        return p;
    }
};

}  // namespace evolvebm
