#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "shapebo/rng.hpp"

namespace shapebo {

struct Box {
    Eigen::VectorXd lo;
    Eigen::VectorXd hi;

    [[nodiscard]] int dim() const { return static_cast<int>(lo.size()); }
    [[nodiscard]] Eigen::VectorXd clamp(const Eigen::VectorXd& x) const {
        return x.cwiseMax(lo).cwiseMin(hi);
    }
    [[nodiscard]] bool contains(const Eigen::VectorXd& x, double tol = 0.0) const {
        return (x.array() >= lo.array() - tol).all() && (x.array() <= hi.array() + tol).all();
    }
    [[nodiscard]] Eigen::VectorXd sample(Rng& rng) const {
        Eigen::VectorXd x(dim());
        for (int j = 0; j < dim(); ++j) x[j] = uniform(rng, lo[j], hi[j]);
        return x;
    }
};

using ObjFn = std::function<double(const Eigen::VectorXd&)>;
/// Returns f(x); fills *grad when non-null.
using GradObjFn = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd*)>;

struct OptimResult {
    Eigen::VectorXd x;
    double f = 0.0;
    int evals = 0;
    bool converged = false;
};

struct LbfgsOptions {
    int max_iterations = 200;
    int memory = 8;
    double grad_tol = 1e-8;
    double f_tol = 1e-12;
    const Box* box = nullptr; // iterates projected into the box when set
};

/// Limited-memory BFGS minimization with backtracking line search.
OptimResult lbfgs_minimize(const GradObjFn& f, const Eigen::VectorXd& x0,
                           const LbfgsOptions& opts = {});

struct NelderMeadOptions {
    int max_iterations = 500;
    double f_tol = 1e-12;
    const Box* box = nullptr;
};

OptimResult nelder_mead_minimize(const ObjFn& f, const Eigen::VectorXd& x0, double scale,
                                 const NelderMeadOptions& opts = {});

/// Central finite differences wrapper, step h_rel * (1 + |x_j|).
GradObjFn with_fd_gradient(const ObjFn& f, double h_rel = 1e-6);

struct GaOptions {
    int population = 50;
    int generations = 40;
    double mutation_scale = 0.15;
};

/// Real-coded genetic maximizer over a box; `seeds` are injected into the
/// initial population. Deterministic given the rng state.
OptimResult ga_maximize(const ObjFn& f, const Box& box, const GaOptions& opts, Rng& rng,
                        const std::vector<Eigen::VectorXd>& seeds = {});

/// n-by-dim Latin hypercube sample in [0,1]^dim: each 1-D projection has
/// exactly one point per stratum of width 1/n.
Eigen::MatrixXd latin_hypercube(int n, int dim, Rng& rng);

} // namespace shapebo
