#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "monokin/objective.hpp"

namespace monokin {

struct OptimizerConfig {
    enum class Method { kLbfgs, kGradientDescent };

    int max_iterations = 500;
    double gradient_tolerance = 1e-6;  // on ||g||_inf / max(1, |f|)
    double step_tolerance = 1e-9;
    double initial_step = 1.0;
    int history = 10;                  // L-BFGS memory
    Method method = Method::kLbfgs;
    std::uint64_t seed = 0;            // reserved for stochastic variants

    void validate() const;
};

enum class SolveStatus { kConverged, kMaxIterations, kStalled };

const char* solve_status_name(SolveStatus status);

struct SolveResult {
    Eigen::VectorXd x;
    double value = 0.0;
    std::vector<double> trace;  // initial value + one entry per accepted step
    SolveStatus status = SolveStatus::kConverged;
    int iterations = 0;
};

// Minimize fn from x0. Line-search (Armijo backtracking) guarantees a
// monotone trace. Throws ValidationError when the objective is not finite
// at x0.
SolveResult minimize(const ObjectiveFunction& fn, const Eigen::VectorXd& x0,
                     const OptimizerConfig& cfg = {});

}  // namespace monokin
