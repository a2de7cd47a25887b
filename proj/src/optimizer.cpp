#include "monokin/optimizer.hpp"

#include <cmath>
#include <deque>

#include "monokin/error.hpp"

namespace monokin {

void OptimizerConfig::validate() const {
    if (max_iterations < 1) throw ValidationError("max_iterations must be >= 1");
    if (!(gradient_tolerance > 0)) throw ValidationError("gradient tolerance must be > 0");
    if (!(step_tolerance > 0)) throw ValidationError("step tolerance must be > 0");
    if (!(initial_step > 0)) throw ValidationError("initial step must be > 0");
    if (history < 1) throw ValidationError("history must be >= 1");
}

const char* solve_status_name(SolveStatus status) {
    switch (status) {
        case SolveStatus::kConverged: return "converged";
        case SolveStatus::kMaxIterations: return "max_iter";
        case SolveStatus::kStalled: return "stalled";
    }
    return "unknown";
}

SolveResult minimize(const ObjectiveFunction& fn, const Eigen::VectorXd& x0,
                     const OptimizerConfig& cfg) {
    cfg.validate();
    SolveResult res;
    res.x = x0;
    Eigen::VectorXd grad(fn.dim());
    double f = fn.value_and_gradient(res.x, grad);
    if (!std::isfinite(f) || !grad.allFinite())
        throw ValidationError("non-finite objective at initialization");
    res.trace.push_back(f);

    struct Pair {
        Eigen::VectorXd s, y;
        double rho;
    };
    std::deque<Pair> memory;

    constexpr double armijo = 1e-4;
    const bool use_lbfgs = cfg.method == OptimizerConfig::Method::kLbfgs;

    for (int iter = 0; iter < cfg.max_iterations; ++iter) {
        res.iterations = iter;
        if (grad.lpNorm<Eigen::Infinity>() <=
            cfg.gradient_tolerance * std::max(1.0, std::abs(f))) {
            res.status = SolveStatus::kConverged;
            res.value = f;
            return res;
        }

        // Two-loop recursion (plain steepest descent when no memory).
        Eigen::VectorXd dir = -grad;
        if (use_lbfgs && !memory.empty()) {
            std::vector<double> alpha(memory.size());
            for (size_t i = memory.size(); i-- > 0;) {
                alpha[i] = memory[i].rho * memory[i].s.dot(dir);
                dir -= alpha[i] * memory[i].y;
            }
            const auto& last = memory.back();
            dir *= last.s.dot(last.y) / last.y.squaredNorm();
            for (size_t i = 0; i < memory.size(); ++i) {
                const double beta = memory[i].rho * memory[i].y.dot(dir);
                dir += (alpha[i] - beta) * memory[i].s;
            }
        }
        double slope = grad.dot(dir);
        if (!(slope < 0)) {  // not a descent direction; reset memory
            memory.clear();
            dir = -grad;
            slope = grad.dot(dir);
        }

        double step = cfg.initial_step;
        bool accepted = false;
        Eigen::VectorXd x_new;
        double f_new = f;
        for (int ls = 0; ls < 50; ++ls) {
            x_new = res.x + step * dir;
            f_new = fn.value(x_new);
            if (std::isfinite(f_new) && f_new <= f + armijo * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            res.status = SolveStatus::kStalled;
            res.value = f;
            return res;
        }

        Eigen::VectorXd grad_new(fn.dim());
        fn.value_and_gradient(x_new, grad_new);
        const Eigen::VectorXd s = x_new - res.x;
        const Eigen::VectorXd y = grad_new - grad;
        const double sy = s.dot(y);
        if (use_lbfgs && sy > 1e-12) {
            memory.push_back({s, y, 1.0 / sy});
            if (static_cast<int>(memory.size()) > cfg.history) memory.pop_front();
        }

        res.x = x_new;
        f = f_new;
        grad = grad_new;
        res.trace.push_back(f);
        res.iterations = iter + 1;
        if (s.norm() <= cfg.step_tolerance) {
            res.status = SolveStatus::kConverged;
            res.value = f;
            return res;
        }
    }
    res.status = SolveStatus::kMaxIterations;
    res.value = f;
    return res;
}

}  // namespace monokin
