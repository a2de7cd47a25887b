#include <doctest.h>

#include "monokin/error.hpp"
#include "monokin/optimizer.hpp"

using namespace monokin;

namespace {

// Ill-conditioned quadratic with known minimum.
class Quadratic final : public ObjectiveFunction {
  public:
    int dim() const override { return 4; }
    double value(const Eigen::VectorXd& x) const override {
        double acc = 0.0;
        for (int i = 0; i < 4; ++i) acc += scale_[i] * (x[i] - target_[i]) * (x[i] - target_[i]);
        return acc;
    }
    double value_and_gradient(const Eigen::VectorXd& x, Eigen::VectorXd& g) const override {
        g.resize(4);
        for (int i = 0; i < 4; ++i) g[i] = 2.0 * scale_[i] * (x[i] - target_[i]);
        return value(x);
    }

  private:
    const double scale_[4] = {1.0, 100.0, 0.01, 10.0};
    const double target_[4] = {1.0, -2.0, 3.0, 0.5};
};

class Rosenbrock final : public ObjectiveFunction {
  public:
    int dim() const override { return 2; }
    double value(const Eigen::VectorXd& x) const override {
        const double a = 1.0 - x[0];
        const double b = x[1] - x[0] * x[0];
        return a * a + 100.0 * b * b;
    }
    double value_and_gradient(const Eigen::VectorXd& x, Eigen::VectorXd& g) const override {
        g.resize(2);
        const double b = x[1] - x[0] * x[0];
        g[0] = -2.0 * (1.0 - x[0]) - 400.0 * x[0] * b;
        g[1] = 200.0 * b;
        return value(x);
    }
};

}  // namespace

TEST_CASE("quadratic minimized to tolerance") {
    Quadratic fn;
    const SolveResult res = minimize(fn, Eigen::VectorXd::Zero(4));
    CHECK(res.status == SolveStatus::kConverged);
    CHECK(res.value < 1e-10);
    CHECK(res.x[0] == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(res.x[1] == doctest::Approx(-2.0).epsilon(1e-4));
}

TEST_CASE("rosenbrock converges with L-BFGS") {
    Rosenbrock fn;
    Eigen::VectorXd x0(2);
    x0 << -1.2, 1.0;
    const SolveResult res = minimize(fn, x0);
    CHECK(res.status == SolveStatus::kConverged);
    CHECK(res.x[0] == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(res.x[1] == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("trace is monotone non-increasing") {
    Rosenbrock fn;
    Eigen::VectorXd x0(2);
    x0 << 2.0, -1.5;
    const SolveResult res = minimize(fn, x0);
    REQUIRE(res.trace.size() >= 2);
    for (size_t i = 1; i < res.trace.size(); ++i) CHECK(res.trace[i] <= res.trace[i - 1]);
}

TEST_CASE("gradient descent fallback also converges on the quadratic") {
    Quadratic fn;
    OptimizerConfig cfg;
    cfg.method = OptimizerConfig::Method::kGradientDescent;
    cfg.max_iterations = 5000;
    const SolveResult res = minimize(fn, Eigen::VectorXd::Zero(4), cfg);
    CHECK(res.value < 1e-6);
}

TEST_CASE("iteration cap reported") {
    Rosenbrock fn;
    OptimizerConfig cfg;
    cfg.max_iterations = 3;
    Eigen::VectorXd x0(2);
    x0 << -1.2, 1.0;
    const SolveResult res = minimize(fn, x0, cfg);
    CHECK(res.status == SolveStatus::kMaxIterations);
}

TEST_CASE("non-finite objective at initialization is an input error") {
    Rosenbrock fn;
    Eigen::VectorXd x0(2);
    x0 << std::numeric_limits<double>::quiet_NaN(), 0.0;
    CHECK_THROWS_AS(minimize(fn, x0), ValidationError);
}

TEST_CASE("deterministic across runs") {
    Rosenbrock fn;
    Eigen::VectorXd x0(2);
    x0 << 0.3, 0.8;
    const SolveResult a = minimize(fn, x0);
    const SolveResult b = minimize(fn, x0);
    CHECK(a.x == b.x);
    CHECK(a.trace == b.trace);
}
