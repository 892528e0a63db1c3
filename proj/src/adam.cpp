#include "hardhank/nn/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace hardhank::nn {

AdamState::AdamState(Eigen::Index size, AdamConfig cfg)
    : m(Eigen::VectorXd::Zero(size)), v(Eigen::VectorXd::Zero(size)), config(cfg) {}

void adam_step(AdamState& s, Eigen::VectorXd& params, const Eigen::VectorXd& grad) {
    if (grad.size() != params.size() || s.m.size() != params.size())
        throw std::invalid_argument("adam_step: length mismatch between state, parameters and gradient");
    if (!grad.allFinite()) throw std::domain_error("adam_step: non-finite gradient");
    const auto& c = s.config;
    ++s.step;
    s.m = c.beta1 * s.m + (1.0 - c.beta1) * grad;
    s.v = c.beta2 * s.v + (1.0 - c.beta2) * grad.cwiseProduct(grad);
    const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(s.step));
    const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(s.step));
    params.array() -= c.learning_rate * (s.m.array() / bc1) / ((s.v.array() / bc2).sqrt() + c.eps);
}

}  // namespace hardhank::nn
