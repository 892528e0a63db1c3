#pragma once

#include <Eigen/Dense>

namespace hardhank::nn {

struct AdamConfig {
    double learning_rate = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-12;
};

struct AdamState {
    Eigen::VectorXd m;
    Eigen::VectorXd v;
    long step = 0;
    AdamConfig config;

    AdamState() = default;
    AdamState(Eigen::Index size, AdamConfig cfg);
};

// Bias-corrected update in place. Throws std::domain_error on a non-finite
// gradient and std::invalid_argument on a length mismatch; neither the state
// nor the parameters are touched in that case.
void adam_step(AdamState& state, Eigen::VectorXd& params, const Eigen::VectorXd& grad);

}  // namespace hardhank::nn
