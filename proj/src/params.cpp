#include "hardhank/model/params.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace hardhank::model {

void ModelParams::validate() const {
    auto fail = [](const std::string& what) { throw std::invalid_argument("ModelParams: " + what); };
    if (!(beta > 0.0 && beta < 1.0)) fail("beta must lie in (0, 1)");
    if (!(epsilon > 1.0)) fail("epsilon must exceed 1");
    if (!(b_min < 0.0)) fail("borrowing limit must be negative");
    if (!(sigma > 0.0 && eta > 0.0 && chi > 0.0 && phi >= 0.0 && pi_bar > 0.0 && y_bar > 0.0))
        fail("sigma, eta, chi, pi_bar, y_bar must be positive and phi non-negative");
    if (!(sigma_psi >= 0.0 && sigma_s >= 0.0 && sigma_a >= 0.0 && sigma_mp >= 0.0))
        fail("shock volatilities must be non-negative");
    if (!(habit >= 0.0 && habit < 1.0)) fail("habit must lie in [0, 1)");
}

const std::array<ParamInfo, kNumParams>& param_table() {
    static const std::array<ParamInfo, kNumParams> table{{
        {"beta", &ModelParams::beta, 0.9975, 0.9975, 0.9975},
        {"sigma", &ModelParams::sigma, 1.0, 1.0, 1.0},
        {"eta", &ModelParams::eta, 1.0, 1.0, 1.0},
        {"epsilon", &ModelParams::epsilon, 11.0, 11.0, 11.0},
        {"chi", &ModelParams::chi, 0.91, 0.91, 0.91},
        {"habit", &ModelParams::habit, 0.0, 0.0, 0.0},
        {"phi", &ModelParams::phi, 1000.0, 700.0, 1300.0},
        {"theta_pi", &ModelParams::theta_pi, 2.0, 1.5, 2.5},
        {"theta_y", &ModelParams::theta_y, 0.25, 0.05, 0.5},
        {"pi_bar", &ModelParams::pi_bar, 1.005, 1.005, 1.005},
        {"y_bar", &ModelParams::y_bar, 1.0, 1.0, 1.0},
        {"b_min", &ModelParams::b_min, -0.05, -0.5, -0.01},
        {"rho_psi", &ModelParams::rho_psi, 0.7, 0.5, 0.9},
        {"rho_s", &ModelParams::rho_s, 0.8, 0.7, 0.9},
        {"rho_a", &ModelParams::rho_a, 0.8, 0.7, 0.9},
        {"rho_r", &ModelParams::rho_r, 0.25, 0.1, 0.5},
        {"sigma_psi", &ModelParams::sigma_psi, 0.03, 0.01, 0.05},
        {"sigma_s", &ModelParams::sigma_s, 0.05, 0.01, 0.08},
        {"sigma_a", &ModelParams::sigma_a, 0.008, 0.003, 0.012},
        {"sigma_mp", &ModelParams::sigma_mp, 0.005, 0.001, 0.008},
    }};
    return table;
}

ParamBounds ParamBounds::defaults() {
    ParamBounds b;
    const auto& t = param_table();
    for (std::size_t k = 0; k < kNumParams; ++k) {
        b.min[k] = t[k].min;
        b.max[k] = t[k].max;
    }
    return b;
}

void ParamBounds::validate() const {
    for (std::size_t k = 0; k < kNumParams; ++k) {
        if (!(min[k] <= max[k])) {
            std::ostringstream os;
            os << "parameter bounds for " << param_table()[k].name << ": min " << min[k] << " exceeds max " << max[k];
            throw std::invalid_argument(os.str());
        }
    }
}

bool ParamBounds::contains(const ModelParams& p) const {
    const auto& t = param_table();
    for (std::size_t k = 0; k < kNumParams; ++k) {
        const double v = p.*(t[k].member);
        if (v < min[k] || v > max[k]) return false;
    }
    return true;
}

ModelParams draw_struct_params(const CounterRng& rng, std::uint64_t draw, const ParamBounds& bounds) {
    bounds.validate();
    ModelParams p;
    const auto& t = param_table();
    for (std::size_t k = 0; k < kNumParams; ++k) {
        double v = bounds.min[k];
        if (!bounds.is_fixed(k)) v += (bounds.max[k] - bounds.min[k]) * rng.uniform(draw * kNumParams + k);
        p.*(t[k].member) = v;
    }
    return p;
}

ad::Array ParamBatch::column(double ModelParams::*member) const {
    ad::Array out(static_cast<Eigen::Index>(rows.size()), 1);
    for (std::size_t r = 0; r < rows.size(); ++r) out(static_cast<Eigen::Index>(r), 0) = rows[r].*member;
    return out;
}

ParamBatch ParamBatch::tiled(std::size_t times) const {
    ParamBatch out;
    out.rows.reserve(rows.size() * times);
    for (std::size_t k = 0; k < times; ++k) out.rows.insert(out.rows.end(), rows.begin(), rows.end());
    return out;
}

ad::Array normalized_features(const ParamBatch& batch, const ParamBounds& bounds) {
    const auto& t = param_table();
    ad::Array out = ad::Array::Zero(static_cast<Eigen::Index>(batch.size()), kNumParams);
    for (std::size_t k = 0; k < kNumParams; ++k) {
        if (bounds.is_fixed(k)) continue;
        const double mid = 0.5 * (bounds.min[k] + bounds.max[k]), half = 0.5 * (bounds.max[k] - bounds.min[k]);
        for (std::size_t r = 0; r < batch.size(); ++r)
            out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = (batch.rows[r].*(t[k].member) - mid) / half;
    }
    return out;
}

}  // namespace hardhank::model
