#pragma once

#include "hardhank/ad/tape.hpp"
#include "hardhank/rng.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace hardhank::model {

struct ModelParams {
    double beta = 0.9975;
    double sigma = 1.0;
    double eta = 1.0;
    double epsilon = 11.0;
    double chi = 0.91;
    double habit = 0.0;
    double phi = 1000.0;
    double theta_pi = 2.0;
    double theta_y = 0.25;
    double pi_bar = 1.005;
    double y_bar = 1.0;
    double b_min = -0.05;
    double rho_psi = 0.7;
    double rho_s = 0.8;
    double rho_a = 0.8;
    double rho_r = 0.25;
    double sigma_psi = 0.03;
    double sigma_s = 0.05;
    double sigma_a = 0.008;
    double sigma_mp = 0.005;

    // Steady-state gross nominal rate.
    double r_bar() const { return pi_bar / beta; }
    // Throws std::invalid_argument on beta outside (0,1), epsilon <= 1,
    // b_min >= 0 or non-positive scale parameters.
    void validate() const;
};

inline constexpr std::size_t kNumParams = 20;

struct ParamInfo {
    const char* name;
    double ModelParams::*member;
    double baseline;
    double min;
    double max;
};

// Calibration with sampling ranges; fixed parameters have min == max.
const std::array<ParamInfo, kNumParams>& param_table();

struct ParamBounds {
    std::array<double, kNumParams> min{};
    std::array<double, kNumParams> max{};

    static ParamBounds defaults();
    void validate() const;  // min <= max for every entry
    bool is_fixed(std::size_t k) const { return min[k] == max[k]; }
    bool contains(const ModelParams& p) const;
};

// Uniform draw on each [min, max]; fixed entries are returned exactly.
// `rng` supplies uniforms at counters draw * kNumParams + k.
ModelParams draw_struct_params(const CounterRng& rng, std::uint64_t draw, const ParamBounds& bounds);

// One parameter vector per batch row.
struct ParamBatch {
    std::vector<ModelParams> rows;

    std::size_t size() const { return rows.size(); }
    // rows x 1 column of one field.
    ad::Array column(double ModelParams::*member) const;
    // Rows repeated `times` times as consecutive blocks.
    ParamBatch tiled(std::size_t times) const;
    static ParamBatch uniform(const ModelParams& p, std::size_t rows) { return {std::vector<ModelParams>(rows, p)}; }
};

// Parameters scaled to [-1, 1] over their sampling range (0 when fixed);
// rows x kNumParams.
ad::Array normalized_features(const ParamBatch& batch, const ParamBounds& bounds);

}  // namespace hardhank::model
