#pragma once

#include "hardhank/model/economy.hpp"
#include "hardhank/nn/network.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace hardhank {

struct TrainerConfig {
    long iterations = 5000;
    model::Index batch = 64;
    int max_sims = 20;              // N
    double learning_rate = 0.0;     // <= 0 picks the regime default
    double tol0 = 0.0;              // stop once the last loss is <= tol0; <= 0 never stops early
    double tol1 = 1e-3;             // reset threshold on the rc loss
    long tol2 = 100;                // iterations at the current n before raising it
    std::uint64_t seed = 0;
    model::Regime regime = model::Regime::Hard;
    model::PenaltyWeights weights;
    long resample_every = 1;        // structural parameter redraw cadence
    double init_scale = 1e-2;
    long max_nan_resets = 100;      // consecutive failures tolerated before aborting
    long checkpoint_every = 0;      // 0 disables periodic checkpoints
    bool reset_on_kkt = false;
    bool reset_on_oc = false;

    double effective_learning_rate() const;
    void validate() const;
};

double default_learning_rate(model::Regime regime);

struct TrainRecord {
    long iter = 0;
    model::LossBreakdown loss;  // NaN everywhere when the evaluation failed
    int n = 1;                  // forward simulations performed after this update
    bool reset = false;
    std::uint64_t gamma_draw_id = 0;
    double seconds = 0.0;       // wall clock, not part of the CSV
};

struct TrainLog {
    std::vector<TrainRecord> records;

    long resets() const;
    static const char* csv_header();
    void write_csv(std::ostream& out) const;
    void write_csv(const std::string& path) const;
    static TrainLog read_csv(const std::string& path);
};

struct FitResult {
    nn::ParamVector params;
    TrainLog log;
    bool aborted = false;
    std::string diagnostic;
};

// Symmetric zero-bond state for every row of `gamma`.
model::StateBatch draw_init_state(const model::ParamBatch& gamma, model::Index agents);

// Structural parameters for one batch; row r of draw d uses draw index d * batch + r.
model::ParamBatch draw_param_batch(const CounterRng& rng, std::uint64_t draw, model::Index batch,
                                   const model::ParamBounds& bounds);

using CheckpointFn = std::function<void(long iter, const nn::ParamVector& params)>;

FitResult fit(const TrainerConfig& config, const model::PolicyNetSpec& nets,
              const model::ParamBounds& bounds = model::ParamBounds::defaults(),
              const CheckpointFn& on_checkpoint = {});

// Same, continuing from given parameters.
FitResult fit(const TrainerConfig& config, const model::PolicyNetSpec& nets, nn::ParamVector theta0,
              const model::ParamBounds& bounds, const CheckpointFn& on_checkpoint = {});

}  // namespace hardhank
