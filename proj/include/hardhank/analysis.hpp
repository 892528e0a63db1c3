#pragma once

#include "hardhank/model/economy.hpp"
#include "hardhank/trainer.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace hardhank::analysis {

using model::Array;
using model::Index;

// A fitted policy together with the parameters it is evaluated at.
struct Solved {
    const model::PolicyModel& model;
    const nn::ParamVector& theta;
};

// Plain values of one period's policies.
struct PolicyValues {
    Array pi, w, r, y;       // batch x 1
    Array c, h, mu, b, omega;  // batch x agents
    constraints::BoolArray at_bound;
    std::vector<bool> edge_case;
};

struct Period {
    PolicyValues policy;
    model::StateBatch next;
};

Period simulate_period(const Solved& m, const model::StateBatch& st, const model::ShockBatch& sh,
                       const model::ParamBatch& p);

// Single chain from the initial state: `burn_in` periods, then `count` states
// `stride` periods apart. Shocks come from the "sim" substream of `seed`.
// A failed period is reported as a NumericalError naming it.
model::StateBatch ergodic_sample(const Solved& m, const model::ModelParams& gamma, Index burn_in, Index count,
                                 std::uint64_t seed, Index stride = 10);

// ---- impulse responses ----

enum class Shock { Tfp, MonetaryPolicy, Preference, Idiosyncratic };
std::string to_string(Shock s);
Shock parse_shock(const std::string& name);

struct IrfConfig {
    Shock shock = Shock::Tfp;
    double size_sd = 2.0;
    Index horizons = 40;
    Index draws_per_state = 100;
    std::uint64_t seed = 0;
    Index norm_periods = 10000;  // length of the series behind the normalisation constants
};

struct IrfResult {
    std::vector<std::string> variables;
    std::vector<std::string> splits;          // "all", "zlb", "non_zlb"
    std::vector<Index> split_paths;           // paths per split
    std::vector<std::vector<std::vector<double>>> response;  // [split][variable][horizon]
    std::vector<double> norm_mean, norm_std;  // per variable

    double at(const std::string& split, const std::string& variable, Index horizon) const;
    void write_csv(std::ostream& out) const;
};

// Variables reported by generalized_irf, in CSV order.
const std::vector<std::string>& irf_variables();

// Paired responses: every path is simulated twice with identical draws, once
// with the impulse added at horizon 0. Paths starting at R_prev <= 1 + 1e-9
// form the ZLB split. Splits without paths are omitted.
IrfResult generalized_irf(const Solved& m, const model::ModelParams& gamma, const model::StateBatch& states,
                          const IrfConfig& cfg);

// ---- marginal propensities to consume ----

struct MpcRecord {
    Index state = 0;
    Index agent = 0;
    double wealth = 0.0;  // cash on hand
    double c = 0.0;
    double mpc = 0.0;
    double domega_db = 0.0;
    bool at_bound = false;
};

// dc/db_prev over domega/db_prev, both total derivatives through the policy map
// with all shocks set to zero.
std::vector<MpcRecord> mpc_profile(const Solved& m, const model::ModelParams& gamma, const model::StateBatch& states);

// Central-difference counterpart for one agent of one state.
double mpc_finite_difference(const Solved& m, const model::ModelParams& gamma, const model::StateBatch& states,
                             Index state, Index agent, double h = 1e-6);

void write_mpc_csv(std::ostream& out, const std::vector<MpcRecord>& records);

// ---- cross-sectional statistics ----

struct DistStats {
    double constrained_proportion = 0.0;
    double wealth_std = 0.0;
    double consumption_std = 0.0;
    double gini = 0.0;
    double net_bond_supply = 0.0;
    double output_gap_to_consumption = 0.0;

    static const char* csv_header();
    void write_csv(std::ostream& out) const;
};

double gini(const Eigen::VectorXd& x);

// b, c: rows x agents; y, b_min: rows x 1. Per-row statistics averaged over rows.
DistStats dist_stats(const Array& b, const Array& c, const Array& y, const Array& b_min);
DistStats dist_stats(const PolicyValues& v, const model::ParamBatch& p);

// ---- divergence from a random initialisation ----

struct DivergenceConfig {
    model::Regime regime = model::Regime::Soft;
    model::PenaltyWeights weights;
    Index periods = 200;
    Index batch = 1;
    std::uint64_t seed = 0;
    double init_scale = 1e-2;
};

struct DivergenceSeries {
    std::vector<double> total_loss;
    std::vector<double> net_bond_supply;  // mean bond holding after each period
    bool truncated = false;
    std::string diagnostic;

    void write_csv(std::ostream& out) const;
};

DivergenceSeries divergence_experiment(const model::PolicyNetSpec& nets, const model::ModelParams& gamma,
                                       const DivergenceConfig& cfg);

// ---- borrowing-limit sweep ----

struct SweepRow {
    double bbar = 0.0;
    double constrained_proportion = 0.0;
    double cdf_at_default = 0.0;  // share of holdings at or below -0.05
    double below_bound = 0.0;     // share strictly below the limit
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::vector<std::string> warnings;

    void write_csv(std::ostream& out) const;
};

std::vector<double> linspace(double lo, double hi, Index points);

SweepResult bbar_sweep(const Solved& m, const model::ModelParams& gamma, const std::vector<double>& grid,
                       const model::StateBatch& states);

// ---- loss table ----

model::LossBreakdown loss_report(const TrainLog& log, std::size_t window = 50);
void write_loss_report_csv(std::ostream& out, const model::LossBreakdown& l);

}  // namespace hardhank::analysis
