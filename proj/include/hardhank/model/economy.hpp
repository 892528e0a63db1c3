#pragma once

#include "hardhank/constraints.hpp"
#include "hardhank/model/params.hpp"
#include "hardhank/model/state.hpp"
#include "hardhank/nn/network.hpp"

#include <string>
#include <vector>

namespace hardhank::model {

enum class Regime { Hard, Soft, AggHard, IdioHard };

std::string to_string(Regime r);
Regime parse_regime(const std::string& name);

struct PenaltyWeights {
    double kkt = 1e2;
    double oc = 1e2;
    double rc = 1e2;

    void validate() const;
};

// ---- scalar building blocks ----

struct Exogenous {
    double psi = 1.0;
    Eigen::VectorXd s;
    double a = 1.0;
};

Exogenous shock_step(double psi_prev, const Eigen::VectorXd& s_prev, double a_prev, double eps_psi,
                     const Eigen::VectorXd& eps_s, double eps_a, const ModelParams& p);

// Gross rate with the lower bound R >= 1.
double taylor_rate(double pi, double y, double r_prev, double eps_mp, const ModelParams& p);

struct FirmBlock {
    double n = 0.0;
    double y = 0.0;
    double mc = 0.0;
    double div = 0.0;
};

FirmBlock firm_block(double w, const Eigen::VectorXd& hours, const Eigen::VectorXd& s, double a);

Eigen::VectorXd cash_on_hand(const Eigen::VectorXd& b_prev, double r_prev, double pi, double w,
                             const Eigen::VectorXd& s, const Eigen::VectorXd& hours, double div);

// ---- batched tape versions ----

struct ExogenousVars {
    Var psi, s, a;
};

ExogenousVars shock_step(const StateVars& st, const ShockBatch& sh, const ParamBatch& p);
Var taylor_rate(const Var& pi, const Var& y, const Var& r_prev, const ShockBatch& sh, const ParamBatch& p);

// ---- network layout ----

inline constexpr int kAggregateExtraInputs = 31;  // plus 3 per agent
inline constexpr int kOwnInputs = 3;              // s_prev, b_prev, eps_s of the agent itself

struct PolicyNetSpec {
    Index agents = 0;
    nn::NetworkSpec aggregate;      // heads: pi, wage
    nn::NetworkSpec idiosyncratic;  // heads: consumption, hours, multiplier

    static PolicyNetSpec make(Index agents, const std::vector<int>& hidden, nn::Activation activation);

    Index num_params() const { return aggregate.num_params() + idiosyncratic.num_params(); }
    std::vector<std::vector<int>> widths() const { return {aggregate.widths, idiosyncratic.widths}; }
    void validate() const;
};

// Policies for one period. Per-agent quantities are batch x agents,
// aggregates batch x 1.
struct Policy {
    Var psi, s, a;  // exogenous states after this period's shocks
    Var pi, w, r;
    Var c, h, mu, b, omega;
    Var n, y, mc, div;
    constraints::BoolArray at_bound;  // b within tolerance of the borrowing limit
    std::vector<bool> edge_case;      // projection fallback used, per row
};

struct LossBreakdown {
    double ee = 0.0;
    double nkpc = 0.0;
    double ls = 0.0;
    double kkt = 0.0;
    double oc = 0.0;
    double rc = 0.0;
    double total = 0.0;
};

struct LossVars {
    Var ee, nkpc, ls, kkt, oc, rc, total;
    LossBreakdown values() const;
};

// Fischer-Burmeister residual a + b - sqrt(a^2 + b^2) and its square.
double fb(double slack, double multiplier);
double fb_penalty(double slack, double multiplier);
Var fb(const Var& slack, const Var& multiplier);

// Network-independent regime mapping: turns raw heads into policies.
// Raw heads are batch x 1 (pi, wage) and batch x agents (others).
struct RawOutputs {
    Var pi, wage, consumption, hours, multiplier;
};

Policy apply_regime(const RawOutputs& raw, const StateVars& st, const ShockBatch& sh, const ParamBatch& p,
                    Regime regime);

// `next` holds two stacked continuation draws (2 x batch rows, draw-major).
LossVars residual_losses(const Policy& now, const Policy& next, const StateVars& st, const ParamBatch& p,
                         Regime regime, const PenaltyWeights& weights);

StateVars state_transition(const Policy& pol);

class PolicyModel {
public:
    PolicyModel(PolicyNetSpec nets, Regime regime, PenaltyWeights weights = {},
                ParamBounds bounds = ParamBounds::defaults());

    const PolicyNetSpec& nets() const { return nets_; }
    Regime regime() const { return regime_; }
    const PenaltyWeights& weights() const { return weights_; }
    const ParamBounds& bounds() const { return bounds_; }

    // Network inputs: batch x (3L + 31) aggregate features and
    // (L * batch) x 3 own-agent features ordered agent-major.
    Var aggregate_inputs(const StateVars& st, const ShockBatch& sh, const ParamBatch& p, const ExogenousVars& ex) const;
    Var own_inputs(const StateVars& st, const ShockBatch& sh) const;

    RawOutputs raw_outputs(const Var& theta, const StateVars& st, const ShockBatch& sh, const ParamBatch& p,
                           const ExogenousVars& ex) const;

    Policy evaluate(const Var& theta, const StateVars& st, const ShockBatch& sh, const ParamBatch& p) const;

    // Residual losses at `st` with two continuation draws, on one tape.
    LossVars losses(const Var& theta, const StateVars& st, const ShockBatch& now, const ShockBatch& next1,
                    const ShockBatch& next2, const ParamBatch& p) const;

    // One simulated period without gradients.
    StateBatch step(const nn::ParamVector& theta, const StateBatch& st, const ShockBatch& sh,
                    const ParamBatch& p) const;

private:
    PolicyNetSpec nets_;
    Regime regime_;
    PenaltyWeights weights_;
    ParamBounds bounds_;
};

}  // namespace hardhank::model
