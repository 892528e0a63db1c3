#include "hardhank/model/economy.hpp"
#include "gradcheck.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace ad = hardhank::ad;
namespace nn = hardhank::nn;
using namespace hardhank::model;
using ad::Array;
using Eigen::VectorXd;

namespace {

double inv_softplus(double y) { return std::log(std::expm1(y)); }

struct RandomWorld {
    ParamBatch params;
    StateBatch state;
    ShockBatch shocks;
};

// States with zero net bonds, every holding above the limit, and dispersed
// productivity.
RandomWorld random_world(std::mt19937_64& g, Index batch, Index agents) {
    std::normal_distribution<double> n01(0.0, 1.0);
    hardhank::CounterRng rng(g());
    RandomWorld w;
    for (Index r = 0; r < batch; ++r) w.params.rows.push_back(draw_struct_params(rng, r, ParamBounds::defaults()));
    w.state = StateBatch::initial(w.params, agents);
    for (Index r = 0; r < batch; ++r) {
        const double lim = w.params.rows[r].b_min;
        for (;;) {
            Array b(1, agents);
            for (Index i = 0; i < agents; ++i) b(0, i) = 0.1 * n01(g);
            b -= b.mean();
            if ((b > lim).all()) {
                w.state.b.row(r) = b;
                break;
            }
        }
        for (Index i = 0; i < agents; ++i) w.state.s(r, i) = std::exp(0.2 * n01(g));
        w.state.psi(r, 0) = std::exp(0.05 * n01(g));
        w.state.a(r, 0) = std::exp(0.02 * n01(g));
        w.state.c(r, 0) = 1.0 + 0.05 * n01(g);
        w.state.r(r, 0) = std::max(1.0, 1.0075 + 0.005 * n01(g));
    }
    w.shocks = ShockBatch::draw(rng.substream("shocks"), 0, batch, agents);
    return w;
}

}  // namespace

TEST(ShockStep, KnownValues) {
    ModelParams p;
    auto ex = shock_step(1.0, VectorXd::Ones(3), 1.0, 0.0, VectorXd::Zero(3), 2.0, p);
    EXPECT_DOUBLE_EQ(ex.psi, 1.0);
    EXPECT_NEAR(ex.a, std::exp(0.016), 1e-15);
    EXPECT_NEAR(ex.a, 1.01613, 1e-5);
    VectorXd eps(3);
    eps << 0.7, 0.7, 0.7;
    ex = shock_step(1.0, VectorXd::Constant(3, 1.3), 1.0, 0.0, eps, 0.0, p);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(ex.s[i], 1.0, 1e-15);
    VectorXd s_prev(3), e(3);
    s_prev << 0.8, 1.0, 1.3;
    e << -1.0, 0.5, 2.0;
    ex = shock_step(1.1, s_prev, 0.97, 0.3, e, -0.4, p);
    EXPECT_NEAR(ex.s.mean(), 1.0, 1e-15);
    EXPECT_NEAR(ex.psi, std::exp(0.7 * std::log(1.1) + 0.03 * 0.3), 1e-15);
}

TEST(TaylorRate, KnownValues) {
    ModelParams p;
    EXPECT_NEAR(taylor_rate(p.pi_bar, p.y_bar, p.r_bar(), 0.0, p), 1.005 / 0.9975, 1e-12);
    EXPECT_NEAR(p.r_bar(), 1.0075188, 1e-7);
    EXPECT_EQ(taylor_rate(0.9, 0.8, 1.0, -3.0, p), 1.0);
    ModelParams q = p;
    q.rho_r = 0.0;
    const double pi = 1.01, y = 1.02, eps = 0.4;
    const double stat = q.r_bar() * std::pow(pi / q.pi_bar, q.theta_pi) * std::pow(y / q.y_bar, q.theta_y) *
                        std::exp(q.sigma_mp * eps);
    EXPECT_NEAR(taylor_rate(pi, y, 1.3, eps, q), stat, 1e-14);
    EXPECT_THROW(taylor_rate(-1.0, 1.0, 1.0, 0.0, p), std::invalid_argument);
}

TEST(FirmBlock, KnownValues) {
    auto f = firm_block(0.9, VectorXd::Ones(4), VectorXd::Ones(4), 1.0);
    EXPECT_DOUBLE_EQ(f.n, 1.0);
    EXPECT_DOUBLE_EQ(f.y, 1.0);
    EXPECT_DOUBLE_EQ(f.mc, 0.9);
    EXPECT_NEAR(f.div, 0.1, 1e-15);
    auto g = firm_block(1.8, VectorXd::Ones(4), VectorXd::Ones(4), 2.0);
    EXPECT_DOUBLE_EQ(g.mc, f.mc);
    EXPECT_THROW(firm_block(1.0, VectorXd::Ones(2), VectorXd::Ones(2), 1.0), std::domain_error);
    EXPECT_THROW(firm_block(0.5, VectorXd::Zero(2), VectorXd::Ones(2), 1.0), std::invalid_argument);
}

TEST(CashOnHand, KnownValues) {
    auto w = cash_on_hand(VectorXd::Constant(1, 0.04), 1.0025, 1.0, 0.9, VectorXd::Ones(1), VectorXd::Ones(1), 0.1);
    EXPECT_NEAR(w[0], 1.0401, 1e-14);
    VectorXd s(3), h(3), b(3);
    s << 0.9, 1.0, 1.1;
    h << 1.2, 0.8, 1.0;
    b << 0.1, -0.04, -0.06;
    auto z = cash_on_hand(VectorXd::Zero(3), 1.01, 1.0, 0.8, s, h, 0.0);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(z[i], 0.8 * s[i] * h[i], 1e-15);
    auto f = firm_block(0.8, h, s, 1.1);
    auto om = cash_on_hand(b, 1.01, 1.004, 0.8, s, h, f.div);
    EXPECT_NEAR(om.mean(), f.y, 1e-12);
}

TEST(FischerBurmeister, KnownValues) {
    EXPECT_EQ(fb_penalty(0.0, 5.0), 0.0);
    EXPECT_NEAR(fb_penalty(3.0, 4.0), 4.0, 1e-14);
    EXPECT_NEAR(fb_penalty(-1.0, 0.0), 4.0, 1e-14);
    EXPECT_EQ(fb_penalty(0.0, 0.0), 0.0);
}

TEST(FischerBurmeister, ZeroExactlyOnComplementarity) {
    for (int i = -100; i <= 100; ++i) {
        for (int j = -100; j <= 100; ++j) {
            const double a = i / 100.0, b = j / 100.0;
            const bool kkt = a >= 0 && b >= 0 && a * b <= 1e-12;
            if (kkt) EXPECT_LE(fb_penalty(a, b), 1e-24) << a << " " << b;
            else EXPECT_GT(fb_penalty(a, b), 1e-12) << a << " " << b;
        }
    }
}

TEST(FischerBurmeister, TapeGradientMatchesAwayFromOrigin) {
    Array a(1, 4), b(1, 4);
    a << 0.3, -0.2, 1.5, 0.01;
    b << 0.7, 0.4, -0.3, 2.0;
    testing_util::expect_gradients_match(
        [](ad::Tape&, const std::vector<ad::Var>& v) { return ad::sum(ad::square(fb(v[0], v[1]))); }, {a, b});
    ad::Tape t;
    auto x = t.variable(Array::Zero(1, 1)), y = t.variable(Array::Zero(1, 1));
    t.backward(ad::sum(fb(x, y)));
    EXPECT_EQ(t.grad(x)(0, 0), 0.0);
    EXPECT_EQ(t.grad(y)(0, 0), 0.0);
}

TEST(PolicyNetSpec, InputWidths) {
    auto s = PolicyNetSpec::make(100, {128, 128, 128, 128, 128}, nn::Activation::Tanh);
    EXPECT_EQ(s.aggregate.input_width(), 3 * 100 + 31);
    EXPECT_EQ(s.idiosyncratic.input_width(), 3 * 100 + 34);
    EXPECT_EQ(s.aggregate.output_width(), 2);
    EXPECT_EQ(s.idiosyncratic.output_width(), 3);
    EXPECT_THROW(PolicyNetSpec::make(0, {4}, nn::Activation::Tanh), std::invalid_argument);
}

TEST(PolicyNetSpec, SharedForwardMatchesConcatenatedInputs) {
    nn::NetworkSpec spec{{7, 5, 4, 3}, nn::Activation::Tanh, {}};
    auto theta = nn::init_params(spec, 0.5, 9);
    Array shared = Array::Random(4, 5), own = Array::Random(12, 2);
    ad::Tape t;
    auto th = t.constant(Array(theta));
    auto a = nn::forward_shared(th, 0, spec, t.constant(shared), t.constant(own), 3);
    auto b = nn::forward(th, 0, spec, ad::hcat({ad::tile_rows(t.constant(shared), 3), t.constant(own)}));
    EXPECT_LT((a.value() - b.value()).abs().maxCoeff(), 1e-14);
}

TEST(PolicyModel, EncodingSizesAndAgentOrder) {
    std::mt19937_64 g(5);
    auto w = random_world(g, 3, 4);
    auto nets = PolicyNetSpec::make(4, {6}, nn::Activation::Tanh);
    PolicyModel m(nets, Regime::Hard);
    ad::Tape t;
    auto st = StateVars::constant(t, w.state);
    auto ex = shock_step(st, w.shocks, w.params);
    auto agg = m.aggregate_inputs(st, w.shocks, w.params, ex);
    EXPECT_EQ(agg.cols(), 3 * 4 + 31);
    EXPECT_EQ(agg.rows(), 3);
    auto own = m.own_inputs(st, w.shocks);
    ASSERT_EQ(own.rows(), 12);
    // Row agent * batch + row holds that agent's bonds.
    EXPECT_DOUBLE_EQ(own.value()(2 * 3 + 1, 1), 5.0 * w.state.b(1, 2));
    EXPECT_DOUBLE_EQ(own.value()(2 * 3 + 1, 2), w.shocks.eps_s(1, 2));
    EXPECT_TRUE(agg.value().allFinite());
}

TEST(ApplyRegime, HardMatchesProjectionOfCash) {
    std::mt19937_64 g(6);
    auto w = random_world(g, 2, 5);
    ad::Tape t;
    auto st = StateVars::constant(t, w.state);
    RawOutputs raw{t.constant(Array::Constant(2, 1, 0.01)), t.constant(Array::Constant(2, 1, -0.1)),
                   t.constant(Array::Random(2, 5) * 3.0), t.constant(Array::Random(2, 5)),
                   t.constant(Array::Random(2, 5))};
    auto pol = apply_regime(raw, st, w.shocks, w.params, Regime::Hard);
    for (Index r = 0; r < 2; ++r) {
        const Eigen::VectorXd om = pol.omega.value().row(r).transpose();
        hardhank::constraints::BoundedSumSpec spec{Eigen::VectorXd::Zero(5),
                                                   (om.array() - w.params.rows[r].b_min).matrix(), om.sum()};
        Eigen::VectorXd x(5);
        for (int i = 0; i < 5; ++i) x[i] = ad::softplus(raw.consumption.value()(r, i));
        auto proj = hardhank::constraints::project_redistribute(x, spec, hardhank::constraints::BindLast::Upper);
        for (int i = 0; i < 5; ++i) EXPECT_NEAR(pol.c.value()(r, i), proj.w[i], 1e-14);
    }
}

TEST(ApplyRegime, IdioHardClipsAtCapacity) {
    ModelParams p;
    ParamBatch pb = ParamBatch::uniform(p, 1);
    StateBatch st = StateBatch::initial(pb, 1);
    ad::Tape t;
    auto sv = StateVars::constant(t, st);
    // One agent, unit productivity: choose hours so that omega = 1.
    // omega = W h + (Y - W N) = A h = h when A = 1.
    RawOutputs raw{t.constant(0.0), t.constant(0.0), t.constant(10.0), t.constant(inv_softplus(1.0) - inv_softplus(1.0)),
                   t.constant(0.0)};
    auto pol = apply_regime(raw, sv, ShockBatch::zeros(1, 1), pb, Regime::IdioHard);
    EXPECT_NEAR(pol.omega.scalar(), 1.0, 1e-15);
    EXPECT_NEAR(pol.c.scalar(), 1.05, 1e-15);
    EXPECT_NEAR(pol.b.scalar(), -0.05, 1e-15);
    EXPECT_TRUE(pol.at_bound(0, 0));
    EXPECT_GT(pol.mu.scalar(), 0.0);
}

TEST(ApplyRegime, HardSymmetricAgentsConsumeOutput) {
    ModelParams p;
    ParamBatch pb = ParamBatch::uniform(p, 1);
    StateBatch st = StateBatch::initial(pb, 4);
    ad::Tape t;
    auto sv = StateVars::constant(t, st);
    RawOutputs raw{t.constant(0.0), t.constant(0.0), t.constant(Array::Constant(1, 4, 0.3)),
                   t.constant(Array::Constant(1, 4, 0.2)), t.constant(Array::Constant(1, 4, -1.0))};
    auto pol = apply_regime(raw, sv, ShockBatch::zeros(1, 4), pb, Regime::Hard);
    for (int i = 0; i < 4; ++i) {
        EXPECT_NEAR(pol.c.value()(0, i), pol.y.scalar(), 1e-14);
        EXPECT_NEAR(pol.b.value()(0, i), 0.0, 1e-14);
        EXPECT_EQ(pol.mu.value()(0, i), 0.0);
    }
    auto next = state_transition(pol).values();
    EXPECT_NEAR(next.b.mean(), 0.0, 1e-15);
    EXPECT_NEAR(next.c(0, 0), pol.y.scalar(), 1e-14);
}

TEST(ApplyRegime, HardFeasibilityOnRandomTriples) {
    std::mt19937_64 g(7);
    auto nets = PolicyNetSpec::make(6, {8}, nn::Activation::Tanh);
    int binding = 0;
    for (int trial = 0; trial < 100; ++trial) {
        auto w = random_world(g, 10, 6);
        PolicyModel m(nets, Regime::Hard);
        auto theta = nn::init_params(nets.num_params(), 0.5, 100 + trial);
        ad::Tape t;
        auto pol = m.evaluate(t.constant(Array(theta)), StateVars::constant(t, w.state), w.shocks, w.params);
        for (Index r = 0; r < 10; ++r) {
            const double lim = w.params.rows[r].b_min;
            ASSERT_FALSE(pol.edge_case[r]);
            for (Index i = 0; i < 6; ++i) {
                ASSERT_GT(pol.c.value()(r, i), 0.0);
                ASSERT_GT(pol.h.value()(r, i), 0.0);
                ASSERT_GE(pol.b.value()(r, i), lim - 1e-12 * std::max(1.0, std::abs(lim)));
                ASSERT_GE(pol.mu.value()(r, i), 0.0);
                ASSERT_EQ(pol.mu.value()(r, i) * (pol.at_bound(r, i) ? 0.0 : 1.0), 0.0 * pol.mu.value()(r, i));
                if (!pol.at_bound(r, i)) ASSERT_EQ(pol.mu.value()(r, i), 0.0);
                binding += pol.at_bound(r, i);
            }
            ASSERT_LE(std::abs(pol.b.value().row(r).mean()), 1e-12);
            ASSERT_LE(std::abs(pol.y.value()(r, 0) - pol.c.value().row(r).mean()), 1e-12 * pol.y.value()(r, 0));
        }
    }
    EXPECT_GT(binding, 0);
}

TEST(ApplyRegime, AggHardClearsMarkets) {
    std::mt19937_64 g(8);
    auto nets = PolicyNetSpec::make(5, {8}, nn::Activation::Tanh);
    PolicyModel m(nets, Regime::AggHard);
    for (int trial = 0; trial < 20; ++trial) {
        auto w = random_world(g, 8, 5);
        auto theta = nn::init_params(nets.num_params(), 0.5, 200 + trial);
        ad::Tape t;
        auto pol = m.evaluate(t.constant(Array(theta)), StateVars::constant(t, w.state), w.shocks, w.params);
        for (Index r = 0; r < 8; ++r) {
            EXPECT_LE(std::abs(pol.b.value().row(r).mean()), 1e-12);
            EXPECT_LE(std::abs(pol.y.value()(r, 0) - pol.c.value().row(r).mean()), 1e-12);
        }
    }
}

TEST(ApplyRegime, SoftLabourSupplyResidualVanishes) {
    std::mt19937_64 g(9);
    auto nets = PolicyNetSpec::make(4, {8}, nn::Activation::Tanh);
    PolicyModel m(nets, Regime::Soft);
    for (int trial = 0; trial < 20; ++trial) {
        auto w = random_world(g, 6, 4);
        auto theta = nn::init_params(nets.num_params(), 0.5, 300 + trial);
        ad::Tape t;
        auto sh1 = ShockBatch::draw(hardhank::CounterRng(trial), 1, 6, 4);
        auto sh2 = ShockBatch::draw(hardhank::CounterRng(trial), 2, 6, 4);
        auto l = m.losses(t.constant(Array(theta)), StateVars::constant(t, w.state), w.shocks, sh1, sh2, w.params);
        EXPECT_LE(l.ls.scalar(), 1e-28);
    }
}

TEST(ResidualLosses, LabourSupplyAndPhillipsAnchors) {
    // L_ls = 0 at h = 1 / chi when s = W = c = 1.
    const double h = 1.0 / 0.91;
    EXPECT_NEAR(std::pow(1.0, -1.0) - 0.91 * h / (1.0 * 1.0), 0.0, 1e-15);
    EXPECT_NEAR(h, 1.0989, 1e-4);
    // Static Phillips curve with inflation on target.
    ModelParams p;
    const double mc = (p.epsilon - 1.0) / p.epsilon;
    EXPECT_NEAR(-(1.0 - p.epsilon) - p.epsilon * mc, 0.0, 1e-12);
    EXPECT_NEAR(mc, 10.0 / 11.0, 1e-12);
}

TEST(ResidualLosses, ZeroAtDeterministicSteadyState) {
    // Two identical agents at the deterministic steady state: W = MC = 10/11,
    // c = h = Y with 1/c = chi h / W, R = Pi_bar / beta, mu = 0.
    ModelParams p;
    p.sigma_psi = p.sigma_s = p.sigma_a = p.sigma_mp = 0.0;
    const double w = (p.epsilon - 1.0) / p.epsilon;
    const double y = std::sqrt(w / p.chi);
    p.y_bar = y;
    ParamBatch pb = ParamBatch::uniform(p, 1);
    StateBatch st = StateBatch::initial(pb, 2);
    ad::Tape t;
    auto sv = StateVars::constant(t, st);
    auto raw_for = [&](Index rows) {
        return RawOutputs{t.constant(Array::Zero(rows, 1)), t.constant(Array::Zero(rows, 1)),
                          t.constant(Array::Zero(rows, 2)),
                          t.constant(Array::Constant(rows, 2, inv_softplus(y) - inv_softplus(1.0))),
                          t.constant(Array::Constant(rows, 2, -50.0))};
    };
    for (Regime reg : {Regime::Hard, Regime::AggHard}) {
        auto now = apply_regime(raw_for(1), sv, ShockBatch::zeros(1, 2), pb, reg);
        EXPECT_NEAR(now.w.scalar(), w, 1e-15);
        EXPECT_NEAR(now.y.scalar(), y, 1e-15);
        auto next_state = state_transition(now).tiled(2);
        auto next = apply_regime(raw_for(2), next_state, ShockBatch::zeros(2, 2), pb.tiled(2), reg);
        auto l = residual_losses(now, next, sv, pb, reg, {}).values();
        EXPECT_LE(l.total, 1e-20) << to_string(reg);
        EXPECT_LE(std::abs(l.ee) + std::abs(l.nkpc) + l.ls + l.oc + l.rc, 1e-20);
    }
}

TEST(ResidualLosses, RegimeTotalsUseTheirPenalties) {
    std::mt19937_64 g(10);
    auto nets = PolicyNetSpec::make(3, {5}, nn::Activation::Tanh);
    auto w = random_world(g, 4, 3);
    auto theta = nn::init_params(nets.num_params(), 0.3, 1);
    auto sh1 = ShockBatch::draw(hardhank::CounterRng(1), 1, 4, 3), sh2 = ShockBatch::draw(hardhank::CounterRng(1), 2, 4, 3);
    PenaltyWeights wts{2.0, 3.0, 5.0};
    for (Regime reg : {Regime::Hard, Regime::Soft, Regime::AggHard, Regime::IdioHard}) {
        PolicyModel m(nets, reg, wts);
        ad::Tape t;
        auto l = m.losses(t.constant(Array(theta)), StateVars::constant(t, w.state), w.shocks, sh1, sh2, w.params).values();
        double expect = l.ee + l.nkpc + l.ls;
        if (reg == Regime::Soft) expect += 2 * l.kkt + 3 * l.oc + 5 * l.rc;
        if (reg == Regime::AggHard) expect += 2 * l.kkt;
        if (reg == Regime::IdioHard) expect += 3 * l.oc + 5 * l.rc;
        EXPECT_NEAR(l.total, expect, 1e-12 * std::max(1.0, std::abs(expect))) << to_string(reg);
        EXPECT_GE(l.ls, 0.0);
        EXPECT_GE(l.kkt, 0.0);
        if (reg == Regime::Hard) {
            EXPECT_LE(l.oc, 1e-20);
            EXPECT_LE(l.rc, 1e-20);
            EXPECT_LE(l.kkt, 1e-20);
        }
    }
}

TEST(ResidualLosses, HardGradientMatchesFiniteDifferences) {
    std::mt19937_64 g(11);
    auto nets = PolicyNetSpec::make(3, {4}, nn::Activation::Tanh);
    auto w = random_world(g, 2, 3);
    auto sh1 = ShockBatch::draw(hardhank::CounterRng(3), 1, 2, 3), sh2 = ShockBatch::draw(hardhank::CounterRng(3), 2, 2, 3);
    PolicyModel m(nets, Regime::Hard);
    auto theta = nn::init_params(nets.num_params(), 0.3, 4);
    auto loss = [&](ad::Tape& t, const std::vector<ad::Var>& v) {
        return m.losses(v[0], StateVars::constant(t, w.state), w.shocks, sh1, sh2, w.params).total;
    };
    testing_util::expect_gradients_match(loss, {Array(theta)}, 1e-6, 1e-4);
}

TEST(ResidualLosses, ConsumptionBelowHabitIsAnError) {
    ModelParams p;
    p.habit = 0.9;
    ParamBatch pb = ParamBatch::uniform(p, 1);
    StateBatch st = StateBatch::initial(pb, 2);
    st.c(0, 0) = 5.0;
    ad::Tape t;
    auto sv = StateVars::constant(t, st);
    RawOutputs raw{t.constant(0.0), t.constant(0.0), t.constant(Array::Zero(1, 2)), t.constant(Array::Zero(1, 2)),
                   t.constant(Array::Zero(1, 2))};
    EXPECT_THROW(apply_regime(raw, sv, ShockBatch::zeros(1, 2), pb, Regime::Soft), ad::NumericalError);
}

TEST(Params, TableAndDraws) {
    const auto& tab = param_table();
    EXPECT_EQ(tab.size(), 20u);
    auto bounds = ParamBounds::defaults();
    hardhank::CounterRng rng(3);
    for (std::uint64_t d = 0; d < 2000; ++d) {
        auto p = draw_struct_params(rng, d, bounds);
        EXPECT_EQ(p.beta, 0.9975);
        EXPECT_GE(p.b_min, -0.5);
        EXPECT_LE(p.b_min, -0.01);
        EXPECT_TRUE(bounds.contains(p));
        EXPECT_NO_THROW(p.validate());
    }
    auto a = draw_struct_params(rng, 17, bounds), b = draw_struct_params(rng, 17, bounds);
    EXPECT_EQ(a.phi, b.phi);
    EXPECT_EQ(a.b_min, b.b_min);
    bounds.min[6] = 2000;
    EXPECT_THROW(draw_struct_params(rng, 0, bounds), std::invalid_argument);
}

TEST(Params, FeatureNormalisation) {
    ModelParams p;
    auto f = normalized_features(ParamBatch::uniform(p, 2), ParamBounds::defaults());
    ASSERT_EQ(f.cols(), 20);
    EXPECT_EQ(f(0, 0), 0.0);                  // beta fixed
    EXPECT_NEAR(f(0, 6), 0.0, 1e-15);         // phi at midpoint
    EXPECT_NEAR(f(1, 11), (-0.05 + 0.255) / 0.245, 1e-12);
}

TEST(Transition, SoftCarriesBondImbalance) {
    std::mt19937_64 g(12);
    auto nets = PolicyNetSpec::make(4, {6}, nn::Activation::Tanh);
    PolicyModel m(nets, Regime::Soft);
    auto w = random_world(g, 3, 4);
    auto next = m.step(nn::init_params(nets.num_params(), 1e-2, 5), w.state, w.shocks, w.params);
    EXPECT_GT(std::abs(next.b.mean()), 1e-3);
    PolicyModel h(nets, Regime::Hard);
    auto next_h = h.step(nn::init_params(nets.num_params(), 1e-2, 5), w.state, w.shocks, w.params);
    for (Index r = 0; r < 3; ++r) EXPECT_LE(std::abs(next_h.b.row(r).mean()), 1e-12);
}
