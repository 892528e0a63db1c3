#include "hardhank/model/economy.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace hardhank::model {

std::string to_string(Regime r) {
    switch (r) {
        case Regime::Hard: return "hard";
        case Regime::Soft: return "soft";
        case Regime::AggHard: return "agg-hard";
        case Regime::IdioHard: return "idio-hard";
    }
    return "?";
}

Regime parse_regime(const std::string& name) {
    if (name == "hard") return Regime::Hard;
    if (name == "soft") return Regime::Soft;
    if (name == "agg-hard" || name == "agghard" || name == "agg") return Regime::AggHard;
    if (name == "idio-hard" || name == "idiohard" || name == "idio") return Regime::IdioHard;
    throw std::invalid_argument("unknown regime '" + name + "' (expected hard, soft, agg-hard or idio-hard)");
}

void PenaltyWeights::validate() const {
    if (!(kkt >= 0.0 && oc >= 0.0 && rc >= 0.0)) throw std::invalid_argument("penalty weights must be non-negative");
}

namespace {

Var constant(const Var& like, Array a) { return like.tape()->constant(std::move(a)); }

Array col(const ParamBatch& p, double ModelParams::*m) { return p.column(m); }

Array row_vector(const Eigen::VectorXd& v) { return v.transpose(); }

}  // namespace

// ---------------------------------------------------------------------------

ExogenousVars shock_step(const StateVars& st, const ShockBatch& sh, const ParamBatch& p) {
    const Index agents = st.agents();
    Var psi = ad::exp(ad::log(st.psi) * col(p, &ModelParams::rho_psi) +
                      constant(st.psi, col(p, &ModelParams::sigma_psi) * sh.eps_psi));
    Var a = ad::exp(ad::log(st.a) * col(p, &ModelParams::rho_a) +
                    constant(st.a, col(p, &ModelParams::sigma_a) * sh.eps_a));
    Array sig_s = col(p, &ModelParams::sigma_s).replicate(1, agents) * sh.eps_s;
    Var raw = ad::exp(ad::log(st.s) * col(p, &ModelParams::rho_s) + constant(st.s, sig_s));
    return {psi, raw / ad::row_mean(raw), a};
}

Exogenous shock_step(double psi_prev, const Eigen::VectorXd& s_prev, double a_prev, double eps_psi,
                     const Eigen::VectorXd& eps_s, double eps_a, const ModelParams& p) {
    if (s_prev.size() != eps_s.size()) throw std::invalid_argument("shock_step: productivity and shock lengths differ");
    ad::Tape t;
    const Index n = s_prev.size();
    StateBatch st{Array::Zero(1, n), row_vector(s_prev), Array::Constant(1, 1, psi_prev),
                  Array::Constant(1, 1, a_prev), Array::Ones(1, 1), Array::Ones(1, 1)};
    ShockBatch sh{row_vector(eps_s), Array::Constant(1, 1, eps_psi), Array::Constant(1, 1, eps_a), Array::Zero(1, 1)};
    auto ex = shock_step(StateVars::constant(t, st), sh, ParamBatch::uniform(p, 1));
    return {ex.psi.scalar(), ex.s.value().row(0).transpose(), ex.a.scalar()};
}

Var taylor_rate(const Var& pi, const Var& y, const Var& r_prev, const ShockBatch& sh, const ParamBatch& p) {
    const Array rho = col(p, &ModelParams::rho_r);
    const Array pibar = col(p, &ModelParams::pi_bar);
    const Array rbar = pibar / col(p, &ModelParams::beta);
    Var target = ad::log(pi / constant(pi, pibar)) * col(p, &ModelParams::theta_pi) +
                 ad::log(y / constant(y, col(p, &ModelParams::y_bar))) * col(p, &ModelParams::theta_y) +
                 constant(pi, rbar.log());
    Var log_r = ad::log(r_prev) * rho + target * Array(1.0 - rho) +
                constant(pi, col(p, &ModelParams::sigma_mp) * sh.eps_mp);
    return ad::maximum(ad::exp(log_r), pi.tape()->constant(1.0));
}

double taylor_rate(double pi, double y, double r_prev, double eps_mp, const ModelParams& p) {
    if (!(pi > 0.0 && y > 0.0 && r_prev > 0.0))
        throw std::invalid_argument("taylor_rate: inflation, output and lagged rate must be positive");
    ad::Tape t;
    ShockBatch sh = ShockBatch::zeros(1, 1);
    sh.eps_mp(0, 0) = eps_mp;
    return taylor_rate(t.constant(pi), t.constant(y), t.constant(r_prev), sh, ParamBatch::uniform(p, 1)).scalar();
}

FirmBlock firm_block(double w, const Eigen::VectorXd& hours, const Eigen::VectorXd& s, double a) {
    if (hours.size() != s.size() || hours.size() == 0)
        throw std::invalid_argument("firm_block: hours and productivity must be non-empty and equally long");
    if (!(hours.array() > 0.0).all()) throw std::invalid_argument("firm_block: hours must be positive");
    if (!(a > 0.0)) throw std::invalid_argument("firm_block: TFP must be positive");
    if (!(w < a)) {
        std::ostringstream os;
        os << "firm_block: wage " << w << " is not below TFP " << a << "; dividends would be non-positive";
        throw std::domain_error(os.str());
    }
    FirmBlock f;
    f.n = s.cwiseProduct(hours).mean();
    f.y = a * f.n;
    f.mc = w / a;
    f.div = f.y - w * f.n;
    return f;
}

Eigen::VectorXd cash_on_hand(const Eigen::VectorXd& b_prev, double r_prev, double pi, double w,
                             const Eigen::VectorXd& s, const Eigen::VectorXd& hours, double div) {
    if (!(pi > 0.0)) throw std::invalid_argument("cash_on_hand: inflation must be positive");
    if (b_prev.size() != s.size() || s.size() != hours.size())
        throw std::invalid_argument("cash_on_hand: per-agent vectors differ in length");
    return (w * s.array() * hours.array() + div + (r_prev / pi) * b_prev.array()).matrix();
}

// ---------------------------------------------------------------------------

double fb(double a, double b) { return a + b - std::hypot(a, b); }
double fb_penalty(double a, double b) {
    const double v = fb(a, b);
    return v * v;
}

Var fb(const Var& slack, const Var& multiplier) {
    ad::Tape& t = *slack.tape();
    const Index rows = std::max(slack.rows(), multiplier.rows()), cols = std::max(slack.cols(), multiplier.cols());
    const Array a = ad::broadcast_to(slack.value(), rows, cols);
    const Array b = ad::broadcast_to(multiplier.value(), rows, cols);
    const Array r = (a.square() + b.square()).sqrt();
    const int ia = slack.id(), ib = multiplier.id();
    // At the origin the (one-sided) derivative is replaced by zero.
    const Array safe = (r > 0.0).select(r, 1.0);
    const Array da = (r > 0.0).select(1.0 - a / safe, 0.0);
    const Array db = (r > 0.0).select(1.0 - b / safe, 0.0);
    return t.push(a + b - r, "fischer_burmeister", {slack, multiplier}, [ia, ib, da, db](ad::Tape& tp, int self) {
        const Array& g = tp.node_grad(self);
        if (tp.needs_grad(ia)) {
            const Array& av = tp.node_value(ia);
            tp.accumulate(ia, ad::reduce_to(g * da, av.rows(), av.cols()));
        }
        if (tp.needs_grad(ib)) {
            const Array& bv = tp.node_value(ib);
            tp.accumulate(ib, ad::reduce_to(g * db, bv.rows(), bv.cols()));
        }
    });
}

// ---------------------------------------------------------------------------

namespace {

constexpr double kLn_e_minus_1 = 0.54132485461291810;  // log(e - 1): softplus of it is 1

constraints::BoolArray bound_mask(const Array& b, const Array& b_min) {
    const Array lim = b_min.replicate(1, b.cols());
    const Array tol = constraints::kBindingTolerance * lim.abs().max(1.0);
    return (b - lim).abs() <= tol;
}

Policy apply_regime_impl(const RawOutputs& raw, const StateVars& st, const ShockBatch& sh, const ParamBatch& p,
                         Regime regime, const ExogenousVars& ex) {
    ad::Tape& t = *raw.pi.tape();
    const Index rows = st.batch(), agents = st.agents();
    const Array b_min = col(p, &ModelParams::b_min);
    const Array eps = col(p, &ModelParams::epsilon);
    const Array sigma = col(p, &ModelParams::sigma);
    const Array habit = col(p, &ModelParams::habit);

    Policy pol;
    pol.psi = ex.psi;
    pol.s = ex.s;
    pol.a = ex.a;
    pol.pi = ad::exp(raw.pi) * col(p, &ModelParams::pi_bar);
    pol.w = ex.a * ad::sigmoid(raw.wage + t.constant(Array((eps - 1.0).log())));

    if (regime == Regime::Soft) {
        pol.c = ad::softplus(raw.consumption);
        Var lambda = ad::pow(pol.c - st.c * habit, t.constant(Array(-sigma)));
        Var rhs = pol.s * pol.w * lambda / t.constant(col(p, &ModelParams::chi));
        pol.h = ad::pow(rhs, t.constant(Array(1.0 / col(p, &ModelParams::eta))));
    } else {
        pol.h = ad::softplus(raw.hours + kLn_e_minus_1);
    }

    Var labour = pol.s * pol.h;
    pol.n = ad::row_mean(labour);
    pol.y = ex.a * pol.n;
    pol.mc = pol.w / ex.a;
    pol.div = pol.y - pol.w * pol.n;
    pol.omega = pol.w * labour + pol.div + st.r / pol.pi * st.b;

    Var capacity = pol.omega - t.constant(b_min);  // consumption that leaves b exactly at the limit
    pol.edge_case.assign(static_cast<std::size_t>(rows), false);
    switch (regime) {
        case Regime::Hard: {
            const Array& cap = capacity.value();
            for (Index r = 0; r < rows; ++r) {
                if (!(cap.row(r) > 0.0).all() || !(pol.omega.value().row(r).sum() > 0.0)) {
                    std::ostringstream os;
                    os << "row " << r << ": cash on hand leaves no feasible consumption (min capacity "
                       << cap.row(r).minCoeff() << ", total cash " << pol.omega.value().row(r).sum() << ")";
                    throw ad::NumericalError("project_redistribute", os.str());
                }
            }
            auto proj = constraints::project_redistribute(ad::softplus(raw.consumption), t.constant(0.0), capacity,
                                                          ad::row_sum(pol.omega), constraints::BindLast::Upper);
            pol.c = proj.w;
            pol.edge_case = proj.edge_case;
            break;
        }
        case Regime::AggHard: {
            Var x = ad::softplus(raw.consumption);
            pol.c = ad::row_mean(pol.omega) * x / ad::row_mean(x);
            break;
        }
        case Regime::IdioHard: pol.c = ad::minimum(ad::softplus(raw.consumption), capacity); break;
        case Regime::Soft: break;
    }

    pol.b = pol.omega - pol.c;
    pol.at_bound = bound_mask(pol.b.value(), b_min);
    Var mu = ad::softplus(raw.multiplier);
    if (regime == Regime::Hard || regime == Regime::IdioHard) mu = mu * Array(pol.at_bound.cast<double>());
    pol.mu = mu;
    pol.r = taylor_rate(pol.pi, pol.y, st.r, sh, p);
    (void)agents;
    return pol;
}

}  // namespace

Policy apply_regime(const RawOutputs& raw, const StateVars& st, const ShockBatch& sh, const ParamBatch& p,
                    Regime regime) {
    return apply_regime_impl(raw, st, sh, p, regime, shock_step(st, sh, p));
}

LossBreakdown LossVars::values() const {
    return {ee.scalar(), nkpc.scalar(), ls.scalar(), kkt.scalar(), oc.scalar(), rc.scalar(), total.scalar()};
}

LossVars residual_losses(const Policy& now, const Policy& next, const StateVars& st, const ParamBatch& p,
                         Regime regime, const PenaltyWeights& weights) {
    ad::Tape& t = *now.c.tape();
    const Index rows = st.batch(), agents = st.agents();
    if (next.c.rows() != 2 * rows) throw std::invalid_argument("residual_losses: expected two stacked continuation draws");
    const Array beta = col(p, &ModelParams::beta);
    const Array sigma = col(p, &ModelParams::sigma);
    const Array habit = col(p, &ModelParams::habit);
    const Array phi = col(p, &ModelParams::phi);
    const Array eps = col(p, &ModelParams::epsilon);
    const Array pibar = col(p, &ModelParams::pi_bar);
    const Array chi = col(p, &ModelParams::chi);
    const Array eta = col(p, &ModelParams::eta);
    const Var neg_sigma = t.constant(Array(-sigma));

    Var lambda = ad::pow(now.c - st.c * habit, neg_sigma);
    Var c_now = ad::row_mean(now.c);

    auto draw = [&](const Var& v, int j) { return ad::block(v, j * rows, 0, rows, v.cols()); };
    Var ee_j[2], nk_j[2];
    for (int j = 0; j < 2; ++j) {
        Var c1 = draw(next.c, j), pi1 = draw(next.pi, j), psi1 = draw(next.psi, j), y1 = draw(next.y, j);
        Var lambda1 = ad::pow(c1 - c_now * habit, neg_sigma);
        Var disc = ad::exp(psi1 - now.psi) * now.r * beta / pi1;  // batch x 1
        ee_j[j] = 1.0 - now.mu - disc * (lambda1 / lambda);
        Var infl1 = pi1 / t.constant(pibar);
        Var forward = pi1 / now.r * (infl1 - 1.0) * infl1 * (y1 / now.y) * Array(beta * phi);
        nk_j[j] = (now.pi / t.constant(pibar) - 1.0) * phi - t.constant(Array(1.0 - eps)) - now.mc * eps - forward;
    }

    LossVars out;
    out.ee = ad::mean(ee_j[0] * ee_j[1]);
    out.nkpc = ad::mean(nk_j[0] * nk_j[1]);
    Var ls = lambda - ad::pow(now.h, t.constant(eta)) * chi / (now.s * now.w);
    out.ls = ad::mean(ad::square(ls));
    out.kkt = ad::mean(ad::square(fb(now.b - t.constant(col(p, &ModelParams::b_min)), now.mu)));
    out.oc = ad::mean(ad::square(now.y - c_now));
    out.rc = ad::mean(ad::square(ad::row_mean(now.b)));

    Var total = out.ee + out.nkpc + out.ls;
    switch (regime) {
        case Regime::Hard: break;
        case Regime::Soft: total = total + out.kkt * weights.kkt + out.oc * weights.oc + out.rc * weights.rc; break;
        case Regime::AggHard: total = total + out.kkt * weights.kkt; break;
        case Regime::IdioHard: total = total + out.oc * weights.oc + out.rc * weights.rc; break;
    }
    out.total = total;
    (void)agents;
    return out;
}

StateVars state_transition(const Policy& pol) { return {pol.b, pol.s, pol.psi, pol.a, ad::row_mean(pol.c), pol.r}; }

// ---------------------------------------------------------------------------

PolicyNetSpec PolicyNetSpec::make(Index agents, const std::vector<int>& hidden, nn::Activation activation) {
    if (agents < 1) throw std::invalid_argument("PolicyNetSpec: need at least one agent");
    PolicyNetSpec s;
    s.agents = agents;
    const int agg_in = 3 * static_cast<int>(agents) + kAggregateExtraInputs;
    s.aggregate.widths.push_back(agg_in);
    s.idiosyncratic.widths.push_back(agg_in + kOwnInputs);
    for (int h : hidden) {
        s.aggregate.widths.push_back(h);
        s.idiosyncratic.widths.push_back(h);
    }
    s.aggregate.widths.push_back(2);
    s.idiosyncratic.widths.push_back(3);
    s.aggregate.activation = s.idiosyncratic.activation = activation;
    s.aggregate.heads = {{"pi", 0, 1}, {"wage", 1, 1}};
    s.idiosyncratic.heads = {{"consumption", 0, 1}, {"hours", 1, 1}, {"multiplier", 2, 1}};
    s.validate();
    return s;
}

void PolicyNetSpec::validate() const {
    aggregate.validate();
    idiosyncratic.validate();
    const int agg_in = 3 * static_cast<int>(agents) + kAggregateExtraInputs;
    if (aggregate.input_width() != agg_in || idiosyncratic.input_width() != agg_in + kOwnInputs)
        throw std::invalid_argument("PolicyNetSpec: input widths do not match the agent count");
    if (aggregate.output_width() != 2 || idiosyncratic.output_width() != 3)
        throw std::invalid_argument("PolicyNetSpec: expected 2 aggregate and 3 idiosyncratic outputs");
}

PolicyModel::PolicyModel(PolicyNetSpec nets, Regime regime, PenaltyWeights weights, ParamBounds bounds)
    : nets_(std::move(nets)), regime_(regime), weights_(weights), bounds_(bounds) {
    nets_.validate();
    weights_.validate();
    bounds_.validate();
}

Var PolicyModel::aggregate_inputs(const StateVars& st, const ShockBatch& sh, const ParamBatch& p,
                                  const ExogenousVars& ex) const {
    ad::Tape& t = *st.b.tape();
    if (st.agents() != nets_.agents) {
        std::ostringstream os;
        os << "state has " << st.agents() << " agents, network was built for " << nets_.agents;
        throw std::invalid_argument(os.str());
    }
    Array shocks(sh.batch(), 3);
    shocks << sh.eps_psi, sh.eps_a, sh.eps_mp;
    return ad::hcat({
        ad::log(st.psi) * 10.0,
        ad::log(st.a) * (1.0 / 0.03),
        (st.c - 1.0) * 10.0,
        (st.r - 1.0075) * 100.0,
        t.constant(shocks),
        ad::log(st.s) * 5.0,
        st.b * 5.0,
        t.constant(sh.eps_s),
        t.constant(normalized_features(p, bounds_)),
        ad::row_mean(st.b) * 5.0,
        ad::row_mean(ad::square(st.b)) * 25.0,
        ad::log(ex.psi) * 10.0,
        ad::log(ex.a) * (1.0 / 0.03),
    });
}

Var PolicyModel::own_inputs(const StateVars& st, const ShockBatch& sh) const {
    ad::Tape& t = *st.b.tape();
    const Index n = st.batch() * st.agents();
    return ad::hcat({ad::reshape(ad::log(st.s) * 5.0, n, 1), ad::reshape(st.b * 5.0, n, 1),
                     t.constant(Array(sh.eps_s.reshaped(n, 1)))});
}

RawOutputs PolicyModel::raw_outputs(const Var& theta, const StateVars& st, const ShockBatch& sh,
                                    const ParamBatch& p, const ExogenousVars& ex) const {
    const Index rows = st.batch(), agents = st.agents();
    Var x_agg = aggregate_inputs(st, sh, p, ex);
    Var agg = nn::forward(theta, 0, nets_.aggregate, x_agg);
    Var idio = nn::forward_shared(theta, nets_.aggregate.num_params(), nets_.idiosyncratic, x_agg,
                                  own_inputs(st, sh), agents);
    auto head = [&](const nn::NetworkSpec& spec, const Var& out, const char* name) {
        return ad::block(out, 0, spec.head(name).offset, out.rows(), 1);
    };
    auto per_agent = [&](const char* name) {
        return ad::reshape(head(nets_.idiosyncratic, idio, name), rows, agents);
    };
    return {head(nets_.aggregate, agg, "pi"), head(nets_.aggregate, agg, "wage"), per_agent("consumption"),
            per_agent("hours"), per_agent("multiplier")};
}

Policy PolicyModel::evaluate(const Var& theta, const StateVars& st, const ShockBatch& sh, const ParamBatch& p) const {
    if (static_cast<Index>(p.size()) != st.batch() || sh.batch() != st.batch())
        throw std::invalid_argument("PolicyModel::evaluate: state, shock and parameter batches differ in size");
    ExogenousVars ex = shock_step(st, sh, p);
    return apply_regime_impl(raw_outputs(theta, st, sh, p, ex), st, sh, p, regime_, ex);
}

LossVars PolicyModel::losses(const Var& theta, const StateVars& st, const ShockBatch& now, const ShockBatch& next1,
                             const ShockBatch& next2, const ParamBatch& p) const {
    Policy pol = evaluate(theta, st, now, p);
    StateVars st1 = state_transition(pol).tiled(2);
    Policy pol1 = evaluate(theta, st1, ShockBatch::stack(next1, next2), p.tiled(2));
    return residual_losses(pol, pol1, st, p, regime_, weights_);
}

StateBatch PolicyModel::step(const nn::ParamVector& theta, const StateBatch& st, const ShockBatch& sh,
                             const ParamBatch& p) const {
    ad::Tape t;
    Policy pol = evaluate(t.constant(Array(theta)), StateVars::constant(t, st), sh, p);
    return state_transition(pol).values();
}

}  // namespace hardhank::model
