#include "hardhank/analysis.hpp"

#include "hardhank/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>

namespace hardhank::analysis {

using model::ParamBatch;
using model::ShockBatch;
using model::StateBatch;
using model::StateVars;

namespace {

constexpr Index kChunk = 64;
constexpr double kZlbThreshold = 1.0 + 1e-9;

ShockBatch slice(const ShockBatch& sh, Index r0, Index n) {
    return {sh.eps_s.middleRows(r0, n), sh.eps_psi.middleRows(r0, n), sh.eps_a.middleRows(r0, n),
            sh.eps_mp.middleRows(r0, n)};
}

StateBatch empty_states(Index agents) {
    return {Array(0, agents), Array(0, agents), Array(0, 1), Array(0, 1), Array(0, 1), Array(0, 1)};
}

StateBatch repeat_rows(const StateBatch& st, Index each) {
    std::vector<Index> idx;
    for (Index s = 0; s < st.batch(); ++s)
        for (Index d = 0; d < each; ++d) idx.push_back(s);
    return st.rows(idx);
}

double tolerance_at(double bound) { return constraints::kBindingTolerance * std::max(1.0, std::abs(bound)); }

}  // namespace

Period simulate_period(const Solved& m, const StateBatch& st, const ShockBatch& sh, const ParamBatch& p) {
    ad::Tape t;
    model::Policy pol = m.model.evaluate(t.constant(Array(m.theta)), StateVars::constant(t, st), sh, p);
    Period out;
    auto& v = out.policy;
    v.pi = pol.pi.value();
    v.w = pol.w.value();
    v.r = pol.r.value();
    v.y = pol.y.value();
    v.c = pol.c.value();
    v.h = pol.h.value();
    v.mu = pol.mu.value();
    v.b = pol.b.value();
    v.omega = pol.omega.value();
    v.at_bound = pol.at_bound;
    v.edge_case = pol.edge_case;
    out.next = model::state_transition(pol).values();
    return out;
}

StateBatch ergodic_sample(const Solved& m, const model::ModelParams& gamma, Index burn_in, Index count,
                          std::uint64_t seed, Index stride) {
    if (burn_in < 0 || count < 0 || stride < 1) throw std::invalid_argument("ergodic_sample: invalid lengths");
    const Index agents = m.model.nets().agents;
    StateBatch out = empty_states(agents);
    if (count == 0) return out;
    const ParamBatch p = ParamBatch::uniform(gamma, 1);
    const CounterRng rng = CounterRng(seed).substream("sim");
    StateBatch x = draw_init_state(p, agents);
    std::vector<StateBatch> kept;
    for (Index t = 0; static_cast<Index>(kept.size()) < count; ++t) {
        if (t >= burn_in && (t - burn_in) % stride == 0) kept.push_back(x);
        if (static_cast<Index>(kept.size()) == count) break;
        try {
            x = m.model.step(m.theta, x, ShockBatch::draw(rng, static_cast<std::uint64_t>(t), 1, agents), p);
        } catch (const ad::NumericalError& e) {
            throw ad::NumericalError(e.primitive(), "ergodic_sample failed at period " + std::to_string(t));
        }
    }
    out = repeat_rows(kept.front(), count);
    for (Index k = 0; k < count; ++k) out.set_rows({k}, kept[static_cast<std::size_t>(k)]);
    return out;
}

// ---------------------------------------------------------------------------

std::string to_string(Shock s) {
    switch (s) {
        case Shock::Tfp: return "tfp";
        case Shock::MonetaryPolicy: return "mp";
        case Shock::Preference: return "pref";
        case Shock::Idiosyncratic: return "idio";
    }
    return "?";
}

Shock parse_shock(const std::string& name) {
    for (Shock s : {Shock::Tfp, Shock::MonetaryPolicy, Shock::Preference, Shock::Idiosyncratic})
        if (to_string(s) == name) return s;
    throw std::invalid_argument("unknown shock '" + name + "' (expected tfp, mp, pref or idio)");
}

const std::vector<std::string>& irf_variables() {
    static const std::vector<std::string> names{"y", "c", "pi", "r", "w", "h", "b_sd", "constrained", "c0"};
    return names;
}

namespace {

// rows x variables, in irf_variables() order.
Array irf_values(const PolicyValues& v) {
    const Index rows = v.y.rows();
    Array out(rows, static_cast<Index>(irf_variables().size()));
    for (Index r = 0; r < rows; ++r) {
        const auto b = v.b.row(r);
        const double bm = b.mean();
        out(r, 0) = v.y(r, 0);
        out(r, 1) = v.c.row(r).mean();
        out(r, 2) = v.pi(r, 0);
        out(r, 3) = v.r(r, 0);
        out(r, 4) = v.w(r, 0);
        out(r, 5) = v.h.row(r).mean();
        out(r, 6) = std::sqrt((b - bm).square().mean());
        out(r, 7) = v.at_bound.row(r).cast<double>().mean();
        out(r, 8) = v.c(r, 0);
    }
    return out;
}

void add_impulse(ShockBatch& sh, Shock shock, double size) {
    switch (shock) {
        case Shock::Tfp: sh.eps_a += size; break;
        case Shock::MonetaryPolicy: sh.eps_mp += size; break;
        case Shock::Preference: sh.eps_psi += size; break;
        case Shock::Idiosyncratic: sh.eps_s.col(0) += size; break;
    }
}

}  // namespace

double IrfResult::at(const std::string& split, const std::string& variable, Index horizon) const {
    const auto s = std::find(splits.begin(), splits.end(), split);
    const auto v = std::find(variables.begin(), variables.end(), variable);
    if (s == splits.end() || v == variables.end()) throw std::out_of_range("IrfResult::at: no " + split + "/" + variable);
    return response[static_cast<std::size_t>(s - splits.begin())][static_cast<std::size_t>(v - variables.begin())]
                   [static_cast<std::size_t>(horizon)];
}

void IrfResult::write_csv(std::ostream& out) const {
    out << "horizon,variable,split,value\n" << std::setprecision(17);
    for (std::size_t s = 0; s < splits.size(); ++s)
        for (std::size_t v = 0; v < variables.size(); ++v)
            for (std::size_t h = 0; h < response[s][v].size(); ++h)
                out << h << ',' << variables[v] << ',' << splits[s] << ',' << response[s][v][h] << '\n';
}

IrfResult generalized_irf(const Solved& m, const model::ModelParams& gamma, const StateBatch& states,
                          const IrfConfig& cfg) {
    if (states.batch() == 0) throw std::invalid_argument("generalized_irf: empty state batch");
    if (cfg.draws_per_state < 1) throw std::invalid_argument("generalized_irf: draws_per_state must be >= 1");
    if (cfg.horizons < 1) throw std::invalid_argument("generalized_irf: horizons must be >= 1");
    if (cfg.norm_periods < 0) throw std::invalid_argument("generalized_irf: norm_periods must be >= 0");
    const Index agents = m.model.nets().agents;
    if (states.agents() != agents) throw std::invalid_argument("generalized_irf: state batch has the wrong agent count");
    const auto& vars = irf_variables();
    const Index nv = static_cast<Index>(vars.size());
    const CounterRng root = CounterRng(cfg.seed).substream("irf");

    IrfResult res;
    res.variables = vars;
    res.norm_mean.assign(vars.size(), 0.0);
    res.norm_std.assign(vars.size(), 1.0);
    if (cfg.norm_periods > 0) {
        const ParamBatch p1 = ParamBatch::uniform(gamma, 1);
        const CounterRng rng = root.substream("norm");
        StateBatch x = draw_init_state(p1, agents);
        Eigen::ArrayXd sum = Eigen::ArrayXd::Zero(nv), sq = Eigen::ArrayXd::Zero(nv);
        const Index burn = 200;
        for (Index t = 0; t < burn + cfg.norm_periods; ++t) {
            Period per = simulate_period(m, x, ShockBatch::draw(rng, static_cast<std::uint64_t>(t), 1, agents), p1);
            if (t >= burn) {
                const Eigen::ArrayXd v = irf_values(per.policy).row(0).transpose();
                sum += v;
                sq += v.square();
            }
            x = std::move(per.next);
        }
        const double n = static_cast<double>(cfg.norm_periods);
        for (Index k = 0; k < nv; ++k) {
            const double mean = sum[k] / n;
            const double var = std::max(0.0, sq[k] / n - mean * mean);
            res.norm_mean[static_cast<std::size_t>(k)] = mean;
            const double sd = std::sqrt(var);
            res.norm_std[static_cast<std::size_t>(k)] = sd > 1e-12 ? sd : 1.0;
        }
    }

    const Index draws = cfg.draws_per_state, rows = states.batch() * draws;
    const StateBatch start = repeat_rows(states, draws);
    const ParamBatch p_all = ParamBatch::uniform(gamma, static_cast<std::size_t>(rows));
    const CounterRng path_rng = root.substream("paths");
    std::vector<ShockBatch> shocks;
    for (Index t = 0; t < cfg.horizons; ++t)
        shocks.push_back(ShockBatch::draw(path_rng, static_cast<std::uint64_t>(t), rows, agents));

    // accumulators per chunk: [split 0 all, 1 zlb, 2 non-zlb] x variable x horizon
    const Index chunks = (rows + kChunk - 1) / kChunk;
    std::vector<Array> acc(static_cast<std::size_t>(chunks));
    std::vector<Eigen::Array3d> counts(static_cast<std::size_t>(chunks));
    parallel_for(static_cast<std::size_t>(chunks), [&](std::size_t ci) {
        const Index r0 = static_cast<Index>(ci) * kChunk, n = std::min(kChunk, rows - r0);
        std::vector<Index> idx(static_cast<std::size_t>(n));
        for (Index k = 0; k < n; ++k) idx[static_cast<std::size_t>(k)] = r0 + k;
        StateBatch base = start.rows(idx), hit = base;
        const ParamBatch p{std::vector<model::ModelParams>(p_all.rows.begin() + r0, p_all.rows.begin() + r0 + n)};
        Eigen::Array<bool, Eigen::Dynamic, 1> zlb = base.r.col(0) <= kZlbThreshold;
        Array a = Array::Zero(3 * nv, cfg.horizons);
        for (Index t = 0; t < cfg.horizons; ++t) {
            const ShockBatch sh = slice(shocks[static_cast<std::size_t>(t)], r0, n);
            ShockBatch sh_hit = sh;
            if (t == 0) add_impulse(sh_hit, cfg.shock, cfg.size_sd);
            Period pb = simulate_period(m, base, sh, p), ph = simulate_period(m, hit, sh_hit, p);
            const Array diff = irf_values(ph.policy) - irf_values(pb.policy);
            for (Index r = 0; r < n; ++r) {
                const Index split = zlb[r] ? 1 : 2;
                for (Index v = 0; v < nv; ++v) {
                    const double d = diff(r, v) / res.norm_std[static_cast<std::size_t>(v)];
                    a(v, t) += d;
                    a(split * nv + v, t) += d;
                }
            }
            base = std::move(pb.next);
            hit = std::move(ph.next);
        }
        const double nz = static_cast<double>(zlb.count());
        acc[ci] = std::move(a);
        counts[ci] = Eigen::Array3d(static_cast<double>(n), nz, static_cast<double>(n) - nz);
    });

    Array total = Array::Zero(3 * nv, cfg.horizons);
    Eigen::Array3d cnt = Eigen::Array3d::Zero();
    for (Index ci = 0; ci < chunks; ++ci) {
        total += acc[static_cast<std::size_t>(ci)];
        cnt += counts[static_cast<std::size_t>(ci)];
    }
    const char* names[] = {"all", "zlb", "non_zlb"};
    for (int s = 0; s < 3; ++s) {
        if (cnt[s] == 0) continue;
        res.splits.push_back(names[s]);
        res.split_paths.push_back(static_cast<Index>(cnt[s]));
        std::vector<std::vector<double>> per_var(vars.size());
        for (Index v = 0; v < nv; ++v)
            for (Index t = 0; t < cfg.horizons; ++t)
                per_var[static_cast<std::size_t>(v)].push_back(total(s * nv + v, t) / cnt[s]);
        res.response.push_back(std::move(per_var));
    }
    return res;
}

// ---------------------------------------------------------------------------

std::vector<MpcRecord> mpc_profile(const Solved& m, const model::ModelParams& gamma, const StateBatch& states) {
    const Index rows = states.batch(), agents = states.agents();
    std::vector<MpcRecord> out;
    if (rows == 0) return out;
    const ParamBatch p = ParamBatch::uniform(gamma, static_cast<std::size_t>(rows));
    ad::Tape t;
    StateVars st = StateVars::constant(t, states);
    st.b = t.variable(states.b);
    model::Policy pol = m.model.evaluate(t.constant(Array(m.theta)), st, ShockBatch::zeros(rows, agents), p);
    Array dc(rows, agents), dw(rows, agents);
    for (Index i = 0; i < agents; ++i) {
        Array seed = Array::Zero(rows, agents);
        seed.col(i) = 1.0;
        t.backward(pol.c, seed);
        dc.col(i) = t.grad(st.b).col(i);
        t.backward(pol.omega, seed);
        dw.col(i) = t.grad(st.b).col(i);
    }
    for (Index r = 0; r < rows; ++r)
        for (Index i = 0; i < agents; ++i)
            out.push_back({r, i, pol.omega.value()(r, i), pol.c.value()(r, i), dc(r, i) / dw(r, i), dw(r, i),
                           static_cast<bool>(pol.at_bound(r, i))});
    return out;
}

double mpc_finite_difference(const Solved& m, const model::ModelParams& gamma, const StateBatch& states, Index state,
                             Index agent, double h) {
    StateBatch one = states.rows({state});
    const ParamBatch p = ParamBatch::uniform(gamma, 1);
    const double step = h * std::max(1.0, std::abs(one.b(0, agent)));
    auto eval = [&](double db) {
        StateBatch x = one;
        x.b(0, agent) += db;
        Period per = simulate_period(m, x, ShockBatch::zeros(1, x.agents()), p);
        return std::pair{per.policy.c(0, agent), per.policy.omega(0, agent)};
    };
    const auto [c_up, w_up] = eval(step);
    const auto [c_dn, w_dn] = eval(-step);
    return (c_up - c_dn) / (w_up - w_dn);
}

void write_mpc_csv(std::ostream& out, const std::vector<MpcRecord>& records) {
    out << "agent,wealth,c,mpc,bound_flag\n" << std::setprecision(17);
    const Index agents = records.empty() ? 1 : records.back().agent + 1;
    for (const auto& r : records) {
        out << r.state * agents + r.agent << ',' << r.wealth << ',' << r.c << ',' << r.mpc << ','
            << (r.at_bound ? 1 : 0) << '\n';
    }
}

// ---------------------------------------------------------------------------

const char* DistStats::csv_header() {
    return "constrained_proportion,wealth_std,consumption_std,gini,net_bond_supply,output_gap_to_consumption";
}

void DistStats::write_csv(std::ostream& out) const {
    out << csv_header() << '\n' << std::setprecision(17) << constrained_proportion << ',' << wealth_std << ','
        << consumption_std << ',' << gini << ',' << net_bond_supply << ',' << output_gap_to_consumption << '\n';
}

double gini(const Eigen::VectorXd& x) {
    if (x.size() == 0) throw std::invalid_argument("gini: empty input");
    const double mean = x.mean();
    if (!(mean > 0.0)) throw std::domain_error("gini: mean must be positive");
    Eigen::VectorXd s = x;
    std::sort(s.data(), s.data() + s.size());
    // sum_{i,j} |x_i - x_j| = 2 sum_k (2k - n + 1) s_k for ascending s.
    const double n = static_cast<double>(s.size());
    double acc = 0.0;
    for (Index k = 0; k < s.size(); ++k) acc += (2.0 * static_cast<double>(k) - n + 1.0) * s[k];
    return acc / (n * n * mean);
}

DistStats dist_stats(const Array& b, const Array& c, const Array& y, const Array& b_min) {
    const Index rows = b.rows(), agents = b.cols();
    if (rows == 0 || agents == 0) throw std::invalid_argument("dist_stats: empty batch");
    if (c.rows() != rows || c.cols() != agents || y.rows() != rows || b_min.rows() != rows)
        throw std::invalid_argument("dist_stats: inconsistent shapes");
    DistStats d;
    double bound = 0.0;
    for (Index r = 0; r < rows; ++r) {
        const double lim = b_min(r, 0);
        const auto br = b.row(r), cr = c.row(r);
        bound += ((br - lim).abs() <= tolerance_at(lim)).count();
        d.wealth_std += std::sqrt((br - br.mean()).square().mean());
        d.consumption_std += std::sqrt((cr - cr.mean()).square().mean());
        d.gini += gini(cr.transpose().matrix());
        d.net_bond_supply += std::abs(br.mean());
        d.output_gap_to_consumption += std::abs(y(r, 0) - cr.mean()) / std::abs(y(r, 0));
    }
    const double n = static_cast<double>(rows);
    d.constrained_proportion = bound / (n * static_cast<double>(agents));
    d.wealth_std /= n;
    d.consumption_std /= n;
    d.gini /= n;
    d.net_bond_supply /= n;
    d.output_gap_to_consumption /= n;
    return d;
}

DistStats dist_stats(const PolicyValues& v, const ParamBatch& p) {
    return dist_stats(v.b, v.c, v.y, p.column(&model::ModelParams::b_min));
}

// ---------------------------------------------------------------------------

void DivergenceSeries::write_csv(std::ostream& out) const {
    out << "period,total_loss,net_bond_supply,truncated\n" << std::setprecision(17);
    for (std::size_t t = 0; t < total_loss.size(); ++t)
        out << t + 1 << ',' << total_loss[t] << ',' << net_bond_supply[t] << ','
            << (truncated && t + 1 == total_loss.size() ? 1 : 0) << '\n';
    if (truncated && total_loss.empty()) out << "0,nan,nan,1\n";
}

DivergenceSeries divergence_experiment(const model::PolicyNetSpec& nets, const model::ModelParams& gamma,
                                       const DivergenceConfig& cfg) {
    if (cfg.periods < 0 || cfg.batch < 1) throw std::invalid_argument("divergence_experiment: invalid lengths");
    const model::PolicyModel mdl(nets, cfg.regime, cfg.weights);
    const nn::ParamVector theta = nn::init_params(nets.num_params(), cfg.init_scale, cfg.seed);
    const ParamBatch p = ParamBatch::uniform(gamma, static_cast<std::size_t>(cfg.batch));
    const CounterRng rng = CounterRng(cfg.seed).substream("sim");
    const Index agents = nets.agents;
    StateBatch x = draw_init_state(p, agents);
    DivergenceSeries out;
    for (Index t = 0; t < cfg.periods; ++t) {
        const auto base = static_cast<std::uint64_t>(t) * 3;
        const auto now = ShockBatch::draw(rng, base, cfg.batch, agents);
        try {
            ad::Tape tape;
            const double loss = mdl.losses(tape.constant(Array(theta)), StateVars::constant(tape, x), now,
                                           ShockBatch::draw(rng, base + 1, cfg.batch, agents),
                                           ShockBatch::draw(rng, base + 2, cfg.batch, agents), p)
                                    .total.scalar();
            x = mdl.step(theta, x, now, p);
            const double nbs = x.b.mean();
            if (!std::isfinite(loss) || !std::isfinite(nbs)) throw ad::NumericalError("series", "non-finite value");
            out.total_loss.push_back(loss);
            out.net_bond_supply.push_back(nbs);
        } catch (const ad::NumericalError& e) {
            out.truncated = true;
            out.diagnostic = "period " + std::to_string(t + 1) + ": " + e.what();
            break;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

void SweepResult::write_csv(std::ostream& out) const {
    out << "bbar,constrained_proportion,cdf_at_default,below_bound\n" << std::setprecision(17);
    for (const auto& r : rows)
        out << r.bbar << ',' << r.constrained_proportion << ',' << r.cdf_at_default << ',' << r.below_bound << '\n';
}

std::vector<double> linspace(double lo, double hi, Index points) {
    if (points < 1) throw std::invalid_argument("linspace: need at least one point");
    std::vector<double> out;
    for (Index k = 0; k < points; ++k)
        out.push_back(points == 1 ? lo : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(points - 1));
    if (points > 1) out.back() = hi;
    return out;
}

SweepResult bbar_sweep(const Solved& m, const model::ModelParams& gamma, const std::vector<double>& grid,
                       const StateBatch& states) {
    if (states.batch() == 0) throw std::invalid_argument("bbar_sweep: empty state batch");
    const auto& bounds = m.model.bounds();
    const std::size_t k = 11;  // b_min in the parameter table
    SweepResult out;
    constexpr double kDefault = -0.05;
    for (double bbar : grid) {
        if (bbar < bounds.min[k] || bbar > bounds.max[k])
            out.warnings.push_back("borrowing limit " + std::to_string(bbar) + " lies outside the training range");
        model::ModelParams g = gamma;
        g.b_min = bbar;
        const ParamBatch p = ParamBatch::uniform(g, static_cast<std::size_t>(states.batch()));
        const Period per = simulate_period(m, states, ShockBatch::zeros(states.batch(), states.agents()), p);
        const Array& b = per.policy.b;
        const double cells = static_cast<double>(b.size());
        SweepRow row;
        row.bbar = bbar;
        row.constrained_proportion = static_cast<double>(per.policy.at_bound.count()) / cells;
        row.cdf_at_default = static_cast<double>((b <= kDefault + tolerance_at(kDefault)).count()) / cells;
        row.below_bound = static_cast<double>((b < bbar - tolerance_at(bbar)).count()) / cells;
        out.rows.push_back(row);
    }
    return out;
}

// ---------------------------------------------------------------------------

model::LossBreakdown loss_report(const TrainLog& log, std::size_t window) {
    if (window == 0 || log.records.size() < window)
        throw std::invalid_argument("loss_report: need at least " + std::to_string(window) + " logged iterations, got " +
                                    std::to_string(log.records.size()));
    model::LossBreakdown m;
    for (std::size_t i = log.records.size() - window; i < log.records.size(); ++i) {
        const auto& l = log.records[i].loss;
        m.ee += l.ee;
        m.nkpc += l.nkpc;
        m.ls += l.ls;
        m.kkt += l.kkt;
        m.oc += l.oc;
        m.rc += l.rc;
        m.total += l.total;
    }
    const double n = static_cast<double>(window);
    m.ee /= n;
    m.nkpc /= n;
    m.ls /= n;
    m.kkt /= n;
    m.oc /= n;
    m.rc /= n;
    m.total /= n;
    return m;
}

void write_loss_report_csv(std::ostream& out, const model::LossBreakdown& l) {
    out << "ee,nkpc,ls,kkt,oc,rc,total\n" << std::setprecision(17) << l.ee << ',' << l.nkpc << ',' << l.ls << ','
        << l.kkt << ',' << l.oc << ',' << l.rc << ',' << l.total << '\n';
}

}  // namespace hardhank::analysis
