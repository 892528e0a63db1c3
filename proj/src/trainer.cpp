#include "hardhank/trainer.hpp"

#include "hardhank/nn/adam.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace hardhank {

using model::Index;
using model::Regime;

double default_learning_rate(Regime regime) {
    return regime == Regime::Hard || regime == Regime::AggHard ? 1e-4 : 1e-6;
}

double TrainerConfig::effective_learning_rate() const {
    return learning_rate > 0.0 ? learning_rate : default_learning_rate(regime);
}

void TrainerConfig::validate() const {
    auto fail = [](const std::string& what) { throw std::invalid_argument("trainer config: " + what); };
    if (iterations < 0) fail("iterations must be >= 0");
    if (batch < 1) fail("batch must be >= 1");
    if (max_sims < 1 || max_sims > 20) fail("max_sims must lie in [1, 20]");
    if (!std::isfinite(learning_rate)) fail("learning_rate must be finite");
    if (!(tol1 > 0.0)) fail("tol1 must be > 0");
    if (tol2 < 0) fail("tol2 must be >= 0");
    if (!std::isfinite(tol0)) fail("tol0 must be finite");
    if (resample_every < 1) fail("resample_every must be >= 1");
    if (!(init_scale >= 0.0)) fail("init_scale must be >= 0");
    if (max_nan_resets < 1) fail("max_nan_resets must be >= 1");
    if (checkpoint_every < 0) fail("checkpoint_every must be >= 0");
    weights.validate();
}

long TrainLog::resets() const {
    long n = 0;
    for (const auto& r : records) n += r.reset;
    return n;
}

const char* TrainLog::csv_header() { return "iter,ee,nkpc,ls,kkt,oc,rc,total,n,reset,gamma_draw_id"; }

void TrainLog::write_csv(std::ostream& out) const {
    out << csv_header() << '\n' << std::setprecision(17);
    for (const auto& r : records) {
        const auto& l = r.loss;
        out << r.iter << ',' << l.ee << ',' << l.nkpc << ',' << l.ls << ',' << l.kkt << ',' << l.oc << ',' << l.rc
            << ',' << l.total << ',' << r.n << ',' << (r.reset ? 1 : 0) << ',' << r.gamma_draw_id << '\n';
    }
}

void TrainLog::write_csv(const std::string& path) const {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path);
    write_csv(f);
}

TrainLog TrainLog::read_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot read " + path);
    std::string line;
    std::getline(f, line);
    if (line != csv_header()) throw std::runtime_error(path + ": unexpected header '" + line + "'");
    TrainLog log;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::istringstream in(line);
        std::vector<std::string> cells;
        for (std::string cell; std::getline(in, cell, ',');) cells.push_back(cell);
        if (cells.size() != 11) throw std::runtime_error(path + ": malformed row '" + line + "'");
        TrainRecord r;
        r.iter = std::stol(cells[0]);
        double* fields[] = {&r.loss.ee, &r.loss.nkpc, &r.loss.ls, &r.loss.kkt, &r.loss.oc, &r.loss.rc, &r.loss.total};
        for (int k = 0; k < 7; ++k) *fields[k] = std::strtod(cells[1 + k].c_str(), nullptr);
        r.n = std::stoi(cells[8]);
        r.reset = cells[9] == "1";
        r.gamma_draw_id = std::stoull(cells[10]);
        log.records.push_back(r);
    }
    return log;
}

model::StateBatch draw_init_state(const model::ParamBatch& gamma, Index agents) {
    return model::StateBatch::initial(gamma, agents);
}

model::ParamBatch draw_param_batch(const CounterRng& rng, std::uint64_t draw, Index batch,
                                   const model::ParamBounds& bounds) {
    model::ParamBatch out;
    out.rows.reserve(static_cast<std::size_t>(batch));
    for (Index r = 0; r < batch; ++r)
        out.rows.push_back(model::draw_struct_params(rng, draw * static_cast<std::uint64_t>(batch) +
                                                              static_cast<std::uint64_t>(r),
                                                     bounds));
    return out;
}

FitResult fit(const TrainerConfig& config, const model::PolicyNetSpec& nets, const model::ParamBounds& bounds,
              const CheckpointFn& on_checkpoint) {
    return fit(config, nets, nn::init_params(nets.num_params(), config.init_scale, config.seed), bounds,
               on_checkpoint);
}

FitResult fit(const TrainerConfig& config, const model::PolicyNetSpec& nets, nn::ParamVector theta0,
              const model::ParamBounds& bounds, const CheckpointFn& on_checkpoint) {
    config.validate();
    nets.validate();
    bounds.validate();
    if (theta0.size() != nets.num_params())
        throw std::invalid_argument("fit: initial parameter vector has the wrong length");

    const model::PolicyModel model(nets, config.regime, config.weights, bounds);
    const Index batch = config.batch, agents = nets.agents;
    const CounterRng root(config.seed);
    const CounterRng train_rng = root.substream("train"), sim_rng = root.substream("sim"),
                     param_rng = root.substream("params");
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();

    FitResult out;
    out.params = std::move(theta0);
    nn::AdamState adam(out.params.size(), nn::AdamConfig{config.effective_learning_rate()});

    std::uint64_t gamma_id = 0;
    model::ParamBatch gamma = draw_param_batch(param_rng, gamma_id, batch, bounds);
    model::StateBatch x = draw_init_state(gamma, agents);
    long its_at_n = 0, consecutive_failures = 0;
    int n = 1;
    double last_loss = std::numeric_limits<double>::infinity();

    for (long i = 0; i < config.iterations; ++i) {
        if (config.tol0 > 0.0 && last_loss <= config.tol0) break;
        const auto t0 = std::chrono::steady_clock::now();
        TrainRecord rec;
        rec.iter = i;
        rec.gamma_draw_id = gamma_id;

        const auto base = static_cast<std::uint64_t>(i) * 3;
        const auto now = model::ShockBatch::draw(train_rng, base, batch, agents);
        const auto next1 = model::ShockBatch::draw(train_rng, base + 1, batch, agents);
        const auto next2 = model::ShockBatch::draw(train_rng, base + 2, batch, agents);

        bool failed = false;
        std::string failure;
        try {
            ad::Tape tape;
            auto theta = tape.variable(ad::Array(out.params));
            auto losses = model.losses(theta, model::StateVars::constant(tape, x), now, next1, next2, gamma);
            rec.loss = losses.values();
            tape.backward(losses.total);
            const Eigen::VectorXd grad = tape.grad(theta).reshaped();
            nn::adam_step(adam, out.params, grad);
        } catch (const ad::NumericalError& e) {
            failed = true;
            failure = std::string("loss evaluation failed in ") + e.primitive() + ": " + e.what();
        } catch (const std::domain_error& e) {
            failed = true;
            failure = e.what();
        }
        if (failed) rec.loss = {nan, nan, nan, nan, nan, nan, nan};

        const auto& l = rec.loss;
        const bool trips = l.rc > config.tol1 || (config.reset_on_kkt && l.kkt > config.tol1) ||
                           (config.reset_on_oc && l.oc > config.tol1);
        const bool calm = l.rc < config.tol1 && (!config.reset_on_kkt || l.kkt < config.tol1) &&
                          (!config.reset_on_oc || l.oc < config.tol1);
        bool reset = failed || trips;
        if (reset) {
            if (n > 1) --n;
            its_at_n = 0;
        }
        if (calm && !failed && its_at_n > config.tol2 && n < config.max_sims) {
            ++n;
            its_at_n = 0;
        }

        if (i % config.resample_every == config.resample_every - 1) {
            ++gamma_id;
            gamma = draw_param_batch(param_rng, gamma_id, batch, bounds);
        }
        if (reset) x = draw_init_state(gamma, agents);
        try {
            for (int k = 0; k < n; ++k) {
                const auto sh = model::ShockBatch::draw(
                    sim_rng, static_cast<std::uint64_t>(i) * 20 + static_cast<std::uint64_t>(k), batch, agents);
                x = model.step(out.params, x, sh, gamma);
            }
        } catch (const ad::NumericalError& e) {
            failed = true;
            if (failure.empty()) failure = std::string("simulation failed in ") + e.primitive() + ": " + e.what();
            if (!reset && n > 1) --n;
            reset = true;
            its_at_n = 0;
            x = draw_init_state(gamma, agents);
        }

        ++its_at_n;
        last_loss = failed ? nan : l.total;
        rec.n = n;
        rec.reset = reset;
        rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        out.log.records.push_back(rec);

        consecutive_failures = failed ? consecutive_failures + 1 : 0;
        if (consecutive_failures >= config.max_nan_resets) {
            out.aborted = true;
            std::ostringstream msg;
            msg << "aborting at iteration " << i << " after " << consecutive_failures
                << " consecutive numerical failures; last: " << failure;
            out.diagnostic = msg.str();
            break;
        }
        if (on_checkpoint && config.checkpoint_every > 0 && (i + 1) % config.checkpoint_every == 0)
            on_checkpoint(i + 1, out.params);
    }
    return out;
}

}  // namespace hardhank
