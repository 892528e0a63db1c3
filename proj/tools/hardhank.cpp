#include "hardhank/analysis.hpp"
#include "hardhank/config.hpp"
#include "hardhank/nn/checkpoint.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using namespace hardhank;

namespace {

constexpr int kUsage = 1;
constexpr int kNumerical = 2;

struct Common {
    std::string config;
    std::string out = "out";
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> regime;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config, "Config file (key = value lines)");
    cmd->add_option("--out", c.out, "Output directory")->capture_default_str();
    cmd->add_option("--seed", c.seed, "Root seed");
    cmd->add_option("--regime", c.regime, "hard, soft, agg-hard or idio-hard");
    cmd->add_option("--set", c.overrides, "Extra key=value override (repeatable)");
}

// Explicit --config, else the config echoed by an earlier train run, else defaults.
RunConfig resolve(const Common& c, bool reuse_echo) {
    RunConfig cfg;
    if (!c.config.empty()) cfg = RunConfig::load(c.config);
    else if (reuse_echo && fs::exists(fs::path(c.out) / "config.cfg")) cfg = RunConfig::load((fs::path(c.out) / "config.cfg").string());
    for (const auto& kv : c.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
        cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (c.seed) cfg.seed = *c.seed;
    if (c.regime) cfg.set("train.regime", *c.regime);
    return cfg;
}

template <class Fn>
void write_file(const fs::path& path, Fn&& fn) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    fn(f);
}

int cmd_train(const Common& c, std::optional<double> penalty, std::optional<long> iterations,
              std::optional<double> lr) {
    RunConfig cfg = resolve(c, false);
    if (penalty) cfg.train.weights = {*penalty, *penalty, *penalty};
    if (iterations) cfg.train.iterations = *iterations;
    if (lr) cfg.train.learning_rate = *lr;
    cfg.validate();
    const fs::path out(c.out);
    fs::create_directories(out);
    cfg.save((out / "config.cfg").string());

    const auto nets = cfg.nets();
    const TrainerConfig tc = cfg.trainer();
    auto save = [&](const fs::path& path, const nn::ParamVector& theta) {
        nn::save_checkpoint(path.string(), {cfg.seed, cfg.activation, nets.widths(), theta});
    };
    std::cerr << "training " << model::to_string(tc.regime) << ": " << nets.num_params() << " parameters, "
              << tc.iterations << " iterations, batch " << tc.batch << ", lr " << tc.effective_learning_rate() << "\n";
    FitResult res = fit(tc, nets, cfg.bounds, [&](long it, const nn::ParamVector& theta) {
        save(out / ("checkpoint_" + std::to_string(it) + ".bin"), theta);
    });
    save(out / "checkpoint.bin", res.params);
    res.log.write_csv((out / "trainlog.csv").string());
    if (res.log.records.size() >= 50) {
        const auto rep = analysis::loss_report(res.log);
        write_file(out / "loss_report.csv", [&](std::ostream& f) { analysis::write_loss_report_csv(f, rep); });
        std::cerr << "final-50 mean total loss " << rep.total << ", resets " << res.log.resets() << "\n";
    } else {
        std::cerr << "fewer than 50 iterations logged; loss_report.csv not written\n";
    }
    if (res.aborted) {
        std::cerr << "training aborted: " << res.diagnostic << "\n";
        return kNumerical;
    }
    return 0;
}

struct Loaded {
    RunConfig cfg;
    model::PolicyModel model;
    nn::ParamVector theta;
};

Loaded load_trained(const Common& c, const std::string& checkpoint_flag) {
    RunConfig cfg = resolve(c, true);
    cfg.validate();
    const std::string path = checkpoint_flag.empty() ? (fs::path(c.out) / "checkpoint.bin").string() : checkpoint_flag;
    if (!fs::exists(path)) throw std::runtime_error("checkpoint not found: " + path);
    const auto ckpt = nn::load_checkpoint(path);
    const auto nets = cfg.nets();
    nn::check_compatible(ckpt, nets.widths(), cfg.activation);
    return {cfg, model::PolicyModel(nets, cfg.train.regime, cfg.train.weights, cfg.bounds), ckpt.params};
}

model::StateBatch sample_states(const Loaded& l) {
    const auto& a = l.cfg.analyze;
    return analysis::ergodic_sample({l.model, l.theta}, l.cfg.params, a.burn_in, a.states, l.cfg.seed, a.stride);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Neural-network solver for a heterogeneous-agent New Keynesian model with hard constraints"};
    app.require_subcommand(1);

    Common train_opts;
    std::optional<double> penalty, lr;
    std::optional<long> iterations;
    auto* train = app.add_subcommand("train", "Fit the policy networks");
    add_common(train, train_opts);
    train->add_option("--penalty-weight", penalty, "Set the kkt, oc and rc weights at once");
    train->add_option("--iterations", iterations, "Training iterations");
    train->add_option("--learning-rate", lr, "Adam step size (<= 0 picks the regime default)");

    Common an;
    std::string checkpoint;
    auto* analyze = app.add_subcommand("analyze", "Diagnostics on a trained model");
    analyze->require_subcommand(1);
    auto add_analyze = [&](const char* name, const char* help) {
        auto* sub = analyze->add_subcommand(name, help);
        add_common(sub, an);
        sub->add_option("--checkpoint", checkpoint, "Checkpoint (default <out>/checkpoint.bin)");
        return sub;
    };
    std::optional<std::string> shock;
    std::optional<double> size, bbar_min, bbar_max;
    std::optional<model::Index> horizons, states, draws, points, periods;
    auto* irf = add_analyze("irf", "Generalized impulse responses -> irf.csv");
    irf->add_option("--shock", shock, "tfp, mp, pref or idio");
    irf->add_option("--size", size, "Impulse in standard deviations");
    irf->add_option("--horizons", horizons, "Horizons");
    irf->add_option("--states", states, "Ergodic start states");
    irf->add_option("--draws", draws, "Paths per start state");
    auto* mpc = add_analyze("mpc", "Marginal propensities to consume -> mpc.csv");
    mpc->add_option("--states", states, "Ergodic states");
    auto* dist = add_analyze("dist", "Cross-sectional statistics -> dist.csv");
    dist->add_option("--states", states, "Ergodic states");
    auto* sweep = add_analyze("sweep", "Borrowing-limit sweep -> sweep.csv");
    sweep->add_option("--bbar-min", bbar_min, "Lowest limit");
    sweep->add_option("--bbar-max", bbar_max, "Highest limit");
    sweep->add_option("--points", points, "Grid points");
    sweep->add_option("--states", states, "Ergodic states");
    auto* diverge = add_analyze("diverge", "Forward simulation from a random initialisation -> diverge.csv");
    diverge->add_option("--periods", periods, "Periods");

    Common rep_opts;
    std::size_t window = 50;
    auto* report = app.add_subcommand("report", "Final-window loss means of <out>/trainlog.csv -> loss_report.csv");
    report->add_option("--out", rep_opts.out, "Run directory")->capture_default_str();
    report->add_option("--window", window, "Iterations averaged")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kUsage;
    }

    try {
        if (*train) return cmd_train(train_opts, penalty, iterations, lr);
        if (*report) {
            const fs::path out(rep_opts.out);
            const auto log = TrainLog::read_csv((out / "trainlog.csv").string());
            const auto l = analysis::loss_report(log, window);
            write_file(out / "loss_report.csv", [&](std::ostream& f) { analysis::write_loss_report_csv(f, l); });
            analysis::write_loss_report_csv(std::cout, l);
            return 0;
        }
        const fs::path out(an.out);
        if (diverge->parsed()) {
            RunConfig cfg = resolve(an, true);
            if (periods) cfg.analyze.periods = *periods;
            cfg.validate();
            fs::create_directories(out);
            analysis::DivergenceConfig dc{cfg.train.regime, cfg.train.weights, cfg.analyze.periods,
                                          cfg.analyze.diverge_batch, cfg.seed, cfg.train.init_scale};
            const auto series = analysis::divergence_experiment(cfg.nets(), cfg.params, dc);
            write_file(out / "diverge.csv", [&](std::ostream& f) { series.write_csv(f); });
            if (series.truncated) std::cerr << "series truncated: " << series.diagnostic << "\n";
            return 0;
        }
        Loaded l = load_trained(an, checkpoint);
        auto& a = l.cfg.analyze;
        if (states) a.states = *states;
        if (shock) a.irf.shock = analysis::parse_shock(*shock);
        if (size) a.irf.size_sd = *size;
        if (horizons) a.irf.horizons = *horizons;
        if (draws) a.irf.draws_per_state = *draws;
        if (bbar_min) a.bbar_min = *bbar_min;
        if (bbar_max) a.bbar_max = *bbar_max;
        if (points) a.points = *points;
        l.cfg.validate();
        a.irf.seed = l.cfg.seed;
        const analysis::Solved solved{l.model, l.theta};
        const auto st = sample_states(l);
        fs::create_directories(out);
        if (irf->parsed()) {
            const auto res = analysis::generalized_irf(solved, l.cfg.params, st, a.irf);
            write_file(out / "irf.csv", [&](std::ostream& f) { res.write_csv(f); });
        } else if (mpc->parsed()) {
            const auto recs = analysis::mpc_profile(solved, l.cfg.params, st);
            write_file(out / "mpc.csv", [&](std::ostream& f) { analysis::write_mpc_csv(f, recs); });
        } else if (dist->parsed()) {
            const auto p = model::ParamBatch::uniform(l.cfg.params, static_cast<std::size_t>(st.batch()));
            const auto per = analysis::simulate_period(solved, st, model::ShockBatch::zeros(st.batch(), st.agents()), p);
            const auto d = analysis::dist_stats(per.policy, p);
            write_file(out / "dist.csv", [&](std::ostream& f) { d.write_csv(f); });
        } else if (sweep->parsed()) {
            const auto res = analysis::bbar_sweep(solved, l.cfg.params, analysis::linspace(a.bbar_min, a.bbar_max, a.points), st);
            for (const auto& w : res.warnings) std::cerr << "warning: " << w << "\n";
            write_file(out / "sweep.csv", [&](std::ostream& f) { res.write_csv(f); });
        }
        return 0;
    } catch (const ad::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }
}
