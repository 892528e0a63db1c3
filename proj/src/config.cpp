#include "hardhank/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

namespace hardhank {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

std::string fmt(double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

double to_double(const std::string& s) {
    double v = 0.0;
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || end != s.data() + s.size()) throw std::invalid_argument("not a number: '" + s + "'");
    return v;
}

template <class Int>
Int to_int(const std::string& s) {
    Int v{};
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || end != s.data() + s.size()) throw std::invalid_argument("not an integer: '" + s + "'");
    return v;
}

bool to_bool(const std::string& s) {
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw std::invalid_argument("not a boolean: '" + s + "'");
}

std::vector<int> to_widths(const std::string& s) {
    std::vector<int> out;
    std::istringstream in(s);
    for (std::string part; std::getline(in, part, ',');) out.push_back(to_int<int>(trim(part)));
    return out;
}

struct Field {
    std::string key;
    std::function<std::string(const RunConfig&)> get;
    std::function<void(RunConfig&, const std::string&)> put;
};

Field real(std::string key, std::function<double&(RunConfig&)> ref) {
    return {std::move(key), [ref](const RunConfig& c) { return fmt(ref(const_cast<RunConfig&>(c))); },
            [ref](RunConfig& c, const std::string& v) { ref(c) = to_double(v); }};
}

template <class Int>
Field integer(std::string key, std::function<Int&(RunConfig&)> ref) {
    return {std::move(key), [ref](const RunConfig& c) { return std::to_string(ref(const_cast<RunConfig&>(c))); },
            [ref](RunConfig& c, const std::string& v) { ref(c) = to_int<Int>(v); }};
}

Field flag(std::string key, std::function<bool&(RunConfig&)> ref) {
    return {std::move(key), [ref](const RunConfig& c) { return std::string(ref(const_cast<RunConfig&>(c)) ? "true" : "false"); },
            [ref](RunConfig& c, const std::string& v) { ref(c) = to_bool(v); }};
}

const std::vector<Field>& fields() {
    static const std::vector<Field> table = [] {
        std::vector<Field> f;
        f.push_back(integer<std::uint64_t>("seed", [](RunConfig& c) -> std::uint64_t& { return c.seed; }));
        const auto& params = model::param_table();
        for (std::size_t k = 0; k < params.size(); ++k) {
            const auto member = params[k].member;
            const std::string name = std::string("model.") + params[k].name;
            f.push_back(real(name, [member](RunConfig& c) -> double& { return c.params.*member; }));
            f.push_back(real(name + ".min", [k](RunConfig& c) -> double& { return c.bounds.min[k]; }));
            f.push_back(real(name + ".max", [k](RunConfig& c) -> double& { return c.bounds.max[k]; }));
        }
        f.push_back(integer<model::Index>("net.agents", [](RunConfig& c) -> model::Index& { return c.agents; }));
        f.push_back({"net.hidden",
                     [](const RunConfig& c) {
                         std::string s;
                         for (std::size_t i = 0; i < c.hidden.size(); ++i) s += (i ? "," : "") + std::to_string(c.hidden[i]);
                         return s;
                     },
                     [](RunConfig& c, const std::string& v) { c.hidden = to_widths(v); }});
        f.push_back({"net.activation", [](const RunConfig& c) { return nn::to_string(c.activation); },
                     [](RunConfig& c, const std::string& v) { c.activation = nn::parse_activation(v); }});
        f.push_back(real("net.init_scale", [](RunConfig& c) -> double& { return c.train.init_scale; }));
        f.push_back({"train.regime", [](const RunConfig& c) { return model::to_string(c.train.regime); },
                     [](RunConfig& c, const std::string& v) { c.train.regime = model::parse_regime(v); }});
        f.push_back(integer<long>("train.iterations", [](RunConfig& c) -> long& { return c.train.iterations; }));
        f.push_back(integer<model::Index>("train.batch", [](RunConfig& c) -> model::Index& { return c.train.batch; }));
        f.push_back(integer<int>("train.max_sims", [](RunConfig& c) -> int& { return c.train.max_sims; }));
        f.push_back(real("train.learning_rate", [](RunConfig& c) -> double& { return c.train.learning_rate; }));
        f.push_back(real("train.tol0", [](RunConfig& c) -> double& { return c.train.tol0; }));
        f.push_back(real("train.tol1", [](RunConfig& c) -> double& { return c.train.tol1; }));
        f.push_back(integer<long>("train.tol2", [](RunConfig& c) -> long& { return c.train.tol2; }));
        f.push_back(real("train.penalty.kkt", [](RunConfig& c) -> double& { return c.train.weights.kkt; }));
        f.push_back(real("train.penalty.oc", [](RunConfig& c) -> double& { return c.train.weights.oc; }));
        f.push_back(real("train.penalty.rc", [](RunConfig& c) -> double& { return c.train.weights.rc; }));
        f.push_back(integer<long>("train.resample_every", [](RunConfig& c) -> long& { return c.train.resample_every; }));
        f.push_back(integer<long>("train.max_nan_resets", [](RunConfig& c) -> long& { return c.train.max_nan_resets; }));
        f.push_back(integer<long>("train.checkpoint_every", [](RunConfig& c) -> long& { return c.train.checkpoint_every; }));
        f.push_back(flag("train.reset_on_kkt", [](RunConfig& c) -> bool& { return c.train.reset_on_kkt; }));
        f.push_back(flag("train.reset_on_oc", [](RunConfig& c) -> bool& { return c.train.reset_on_oc; }));
        using I = model::Index;
        f.push_back(integer<I>("analyze.burn_in", [](RunConfig& c) -> I& { return c.analyze.burn_in; }));
        f.push_back(integer<I>("analyze.states", [](RunConfig& c) -> I& { return c.analyze.states; }));
        f.push_back(integer<I>("analyze.stride", [](RunConfig& c) -> I& { return c.analyze.stride; }));
        f.push_back({"analyze.shock", [](const RunConfig& c) { return analysis::to_string(c.analyze.irf.shock); },
                     [](RunConfig& c, const std::string& v) { c.analyze.irf.shock = analysis::parse_shock(v); }});
        f.push_back(real("analyze.size", [](RunConfig& c) -> double& { return c.analyze.irf.size_sd; }));
        f.push_back(integer<I>("analyze.horizons", [](RunConfig& c) -> I& { return c.analyze.irf.horizons; }));
        f.push_back(integer<I>("analyze.draws_per_state", [](RunConfig& c) -> I& { return c.analyze.irf.draws_per_state; }));
        f.push_back(integer<I>("analyze.norm_periods", [](RunConfig& c) -> I& { return c.analyze.irf.norm_periods; }));
        f.push_back(real("analyze.bbar_min", [](RunConfig& c) -> double& { return c.analyze.bbar_min; }));
        f.push_back(real("analyze.bbar_max", [](RunConfig& c) -> double& { return c.analyze.bbar_max; }));
        f.push_back(integer<I>("analyze.points", [](RunConfig& c) -> I& { return c.analyze.points; }));
        f.push_back(integer<I>("analyze.periods", [](RunConfig& c) -> I& { return c.analyze.periods; }));
        f.push_back(integer<I>("analyze.diverge_batch", [](RunConfig& c) -> I& { return c.analyze.diverge_batch; }));
        return f;
    }();
    return table;
}

const Field* find(const std::string& key) {
    for (const auto& f : fields())
        if (f.key == key) return &f;
    return nullptr;
}

}  // namespace

TrainerConfig RunConfig::trainer() const {
    TrainerConfig t = train;
    t.seed = seed;
    return t;
}

void RunConfig::validate() const {
    try {
        params.validate();
        bounds.validate();
        nets().validate();
        trainer().validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    const auto& a = analyze;
    if (a.burn_in < 0 || a.states < 1 || a.stride < 1) throw ConfigError("analyze: burn_in >= 0, states >= 1, stride >= 1");
    if (a.irf.horizons < 1 || a.irf.draws_per_state < 1 || a.irf.norm_periods < 0)
        throw ConfigError("analyze: horizons >= 1, draws_per_state >= 1, norm_periods >= 0");
    if (!(a.bbar_min <= a.bbar_max) || a.bbar_max >= 0.0) throw ConfigError("analyze: need bbar_min <= bbar_max < 0");
    if (a.points < 1 || a.periods < 0 || a.diverge_batch < 1)
        throw ConfigError("analyze: points >= 1, periods >= 0, diverge_batch >= 1");
}

void RunConfig::set(const std::string& key, const std::string& value) {
    const Field* f = find(key);
    if (!f) throw ConfigError("unknown config key '" + key + "'");
    try {
        f->put(*this, value);
    } catch (const std::exception& e) {
        throw ConfigError("bad value for '" + key + "': " + e.what());
    }
}

std::string RunConfig::to_text() const {
    std::string out;
    for (const auto& f : fields()) out += f.key + " = " + f.get(*this) + "\n";
    return out;
}

std::vector<std::string> RunConfig::keys() {
    std::vector<std::string> out;
    for (const auto& f : fields()) out.push_back(f.key);
    return out;
}

RunConfig RunConfig::parse(const std::string& text, const std::string& origin) {
    RunConfig cfg;
    std::istringstream in(text);
    int lineno = 0;
    for (std::string line; std::getline(in, line);) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        const std::string where = origin + ":" + std::to_string(lineno) + ": ";
        if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value'");
        try {
            cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        } catch (const ConfigError& e) {
            throw ConfigError(where + e.what());
        }
    }
    return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read config file '" + path + "'");
    std::stringstream buf;
    buf << f.rdbuf();
    return parse(buf.str(), path);
}

void RunConfig::save(const std::string& path) const {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << to_text();
}

bool operator==(const RunConfig& a, const RunConfig& b) { return a.to_text() == b.to_text(); }

}  // namespace hardhank
