#pragma once

#include "hardhank/analysis.hpp"
#include "hardhank/trainer.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace hardhank {

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct AnalyzeConfig {
    model::Index burn_in = 500;
    model::Index states = 16;
    model::Index stride = 10;
    analysis::IrfConfig irf;
    double bbar_min = -0.5;
    double bbar_max = -0.01;
    model::Index points = 10;
    model::Index periods = 200;
    model::Index diverge_batch = 1;
};

// Everything a command needs. Keys are flat with section prefixes:
//   seed
//   model.<param>            value used by analysis jobs
//   model.<param>.min|max    training range
//   net.agents, net.hidden (comma separated), net.activation
//   train.*, analyze.*
struct RunConfig {
    std::uint64_t seed = 0;
    model::ModelParams params;
    model::ParamBounds bounds = model::ParamBounds::defaults();
    model::Index agents = 10;
    std::vector<int> hidden{32, 32};
    nn::Activation activation = nn::Activation::Tanh;
    TrainerConfig train;
    AnalyzeConfig analyze;

    model::PolicyNetSpec nets() const { return model::PolicyNetSpec::make(agents, hidden, activation); }
    // Trainer settings with the shared seed applied.
    TrainerConfig trainer() const;
    void validate() const;

    // Applies one key; throws ConfigError naming the key when it is unknown
    // or the value does not parse.
    void set(const std::string& key, const std::string& value);
    // Every key in canonical order, one "key = value" line each.
    std::string to_text() const;

    static RunConfig parse(const std::string& text, const std::string& origin = "<string>");
    static RunConfig load(const std::string& path);
    void save(const std::string& path) const;

    static std::vector<std::string> keys();
};

bool operator==(const RunConfig& a, const RunConfig& b);

}  // namespace hardhank
