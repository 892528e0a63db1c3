#pragma once

#include "hardhank/ad/tape.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace hardhank::nn {

using ad::Var;
using ParamVector = Eigen::VectorXd;

enum class Activation : std::uint32_t { Tanh = 0, Relu = 1 };

std::string to_string(Activation a);
Activation parse_activation(const std::string& name);

// Named slice of the final layer's outputs.
struct Head {
    std::string name;
    int offset = 0;
    int width = 1;
};

// Fully connected net: widths = {input, hidden..., output}. Hidden layers use
// `activation`; the output layer is linear. Parameters are laid out layer by
// layer as W (input x output, column-major) followed by b.
struct NetworkSpec {
    std::vector<int> widths;
    Activation activation = Activation::Tanh;
    std::vector<Head> heads;

    void validate() const;
    int input_width() const { return widths.front(); }
    int output_width() const { return widths.back(); }
    int num_layers() const { return static_cast<int>(widths.size()) - 1; }
    Eigen::Index num_params() const;
    const Head& head(const std::string& name) const;
};

// Batch forward pass. `theta` is a P x 1 tape node holding every parameter;
// this net's parameters start at `offset`. `input` is batch x input_width.
Var forward(const Var& theta, Eigen::Index offset, const NetworkSpec& spec, const Var& input);

// Same network applied to rows [shared | own], where `shared` (batch x S) is
// common to `repeats` consecutive blocks of `own` ((repeats * batch) x O,
// block-major). The first layer's shared product is computed once per batch
// row instead of once per output row.
Var forward_shared(const Var& theta, Eigen::Index offset, const NetworkSpec& spec, const Var& shared,
                   const Var& own, Eigen::Index repeats);

// Single-input convenience wrapper (no gradient).
Eigen::VectorXd forward(const ParamVector& params, const NetworkSpec& spec, const Eigen::VectorXd& input);

// Entries i.i.d. uniform on [-scale, scale]; a pure function of (size, scale, seed).
ParamVector init_params(Eigen::Index size, double scale, std::uint64_t seed);
ParamVector init_params(const NetworkSpec& spec, double scale, std::uint64_t seed);

using LossFn = std::function<Var(ad::Tape&, const Var& theta)>;

struct ValueAndGradient {
    double value = 0.0;
    Eigen::VectorXd gradient;
};

// Builds the loss on a fresh tape and runs one reverse sweep.
ValueAndGradient value_and_gradient(const LossFn& loss, const ParamVector& params);
Eigen::VectorXd gradient(const LossFn& loss, const ParamVector& params);

}  // namespace hardhank::nn
