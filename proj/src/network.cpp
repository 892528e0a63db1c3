#include "hardhank/nn/network.hpp"

#include "hardhank/rng.hpp"

#include <sstream>
#include <stdexcept>

namespace hardhank::nn {

std::string to_string(Activation a) { return a == Activation::Relu ? "relu" : "tanh"; }

Activation parse_activation(const std::string& name) {
    if (name == "tanh") return Activation::Tanh;
    if (name == "relu") return Activation::Relu;
    throw std::invalid_argument("unknown activation '" + name + "' (expected tanh or relu)");
}

void NetworkSpec::validate() const {
    if (widths.size() < 2) throw std::invalid_argument("NetworkSpec: need at least input and output widths");
    for (int w : widths)
        if (w <= 0) throw std::invalid_argument("NetworkSpec: layer widths must be positive");
    for (const auto& h : heads)
        if (h.offset < 0 || h.width <= 0 || h.offset + h.width > output_width())
            throw std::invalid_argument("NetworkSpec: head '" + h.name + "' outside the output layer");
}

Eigen::Index NetworkSpec::num_params() const {
    Eigen::Index n = 0;
    for (int l = 0; l < num_layers(); ++l) n += static_cast<Eigen::Index>(widths[l] + 1) * widths[l + 1];
    return n;
}

const Head& NetworkSpec::head(const std::string& name) const {
    for (const auto& h : heads)
        if (h.name == name) return h;
    throw std::out_of_range("NetworkSpec: no head named '" + name + "'");
}

namespace {

void check_theta(const Var& theta, Eigen::Index offset, const NetworkSpec& spec) {
    if (theta.cols() != 1 || offset + spec.num_params() > theta.rows())
        throw std::invalid_argument("forward: parameter vector too short for network");
}

void check_width(Eigen::Index got, const NetworkSpec& spec) {
    if (got != spec.input_width()) {
        std::ostringstream os;
        os << "forward: input has " << got << " columns, network expects " << spec.input_width();
        throw std::invalid_argument(os.str());
    }
}

Var activate(const Var& x, Activation a) { return a == Activation::Relu ? ad::relu(x) : ad::tanh(x); }

// Layers from `first` on, starting with parameters at `pos`.
Var run_layers(const Var& theta, Eigen::Index pos, const NetworkSpec& spec, Var x, int first) {
    for (int l = first; l < spec.num_layers(); ++l) {
        const Eigen::Index in = spec.widths[l], out = spec.widths[l + 1];
        Var w = ad::reshape(ad::block(theta, pos, 0, in * out, 1), in, out);
        pos += in * out;
        Var b = ad::reshape(ad::block(theta, pos, 0, out, 1), 1, out);
        pos += out;
        x = ad::matmul(x, w) + b;
        if (l + 1 < spec.num_layers()) x = activate(x, spec.activation);
    }
    return x;
}

}  // namespace

Var forward(const Var& theta, Eigen::Index offset, const NetworkSpec& spec, const Var& input) {
    check_width(input.cols(), spec);
    check_theta(theta, offset, spec);
    return run_layers(theta, offset, spec, input, 0);
}

Var forward_shared(const Var& theta, Eigen::Index offset, const NetworkSpec& spec, const Var& shared,
                   const Var& own, Eigen::Index repeats) {
    check_width(shared.cols() + own.cols(), spec);
    check_theta(theta, offset, spec);
    if (own.rows() != repeats * shared.rows())
        throw std::invalid_argument("forward_shared: own rows must equal repeats x shared rows");
    const Eigen::Index ns = shared.cols(), no = own.cols(), out = spec.widths[1];
    const Eigen::Index in = ns + no;
    // Column-major W (in x out): rows [0, ns) belong to the shared inputs.
    Var w = ad::reshape(ad::block(theta, offset, 0, in * out, 1), in, out);
    Var w_shared = ad::block(w, 0, 0, ns, out);
    Var w_own = ad::block(w, ns, 0, no, out);
    Var b = ad::reshape(ad::block(theta, offset + in * out, 0, out, 1), 1, out);
    Var x = ad::tile_rows(ad::matmul(shared, w_shared) + b, repeats) + ad::matmul(own, w_own);
    if (spec.num_layers() > 1) x = activate(x, spec.activation);
    return run_layers(theta, offset + in * out + out, spec, x, 1);
}

Eigen::VectorXd forward(const ParamVector& params, const NetworkSpec& spec, const Eigen::VectorXd& input) {
    spec.validate();
    if (params.size() != spec.num_params()) throw std::invalid_argument("forward: parameter count mismatch");
    ad::Tape t;
    Var out = forward(t.constant(ad::Array(params)), 0, spec, t.constant(ad::Array(input.transpose())));
    return out.value().row(0).transpose();
}

ParamVector init_params(Eigen::Index size, double scale, std::uint64_t seed) {
    if (!(scale > 0.0)) throw std::invalid_argument("init_params: scale must be positive");
    const CounterRng rng = CounterRng(seed).substream("init");
    ParamVector p(size);
    for (Eigen::Index i = 0; i < size; ++i) p[i] = scale * (2.0 * rng.uniform(static_cast<std::uint64_t>(i)) - 1.0);
    return p;
}

ParamVector init_params(const NetworkSpec& spec, double scale, std::uint64_t seed) {
    spec.validate();
    return init_params(spec.num_params(), scale, seed);
}

ValueAndGradient value_and_gradient(const LossFn& loss, const ParamVector& params) {
    ad::Tape t;
    Var theta = t.variable(ad::Array(params));
    Var out = loss(t, theta);
    t.backward(out);
    return {out.scalar(), t.grad(theta).matrix()};
}

Eigen::VectorXd gradient(const LossFn& loss, const ParamVector& params) {
    return value_and_gradient(loss, params).gradient;
}

}  // namespace hardhank::nn
