#include "hardhank/ad/tape.hpp"

#include <cmath>
#include <sstream>

namespace hardhank::ad {

NumericalError::NumericalError(std::string primitive, const std::string& detail)
    : std::runtime_error("non-finite value produced by primitive '" + primitive + "'" +
                         (detail.empty() ? std::string{} : ": " + detail)),
      primitive_(std::move(primitive)) {}

const Array& Var::value() const {
    if (!tape_) throw std::logic_error("Var: use of an unbound variable");
    return tape_->value(*this);
}

double Var::scalar() const {
    const Array& v = value();
    if (v.size() != 1) throw std::invalid_argument("Var::scalar: value is not 1x1");
    return v(0, 0);
}

Var Tape::constant(Array value) { return push(std::move(value), "constant", {}, nullptr); }

Var Tape::constant(double value) { return constant(Array::Constant(1, 1, value)); }

Var Tape::variable(Array value) {
    Var v = push(std::move(value), "variable", {}, nullptr);
    nodes_[v.id()].needs_grad = true;
    return v;
}

Var Tape::push(Array value, const char* op, const std::vector<Var>& parents, BackwardFn backward) {
    if (!value.allFinite()) {
        std::ostringstream os;
        os << "shape " << value.rows() << "x" << value.cols();
        throw NumericalError(op, os.str());
    }
    bool needs = false;
    for (const Var& p : parents) {
        if (p.tape() != this) throw std::logic_error(std::string("Tape: operand of '") + op + "' lives on another tape");
        needs = needs || nodes_[p.id()].needs_grad;
    }
    Node node;
    node.value = std::move(value);
    node.needs_grad = needs;
    node.op = op;
    if (needs) node.backward = std::move(backward);
    nodes_.push_back(std::move(node));
    return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Array Tape::grad(const Var& v) const {
    const Node& n = nodes_[v.id()];
    if (n.has_grad) return n.grad;
    return Array::Zero(n.value.rows(), n.value.cols());
}

void Tape::accumulate(int id, const Array& g) {
    Node& n = nodes_[id];
    if (!n.needs_grad) return;
    if (!n.has_grad) {
        n.grad = g;
        n.has_grad = true;
    } else {
        n.grad += g;
    }
}

void Tape::zero_grad() {
    for (Node& n : nodes_) n.has_grad = false;
}

void Tape::backward(const Var& out) {
    if (out.rows() != 1 || out.cols() != 1) throw std::invalid_argument("Tape::backward: output must be 1x1");
    backward(out, Array::Ones(1, 1));
}

void Tape::backward(const Var& out, const Array& seed) {
    if (seed.rows() != out.rows() || seed.cols() != out.cols())
        throw std::invalid_argument("Tape::backward: seed shape mismatch");
    zero_grad();
    accumulate(out.id(), seed);
    for (int i = out.id(); i >= 0; --i) {
        Node& n = nodes_[i];
        if (n.has_grad && n.backward) n.backward(*this, i);
    }
}

// ---------------------------------------------------------------------------

Array broadcast_to(const Array& a, Index rows, Index cols) {
    if (a.rows() == rows && a.cols() == cols) return a;
    if (a.rows() == 1 && a.cols() == 1) return Array::Constant(rows, cols, a(0, 0));
    if (a.cols() == 1 && a.rows() == rows) return a.replicate(1, cols);
    if (a.rows() == 1 && a.cols() == cols) return a.replicate(rows, 1);
    std::ostringstream os;
    os << "cannot broadcast " << a.rows() << "x" << a.cols() << " to " << rows << "x" << cols;
    throw std::invalid_argument(os.str());
}

Array reduce_to(const Array& g, Index rows, Index cols) {
    if (g.rows() == rows && g.cols() == cols) return g;
    if (rows == 1 && cols == 1) return Array::Constant(1, 1, g.sum());
    if (cols == 1 && rows == g.rows()) return g.rowwise().sum();
    if (rows == 1 && cols == g.cols()) return g.colwise().sum();
    throw std::invalid_argument("reduce_to: incompatible shapes");
}

namespace {

std::pair<Index, Index> result_shape(const Array& a, const Array& b, const char* op) {
    const Index r = std::max(a.rows(), b.rows());
    const Index c = std::max(a.cols(), b.cols());
    auto ok = [&](const Array& x) {
        return (x.rows() == r || x.rows() == 1) && (x.cols() == c || x.cols() == 1);
    };
    if (!ok(a) || !ok(b)) {
        std::ostringstream os;
        os << op << ": incompatible shapes " << a.rows() << "x" << a.cols() << " and " << b.rows() << "x"
           << b.cols();
        throw std::invalid_argument(os.str());
    }
    return {r, c};
}

Tape& tape_of(const Var& a, const Var& b) {
    if (a.tape() != b.tape() || !a.tape()) throw std::logic_error("binary op on variables from different tapes");
    return *a.tape();
}

// Elementwise unary op: y = f(x), dy/dx = df(x, y).
template <class F, class DF>
Var unary(const Var& x, const char* op, F f, DF df) {
    Tape& t = *x.tape();
    const int xi = x.id();
    Array y = f(x.value());
    return t.push(std::move(y), op, {x}, [xi, df](Tape& tp, int self) {
        const Array& g = tp.node_grad(self);
        tp.accumulate(xi, g * df(tp.node_value(xi), tp.node_value(self)));
    });
}

}  // namespace

Var operator+(const Var& a, const Var& b) {
    Tape& t = tape_of(a, b);
    auto [r, c] = result_shape(a.value(), b.value(), "add");
    const int ai = a.id(), bi = b.id();
    Array y = broadcast_to(a.value(), r, c) + broadcast_to(b.value(), r, c);
    return t.push(std::move(y), "add", {a, b}, [ai, bi](Tape& tp, int self) {
        const Array& g = tp.node_grad(self);
        if (tp.needs_grad(ai)) tp.accumulate(ai, reduce_to(g, tp.node_value(ai).rows(), tp.node_value(ai).cols()));
        if (tp.needs_grad(bi)) tp.accumulate(bi, reduce_to(g, tp.node_value(bi).rows(), tp.node_value(bi).cols()));
    });
}

Var operator-(const Var& a, const Var& b) {
    Tape& t = tape_of(a, b);
    auto [r, c] = result_shape(a.value(), b.value(), "sub");
    const int ai = a.id(), bi = b.id();
    Array y = broadcast_to(a.value(), r, c) - broadcast_to(b.value(), r, c);
    return t.push(std::move(y), "sub", {a, b}, [ai, bi](Tape& tp, int self) {
        const Array& g = tp.node_grad(self);
        if (tp.needs_grad(ai)) tp.accumulate(ai, reduce_to(g, tp.node_value(ai).rows(), tp.node_value(ai).cols()));
        if (tp.needs_grad(bi))
            tp.accumulate(bi, reduce_to(-g, tp.node_value(bi).rows(), tp.node_value(bi).cols()));
    });
}

Var operator*(const Var& a, const Var& b) {
    Tape& t = tape_of(a, b);
    auto [r, c] = result_shape(a.value(), b.value(), "mul");
    const int ai = a.id(), bi = b.id();
    Array y = broadcast_to(a.value(), r, c) * broadcast_to(b.value(), r, c);
    return t.push(std::move(y), "mul", {a, b}, [ai, bi, r, c](Tape& tp, int self) {
        const Array& g = tp.node_grad(self);
        const Array& av = tp.node_value(ai);
        const Array& bv = tp.node_value(bi);
        if (tp.needs_grad(ai)) tp.accumulate(ai, reduce_to(g * broadcast_to(bv, r, c), av.rows(), av.cols()));
        if (tp.needs_grad(bi)) tp.accumulate(bi, reduce_to(g * broadcast_to(av, r, c), bv.rows(), bv.cols()));
    });
}

Var operator/(const Var& a, const Var& b) {
    Tape& t = tape_of(a, b);
    auto [r, c] = result_shape(a.value(), b.value(), "div");
    const int ai = a.id(), bi = b.id();
    Array y = broadcast_to(a.value(), r, c) / broadcast_to(b.value(), r, c);
    return t.push(std::move(y), "div", {a, b}, [ai, bi, r, c](Tape& tp, int self) {
        const Array& g = tp.node_grad(self);
        const Array& av = tp.node_value(ai);
        const Array& bv = tp.node_value(bi);
        const Array bb = broadcast_to(bv, r, c);
        if (tp.needs_grad(ai)) tp.accumulate(ai, reduce_to(g / bb, av.rows(), av.cols()));
        if (tp.needs_grad(bi))
            tp.accumulate(bi, reduce_to(-g * tp.node_value(self) / bb, bv.rows(), bv.cols()));
    });
}

Var operator-(const Var& a) {
    return unary(a, "neg", [](const Array& x) -> Array { return -x; },
                 [](const Array& x, const Array&) -> Array { return Array::Constant(x.rows(), x.cols(), -1.0); });
}

Var operator+(const Var& a, double b) {
    return unary(a, "add_scalar", [b](const Array& x) -> Array { return x + b; },
                 [](const Array& x, const Array&) -> Array { return Array::Ones(x.rows(), x.cols()); });
}
Var operator+(double a, const Var& b) { return b + a; }
Var operator-(const Var& a, double b) { return a + (-b); }
Var operator-(double a, const Var& b) {
    return unary(b, "rsub_scalar", [a](const Array& x) -> Array { return a - x; },
                 [](const Array& x, const Array&) -> Array { return Array::Constant(x.rows(), x.cols(), -1.0); });
}
Var operator*(const Var& a, double b) {
    return unary(a, "mul_scalar", [b](const Array& x) -> Array { return x * b; },
                 [b](const Array& x, const Array&) -> Array { return Array::Constant(x.rows(), x.cols(), b); });
}
Var operator*(double a, const Var& b) { return b * a; }
Var operator/(const Var& a, double b) { return a * (1.0 / b); }
Var operator/(double a, const Var& b) {
    return unary(b, "rdiv_scalar", [a](const Array& x) -> Array { return a / x; },
                 [a](const Array& x, const Array&) -> Array { return -a / x.square(); });
}

Var operator*(const Var& a, const Array& mask) {
    Tape& t = *a.tape();
    auto [r, c] = result_shape(a.value(), mask, "mul_const");
    const int ai = a.id();
    Array y = broadcast_to(a.value(), r, c) * broadcast_to(mask, r, c);
    return t.push(std::move(y), "mul_const", {a}, [ai, m = broadcast_to(mask, r, c)](Tape& tp, int self) {
        const Array& av = tp.node_value(ai);
        tp.accumulate(ai, reduce_to(tp.node_grad(self) * m, av.rows(), av.cols()));
    });
}

Var exp(const Var& x) {
    return unary(x, "exp", [](const Array& v) -> Array { return v.exp(); },
                 [](const Array&, const Array& y) -> Array { return y; });
}

Var log(const Var& x) {
    return unary(x, "log", [](const Array& v) -> Array { return v.log(); },
                 [](const Array& v, const Array&) -> Array { return v.inverse(); });
}

Var sqrt(const Var& x) {
    return unary(x, "sqrt", [](const Array& v) -> Array { return v.sqrt(); },
                 [](const Array&, const Array& y) -> Array { return 0.5 / y; });
}

Var square(const Var& x) {
    return unary(x, "square", [](const Array& v) -> Array { return v.square(); },
                 [](const Array& v, const Array&) -> Array { return 2.0 * v; });
}

Var pow(const Var& x, double p) {
    return unary(x, "pow", [p](const Array& v) -> Array { return v.pow(p); },
                 [p](const Array& v, const Array&) -> Array { return p * v.pow(p - 1.0); });
}

Var pow(const Var& base, const Var& exponent) {
    Tape& t = tape_of(base, exponent);
    auto [r, c] = result_shape(base.value(), exponent.value(), "pow");
    const int ai = base.id(), bi = exponent.id();
    Array y = broadcast_to(base.value(), r, c).pow(broadcast_to(exponent.value(), r, c));
    return t.push(std::move(y), "pow", {base, exponent}, [ai, bi, r, c](Tape& tp, int self) {
        const Array& g = tp.node_grad(self);
        const Array& av = tp.node_value(ai);
        const Array& bv = tp.node_value(bi);
        const Array ab = broadcast_to(av, r, c);
        const Array eb = broadcast_to(bv, r, c);
        if (tp.needs_grad(ai)) tp.accumulate(ai, reduce_to(g * eb * ab.pow(eb - 1.0), av.rows(), av.cols()));
        if (tp.needs_grad(bi))
            tp.accumulate(bi, reduce_to(g * tp.node_value(self) * ab.log(), bv.rows(), bv.cols()));
    });
}

Var tanh(const Var& x) {
    return unary(x, "tanh", [](const Array& v) -> Array { return v.tanh(); },
                 [](const Array&, const Array& y) -> Array { return 1.0 - y.square(); });
}

Var relu(const Var& x) {
    return unary(x, "relu", [](const Array& v) -> Array { return v.max(0.0); },
                 [](const Array& v, const Array&) -> Array { return (v > 0.0).cast<double>(); });
}

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

Var sigmoid(const Var& x) {
    return unary(x, "sigmoid", [](const Array& v) -> Array { return v.unaryExpr([](double z) { return sigmoid(z); }); },
                 [](const Array&, const Array& y) -> Array { return y * (1.0 - y); });
}

Var softplus(const Var& x) {
    return unary(x, "softplus",
                 [](const Array& v) -> Array { return v.unaryExpr([](double z) { return softplus(z); }); },
                 [](const Array& v, const Array&) -> Array {
                     return v.unaryExpr([](double z) { return sigmoid(z); });
                 });
}

Var minimum(const Var& a, const Var& b) {
    Tape& t = tape_of(a, b);
    auto [r, c] = result_shape(a.value(), b.value(), "min");
    const int ai = a.id(), bi = b.id();
    const Array ab = broadcast_to(a.value(), r, c);
    const Array bb = broadcast_to(b.value(), r, c);
    Array left = (ab <= bb).cast<double>();
    Array y = ab.min(bb);
    return t.push(std::move(y), "min", {a, b}, [ai, bi, left = std::move(left)](Tape& tp, int self) {
        const Array& g = tp.node_grad(self);
        const Array& av = tp.node_value(ai);
        const Array& bv = tp.node_value(bi);
        if (tp.needs_grad(ai)) tp.accumulate(ai, reduce_to(g * left, av.rows(), av.cols()));
        if (tp.needs_grad(bi)) tp.accumulate(bi, reduce_to(g * (1.0 - left), bv.rows(), bv.cols()));
    });
}

Var maximum(const Var& a, const Var& b) {
    Tape& t = tape_of(a, b);
    auto [r, c] = result_shape(a.value(), b.value(), "max");
    const int ai = a.id(), bi = b.id();
    const Array ab = broadcast_to(a.value(), r, c);
    const Array bb = broadcast_to(b.value(), r, c);
    Array left = (ab >= bb).cast<double>();
    Array y = ab.max(bb);
    return t.push(std::move(y), "max", {a, b}, [ai, bi, left = std::move(left)](Tape& tp, int self) {
        const Array& g = tp.node_grad(self);
        const Array& av = tp.node_value(ai);
        const Array& bv = tp.node_value(bi);
        if (tp.needs_grad(ai)) tp.accumulate(ai, reduce_to(g * left, av.rows(), av.cols()));
        if (tp.needs_grad(bi)) tp.accumulate(bi, reduce_to(g * (1.0 - left), bv.rows(), bv.cols()));
    });
}

Var row_sum(const Var& x) {
    Tape& t = *x.tape();
    const int xi = x.id();
    const Index cols = x.cols();
    Array y = x.value().rowwise().sum();
    return t.push(std::move(y), "row_sum", {x},
                  [xi, cols](Tape& tp, int self) { tp.accumulate(xi, tp.node_grad(self).replicate(1, cols)); });
}

Var row_mean(const Var& x) { return row_sum(x) * (1.0 / static_cast<double>(x.cols())); }

Var sum(const Var& x) {
    Tape& t = *x.tape();
    const int xi = x.id();
    const Index r = x.rows(), c = x.cols();
    return t.push(Array::Constant(1, 1, x.value().sum()), "sum", {x}, [xi, r, c](Tape& tp, int self) {
        tp.accumulate(xi, Array::Constant(r, c, tp.node_grad(self)(0, 0)));
    });
}

Var mean(const Var& x) { return sum(x) * (1.0 / static_cast<double>(x.value().size())); }

Var matmul(const Var& a, const Var& b) {
    Tape& t = tape_of(a, b);
    if (a.cols() != b.rows()) {
        std::ostringstream os;
        os << "matmul: inner dimensions differ (" << a.rows() << "x" << a.cols() << " * " << b.rows() << "x"
           << b.cols() << ")";
        throw std::invalid_argument(os.str());
    }
    const int ai = a.id(), bi = b.id();
    Array y = (a.value().matrix() * b.value().matrix()).array();
    return t.push(std::move(y), "matmul", {a, b}, [ai, bi](Tape& tp, int self) {
        const auto g = tp.node_grad(self).matrix();
        if (tp.needs_grad(ai)) tp.accumulate(ai, (g * tp.node_value(bi).matrix().transpose()).array());
        if (tp.needs_grad(bi)) tp.accumulate(bi, (tp.node_value(ai).matrix().transpose() * g).array());
    });
}

Var block(const Var& x, Index row, Index col, Index rows, Index cols) {
    Tape& t = *x.tape();
    if (row < 0 || col < 0 || row + rows > x.rows() || col + cols > x.cols())
        throw std::out_of_range("block: range outside operand");
    const int xi = x.id();
    Array y = x.value().block(row, col, rows, cols);
    return t.push(std::move(y), "block", {x}, [xi, row, col, rows, cols](Tape& tp, int self) {
        const Array& xv = tp.node_value(xi);
        Array g = Array::Zero(xv.rows(), xv.cols());
        g.block(row, col, rows, cols) = tp.node_grad(self);
        tp.accumulate(xi, g);
    });
}

namespace {

Var concat(const std::vector<Var>& parts, bool horizontal) {
    if (parts.empty()) throw std::invalid_argument("concat: no operands");
    Tape& t = *parts.front().tape();
    Index rows = 0, cols = 0;
    for (const Var& p : parts) {
        if (horizontal) {
            if (rows == 0) rows = p.rows();
            if (p.rows() != rows) throw std::invalid_argument("hcat: row counts differ");
            cols += p.cols();
        } else {
            if (cols == 0) cols = p.cols();
            if (p.cols() != cols) throw std::invalid_argument("vcat: column counts differ");
            rows += p.rows();
        }
    }
    Array y(rows, cols);
    std::vector<std::pair<int, Index>> offsets;
    Index off = 0;
    for (const Var& p : parts) {
        if (horizontal) {
            y.middleCols(off, p.cols()) = p.value();
            offsets.emplace_back(p.id(), off);
            off += p.cols();
        } else {
            y.middleRows(off, p.rows()) = p.value();
            offsets.emplace_back(p.id(), off);
            off += p.rows();
        }
    }
    return t.push(std::move(y), horizontal ? "hcat" : "vcat", parts,
                  [offsets = std::move(offsets), horizontal](Tape& tp, int self) {
                      const Array& g = tp.node_grad(self);
                      for (const auto& [id, o] : offsets) {
                          if (!tp.needs_grad(id)) continue;
                          const Array& pv = tp.node_value(id);
                          if (horizontal)
                              tp.accumulate(id, g.middleCols(o, pv.cols()));
                          else
                              tp.accumulate(id, g.middleRows(o, pv.rows()));
                      }
                  });
}

}  // namespace

Var hcat(const std::vector<Var>& parts) { return concat(parts, true); }
Var vcat(const std::vector<Var>& parts) { return concat(parts, false); }

Var tile_rows(const Var& x, Index times) {
    Tape& t = *x.tape();
    const int xi = x.id();
    const Index r = x.rows();
    Array y = x.value().replicate(times, 1);
    return t.push(std::move(y), "tile_rows", {x}, [xi, r, times](Tape& tp, int self) {
        const Array& g = tp.node_grad(self);
        Array acc = g.topRows(r);
        for (Index k = 1; k < times; ++k) acc += g.middleRows(k * r, r);
        tp.accumulate(xi, acc);
    });
}

Var reshape(const Var& x, Index rows, Index cols) {
    Tape& t = *x.tape();
    if (rows * cols != x.value().size()) throw std::invalid_argument("reshape: element count differs");
    const int xi = x.id();
    const Index r0 = x.rows(), c0 = x.cols();
    Array y = Eigen::Map<const Array>(x.value().data(), rows, cols);
    return t.push(std::move(y), "reshape", {x}, [xi, r0, c0](Tape& tp, int self) {
        tp.accumulate(xi, Eigen::Map<const Array>(tp.node_grad(self).data(), r0, c0));
    });
}

}  // namespace hardhank::ad
