#pragma once

#include <Eigen/Dense>

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hardhank::ad {

using Array = Eigen::ArrayXXd;
using Index = Eigen::Index;

// Thrown when a primitive produces a non-finite value. Carries the name of the
// offending primitive so callers (the trainer's reset logic, CLI diagnostics)
// can report where the computation broke down.
class NumericalError : public std::runtime_error {
public:
    NumericalError(std::string primitive, const std::string& detail = {});
    const std::string& primitive() const { return primitive_; }

private:
    std::string primitive_;
};

class Tape;

// Handle to a node on a tape. Every node holds a 2-D array; scalars are 1x1.
class Var {
public:
    Var() = default;

    Tape* tape() const { return tape_; }
    int id() const { return id_; }
    bool valid() const { return tape_ != nullptr; }

    const Array& value() const;
    Index rows() const { return value().rows(); }
    Index cols() const { return value().cols(); }
    double scalar() const;

private:
    friend class Tape;
    Var(Tape* tape, int id) : tape_(tape), id_(id) {}

    Tape* tape_ = nullptr;
    int id_ = -1;
};

// Reverse-mode computation tape. Nodes are appended in evaluation order, so a
// single reverse sweep visits every node after all of its consumers.
class Tape {
public:
    using BackwardFn = std::function<void(Tape&, int self)>;

    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    // Leaf that never receives a gradient.
    Var constant(Array value);
    Var constant(double value);
    // Leaf whose gradient is tracked.
    Var variable(Array value);

    const Array& value(const Var& v) const { return nodes_[v.id()].value; }
    // Gradient accumulated by the last backward sweep (zeros if untouched).
    Array grad(const Var& v) const;

    bool needs_grad(int id) const { return nodes_[id].needs_grad; }

    // Seeds d(out)/d(out) = 1; `out` must be 1x1.
    void backward(const Var& out);
    // Seeds with an arbitrary cotangent of out's shape.
    void backward(const Var& out, const Array& seed);
    void zero_grad();

    std::size_t size() const { return nodes_.size(); }

    // Primitive construction. Checks the value for finiteness and throws a
    // NumericalError naming `op` otherwise.
    Var push(Array value, const char* op, const std::vector<Var>& parents, BackwardFn backward);

    const Array& node_value(int id) const { return nodes_[id].value; }
    const Array& node_grad(int id) const { return nodes_[id].grad; }
    void accumulate(int id, const Array& g);

private:
    struct Node {
        Array value;
        Array grad;
        bool needs_grad = false;
        bool has_grad = false;
        const char* op = "";
        BackwardFn backward;
    };

    std::vector<Node> nodes_;
};

// Broadcasting helpers: a dimension of extent 1 stretches to match.
Array broadcast_to(const Array& a, Index rows, Index cols);
Array reduce_to(const Array& g, Index rows, Index cols);

// ---- elementwise arithmetic (with broadcasting) ----
Var operator+(const Var& a, const Var& b);
Var operator-(const Var& a, const Var& b);
Var operator*(const Var& a, const Var& b);
Var operator/(const Var& a, const Var& b);
Var operator-(const Var& a);
Var operator+(const Var& a, double b);
Var operator+(double a, const Var& b);
Var operator-(const Var& a, double b);
Var operator-(double a, const Var& b);
Var operator*(const Var& a, double b);
Var operator*(double a, const Var& b);
Var operator/(const Var& a, double b);
Var operator/(double a, const Var& b);

// Multiplication by a fixed array (masks, per-row constants).
Var operator*(const Var& a, const Array& mask);

// ---- elementwise functions ----
Var exp(const Var& x);
Var log(const Var& x);
Var sqrt(const Var& x);
Var square(const Var& x);
Var pow(const Var& x, double p);
Var pow(const Var& base, const Var& exponent);
Var tanh(const Var& x);
Var relu(const Var& x);
Var sigmoid(const Var& x);
Var softplus(const Var& x);
// Ties take the left operand's branch.
Var minimum(const Var& a, const Var& b);
Var maximum(const Var& a, const Var& b);

// ---- reductions ----
Var row_sum(const Var& x);   // rows x 1
Var row_mean(const Var& x);  // rows x 1
Var sum(const Var& x);       // 1 x 1
Var mean(const Var& x);      // 1 x 1

// ---- shape ----
Var matmul(const Var& a, const Var& b);
Var block(const Var& x, Index row, Index col, Index rows, Index cols);
Var hcat(const std::vector<Var>& parts);
Var vcat(const std::vector<Var>& parts);
Var tile_rows(const Var& x, Index times);  // vertical stack of `times` copies
Var reshape(const Var& x, Index rows, Index cols);  // column-major

// Numerically stable scalar helpers shared with non-tape code.
double softplus(double x);
double sigmoid(double x);

}  // namespace hardhank::ad
