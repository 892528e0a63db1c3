#pragma once

#include "hardhank/ad/tape.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

// Differentiable output layers that force a vector into elementwise bounds
// while preserving an exact sum:  a[i] <= w[i] <= b[i],  sum(w) = C.
namespace hardhank::constraints {

using ad::Var;
using BoolArray = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

// Absolute tolerance used to decide that an element sits on a bound:
// |w - bound| <= kBindingTolerance * max(1, |bound|).
inline constexpr double kBindingTolerance = 1e-12;

struct BoundedSumSpec {
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
    double total = 0.0;

    // Throws std::invalid_argument unless lower < upper elementwise and
    // sum(lower) < total < sum(upper).
    void validate() const;
};

// ---- single-output bound maps ----

enum class BoundKind { Lower, Upper, Interval };

struct Bound {
    BoundKind kind = BoundKind::Interval;
    double lower = 0.0;
    double upper = 1.0;

    static Bound above(double a) { return {BoundKind::Lower, a, 0.0}; }
    static Bound below(double b) { return {BoundKind::Upper, 0.0, b}; }
    static Bound between(double a, double b) { return {BoundKind::Interval, a, b}; }
};

// lower: a + softplus(z); upper: b - softplus(z); interval: a + (b - a) sigmoid(z).
double bounded_activation(double z, const Bound& bound);
Var bounded_activation(const Var& z, const Bound& bound);

// C * softmax(x), row by row.
Eigen::VectorXd softmax_scale(const Eigen::VectorXd& x, double total);
Var softmax_scale(const Var& x, const Var& total);

// ---- re-scaling projections ----

// Which bound is handled last by project_redistribute. Only that bound can
// bind in the output.
enum class BindLast { Lower, Upper };

struct ProjectionResult {
    Eigen::VectorXd w;
    std::vector<bool> binding_mask;
    // Redistribution pushed a receiver past its own bound (or there were no
    // receivers); the final clamp restored feasibility at the cost of the sum.
    bool edge_case_flag = false;
    std::string diagnostic;
};

ProjectionResult project_redistribute(const Eigen::VectorXd& x, const BoundedSumSpec& spec, BindLast bind_last);
ProjectionResult project_clamp_shift(const Eigen::VectorXd& x, const BoundedSumSpec& spec);

// Row-batched tape versions. Every row of `x` is an independent problem;
// `lower`/`upper` broadcast against x (rows x K, rows x 1 or 1 x 1) and
// `total` is rows x 1 (or 1 x 1). Feasibility is the caller's responsibility.
struct BatchProjection {
    Var w;
    BoolArray binding;                // rows x K
    std::vector<bool> edge_case;      // one flag per row
};

BatchProjection project_redistribute(const Var& x, const Var& lower, const Var& upper, const Var& total,
                                     BindLast bind_last, bool cap_shift = false);
BatchProjection project_clamp_shift(const Var& x, const Var& lower, const Var& upper, const Var& total);

// ---- binding-count pre-pass ----

// Largest count k such that the k largest upper bounds plus the remaining
// lower bounds (sorted by upper bound, descending) still sum below the total.
int max_binding_count(const BoundedSumSpec& spec);

struct CapShift {
    Eigen::VectorXd shifted;  // z - z_bar
    int max_binding = 0;      // i*
    double z_bar = 0.0;
};

// Shifts z so that after re-scaling to the target sum, the i*-th largest
// element lands exactly on its own upper bound. Throws std::domain_error when
// the shift is undefined (zero denominator).
CapShift binding_cap_shift(const Eigen::VectorXd& z, const BoundedSumSpec& spec);

// Tape version used as an optional pre-pass on the sum-rescaled vector: rows
// whose i*-th largest element exceeds its bound after re-scaling are shifted
// and re-scaled; other rows pass through unchanged.
Var apply_binding_cap(const Var& z, const Var& lower, const Var& upper, const Var& total);

}  // namespace hardhank::constraints
