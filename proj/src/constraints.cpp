#include "hardhank/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace hardhank::constraints {

using ad::Array;
using ad::Index;

void BoundedSumSpec::validate() const {
    if (lower.size() != upper.size() || lower.size() == 0)
        throw std::invalid_argument("BoundedSumSpec: lower/upper must be non-empty and of equal length");
    for (Index i = 0; i < lower.size(); ++i) {
        if (!(lower[i] < upper[i])) {
            std::ostringstream os;
            os << "BoundedSumSpec: lower[" << i << "] = " << lower[i] << " is not below upper[" << i
               << "] = " << upper[i];
            throw std::invalid_argument(os.str());
        }
    }
    if (!std::isfinite(total) || !(lower.sum() < total) || !(total < upper.sum())) {
        std::ostringstream os;
        os << "BoundedSumSpec: total " << total << " outside (" << lower.sum() << ", " << upper.sum() << ")";
        throw std::invalid_argument(os.str());
    }
}

// ---------------------------------------------------------------------------

double bounded_activation(double z, const Bound& bound) {
    if (!std::isfinite(z)) throw std::invalid_argument("bounded_activation: non-finite input");
    switch (bound.kind) {
        case BoundKind::Lower: return bound.lower + ad::softplus(z);
        case BoundKind::Upper: return bound.upper - ad::softplus(z);
        case BoundKind::Interval:
            if (!(bound.lower < bound.upper)) throw std::invalid_argument("bounded_activation: interval needs a < b");
            return bound.lower + (bound.upper - bound.lower) * ad::sigmoid(z);
    }
    throw std::logic_error("bounded_activation: unknown bound kind");
}

Var bounded_activation(const Var& z, const Bound& bound) {
    switch (bound.kind) {
        case BoundKind::Lower: return ad::softplus(z) + bound.lower;
        case BoundKind::Upper: return bound.upper - ad::softplus(z);
        case BoundKind::Interval:
            if (!(bound.lower < bound.upper)) throw std::invalid_argument("bounded_activation: interval needs a < b");
            return ad::sigmoid(z) * (bound.upper - bound.lower) + bound.lower;
    }
    throw std::logic_error("bounded_activation: unknown bound kind");
}

Var softmax_scale(const Var& x, const Var& total) {
    if (x.cols() == 0) throw std::invalid_argument("softmax_scale: empty vector");
    ad::Tape& t = *x.tape();
    // Shift by the row maximum; softmax is shift invariant so a constant shift
    // leaves the gradient exact.
    Array shift = x.value().rowwise().maxCoeff();
    Var e = ad::exp(x - t.constant(shift));
    return e / ad::row_sum(e) * total;
}

Eigen::VectorXd softmax_scale(const Eigen::VectorXd& x, double total) {
    if (x.size() == 0) throw std::invalid_argument("softmax_scale: empty vector");
    ad::Tape t;
    Var out = softmax_scale(t.constant(Array(x.transpose())), t.constant(total));
    return out.value().row(0).transpose();
}

// ---------------------------------------------------------------------------

namespace {

bool on_bound(double w, double bound) {
    return std::abs(w - bound) <= kBindingTolerance * std::max(1.0, std::abs(bound));
}

// Rows whose receiver mass is zero divide by one instead; a positive imbalance
// in such a row cannot be redistributed and is flagged.
Var safe_denominator(const Var& mass, const Array& imbalance, std::vector<bool>& edge) {
    const Array& m = mass.value();
    Array fix = (m <= 0.0).cast<double>();
    for (Index r = 0; r < m.rows(); ++r)
        if (fix(r, 0) > 0.0 && imbalance(r, 0) > 0.0) edge[r] = true;
    return mass + mass.tape()->constant(fix);
}

// Clamp violators of one bound onto it and move the total imbalance onto the
// remaining elements in proportion to their slack toward that same bound.
Var redistribute(const Var& z, const Var& bound, bool is_lower, std::vector<bool>& edge) {
    const Index rows = z.rows(), cols = z.cols();
    const Array bv = ad::broadcast_to(bound.value(), rows, cols);
    const Array viol = is_lower ? (z.value() < bv).cast<double>() : (z.value() > bv).cast<double>();
    const Array keep = 1.0 - viol;
    if (!viol.any()) return z;

    if (is_lower) {
        Var deficit = ad::row_sum((bound - z) * viol);
        Var slack = (z - bound) * keep;
        Var denom = safe_denominator(ad::row_sum(slack), deficit.value(), edge);
        return bound * viol + (z - slack * (deficit / denom)) * keep;
    }
    Var excess = ad::row_sum((z - bound) * viol);
    Var slack = (bound - z) * keep;
    Var denom = safe_denominator(ad::row_sum(slack), excess.value(), edge);
    return bound * viol + (z + slack * (excess / denom)) * keep;
}

// Steps shared by both algorithms: squeeze into the box, then scale to the sum.
Var box_then_scale(const Var& x, const Var& lower, const Var& upper, const Var& total) {
    Var boxed = (upper - lower) * x / ad::row_sum(x) + lower;
    return total * boxed / ad::row_sum(boxed);
}

BatchProjection finish(const Var& w, const Var& lower, const Var& upper, std::vector<bool> edge) {
    const Index rows = w.rows(), cols = w.cols();
    Var clamped = ad::minimum(ad::maximum(w, lower), upper);
    const Array& before = w.value();
    const Array& after = clamped.value();
    const Array lo = ad::broadcast_to(lower.value(), rows, cols);
    const Array hi = ad::broadcast_to(upper.value(), rows, cols);
    BoolArray binding(rows, cols);
    for (Index r = 0; r < rows; ++r) {
        for (Index c = 0; c < cols; ++c) {
            if (std::abs(after(r, c) - before(r, c)) > kBindingTolerance) edge[r] = true;
            binding(r, c) = on_bound(after(r, c), lo(r, c)) || on_bound(after(r, c), hi(r, c));
        }
    }
    return {clamped, std::move(binding), std::move(edge)};
}

}  // namespace

BatchProjection project_redistribute(const Var& x, const Var& lower, const Var& upper, const Var& total,
                                     BindLast bind_last, bool cap_shift) {
    std::vector<bool> edge(static_cast<std::size_t>(x.rows()), false);
    Var z = box_then_scale(x, lower, upper, total);
    if (cap_shift) z = apply_binding_cap(z, lower, upper, total);
    Var w = bind_last == BindLast::Upper ? redistribute(redistribute(z, lower, true, edge), upper, false, edge)
                                         : redistribute(redistribute(z, upper, false, edge), lower, true, edge);
    return finish(w, lower, upper, std::move(edge));
}

BatchProjection project_clamp_shift(const Var& x, const Var& lower, const Var& upper, const Var& total) {
    ad::Tape& t = *x.tape();
    const Index cols = x.cols();
    std::vector<bool> edge(static_cast<std::size_t>(x.rows()), false);
    Var zero = t.constant(0.0);
    Var z = box_then_scale(x, lower, upper, total);

    Var over = ad::row_sum(ad::maximum(z - upper, zero));
    Var under = ad::row_sum(ad::minimum(z - lower, zero));
    Var imbalance = over + under;

    const Array positive = (imbalance.value() >= 0.0).cast<double>();
    Var toward_upper = ad::maximum(upper - z, zero);
    Var toward_lower = ad::maximum(z - lower, zero);
    Var receivers = toward_upper * Array(positive.replicate(1, cols)) + toward_lower * Array((1.0 - positive).replicate(1, cols));
    Var mass = ad::row_sum(receivers);

    const Array abs_imbalance = imbalance.value().abs();
    Var denom = safe_denominator(mass, abs_imbalance, edge);
    Var w = ad::minimum(ad::maximum(z, lower), upper) + receivers / denom * imbalance;
    return finish(w, lower, upper, std::move(edge));
}

namespace {

ProjectionResult to_result(const BatchProjection& p, const char* name) {
    ProjectionResult out;
    out.w = p.w.value().row(0).transpose();
    out.binding_mask.resize(static_cast<std::size_t>(out.w.size()));
    for (Index i = 0; i < out.w.size(); ++i) out.binding_mask[static_cast<std::size_t>(i)] = p.binding(0, i);
    out.edge_case_flag = p.edge_case[0];
    if (out.edge_case_flag)
        out.diagnostic = std::string(name) +
                         ": redistribution could not respect every bound; final clamp applied, sum constraint "
                         "not preserved";
    return out;
}

void check_positive(const Eigen::VectorXd& x, const BoundedSumSpec& spec) {
    spec.validate();
    if (x.size() != spec.lower.size()) throw std::invalid_argument("projection: x and bounds differ in length");
    for (Index i = 0; i < x.size(); ++i)
        if (!(x[i] > 0.0) || !std::isfinite(x[i]))
            throw std::invalid_argument("projection: inputs must be finite and strictly positive");
}

}  // namespace

ProjectionResult project_redistribute(const Eigen::VectorXd& x, const BoundedSumSpec& spec, BindLast bind_last) {
    check_positive(x, spec);
    ad::Tape t;
    auto p = project_redistribute(t.constant(Array(x.transpose())), t.constant(Array(spec.lower.transpose())),
                                  t.constant(Array(spec.upper.transpose())), t.constant(spec.total), bind_last);
    return to_result(p, "project_redistribute");
}

ProjectionResult project_clamp_shift(const Eigen::VectorXd& x, const BoundedSumSpec& spec) {
    check_positive(x, spec);
    ad::Tape t;
    auto p = project_clamp_shift(t.constant(Array(x.transpose())), t.constant(Array(spec.lower.transpose())),
                                 t.constant(Array(spec.upper.transpose())), t.constant(spec.total));
    return to_result(p, "project_clamp_shift");
}

// ---------------------------------------------------------------------------

namespace {

int max_binding_count(const double* lower, const double* upper, Index n, double total) {
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index i, Index j) { return upper[i] > upper[j]; });
    // prefix of upper bounds + suffix of lower bounds
    double suffix_lower = 0.0;
    for (Index i = 0; i < n; ++i) suffix_lower += lower[i];
    double prefix_upper = 0.0;
    int best = 0;
    for (Index k = 1; k <= n; ++k) {
        const Index j = order[static_cast<std::size_t>(k - 1)];
        prefix_upper += upper[j];
        suffix_lower -= lower[j];
        if (prefix_upper + suffix_lower < total) best = static_cast<int>(k);
    }
    return best;
}

// Index of the k-th largest (1-based) entry, ties broken by position.
Index kth_largest(const double* z, Index n, int k) {
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index i, Index j) { return z[i] > z[j]; });
    return order[static_cast<std::size_t>(k - 1)];
}

}  // namespace

int max_binding_count(const BoundedSumSpec& spec) {
    spec.validate();
    return max_binding_count(spec.lower.data(), spec.upper.data(), spec.lower.size(), spec.total);
}

CapShift binding_cap_shift(const Eigen::VectorXd& z, const BoundedSumSpec& spec) {
    spec.validate();
    if (z.size() != spec.lower.size()) throw std::invalid_argument("binding_cap_shift: length mismatch");
    CapShift out;
    out.max_binding = max_binding_count(spec);
    if (out.max_binding == 0)
        throw std::domain_error("binding_cap_shift: no element can sit on its upper bound for this total");
    const Index j = kth_largest(z.data(), z.size(), out.max_binding);
    const double bj = spec.upper[j];
    const double n = static_cast<double>(z.size());
    const double denom = bj / spec.total * n - 1.0;
    if (std::abs(denom) < 1e-12) {
        std::ostringstream os;
        os << "binding_cap_shift: degenerate shift, (b/C)*L - 1 = " << denom << " for b = " << bj
           << ", C = " << spec.total << ", L = " << z.size();
        throw std::domain_error(os.str());
    }
    out.z_bar = (bj * z.sum() / spec.total - z[j]) / denom;
    out.shifted = z.array() - out.z_bar;
    return out;
}

Var apply_binding_cap(const Var& z, const Var& lower, const Var& upper, const Var& total) {
    ad::Tape& t = *z.tape();
    const Index rows = z.rows(), cols = z.cols();
    const Array zv = z.value();
    const Array lo = ad::broadcast_to(lower.value(), rows, cols);
    const Array hi = ad::broadcast_to(upper.value(), rows, cols);
    const Array tot = ad::broadcast_to(total.value(), rows, 1);

    Array pick = Array::Zero(rows, cols);
    Array active = Array::Zero(rows, 1);
    for (Index r = 0; r < rows; ++r) {
        const Eigen::VectorXd lr = lo.row(r).transpose(), hr = hi.row(r).transpose(), zr = zv.row(r).transpose();
        const int k = max_binding_count(lr.data(), hr.data(), cols, tot(r, 0));
        if (k == 0) continue;
        const Index j = kth_largest(zr.data(), cols, k);
        const double denom = hr[j] / tot(r, 0) * static_cast<double>(cols) - 1.0;
        if (std::abs(denom) < 1e-12) continue;
        if (tot(r, 0) * zr[j] / zr.sum() > hr[j]) {
            pick(r, j) = 1.0;
            active(r, 0) = 1.0;
        }
    }
    if (!active.any()) return z;

    Var zj = ad::row_sum(z * pick);
    Var bj = ad::row_sum(upper * pick);
    Var zsum = ad::row_sum(z);
    // Inactive rows use a dummy bound of 1 so the formula stays finite; their
    // shift is masked to zero below.
    Var bj_safe = bj + t.constant(Array(1.0 - active));
    Var zbar = (bj_safe * zsum / total - zj) / (bj_safe / total * static_cast<double>(cols) - 1.0);
    Var shifted = z - zbar * active;
    Var rescaled = total * shifted / ad::row_sum(shifted);
    return rescaled * Array(active.replicate(1, cols)) + z * Array((1.0 - active).replicate(1, cols));
}

}  // namespace hardhank::constraints
