#include "hardhank/model/state.hpp"

#include <stdexcept>

namespace hardhank::model {

StateBatch StateBatch::initial(const ParamBatch& params, Index agents) {
    if (agents < 1) throw std::invalid_argument("StateBatch::initial: need at least one agent");
    const Index n = static_cast<Index>(params.size());
    StateBatch st;
    st.b = Array::Zero(n, agents);
    st.s = Array::Ones(n, agents);
    st.psi = Array::Ones(n, 1);
    st.a = Array::Ones(n, 1);
    st.c = params.column(&ModelParams::y_bar);
    st.r = params.column(&ModelParams::pi_bar) / params.column(&ModelParams::beta);
    return st;
}

StateBatch StateBatch::rows(const std::vector<Index>& which) const {
    StateBatch out;
    const Index n = static_cast<Index>(which.size());
    out.b.resize(n, agents());
    out.s.resize(n, agents());
    out.psi.resize(n, 1);
    out.a.resize(n, 1);
    out.c.resize(n, 1);
    out.r.resize(n, 1);
    for (Index k = 0; k < n; ++k) {
        const Index i = which[static_cast<std::size_t>(k)];
        out.b.row(k) = b.row(i);
        out.s.row(k) = s.row(i);
        out.psi(k, 0) = psi(i, 0);
        out.a(k, 0) = a(i, 0);
        out.c(k, 0) = c(i, 0);
        out.r(k, 0) = r(i, 0);
    }
    return out;
}

void StateBatch::set_rows(const std::vector<Index>& which, const StateBatch& from) {
    for (std::size_t k = 0; k < which.size(); ++k) {
        const Index i = which[k], j = static_cast<Index>(k);
        b.row(i) = from.b.row(j);
        s.row(i) = from.s.row(j);
        psi(i, 0) = from.psi(j, 0);
        a(i, 0) = from.a(j, 0);
        c(i, 0) = from.c(j, 0);
        r(i, 0) = from.r(j, 0);
    }
}

ShockBatch ShockBatch::zeros(Index batch, Index agents) {
    return {Array::Zero(batch, agents), Array::Zero(batch, 1), Array::Zero(batch, 1), Array::Zero(batch, 1)};
}

ShockBatch ShockBatch::draw(const CounterRng& rng, std::uint64_t draw, Index batch, Index agents) {
    ShockBatch out = zeros(batch, agents);
    const auto stride = static_cast<std::uint64_t>(agents + 3);
    for (Index r = 0; r < batch; ++r) {
        const std::uint64_t base = (draw * static_cast<std::uint64_t>(batch) + static_cast<std::uint64_t>(r)) * stride;
        for (Index i = 0; i < agents; ++i) out.eps_s(r, i) = rng.normal(base + static_cast<std::uint64_t>(i));
        const auto agg = base + static_cast<std::uint64_t>(agents);
        out.eps_psi(r, 0) = rng.normal(agg);
        out.eps_a(r, 0) = rng.normal(agg + 1);
        out.eps_mp(r, 0) = rng.normal(agg + 2);
    }
    return out;
}

ShockBatch ShockBatch::stack(const ShockBatch& top, const ShockBatch& bottom) {
    auto v = [](const Array& x, const Array& y) {
        Array out(x.rows() + y.rows(), x.cols());
        out << x, y;
        return out;
    };
    return {v(top.eps_s, bottom.eps_s), v(top.eps_psi, bottom.eps_psi), v(top.eps_a, bottom.eps_a),
            v(top.eps_mp, bottom.eps_mp)};
}

StateVars StateVars::constant(ad::Tape& t, const StateBatch& st) {
    return {t.constant(st.b), t.constant(st.s), t.constant(st.psi), t.constant(st.a), t.constant(st.c),
            t.constant(st.r)};
}

StateBatch StateVars::values() const { return {b.value(), s.value(), psi.value(), a.value(), c.value(), r.value()}; }

StateVars StateVars::tiled(Index times) const {
    return {ad::tile_rows(b, times), ad::tile_rows(s, times), ad::tile_rows(psi, times),
            ad::tile_rows(a, times), ad::tile_rows(c, times), ad::tile_rows(r, times)};
}

}  // namespace hardhank::model
