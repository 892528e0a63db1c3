#pragma once

#include "hardhank/ad/tape.hpp"
#include "hardhank/model/params.hpp"
#include "hardhank/rng.hpp"

namespace hardhank::model {

using ad::Array;
using ad::Index;
using ad::Var;

// Beginning-of-period states for a batch of economies. Per-agent arrays are
// batch x agents, aggregates batch x 1.
struct StateBatch {
    Array b;    // bonds carried in
    Array s;    // idiosyncratic productivity
    Array psi;  // preference level
    Array a;    // TFP level
    Array c;    // lagged aggregate consumption
    Array r;    // lagged gross nominal rate

    Index batch() const { return b.rows(); }
    Index agents() const { return b.cols(); }

    // Zero bonds, unit productivity, preference and TFP, C = Y target,
    // R = steady-state rate.
    static StateBatch initial(const ParamBatch& params, Index agents);

    StateBatch rows(const std::vector<Index>& which) const;
    void set_rows(const std::vector<Index>& which, const StateBatch& from);
};

struct ShockBatch {
    Array eps_s;    // batch x agents
    Array eps_psi;  // batch x 1
    Array eps_a;
    Array eps_mp;

    Index batch() const { return eps_s.rows(); }

    static ShockBatch zeros(Index batch, Index agents);
    // Standard normals; row r of draw `draw` uses counters
    // (draw * batch + r) * (agents + 3) + k.
    static ShockBatch draw(const CounterRng& rng, std::uint64_t draw, Index batch, Index agents);
    // Vertical concatenation, `top` rows first.
    static ShockBatch stack(const ShockBatch& top, const ShockBatch& bottom);
};

// Tape view of a StateBatch.
struct StateVars {
    Var b, s, psi, a, c, r;

    Index batch() const { return b.rows(); }
    Index agents() const { return b.cols(); }

    static StateVars constant(ad::Tape& tape, const StateBatch& st);
    StateBatch values() const;
    StateVars tiled(Index times) const;
};

}  // namespace hardhank::model
