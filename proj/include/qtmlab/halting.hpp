// Copyright 2026 The qtmlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "qtmlab/evolution.hpp"

namespace qtmlab {

/// Null-space tolerance for halting-subspace extraction.
inline constexpr double kSubspaceTol = 1e-7;

/// Projection onto the k-qubit inputs that halt at exactly step t.
struct HaltingProjection {
    int k = 0;
    int t = 0;
    Operator p;
    int rank = 0;
    std::vector<PureState> basis;
};

/// Inputs halting at t are the null space of
///   sum_{t' < t} V_t'^* Pi_F V_t'  +  V_t^* (1 - Pi_F) V_t.
inline HaltingProjection halting_subspace(const Trajectory &tr, int t, double tol = kSubspaceTol) {
    if (t < 1) {
        fail(ErrorKind::Validation, "halting_subspace: t must be at least 1");
    }
    if (t > tr.t_max()) {
        fail(ErrorKind::Validation, "halting_subspace: t=" + std::to_string(t) + " beyond configured t_max " +
                                        std::to_string(tr.t_max()));
    }
    Matrix c = tr.total_gram(t) - tr.final_gram(t);
    for (int s = 0; s < t; s++) {
        c += tr.final_gram(s);
    }
    HaltingProjection hp;
    hp.k = tr.k();
    hp.t = t;
    hp.basis = null_space(Operator(std::move(c)), tol);
    hp.p = projector_onto(hp.basis, tr.input_dim());
    double tr_p = hp.p.trace().real();
    hp.rank = static_cast<int>(std::llround(tr_p));
    if (std::abs(tr_p - hp.rank) > 0.01) {
        fail(ErrorKind::Validation, "halting_subspace: projection trace " + format_real(tr_p) + " is not an integer");
    }
    return hp;
}

inline HaltingProjection halting_subspace(const ConfigSpace &cs, int k, int t, int t_max, double tol = kSubspaceTol) {
    if (t > t_max) {
        fail(ErrorKind::Validation, "halting_subspace: t beyond configured t_max");
    }
    return halting_subspace(Trajectory(cs, k, t), t, tol);
}

/// Nonzero halting projections for t = 1..t_max, ascending in t.
inline std::vector<HaltingProjection> enumerate_projections(const Trajectory &tr, double tol = kSubspaceTol) {
    std::vector<HaltingProjection> out;
    for (int t = 1; t <= tr.t_max(); t++) {
        auto hp = halting_subspace(tr, t, tol);
        if (hp.rank > 0) {
            out.push_back(std::move(hp));
        }
    }
    return out;
}

struct EnumerationChecks {
    double max_overlap = 0.0;  // max_{i != j} Tr P_i P_j
    double trace_sum = 0.0;    // sum_i Tr P_i
    double trace_bound = 0.0;  // 2^k
    bool orthogonal = true;
    bool within_bound = true;
};

inline EnumerationChecks check_enumeration(const std::vector<HaltingProjection> &ps, int k, double eps = kEpsNum) {
    EnumerationChecks c;
    c.trace_bound = std::ldexp(1.0, k);
    for (size_t i = 0; i < ps.size(); i++) {
        c.trace_sum += ps[i].p.trace().real();
        for (size_t j = i + 1; j < ps.size(); j++) {
            c.max_overlap = std::max(c.max_overlap, std::abs((ps[i].p.dense() * ps[j].p.dense()).trace()));
        }
    }
    c.orthogonal = c.max_overlap <= eps;
    c.within_bound = c.trace_sum <= c.trace_bound + eps;
    return c;
}

/// Index of the projection dominating sigma (sigma <= P), or -1.
inline int dominating_projection(const std::vector<HaltingProjection> &ps, const Operator &sigma, double eps = kEpsNum) {
    for (size_t i = 0; i < ps.size(); i++) {
        if (ps[i].p.dim() == sigma.dim() && psd_leq(sigma, ps[i].p, eps)) {
            return static_cast<int>(i);
        }
    }
    return -1;
}

}  // namespace qtmlab
