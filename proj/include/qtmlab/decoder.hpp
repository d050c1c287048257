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
#include <optional>
#include <string>
#include <vector>

#include "qtmlab/channel.hpp"

namespace qtmlab {

/// j = 2^(k+5).
struct PrecisionParam {
    int k = 0;
    long long j = 32;

    static PrecisionParam for_length(int k) {
        if (k < 0 || k > 40) {
            fail(ErrorKind::Validation, "program length out of range");
        }
        return {k, 1LL << (k + 5)};
    }
    double score_threshold() const {
        return 1.0 - std::ldexp(1.0, -k - 3);
    }
};

/// Binary encoding of j placed on the auxiliary tape, or "" for machines
/// without one (there j is a fixed parameter of the run).
inline std::string aux_encoding(const QTMDef &m, long long j) {
    if (m.aux_tape() < 0) {
        return "";
    }
    std::string s;
    for (long long v = j; v > 0; v >>= 1) {
        s.insert(s.begin(), (v & 1) ? '1' : '0');
    }
    return s;
}

struct OTerm {
    int t = 0;
    int rank = 0;
    IndeterminateState o;
};

/// O_t = Psi^{t,1/j}_k(P_t) for every nonzero halting projection P_t.
inline std::vector<OTerm> build_O(const ConfigSpace &cs, int k, long long j, int t_max) {
    const std::string aux = aux_encoding(cs.machine(), j);
    Trajectory tr(cs, k, t_max, aux);
    std::vector<OTerm> out;
    for (const auto &hp : enumerate_projections(tr)) {
        ApproxChannel ch(cs, k, hp.t, Rational(1, j), aux);
        out.push_back({hp.t, hp.rank, ch.apply(hp.p)});
    }
    return out;
}

/// Q_ell O Q_ell as a dense operator on Q_ell.
inline Operator restrict_length(const IndeterminateState &o, int ell) {
    return o.block(ell);
}

struct CountCheck {
    size_t count = 0;
    double bound = 0.0;  // 2 Tr N
    bool holds = true;
};

/// Counts basis strings y with <y|N|y> >= 1 - 2^(-k-3) and checks the count
/// against 2 Tr N through the capacity bound.
inline CountCheck near_one_count_check(const Operator &n, int k, double eps = kEpsNum) {
    if (!is_projection(n, eps)) {
        fail(ErrorKind::Validation, "near_one_count_check: operator is not a projection");
    }
    const double thr = 1.0 - std::ldexp(1.0, -k - 3);
    Matrix nm = n.dense();
    std::vector<PureState> family;
    for (size_t y = 0; y < n.dim(); y++) {
        if (nm(static_cast<Eigen::Index>(y), static_cast<Eigen::Index>(y)).real() >= thr - eps) {
            family.push_back(PureState::basis(n.dim(), y));
        }
    }
    CountCheck c;
    c.count = family.size();
    c.bound = 2.0 * n.trace().real();
    auto cap = capacity_check(n, family, eps);
    c.holds = static_cast<double>(c.count) <= c.bound + eps && cap.bound_holds;
    return c;
}

struct CoverageRow {
    int t = 0;
    int ell = 0;
    std::string y;
    double score = 0.0;
};

struct CoverageTable {
    int k = 0;
    long long j = 0;
    long long bound_2k1 = 0;
    std::string aux_mode;
    std::vector<CoverageRow> rows;
    double trace_O = 0.0;  // sum_t Tr O_t
    double trace_N = 0.0;  // sum_{t,ell} Tr N
    bool counts_hold = true;
};

/// All (t, ell, y) with <y|N^ell_t|y> >= 1 - 2^(-k-3), ordered by (t, ell, y).
/// `j` overrides the default precision 2^(k+5).
inline CoverageTable coverage_table(const ConfigSpace &cs, int k, int t_max, int ell_max,
                                    std::optional<long long> j = std::nullopt) {
    auto pp = PrecisionParam::for_length(k);
    if (j) {
        if (*j < 2) {
            fail(ErrorKind::Validation, "precision j must be at least 2");
        }
        pp.j = *j;
    }
    CoverageTable tab;
    tab.k = k;
    tab.j = pp.j;
    tab.bound_2k1 = 1LL << (k + 1);
    tab.aux_mode = cs.machine().aux_tape() >= 0 ? "aux-tape" : "parameter";
    const double thr = pp.score_threshold();
    for (const auto &term : build_O(cs, k, pp.j, t_max)) {
        tab.trace_O += term.o.trace();
        for (int ell = 0; ell <= std::min(ell_max, term.o.max_len()); ell++) {
            Operator oe = restrict_length(term.o, ell);
            Operator n = threshold_projection(oe, 0.5);
            tab.trace_N += n.trace().real();
            tab.counts_hold = tab.counts_hold && near_one_count_check(n, k).holds;
            Matrix nm = n.dense();
            for (size_t y = 0; y < n.dim(); y++) {
                double score = nm(static_cast<Eigen::Index>(y), static_cast<Eigen::Index>(y)).real();
                if (score >= thr - kEpsNum) {
                    tab.rows.push_back({term.t, ell, bits_string(ell, y), score});
                }
            }
        }
    }
    return tab;
}

/// The y of the b-th row (1-based).
inline std::string decode(const CoverageTable &tab, long long b) {
    if (b < 1 || b > static_cast<long long>(tab.rows.size())) {
        fail(ErrorKind::Validation, "decode: b=" + std::to_string(b) + " out of range 1.." +
                                        std::to_string(tab.rows.size()));
    }
    return tab.rows[static_cast<size_t>(b - 1)].y;
}

inline std::string decode(const ConfigSpace &cs, int k, long long b, int t_max, int ell_max) {
    return decode(coverage_table(cs, k, t_max, ell_max), b);
}

}  // namespace qtmlab
