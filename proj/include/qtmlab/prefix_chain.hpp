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

#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <memory>

#include "qtmlab/algprob.hpp"
#include "qtmlab/channel.hpp"

namespace qtmlab {

/// Smallest s with a <= s b, or +inf when a leaves the support of b.
inline double domination_factor(const IndeterminateState &a, const IndeterminateState &b, double tol = 1e-10) {
    auto basis = IndeterminateState::merged_support(a, b);
    if (basis.empty()) {
        return 0.0;
    }
    Matrix ma = a.embedded(basis);
    Matrix mb = b.embedded(basis);
    Eigen::SelfAdjointEigenSolver<Matrix> es(mb);
    const auto &vals = es.eigenvalues();
    const double cutoff = tol * std::max(1.0, vals.cwiseAbs().maxCoeff());
    std::vector<Eigen::Index> keep, drop;
    for (Eigen::Index i = 0; i < vals.size(); i++) {
        (vals(i) > cutoff ? keep : drop).push_back(i);
    }
    Matrix rotated = es.eigenvectors().adjoint() * ma * es.eigenvectors();
    for (auto i : drop) {
        if (std::abs(rotated(i, i)) > tol) {
            return std::numeric_limits<double>::infinity();
        }
    }
    if (keep.empty()) {
        return 0.0;
    }
    Matrix scaled(static_cast<Eigen::Index>(keep.size()), static_cast<Eigen::Index>(keep.size()));
    for (size_t i = 0; i < keep.size(); i++) {
        for (size_t j = 0; j < keep.size(); j++) {
            scaled(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                rotated(keep[i], keep[j]) / std::sqrt(vals(keep[i]) * vals(keep[j]));
        }
    }
    return std::max(0.0, hermitian_eigenvalues(scaled).maxCoeff());
}

inline double safe_log2(double v) {
    return v <= 0 ? -std::numeric_limits<double>::infinity() : std::log2(v);
}

constexpr int kChainSteps = 6;

struct ChainRow {
    std::string x;
    int k = 0;          // Hbvl^eps(|x><x|)
    int s = 0;          // halting time of the witness program
    double fidelity = 0;  // <x|xi|x>
    std::array<double, kChainSteps> c{};
};

struct ChainReport {
    double eps = 0;
    std::vector<ChainRow> rows;
    std::array<double, kChainSteps> constants{};
    std::vector<std::string> excluded;
    bool fidelity_ok = true;   // <x|xi|x> > 1 - 2 eps everywhere
    bool all_finite = true;
};

/// Measures, per corpus string, the additive constant each step of the
/// prefix-complexity chain needs:
///   1. m(k) nu_k            <= 2^c  N
///   2. m(k) 2^-k Psi(P_i)   <= 2^c  N
///   3. m(k) 2^-k Psi(sigma) <= 2^c  N
///   4. m(k) 2^-k <x|xi|x>   <= 2^c  <x|N|x>
///   5. m(k) 2^-k (1 - 2eps) <= 2^c  m(x)
///   6. K(x) <= k + K(k) - log2(1 - 2eps) + c
/// where nu_k = 2^-k sum_t Psi^{t,eps}_k(P_t), N = m-diagonal/2 + sum_k m(k)/2 nu_k,
/// and (k, eps) is encoded as the k-th string in shortlex order.
inline ChainReport prefix_chain(const std::vector<std::string> &corpus, const QuantumRunner &qr, const Dictionary &d,
                                const ClassicalMachine &prefix, int max_program_len, const Rational &eps) {
    ChainReport rep;
    rep.eps = to_double(eps);
    const ConfigSpace &cs = qr.space();
    const auto m_table = toy_m_table(prefix);
    auto m_of = [&](const std::string &s) {
        auto it = m_table.find(s);
        return it == m_table.end() ? 0.0 : to_double(it->second);
    };
    auto K_of = [&](const std::string &s) {
        auto r = plain_complexity(s, prefix, max_program_len);
        return r.value ? static_cast<double>(*r.value) : std::numeric_limits<double>::infinity();
    };

    struct Level {
        std::vector<HaltingProjection> ps;
        std::map<int, std::unique_ptr<ApproxChannel>> channels;
        IndeterminateState nu;
    };
    std::map<int, Level> levels;
    auto level = [&](int k) -> Level & {
        auto it = levels.find(k);
        if (it != levels.end()) {
            return it->second;
        }
        Level lv;
        lv.ps = enumerate_projections(qr.trajectory(k, ""));
        lv.nu = IndeterminateState::zero(0);
        for (const auto &hp : lv.ps) {
            auto ch = std::make_unique<ApproxChannel>(cs, k, hp.t, eps);
            lv.nu = lv.nu + ch->apply(hp.p).scaled(std::ldexp(1.0, -k));
            lv.channels[hp.t] = std::move(ch);
        }
        return levels.emplace(k, std::move(lv)).first->second;
    };

    struct Pending {
        std::string x;
        size_t program;
    };
    std::vector<Pending> pending;
    for (const auto &x : corpus) {
        auto w = hbvl_eps_witness(classical_target(x, cs.window()), qr, rep.eps, d);
        if (!w) {
            rep.excluded.push_back(x);
            continue;
        }
        level(d.programs[*w].n);
        pending.push_back({x, *w});
    }

    ToyUniversalMixture big{"chain", {}};
    big.members.push_back({Rational(1, 2), "m-diagonal", diagonal_program(prefix), {}});
    for (auto &[k, lv] : levels) {
        auto mk = m_table.find(shortlex_string(static_cast<size_t>(k)));
        Rational w = mk == m_table.end() ? Rational(0) : mk->second / 2;
        big.members.push_back({w, "nu_" + std::to_string(k), std::nullopt, lv.nu});
    }
    const IndeterminateState N = build_nu(big, std::numeric_limits<size_t>::max());

    bool first = true;
    for (const auto &p : pending) {
        const DictProgram &prog = d.programs[p.program];
        const int k = prog.n;
        Level &lv = level(k);
        ChainRow row;
        row.x = p.x;
        row.k = k;
        row.s = *qr.runs(d)[p.program].time;
        const std::string kstr = shortlex_string(static_cast<size_t>(k));
        const double mk = m_of(kstr);
        const double scale = mk * std::ldexp(1.0, -k);
        const Operator sigma(prog.sigma);
        int i = dominating_projection(lv.ps, sigma);
        if (i < 0 || !lv.channels.count(row.s)) {
            fail(ErrorKind::Bound, "no halting projection dominates the program for '" + word_text(p.x) + "'");
        }
        const auto &hp = lv.ps[static_cast<size_t>(i)];
        const IndeterminateState xi = lv.channels.at(row.s)->apply(sigma);
        row.fidelity = xi.element(p.x, p.x).real();
        rep.fidelity_ok = rep.fidelity_ok && row.fidelity > 1.0 - 2.0 * rep.eps;

        row.c[0] = safe_log2(domination_factor(lv.nu.scaled(mk), N));
        row.c[1] = safe_log2(domination_factor(lv.channels.at(hp.t)->apply(hp.p).scaled(scale), N));
        row.c[2] = safe_log2(domination_factor(xi.scaled(scale), N));
        row.c[3] = safe_log2(scale * row.fidelity / N.element(p.x, p.x).real());
        row.c[4] = safe_log2(scale * (1.0 - 2.0 * rep.eps) / m_of(p.x));
        row.c[5] = K_of(p.x) - (k + K_of(kstr) - std::log2(1.0 - 2.0 * rep.eps));
        for (int j = 0; j < kChainSteps; j++) {
            rep.constants[j] = first ? row.c[j] : std::max(rep.constants[j], row.c[j]);
            rep.all_finite = rep.all_finite && std::isfinite(row.c[j]);
        }
        first = false;
        rep.rows.push_back(row);
    }
    return rep;
}

}  // namespace qtmlab
