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
#include <map>
#include <memory>
#include <string>
#include <tuple>
#include <vector>

#include "qtmlab/halting.hpp"

namespace qtmlab {

/// Transition table with irrational amplitudes rounded to a dyadic grid.
struct RoundedMachine {
    QTMDef machine;
    int precision_bits = 0;
    double round_budget = 0.0;     // gamma / (6 s)
    double entry_tolerance = 0.0;  // round_budget / s, bound on any entry error
    double max_entry_error = 0.0;  // measured
    int support = 1;               // s: max nonzeros in a row or column of u
};

/// Largest number of nonzeros in any row or column of the evolution operator,
/// read off the transition table.
inline int evolution_support(const QTMDef &m) {
    int col = 1;
    std::map<std::tuple<int, std::vector<int>, std::vector<int>>, int> incoming;
    for (const auto &bs : m.table) {
        col = std::max(col, static_cast<int>(bs.size()));
        for (const auto &b : bs) {
            incoming[{b.target, b.write, b.moves}]++;
        }
    }
    // A target configuration can be reached once per (state, moves) group,
    // through whichever written symbols match its tape.
    std::map<std::pair<int, std::vector<int>>, int> per_moves;
    for (const auto &[key, n] : incoming) {
        auto &slot = per_moves[{std::get<0>(key), std::get<2>(key)}];
        slot = std::max(slot, n);
    }
    std::map<int, int> per_state;
    for (const auto &[key, n] : per_moves) {
        per_state[key.first] += n;
    }
    int row = 1;
    for (const auto &[q, n] : per_state) {
        row = std::max(row, n);
    }
    return std::max(row, col);
}

namespace detail {

inline Rational dyadic_round(double x, int bits) {
    double scaled = std::nearbyint(std::ldexp(x, bits));
    return Rational(BigInt(static_cast<long long>(scaled)), BigInt(1) << bits);
}

}  // namespace detail

/// Rounds every non-elementary amplitude entrywise so that ||u - u~|| stays
/// below gamma/6, which bounds the one-step trace-distance error by gamma/3.
/// Rational amplitudes are already elementary and are left unchanged.
inline RoundedMachine round_machine(const QTMDef &m, const Rational &gamma) {
    if (gamma <= 0) {
        fail(ErrorKind::Validation, "gamma must be positive");
    }
    RoundedMachine r;
    r.machine = m;
    r.support = evolution_support(m);
    const double s = r.support;
    r.round_budget = to_double(gamma) / (6.0 * s);
    r.entry_tolerance = r.round_budget / s;
    // complex error <= sqrt(2) 2^-(p+1)
    int p = 0;
    while (std::sqrt(2.0) * std::ldexp(1.0, -(p + 1)) > r.entry_tolerance) {
        p++;
    }
    if (p > 60) {
        fail(ErrorKind::Validation, "rounding precision beyond 60 bits");
    }
    r.precision_bits = p;
    for (auto &bs : r.machine.table) {
        for (auto &b : bs) {
            if (b.amp.exact) {
                continue;
            }
            Rational re = detail::dyadic_round(b.amp.value.real(), p);
            Rational im = detail::dyadic_round(b.amp.value.imag(), p);
            ExactComplex z(re, im);
            r.max_entry_error = std::max(r.max_entry_error, std::abs(z.value() - b.amp.value));
            b.amp.value = z.value();
            b.amp.exact = z;
            b.amp.re_text = rational_text(re);
            b.amp.im_text = rational_text(im);
        }
    }
    return r;
}

inline ConfigSpace extended_space(const ConfigSpace &cs, int t) {
    return ConfigSpace(cs.machine_ptr(), cs.window() + 2 * t);
}

/// E1: sigma on the input tape of the window extended by 2t blank cells.
inline ConfigState tape_embed(const ConfigSpace &cs, const Operator &sigma, int t, const std::string &aux = "") {
    return embed_input(extended_space(cs, t), sigma, aux);
}

/// Evolution operator of the rounded table on the given space.
inline Operator approximate_unitary(const ConfigSpace &cs_ext, const Rational &gamma) {
    RoundedMachine r = round_machine(cs_ext.machine(), gamma);
    return build_evolution(ConfigSpace(r.machine, cs_ext.window()));
}

/// The elementary channel: E1, then t applications of u~, then E2.
class ApproxChannel {
   public:
    ApproxChannel(const ConfigSpace &cs, int k, int t, const Rational &delta, const std::string &aux = "")
        : k_(k), t_(t), delta_(delta), aux_(aux) {
        if (delta <= 0 || delta >= 1) {
            fail(ErrorKind::Validation, "delta must lie in (0,1)");
        }
        if (t < 0) {
            fail(ErrorKind::Validation, "t must be nonnegative");
        }
        gamma_ = t == 0 ? delta : delta / t;
        rounded_ = round_machine(cs.machine(), gamma_);
        window_ext_ = cs.window() + 2 * t;
        ConfigSpace ext(cs.machine_ptr(), window_ext_);
        ConfigSpace ext_rounded(rounded_.machine, window_ext_);
        exact_ = std::make_shared<const Trajectory>(ext, k, t, aux);
        approx_ = std::make_shared<const Trajectory>(ext_rounded, k, t, aux);
        // Rounded steps can grow the norm slightly; dividing by the top
        // eigenvalue of V*V keeps the channel trace-nonincreasing.
        norm_ = std::max(1.0, hermitian_eigenvalues(approx_->total_gram(t)).maxCoeff());
        ConfigSpace base_rounded(rounded_.machine, cs.window());
        if (base_rounded.dim() <= kMaxAssembledDim) {
            unitary_defect_ = wellformed_check(base_rounded, 1.0).unitary_defect;
        }
    }

    int k() const {
        return k_;
    }
    int t() const {
        return t_;
    }
    const Rational &delta() const {
        return delta_;
    }
    const Rational &gamma() const {
        return gamma_;
    }
    int window_ext() const {
        return window_ext_;
    }
    const RoundedMachine &rounding() const {
        return rounded_;
    }
    /// max |u~ u~* - I| measured on the base window.
    double unitary_defect() const {
        return unitary_defect_;
    }
    const Trajectory &exact_trajectory() const {
        return *exact_;
    }
    const Trajectory &approx_trajectory() const {
        return *approx_;
    }

    IndeterminateState apply(const Operator &sigma) const {
        return approx_->output(sigma.dense(), t_, window_ext_).scaled(1.0 / norm_);
    }
    /// Largest eigenvalue of V*V for the rounded walk (at least 1).
    double norm_correction() const {
        return norm_;
    }
    /// E2(u^t E1(sigma) u^t*) with the unrounded evolution.
    IndeterminateState exact_output(const Operator &sigma) const {
        return exact_->output(sigma.dense(), t_, window_ext_);
    }
    /// D(u~^l E1 sigma u~^l*, u^l E1 sigma u^l*) for l = 1..t.
    std::vector<double> step_errors(const Operator &sigma) const {
        std::vector<double> out;
        for (int l = 1; l <= t_; l++) {
            out.push_back(trace_distance(approx_->state(sigma.dense(), l), exact_->state(sigma.dense(), l)));
        }
        return out;
    }

   private:
    int k_;
    int t_;
    Rational delta_;
    Rational gamma_;
    std::string aux_;
    int window_ext_ = 0;
    RoundedMachine rounded_;
    double unitary_defect_ = 0.0;
    double norm_ = 1.0;
    std::shared_ptr<const Trajectory> exact_;
    std::shared_ptr<const Trajectory> approx_;
};

inline IndeterminateState apply_channel(const ApproxChannel &ch, const Operator &sigma) {
    return ch.apply(sigma);
}

struct Certificate {
    double distance = 0.0;
    std::vector<double> step_errors;
    std::vector<double> step_bounds;  // gamma * l
    bool within_delta = true;
    bool steps_within_bounds = true;
};

/// Measured D(Psi(sigma), exact output) for sigma inside the halting
/// subspace at the channel's t, plus the per-step accumulation table.
inline Certificate error_certificate(const ApproxChannel &ch, const Operator &sigma, const HaltingProjection &hp,
                                     double eps = kEpsNum) {
    if (hp.t != ch.t() || hp.k != ch.k()) {
        fail(ErrorKind::Validation, "error_certificate: halting projection is for k=" + std::to_string(hp.k) +
                                        ", t=" + std::to_string(hp.t) + " but the channel has k=" +
                                        std::to_string(ch.k()) + ", t=" + std::to_string(ch.t()));
    }
    if (!psd_leq(sigma, hp.p, eps)) {
        fail(ErrorKind::Validation, "error_certificate: sigma is not dominated by the halting projection at t=" +
                                        std::to_string(hp.t));
    }
    Certificate c;
    c.distance = trace_distance(ch.apply(sigma), ch.exact_output(sigma));
    c.within_delta = c.distance <= to_double(ch.delta()) + eps;
    c.step_errors = ch.step_errors(sigma);
    const double g = to_double(ch.gamma());
    for (size_t l = 0; l < c.step_errors.size(); l++) {
        c.step_bounds.push_back(g * static_cast<double>(l + 1));
        if (c.step_errors[l] > c.step_bounds.back() + eps) {
            c.steps_within_bounds = false;
        }
    }
    return c;
}

}  // namespace qtmlab
