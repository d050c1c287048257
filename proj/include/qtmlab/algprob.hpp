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

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qtmlab/complexity.hpp"

namespace qtmlab {

struct StreamTerm {
    Rational weight;
    int n = 0;
    std::vector<ExactComplex> coeffs;  // 2^n amplitudes, index = bits_index
};

/// Finite stream of weighted elementary pure states; partial sums lower
/// compute a semi-density operator.
struct LowerComputation {
    std::string name;
    std::vector<StreamTerm> terms;

    int max_len() const {
        int m = 0;
        for (const auto &t : terms) {
            m = std::max(m, t.n);
        }
        return m;
    }
};

/// Lines `term <p/q> <n> <re> <im> ...` with 2^n rational pairs, plus an
/// optional `stream <name>` header.
inline LowerComputation parse_stream(const std::string &text, const std::string &default_name = "stream") {
    LowerComputation lc{default_name, {}};
    std::istringstream in(text);
    std::string line;
    size_t lineno = 0;
    auto perr = [&](const std::string &msg) { fail(ErrorKind::Parse, "stream line " + std::to_string(lineno) + ": " + msg); };
    auto rat = [&](const std::string &s) {
        auto r = parse_rational(s);
        if (!r) {
            perr("not a rational: '" + s + "'");
        }
        return *r;
    };
    while (std::getline(in, line)) {
        lineno++;
        if (auto c = line.find("//"); c != std::string::npos) {
            line.resize(c);
        }
        std::istringstream ls(line);
        std::vector<std::string> w;
        for (std::string tok; ls >> tok;) {
            w.push_back(tok);
        }
        if (w.empty()) {
            continue;
        }
        if (w[0] == "stream" && w.size() == 2) {
            lc.name = w[1];
            continue;
        }
        if (w[0] != "term" || w.size() < 3) {
            perr("expected 'term <weight> <n> <coefficients>'");
        }
        StreamTerm t;
        t.weight = rat(w[1]);
        try {
            t.n = std::stoi(w[2]);
        } catch (const std::logic_error &) {
            perr("bad qubit count '" + w[2] + "'");
        }
        if (t.n < 0 || t.n > 12) {
            perr("qubit count out of range 0..12");
        }
        const size_t dim = size_t{1} << t.n;
        if (w.size() != 3 + 2 * dim) {
            perr("expected " + std::to_string(2 * dim) + " coefficient tokens, got " + std::to_string(w.size() - 3));
        }
        Rational norm = 0;
        for (size_t i = 0; i < dim; i++) {
            ExactComplex c(rat(w[3 + 2 * i]), rat(w[4 + 2 * i]));
            norm += c.norm();
            t.coeffs.push_back(c);
        }
        if (norm != 1) {
            perr("state not normalized (squared norm " + rational_text(norm) + ")");
        }
        lc.terms.push_back(std::move(t));
    }
    return lc;
}

inline IndeterminateState term_state(const StreamTerm &t, int max_len) {
    std::vector<std::pair<std::string, cplx>> amps;
    for (size_t i = 0; i < t.coeffs.size(); i++) {
        if (!t.coeffs[i].is_zero()) {
            amps.emplace_back(bits_string(t.n, i), t.coeffs[i].value());
        }
    }
    return IndeterminateState::pure(max_len, std::move(amps)).scaled(to_double(t.weight));
}

/// Partial sum of the first `steps` terms, checking every prefix.
inline IndeterminateState accumulate(const LowerComputation &lc, size_t steps, double eps = kEpsNum) {
    const int max_len = lc.max_len();
    IndeterminateState sum = IndeterminateState::zero(max_len);
    Rational trace = 0;
    for (size_t i = 0; i < std::min(steps, lc.terms.size()); i++) {
        IndeterminateState next = sum + term_state(lc.terms[i], max_len);
        if (!psd_leq(sum, next, eps)) {
            fail(ErrorKind::Bound, "stream '" + lc.name + "': partial sum decreases at term " + std::to_string(i));
        }
        trace += lc.terms[i].weight;
        if (to_double(trace) > 1.0 + eps) {
            fail(ErrorKind::Bound, "stream '" + lc.name + "': trace " + rational_text(trace) + " exceeds 1 at term " +
                                       std::to_string(i));
        }
        sum = std::move(next);
    }
    return sum;
}

/// Weight not yet consumed after `steps` terms.
inline Rational tail_weight(const LowerComputation &lc, size_t steps) {
    Rational tail = 0;
    for (size_t i = steps; i < lc.terms.size(); i++) {
        tail += lc.terms[i].weight;
    }
    return tail;
}

/// Stream emitting sum_x m(x)|x><x| in shortlex order of x.
inline LowerComputation diagonal_program(const ClassicalMachine &prefix) {
    LowerComputation lc{"m-diagonal", {}};
    for (const auto &[x, w] : toy_m_table(prefix)) {
        StreamTerm t;
        t.weight = w;
        t.n = static_cast<int>(x.size());
        t.coeffs.assign(size_t{1} << t.n, ExactComplex());
        t.coeffs[bits_index(x)] = ExactComplex(Rational(1));
        lc.terms.push_back(std::move(t));
    }
    return lc;
}

/// A member is either a stream or a fixed semi-density state.
struct MixtureMember {
    Rational weight;
    std::string label;
    std::optional<LowerComputation> lc;
    IndeterminateState fixed;

    IndeterminateState state(size_t steps) const {
        return lc ? accumulate(*lc, steps) : fixed;
    }
};

struct ToyUniversalMixture {
    std::string name;
    std::vector<MixtureMember> members;
    std::optional<ClassicalMachine> prefix;

    Rational weight_sum() const {
        Rational s = 0;
        for (const auto &m : members) {
            s += m.weight;
        }
        return s;
    }
    void validate() const {
        for (size_t i = 0; i < members.size(); i++) {
            if (members[i].weight < 0) {
                fail(ErrorKind::Validation, "mixture member " + std::to_string(i) + " has negative weight");
            }
        }
        if (weight_sum() > 1) {
            fail(ErrorKind::Validation, "mixture weights sum to " + rational_text(weight_sum()) + " > 1");
        }
    }
};

inline std::string slurp_file(const std::filesystem::path &p) {
    std::ifstream f(p);
    if (!f) {
        fail(ErrorKind::Usage, "cannot read " + p.string());
    }
    std::stringstream s;
    s << f.rdbuf();
    return s.str();
}

/// Mixture grammar:
///   mixture <name>
///   prefix <machine.tm>                 (toy prefix machine for m-diagonal)
///   program <weight|auto> <stream-file|m-diagonal>
/// `auto` weights are 2^-(index+1). Paths resolve against `base_dir`.
inline ToyUniversalMixture parse_mixture(const std::string &text, const std::filesystem::path &base_dir) {
    ToyUniversalMixture mix;
    std::optional<ClassicalMachine> prefix;
    struct Pending {
        std::string weight, source;
        size_t line;
    };
    std::vector<Pending> pending;
    std::istringstream in(text);
    std::string line;
    size_t lineno = 0;
    auto perr = [&](size_t ln, const std::string &msg) {
        fail(ErrorKind::Parse, "mixture line " + std::to_string(ln) + ": " + msg);
    };
    while (std::getline(in, line)) {
        lineno++;
        if (auto c = line.find("//"); c != std::string::npos) {
            line.resize(c);
        }
        std::istringstream ls(line);
        std::vector<std::string> w;
        for (std::string tok; ls >> tok;) {
            w.push_back(tok);
        }
        if (w.empty()) {
            continue;
        }
        if (w[0] == "mixture" && w.size() == 2) {
            mix.name = w[1];
        } else if (w[0] == "prefix" && w.size() == 2) {
            prefix = parse_classical(slurp_file(base_dir / w[1]));
            if (prefix->kind() != MachineKind::ClassicalPrefix) {
                perr(lineno, "machine '" + w[1] + "' is not a prefix machine");
            }
        } else if (w[0] == "program" && w.size() == 3) {
            pending.push_back({w[1], w[2], lineno});
        } else {
            perr(lineno, "unrecognized line");
        }
    }
    for (size_t i = 0; i < pending.size(); i++) {
        const auto &p = pending[i];
        MixtureMember m;
        if (p.weight == "auto") {
            m.weight = Rational(1, BigInt(1) << (i + 1));
        } else if (auto r = parse_rational(p.weight)) {
            m.weight = *r;
        } else {
            perr(p.line, "bad weight '" + p.weight + "'");
        }
        if (p.source == "m-diagonal") {
            if (!prefix) {
                perr(p.line, "m-diagonal needs a 'prefix' line");
            }
            m.lc = diagonal_program(*prefix);
        } else {
            m.lc = parse_stream(slurp_file(base_dir / p.source), p.source);
        }
        m.label = m.lc->name;
        mix.members.push_back(std::move(m));
    }
    mix.prefix = std::move(prefix);
    mix.validate();
    return mix;
}

/// sum_p w_p * (member p after `steps` terms).
inline IndeterminateState build_nu(const ToyUniversalMixture &mix, size_t steps, double eps = kEpsNum) {
    mix.validate();
    IndeterminateState nu = IndeterminateState::zero(0);
    for (const auto &m : mix.members) {
        nu = nu + m.state(steps).scaled(to_double(m.weight));
    }
    if (nu.trace() > 1.0 + eps) {
        fail(ErrorKind::Bound, "nu has trace " + format_real(nu.trace()) + " > 1");
    }
    return nu;
}

struct DominationRow {
    std::string label;
    double weight = 0;
    bool holds = false;
};

inline std::vector<DominationRow> domination(const ToyUniversalMixture &mix, const IndeterminateState &nu, size_t steps,
                                             double eps = kEpsNum) {
    std::vector<DominationRow> out;
    for (const auto &m : mix.members) {
        double w = to_double(m.weight);
        out.push_back({m.label, w, psd_leq(m.state(steps).scaled(w), nu, eps)});
    }
    return out;
}

struct DiagonalRow {
    std::string x;
    double nu_xx = 0;
    double m_x = 0;
    double ratio = 0;
};

struct DiagonalReport {
    double c1 = 0;
    double c2 = 0;
    std::string argmin, argmax;
    double diag_sum = 0;  // sum of <x|nu|x> over all supported x
    std::vector<DiagonalRow> rows;
    std::vector<std::string> skipped;  // corpus strings with m(x) = 0
};

/// Tightest c1, c2 with c1 m(x) <= <x|nu|x> <= c2 m(x) over the corpus.
inline DiagonalReport diagonal_vs_m(const IndeterminateState &nu,
                                    const std::map<std::string, Rational, decltype(&shortlex_less)> &m,
                                    const std::vector<std::string> &corpus) {
    Rational total = 0;
    for (const auto &[x, w] : m) {
        total += w;
    }
    if (total > 1) {
        fail(ErrorKind::Validation, "toy m is not a semi-measure (sum " + rational_text(total) + ")");
    }
    DiagonalReport r;
    for (const auto &x : nu.support()) {
        r.diag_sum += nu.element(x, x).real();
    }
    bool first = true;
    for (const auto &x : corpus) {
        auto it = m.find(x);
        if (it == m.end() || it->second == 0) {
            r.skipped.push_back(x);
            continue;
        }
        DiagonalRow row{x, nu.element(x, x).real(), to_double(it->second), 0};
        row.ratio = row.nu_xx / row.m_x;
        if (first || row.ratio < r.c1) {
            r.c1 = row.ratio;
            r.argmin = x;
        }
        if (first || row.ratio > r.c2) {
            r.c2 = row.ratio;
            r.argmax = x;
        }
        first = false;
        r.rows.push_back(row);
    }
    return r;
}

}  // namespace qtmlab
