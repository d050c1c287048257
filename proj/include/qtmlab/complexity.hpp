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
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "qtmlab/decoder.hpp"

namespace qtmlab {

// ---------------------------------------------------------------------------
// Classical reference machines: finite program tables with step counts.
// ---------------------------------------------------------------------------

enum class MachineKind { ClassicalPlain, ClassicalPrefix, Quantum };

struct ProgramEntry {
    std::string program;
    std::string output;
    int steps = 0;
};

/// `-` stands for the empty string in every line-oriented format.
inline std::string word_text(const std::string &s) {
    return s.empty() ? "-" : s;
}
inline std::string word_parse(const std::string &s) {
    if (s == "-") {
        return "";
    }
    for (char c : s) {
        if (c != '0' && c != '1') {
            fail(ErrorKind::Parse, "not a bit string: '" + s + "'");
        }
    }
    return s;
}

/// Elias gamma code of n >= 1.
inline std::string elias_gamma(size_t n) {
    std::string bin;
    for (size_t v = n; v > 0; v >>= 1) {
        bin.insert(bin.begin(), (v & 1) ? '1' : '0');
    }
    return std::string(bin.size() - 1, '0') + bin;
}

/// n-th bit string in shortlex order (0 -> "", 1 -> "0", 2 -> "1", 3 -> "00").
inline std::string shortlex_string(size_t n) {
    std::string bin;
    for (size_t v = n + 1; v > 1; v >>= 1) {
        bin.insert(bin.begin(), (v & 1) ? '1' : '0');
    }
    return bin;
}

class ClassicalMachine {
   public:
    ClassicalMachine() = default;
    ClassicalMachine(std::string name, MachineKind kind, int step_budget, std::vector<ProgramEntry> entries)
        : name_(std::move(name)), kind_(kind), budget_(step_budget) {
        for (auto &e : entries) {
            table_[e.program] = std::move(e);
        }
        if (kind_ == MachineKind::ClassicalPrefix) {
            if (auto v = prefix_violation()) {
                fail(ErrorKind::Validation, "prefix machine '" + name_ + "': program '" + word_text(v->first) +
                                                "' is a proper prefix of '" + word_text(v->second) + "'");
            }
        }
    }

    const std::string &name() const {
        return name_;
    }
    MachineKind kind() const {
        return kind_;
    }
    int step_budget() const {
        return budget_;
    }
    /// Programs in shortlex order.
    std::vector<ProgramEntry> entries() const {
        std::vector<ProgramEntry> out;
        for (const auto &[p, e] : table_) {
            out.push_back(e);
        }
        std::sort(out.begin(), out.end(), [](const auto &a, const auto &b) { return shortlex_less(a.program, b.program); });
        return out;
    }
    /// Entry for a program, or nullopt when the program never halts.
    std::optional<ProgramEntry> run(const std::string &program) const {
        auto it = table_.find(program);
        if (it == table_.end()) {
            return std::nullopt;
        }
        return it->second;
    }
    /// A pair (p, q) with p a proper prefix of q, both halting.
    std::optional<std::pair<std::string, std::string>> prefix_violation() const {
        for (const auto &[p, e] : table_) {
            for (size_t len = 0; len < p.size(); len++) {
                if (table_.count(p.substr(0, len))) {
                    return std::make_pair(p.substr(0, len), p);
                }
            }
        }
        return std::nullopt;
    }

   private:
    std::string name_;
    MachineKind kind_ = MachineKind::ClassicalPlain;
    int budget_ = 0;
    std::map<std::string, ProgramEntry> table_;
};

/// Program-table grammar:
///   classical <name> / kind plain|prefix / budget <n>
///   program <p> <output> <steps>
///   generate identity|header|gamma <max-output-length>
/// Explicit `program` lines override generated ones.
inline ClassicalMachine parse_classical(const std::string &text) {
    std::istringstream in(text);
    std::string line, name;
    size_t lineno = 0;
    MachineKind kind = MachineKind::ClassicalPlain;
    int budget = 1000;
    std::map<std::string, ProgramEntry> generated, explicit_entries;
    auto perr = [&](const std::string &msg) { fail(ErrorKind::Parse, "line " + std::to_string(lineno) + ": " + msg); };
    auto to_int = [&](const std::string &s) {
        try {
            size_t used = 0;
            int v = std::stoi(s, &used);
            if (used != s.size() || v < 0) {
                perr("bad integer '" + s + "'");
            }
            return v;
        } catch (const std::logic_error &) {
            perr("bad integer '" + s + "'");
        }
        return 0;
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
        if (w[0] == "classical" && w.size() == 2) {
            name = w[1];
        } else if (w[0] == "kind" && w.size() == 2) {
            if (w[1] == "plain") {
                kind = MachineKind::ClassicalPlain;
            } else if (w[1] == "prefix") {
                kind = MachineKind::ClassicalPrefix;
            } else {
                perr("kind must be plain or prefix");
            }
        } else if (w[0] == "budget" && w.size() == 2) {
            budget = to_int(w[1]);
        } else if (w[0] == "program" && w.size() == 4) {
            auto word = [&](const std::string &tok) {
                try {
                    return word_parse(tok);
                } catch (const Error &e) {
                    perr(e.what());
                }
                return std::string();
            };
            ProgramEntry e{word(w[1]), word(w[2]), to_int(w[3])};
            if (explicit_entries.count(e.program)) {
                perr("duplicate program '" + w[1] + "'");
            }
            explicit_entries[e.program] = e;
        } else if (w[0] == "generate" && w.size() == 3) {
            int n = to_int(w[2]);
            for (const auto &x : strings_up_to(n)) {
                std::string p;
                if (w[1] == "identity") {
                    p = x;
                } else if (w[1] == "header") {
                    p = "0" + x;
                } else if (w[1] == "gamma") {
                    p = elias_gamma(x.size() + 1) + x;
                } else {
                    perr("unknown generator '" + w[1] + "'");
                }
                generated[p] = {p, x, static_cast<int>(p.size()) + 1};
            }
        } else {
            perr("unrecognized line");
        }
    }
    if (name.empty()) {
        fail(ErrorKind::Parse, "missing 'classical' line");
    }
    for (auto &[p, e] : explicit_entries) {
        generated[p] = e;
    }
    std::vector<ProgramEntry> entries;
    for (auto &[p, e] : generated) {
        entries.push_back(e);
    }
    return ClassicalMachine(name, kind, budget, std::move(entries));
}

enum class SearchStatus { Exact, BudgetLimited, LowerBoundOnly };

inline const char *status_text(SearchStatus s) {
    switch (s) {
        case SearchStatus::Exact:
            return "exact";
        case SearchStatus::BudgetLimited:
            return "budget-limited";
        default:
            return "lower-bound-only";
    }
}

struct SearchResult {
    std::optional<int> value;
    SearchStatus status = SearchStatus::Exact;
    int lower_bound = 0;
    std::string witness;
};

/// Shortest program of length <= max_len whose output is x within the step
/// budget. Programs over budget make the answer budget-limited; no witness
/// gives a lower-bound-only result.
inline SearchResult plain_complexity(const std::string &x, const ClassicalMachine &rm, int max_len) {
    SearchResult r;
    bool over_budget = false;
    for (int len = 0; len <= max_len; len++) {
        for (size_t i = 0; i < (size_t{1} << len); i++) {
            std::string p = bits_string(len, i);
            auto e = rm.run(p);
            if (!e) {
                continue;
            }
            if (e->steps > rm.step_budget()) {
                over_budget = true;
                continue;
            }
            if (e->output == x) {
                r.value = len;
                r.lower_bound = len;
                r.witness = p;
                r.status = over_budget ? SearchStatus::BudgetLimited : SearchStatus::Exact;
                return r;
            }
        }
    }
    r.status = SearchStatus::LowerBoundOnly;
    r.lower_bound = max_len + 1;
    return r;
}

/// Toy algorithmic probability: sum of 2^-|p| over programs printing x.
inline Rational toy_m(const std::string &x, const ClassicalMachine &rm) {
    Rational s = 0;
    for (const auto &e : rm.entries()) {
        if (e.output == x && e.steps <= rm.step_budget()) {
            s += Rational(1, BigInt(1) << e.program.size());
        }
    }
    return s;
}

inline std::map<std::string, Rational, decltype(&shortlex_less)> toy_m_table(const ClassicalMachine &rm) {
    std::map<std::string, Rational, decltype(&shortlex_less)> m(shortlex_less);
    for (const auto &e : rm.entries()) {
        if (e.steps <= rm.step_budget()) {
            m[e.output] += Rational(1, BigInt(1) << e.program.size());
        }
    }
    return m;
}

// ---------------------------------------------------------------------------
// Quantum programs.
// ---------------------------------------------------------------------------

struct DictProgram {
    int n = 0;
    std::string label;
    Matrix sigma;
};

struct Dictionary {
    std::string name;
    std::vector<DictProgram> programs;
};

/// Classical basis states of length <= k_max and the uniform two-basis
/// superpositions (|a> + w|b>)/sqrt 2 for w in {1, -1, i, -i}.
inline Dictionary basic_dictionary(int k_max) {
    Dictionary d;
    d.name = "basic(k_max=" + std::to_string(k_max) + ")";
    const cplx phases[] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    const char *phase_names[] = {"+", "-", "+i", "-i"};
    for (int n = 0; n <= k_max; n++) {
        const size_t dim = size_t{1} << n;
        for (size_t a = 0; a < dim; a++) {
            Vector v = Vector::Zero(static_cast<Eigen::Index>(dim));
            v(static_cast<Eigen::Index>(a)) = 1.0;
            d.programs.push_back({n, "|" + bits_string(n, a) + ">", v * v.adjoint()});
        }
        for (size_t a = 0; a < dim; a++) {
            for (size_t b = a + 1; b < dim; b++) {
                for (int ph = 0; ph < 4; ph++) {
                    Vector v = Vector::Zero(static_cast<Eigen::Index>(dim));
                    v(static_cast<Eigen::Index>(a)) = 1.0 / std::sqrt(2.0);
                    v(static_cast<Eigen::Index>(b)) = phases[ph] / std::sqrt(2.0);
                    d.programs.push_back({n, "(|" + bits_string(n, a) + ">" + phase_names[ph] + "|" + bits_string(n, b) + ">)/sqrt2",
                                          v * v.adjoint()});
                }
            }
        }
    }
    return d;
}

/// Adds user-supplied elementary pure states: lines `state <n> <re> <im> ...`
/// with 2^n rational coefficient pairs.
inline void add_states(Dictionary &d, const std::string &text) {
    std::istringstream in(text);
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        lineno++;
        std::istringstream ls(line);
        std::string kw;
        if (!(ls >> kw) || kw.rfind("//", 0) == 0) {
            continue;
        }
        int n = -1;
        if (kw != "state" || !(ls >> n) || n < 0 || n > 12) {
            fail(ErrorKind::Parse, "dictionary line " + std::to_string(lineno) + ": expected 'state <n> ...'");
        }
        Vector v(static_cast<Eigen::Index>(size_t{1} << n));
        for (Eigen::Index i = 0; i < v.size(); i++) {
            std::string re, im;
            if (!(ls >> re >> im)) {
                fail(ErrorKind::Parse, "dictionary line " + std::to_string(lineno) + ": too few coefficients");
            }
            auto a = parse_rational(re);
            auto b = parse_rational(im);
            if (!a || !b) {
                fail(ErrorKind::Parse, "dictionary line " + std::to_string(lineno) + ": non-rational coefficient");
            }
            v(i) = cplx(to_double(*a), to_double(*b));
        }
        PureState ps(v);
        d.programs.push_back({n, "user#" + std::to_string(lineno), ps.projector()});
    }
}

/// Runs every dictionary program on a quantum machine once and keeps the
/// halting time and output.
class QuantumRunner {
   public:
    struct Run {
        std::optional<int> time;
        IndeterminateState output;
    };

    QuantumRunner(const QTMDef &m, int t_max, double eta = kHaltEta)
        : cs_(m, m.window), t_max_(t_max), eta_(eta) {
    }

    const ConfigSpace &space() const {
        return cs_;
    }
    int t_max() const {
        return t_max_;
    }

    const Trajectory &trajectory(int n, const std::string &aux) const {
        auto key = std::make_pair(n, aux);
        auto it = traj_.find(key);
        if (it == traj_.end()) {
            it = traj_.emplace(key, std::make_unique<Trajectory>(cs_, n, t_max_, aux)).first;
        }
        return *it->second;
    }

    Run run(const DictProgram &p, const std::string &aux = "") const {
        const Trajectory &tr = trajectory(p.n, aux);
        auto prof = tr.profile(p.sigma, eta_);
        if (!prof.time) {
            return {std::nullopt, IndeterminateState::zero(cs_.window())};
        }
        return {prof.time, tr.output(p.sigma, *prof.time, cs_.window())};
    }

    /// Runs for a whole dictionary, cached per aux string.
    const std::vector<Run> &runs(const Dictionary &d, const std::string &aux = "") const {
        auto key = std::make_pair(d.name, aux);
        auto it = runs_.find(key);
        if (it == runs_.end()) {
            std::vector<Run> out;
            for (const auto &p : d.programs) {
                out.push_back(run(p, aux));
            }
            it = runs_.emplace(key, std::move(out)).first;
        }
        return it->second;
    }

   private:
    ConfigSpace cs_;
    int t_max_;
    double eta_;
    mutable std::map<std::pair<int, std::string>, std::unique_ptr<Trajectory>> traj_;
    mutable std::map<std::pair<std::string, std::string>, std::vector<Run>> runs_;
};

/// |x><x| on the indeterminate-length space.
inline IndeterminateState classical_target(const std::string &x, int max_len) {
    return IndeterminateState::pure(max_len, {{x, cplx(1.0, 0.0)}});
}

/// Whether D < eps. Any defined output qualifies at eps >= 1.
inline bool within(double distance, double eps) {
    return eps >= 1.0 || distance < eps;
}

/// Index of the shortest dictionary program with D(M(sigma), target) < eps;
/// ties go to the earliest program.
inline std::optional<size_t> hbvl_eps_witness(const IndeterminateState &target, const QuantumRunner &qr, double eps,
                                              const Dictionary &d) {
    if (d.programs.empty()) {
        fail(ErrorKind::Validation, "hbvl_eps: empty dictionary");
    }
    if (!(eps > 0)) {
        fail(ErrorKind::Validation, "hbvl_eps: eps must be positive");
    }
    const auto &runs = qr.runs(d);
    std::optional<size_t> best;
    for (size_t i = 0; i < d.programs.size(); i++) {
        if (!runs[i].time || (best && d.programs[i].n >= d.programs[*best].n)) {
            continue;
        }
        if (within(trace_distance(runs[i].output, target), eps)) {
            best = i;
        }
    }
    return best;
}

/// min |sigma| over dictionary programs with D(M(sigma), target) < eps.
inline std::optional<int> hbvl_eps(const IndeterminateState &target, const QuantumRunner &qr, double eps,
                                   const Dictionary &d) {
    auto w = hbvl_eps_witness(target, qr, eps, d);
    if (!w) {
        return std::nullopt;
    }
    return d.programs[*w].n;
}

/// Binary of k on the auxiliary tape when the machine has one.
inline std::string aux_for_k(const QTMDef &m, int k) {
    return aux_encoding(m, k);
}

/// min |sigma| such that D(M(sigma, k), target) < 1/k for every k <= k_max.
inline std::optional<int> hbvl(const IndeterminateState &target, const QuantumRunner &qr, const Dictionary &d,
                               int k_max) {
    if (d.programs.empty()) {
        fail(ErrorKind::Validation, "hbvl: empty dictionary");
    }
    std::optional<int> best;
    for (size_t i = 0; i < d.programs.size(); i++) {
        if (best && d.programs[i].n >= *best) {
            continue;
        }
        bool ok = true;
        for (int k = 1; k <= k_max && ok; k++) {
            const auto &run = qr.runs(d, aux_for_k(qr.space().machine(), k))[i];
            ok = run.time && within(trace_distance(run.output, target), 1.0 / k);
        }
        if (ok) {
            best = d.programs[i].n;
        }
    }
    return best;
}

struct ComplexityReport {
    std::string x;
    SearchResult c_plain;
    std::vector<std::pair<int, std::optional<int>>> hbvl_eps;  // (k, Hbvl^{1/k})
    std::optional<int> hbvl;
    std::optional<int> gap;
    bool monotone = true;     // Hbvl^eps nonincreasing in eps
    bool prop1 = true;        // Hbvl >= Hbvl^{1/k}
    std::string warning;
};

struct GapReport {
    std::vector<ComplexityReport> rows;
    int max_gap = 0;
    int c_sim = 0;  // max (Hbvl - C)
    std::vector<std::string> excluded;
};

inline ComplexityReport complexity_report(const std::string &x, const ClassicalMachine &rm, int max_program_len,
                                          const QuantumRunner &qr, const Dictionary &d, int k_max) {
    ComplexityReport r;
    r.x = x;
    r.c_plain = plain_complexity(x, rm, max_program_len);
    auto target = classical_target(x, qr.space().window());
    for (int k = 1; k <= k_max; k++) {
        r.hbvl_eps.emplace_back(k, hbvl_eps(target, qr, 1.0 / k, d));
    }
    r.hbvl = hbvl(target, qr, d, k_max);
    // eps decreases along hbvl_eps, so values must be nondecreasing.
    for (size_t i = 1; i < r.hbvl_eps.size(); i++) {
        auto a = r.hbvl_eps[i - 1].second;
        auto b = r.hbvl_eps[i].second;
        if (a && (!b || *b < *a)) {
            r.monotone = false;
        }
    }
    if (r.hbvl) {
        for (const auto &[k, v] : r.hbvl_eps) {
            if (!v || *v > *r.hbvl) {
                r.prop1 = false;
            }
        }
    }
    if (!r.c_plain.value || r.c_plain.status != SearchStatus::Exact) {
        r.warning = std::string("plain complexity ") + status_text(r.c_plain.status);
    } else if (!r.hbvl) {
        r.warning = "no dictionary program reaches the target";
    } else {
        r.gap = std::abs(*r.c_plain.value - *r.hbvl);
    }
    return r;
}

inline GapReport complexity_gap(const std::vector<std::string> &corpus, const ClassicalMachine &rm, int max_program_len,
                             const QuantumRunner &qr, const Dictionary &d, int k_max) {
    GapReport g;
    bool first = true;
    for (const auto &x : corpus) {
        auto r = complexity_report(x, rm, max_program_len, qr, d, k_max);
        if (r.gap) {
            g.max_gap = std::max(g.max_gap, *r.gap);
            int diff = *r.hbvl - *r.c_plain.value;
            g.c_sim = first ? diff : std::max(g.c_sim, diff);
            first = false;
        } else {
            g.excluded.push_back(x);
        }
        g.rows.push_back(std::move(r));
    }
    return g;
}

struct DecoderCrossCheck {
    int c_dec = 0;  // max over covered y of C(y) - k
    std::vector<std::pair<int, int>> per_k;  // (k, max C(y) - k)
    std::vector<std::string> uncovered;      // covered strings with no classical witness
};

/// For each covered y at level k, C(y) - k; the maximum is the decoder overhead.
inline DecoderCrossCheck decoder_cross_check(const ConfigSpace &cs, const std::vector<int> &ks, int t_max, int ell_max,
                                             const ClassicalMachine &rm, int max_program_len) {
    DecoderCrossCheck dc;
    bool first = true;
    for (int k : ks) {
        auto tab = coverage_table(cs, k, t_max, ell_max);
        std::optional<int> worst;
        for (const auto &row : tab.rows) {
            auto c = plain_complexity(row.y, rm, max_program_len);
            if (!c.value) {
                dc.uncovered.push_back(row.y);
                continue;
            }
            int over = *c.value - k;
            worst = worst ? std::max(*worst, over) : over;
        }
        if (worst) {
            dc.per_k.emplace_back(k, *worst);
            dc.c_dec = first ? *worst : std::max(dc.c_dec, *worst);
            first = false;
        }
    }
    return dc;
}

// ---------------------------------------------------------------------------
// a < b + c  implies  a + K(a) < b + K(b) + c',  c' = 2 log2 c + const.
// ---------------------------------------------------------------------------

struct Prop2Sample {
    int a = 0;
    int b = 0;
    int c = 1;
};

struct Prop2Result {
    bool holds = true;
    std::optional<Prop2Sample> witness;
    double required_const = -1e300;  // smallest const making every sample hold (strict)
};

/// K of the integer n through its shortlex string on a prefix machine.
inline int toy_integer_k(int n, const ClassicalMachine &prefix, int max_program_len) {
    auto r = plain_complexity(shortlex_string(static_cast<size_t>(n)), prefix, max_program_len);
    if (!r.value) {
        fail(ErrorKind::Validation, "toy K undefined for " + std::to_string(n));
    }
    return *r.value;
}

inline Prop2Result prop2_check(const std::vector<Prop2Sample> &samples, const ClassicalMachine &prefix,
                               int max_program_len, double constant) {
    Prop2Result r;
    std::map<int, int> kcache;
    auto K = [&](int n) {
        auto it = kcache.find(n);
        if (it == kcache.end()) {
            it = kcache.emplace(n, toy_integer_k(n, prefix, max_program_len)).first;
        }
        return it->second;
    };
    for (const auto &s : samples) {
        if (!(s.a < s.b + s.c)) {
            continue;
        }
        double lhs = s.a + K(s.a);
        double rhs = s.b + K(s.b) + 2.0 * std::log2(static_cast<double>(s.c));
        r.required_const = std::max(r.required_const, lhs - rhs);
        if (!(lhs < rhs + constant) && r.holds) {
            r.holds = false;
            r.witness = s;
        }
    }
    return r;
}

inline std::vector<Prop2Sample> prop2_grid(int max_ab, int max_c) {
    std::vector<Prop2Sample> out;
    for (int a = 0; a <= max_ab; a++) {
        for (int b = 0; b <= max_ab; b++) {
            for (int c = 1; c <= max_c; c++) {
                out.push_back({a, b, c});
            }
        }
    }
    return out;
}

}  // namespace qtmlab
