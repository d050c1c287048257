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

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "qtmlab/exact.hpp"
#include "qtmlab/operator.hpp"

namespace qtmlab {

/// Tape alphabet {#, 0, 1}, coded so that a blank tape has code 0.
inline constexpr int kBlank = 0;
inline constexpr int kNumSymbols = 3;

inline int symbol_code(char c) {
    switch (c) {
        case '#':
            return 0;
        case '0':
            return 1;
        case '1':
            return 2;
        default:
            return -1;
    }
}

inline char symbol_char(int code) {
    return "#01"[code];
}

struct Amplitude {
    cplx value;
    std::optional<ExactComplex> exact;
    std::string re_text = "0";
    std::string im_text = "0";
};

/// One outgoing branch of a transition: target state, symbols written and head
/// moves per tape (-1 = L, +1 = R), amplitude.
struct Branch {
    int target = 0;
    std::vector<int> write;
    std::vector<int> moves;
    Amplitude amp;
};

/// Well-formed quantum Turing machine over {0,1,#} with 1 to 3 looped tapes.
struct QTMDef {
    std::string name;
    int tapes = 1;
    int window = 0;
    std::vector<std::string> states;
    int start = 0;
    int final_state = 0;
    /// Indexed by read_key(state, symbols); empty means no rule.
    std::vector<std::vector<Branch>> table;
    std::vector<bool> defined;

    int num_states() const {
        return static_cast<int>(states.size());
    }
    int symbol_combos() const {
        int n = 1;
        for (int i = 0; i < tapes; i++) {
            n *= kNumSymbols;
        }
        return n;
    }
    size_t read_key(int state, const std::vector<int> &syms) const {
        size_t k = 0;
        for (int i = tapes - 1; i >= 0; i--) {
            k = k * kNumSymbols + static_cast<size_t>(syms[i]);
        }
        return static_cast<size_t>(state) * static_cast<size_t>(symbol_combos()) + k;
    }
    std::vector<int> key_symbols(size_t key) const {
        std::vector<int> s(tapes);
        size_t k = key % static_cast<size_t>(symbol_combos());
        for (int i = 0; i < tapes; i++) {
            s[i] = static_cast<int>(k % kNumSymbols);
            k /= kNumSymbols;
        }
        return s;
    }
    /// True when every amplitude is a Gaussian rational.
    bool is_exact() const {
        for (const auto &bs : table) {
            for (const auto &b : bs) {
                if (!b.amp.exact) {
                    return false;
                }
            }
        }
        return true;
    }
    int state_index(const std::string &label) const {
        auto it = std::find(states.begin(), states.end(), label);
        return it == states.end() ? -1 : static_cast<int>(it - states.begin());
    }
    /// Tape holding the input (always tape 0).
    int input_tape() const {
        return 0;
    }
    /// Tape read by output extraction.
    int output_tape() const {
        return tapes == 3 ? 1 : 0;
    }
    /// Auxiliary tape carrying classical parameters, or -1.
    int aux_tape() const {
        return tapes >= 2 ? tapes - 1 : -1;
    }
};

namespace detail {

inline std::string syms_text(const std::vector<int> &s) {
    std::string out;
    for (int c : s) {
        out.push_back(symbol_char(c));
    }
    return out;
}

inline std::string moves_text(const std::vector<int> &m) {
    std::string out;
    for (int d : m) {
        out.push_back(d < 0 ? 'L' : 'R');
    }
    return out;
}

}  // namespace detail

/// Parses the line-oriented machine grammar. Lines starting with `//` are
/// comments. The exact backend rejects irrational amplitudes.
inline QTMDef parse_machine(const std::string &text, Backend backend = Backend::Float) {
    QTMDef m;
    std::istringstream in(text);
    std::string line;
    size_t lineno = 0;
    auto perr = [&](const std::string &msg) {
        fail(ErrorKind::Parse, "line " + std::to_string(lineno) + ": " + msg);
    };
    std::string start_label, final_label;
    bool have_tapes = false;
    struct RawRule {
        size_t line;
        std::string q, syms, q2, syms2, moves, re, im;
    };
    std::vector<RawRule> raw;
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
        const std::string &kw = w[0];
        if (kw == "machine") {
            if (w.size() != 2) {
                perr("expected 'machine <name>'");
            }
            m.name = w[1];
        } else if (kw == "tapes" || kw == "window") {
            if (w.size() != 2) {
                perr("expected '" + kw + " <n>'");
            }
            int v = 0;
            try {
                size_t used = 0;
                v = std::stoi(w[1], &used);
                if (used != w[1].size()) {
                    perr("bad integer '" + w[1] + "'");
                }
            } catch (const std::logic_error &) {
                perr("bad integer '" + w[1] + "'");
            }
            if (kw == "tapes") {
                if (v < 1 || v > 3) {
                    perr("tapes must be 1, 2 or 3");
                }
                m.tapes = v;
                have_tapes = true;
            } else {
                if (v < 1) {
                    perr("window must be positive");
                }
                m.window = v;
            }
        } else if (kw == "states") {
            if (w.size() < 3) {
                perr("need at least two states");
            }
            m.states.assign(w.begin() + 1, w.end());
            std::set<std::string> uniq(m.states.begin(), m.states.end());
            if (uniq.size() != m.states.size()) {
                perr("duplicate state label");
            }
        } else if (kw == "start" || kw == "final") {
            if (w.size() != 2) {
                perr("expected '" + kw + " <state>'");
            }
            (kw == "start" ? start_label : final_label) = w[1];
        } else if (kw == "rule") {
            if (w.size() != 9 || w[3] != "->") {
                perr("expected 'rule <q> <syms> -> <q'> <syms'> <moves> <re> <im>'");
            }
            raw.push_back({lineno, w[1], w[2], w[4], w[5], w[6], w[7], w[8]});
        } else {
            perr("unknown keyword '" + kw + "'");
        }
    }
    (void)have_tapes;
    if (m.name.empty()) {
        fail(ErrorKind::Parse, "missing 'machine' line");
    }
    if (m.states.empty()) {
        fail(ErrorKind::Parse, "missing 'states' line");
    }
    if (m.window == 0) {
        fail(ErrorKind::Parse, "missing 'window' line");
    }
    m.start = m.state_index(start_label);
    m.final_state = m.state_index(final_label);
    if (m.start < 0 || m.final_state < 0) {
        fail(ErrorKind::Parse, "start/final must name declared states");
    }
    if (m.start == m.final_state) {
        fail(ErrorKind::Validation, "start state must differ from final state");
    }
    size_t nkeys = static_cast<size_t>(m.num_states()) * static_cast<size_t>(m.symbol_combos());
    m.table.assign(nkeys, {});
    m.defined.assign(nkeys, false);
    std::set<std::tuple<size_t, int, std::string, std::string>> seen;
    for (const auto &r : raw) {
        lineno = r.line;
        int q = m.state_index(r.q);
        int q2 = m.state_index(r.q2);
        if (q < 0 || q2 < 0) {
            perr("unknown state");
        }
        auto parse_syms = [&](const std::string &s) {
            if (static_cast<int>(s.size()) != m.tapes) {
                perr("symbol group '" + s + "' must have one symbol per tape");
            }
            std::vector<int> out;
            for (char c : s) {
                int code = symbol_code(c);
                if (code < 0) {
                    perr("bad symbol '" + std::string(1, c) + "'");
                }
                out.push_back(code);
            }
            return out;
        };
        auto read = parse_syms(r.syms);
        Branch b;
        b.target = q2;
        b.write = parse_syms(r.syms2);
        if (static_cast<int>(r.moves.size()) != m.tapes) {
            perr("moves '" + r.moves + "' must have one move per tape");
        }
        for (char c : r.moves) {
            if (c != 'L' && c != 'R') {
                perr("bad move '" + std::string(1, c) + "'");
            }
            b.moves.push_back(c == 'L' ? -1 : 1);
        }
        RealToken re, im;
        try {
            re = parse_real_token(r.re);
            im = parse_real_token(r.im);
        } catch (const Error &e) {
            perr(e.what());
        }
        if (backend == Backend::Exact && (!re.exact || !im.exact)) {
            perr("non-rational amplitude not allowed in exact backend");
        }
        b.amp.value = cplx(re.value, im.value);
        if (re.exact && im.exact) {
            b.amp.exact = ExactComplex(*re.exact, *im.exact);
        }
        b.amp.re_text = r.re;
        b.amp.im_text = r.im;
        size_t key = m.read_key(q, read);
        if (!seen.insert({key, q2, r.syms2, r.moves}).second) {
            perr("duplicate rule for " + r.q + " " + r.syms + " -> " + r.q2 + " " + r.syms2 + " " + r.moves);
        }
        m.table[key].push_back(std::move(b));
        m.defined[key] = true;
    }
    return m;
}

/// Canonical text form; parse_machine(machine_text(m)) reproduces m.
inline std::string machine_text(const QTMDef &m) {
    std::ostringstream out;
    out << "machine " << m.name << "\n";
    out << "tapes " << m.tapes << "\n";
    out << "window " << m.window << "\n";
    out << "states";
    for (const auto &s : m.states) {
        out << " " << s;
    }
    out << "\n";
    out << "start " << m.states[m.start] << "\n";
    out << "final " << m.states[m.final_state] << "\n";
    for (size_t key = 0; key < m.table.size(); key++) {
        int q = static_cast<int>(key / static_cast<size_t>(m.symbol_combos()));
        auto read = m.key_symbols(key);
        for (const auto &b : m.table[key]) {
            out << "rule " << m.states[q] << " " << detail::syms_text(read) << " -> " << m.states[b.target] << " "
                << detail::syms_text(b.write) << " " << detail::moves_text(b.moves) << " " << b.amp.re_text << " "
                << b.amp.im_text << "\n";
        }
    }
    return out.str();
}

}  // namespace qtmlab
