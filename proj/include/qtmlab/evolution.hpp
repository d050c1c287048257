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

#include <Eigen/QR>

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qtmlab/config.hpp"
#include "qtmlab/indeterminate.hpp"
#include "qtmlab/linalg.hpp"

namespace qtmlab {

inline constexpr double kHaltEta = 1e-6;
inline constexpr uint64_t kMaxAssembledDim = 4'000'000;

/// Semi-density operator on configuration space in factored form:
/// rho = sum_{a,b} core(a,b) |col_a><col_b|.
struct ConfigState {
    std::vector<SparseVec<cplx>> columns;
    Matrix core;

    /// G(b,a) = <col_b|P|col_a> where P projects onto configurations accepted by `keep`.
    template <class Pred>
    Matrix gram(Pred keep) const {
        const auto r = static_cast<Eigen::Index>(columns.size());
        std::vector<SparseVec<cplx>> kept(columns.size());
        for (size_t i = 0; i < columns.size(); i++) {
            for (const auto &e : columns[i]) {
                if (keep(e.first)) {
                    kept[i].push_back(e);
                }
            }
        }
        Matrix g(r, r);
        for (Eigen::Index b = 0; b < r; b++) {
            for (Eigen::Index a = 0; a < r; a++) {
                g(b, a) = sparse_dot(kept[static_cast<size_t>(b)], kept[static_cast<size_t>(a)]);
            }
        }
        return g;
    }
    Matrix gram() const {
        return gram([](uint64_t) { return true; });
    }
    double trace() const {
        return (core * gram()).trace().real();
    }
    /// Weight on configurations in the final control state.
    double final_weight(const ConfigSpace &cs) const {
        return (core * gram([&](uint64_t i) { return cs.is_final(i); })).trace().real();
    }

    /// Dense matrix over the whole configuration space (small spaces only).
    Matrix dense(const ConfigSpace &cs) const {
        if (cs.dim() > 4096) {
            fail(ErrorKind::Validation, "configuration space too large to densify");
        }
        const auto d = static_cast<Eigen::Index>(cs.dim());
        Matrix c = Matrix::Zero(d, static_cast<Eigen::Index>(columns.size()));
        for (size_t a = 0; a < columns.size(); a++) {
            for (const auto &[i, v] : columns[a]) {
                c(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(a)) = v;
            }
        }
        return c * core * c.adjoint();
    }
};

/// Trace distance between two factored configuration-space operators, computed
/// through a thin QR of the stacked column spans.
inline double trace_distance(const ConfigState &x, const ConfigState &y) {
    std::vector<uint64_t> support;
    for (const auto *s : {&x, &y}) {
        for (const auto &col : s->columns) {
            for (const auto &e : col) {
                support.push_back(e.first);
            }
        }
    }
    std::sort(support.begin(), support.end());
    support.erase(std::unique(support.begin(), support.end()), support.end());
    if (support.empty()) {
        return 0.0;
    }
    const auto rx = static_cast<Eigen::Index>(x.columns.size());
    const auto ry = static_cast<Eigen::Index>(y.columns.size());
    Matrix m = Matrix::Zero(static_cast<Eigen::Index>(support.size()), rx + ry);
    auto fill = [&](const ConfigState &s, Eigen::Index off) {
        for (size_t a = 0; a < s.columns.size(); a++) {
            for (const auto &[i, v] : s.columns[a]) {
                auto row = std::lower_bound(support.begin(), support.end(), i) - support.begin();
                m(row, off + static_cast<Eigen::Index>(a)) = v;
            }
        }
    };
    fill(x, 0);
    fill(y, rx);
    Matrix blk = Matrix::Zero(rx + ry, rx + ry);
    blk.topLeftCorner(rx, rx) = x.core;
    blk.bottomRightCorner(ry, ry) = -y.core;
    Matrix mid;
    if (m.rows() <= m.cols()) {
        mid = m * blk * m.adjoint();
    } else {
        Eigen::HouseholderQR<Matrix> qr(m);
        Matrix r = qr.matrixQR().topRows(m.cols()).triangularView<Eigen::Upper>();
        mid = r * blk * r.adjoint();
    }
    return 0.5 * hermitian_eigenvalues(mid).cwiseAbs().sum();
}

/// Places sigma (over Q_k) on the input tape: input bits then blanks, heads
/// at cell 0, control in the start state. `aux` is written on the auxiliary
/// tape when the machine has one.
inline ConfigState embed_input(const ConfigSpace &cs, const Operator &sigma, const std::string &aux = "") {
    const QTMDef &m = cs.machine();
    size_t d = sigma.dim();
    int k = 0;
    while ((size_t{1} << k) < d) {
        k++;
    }
    if ((size_t{1} << k) != d) {
        fail(ErrorKind::Validation, "embed_input: operator dimension is not a power of two");
    }
    if (k > cs.window()) {
        fail(ErrorKind::Validation, "embed_input: input length " + std::to_string(k) + " exceeds window " +
                                        std::to_string(cs.window()));
    }
    if (!aux.empty() && m.aux_tape() < 0) {
        fail(ErrorKind::Validation, "embed_input: machine has no auxiliary tape");
    }
    ConfigState st;
    for (size_t x = 0; x < d; x++) {
        Config c;
        c.state = m.start;
        c.codes.assign(static_cast<size_t>(m.tapes), 0);
        c.heads.assign(static_cast<size_t>(m.tapes), 0);
        c.codes[static_cast<size_t>(m.input_tape())] = cs.tape_code(bits_string(k, x));
        if (m.aux_tape() >= 0) {
            c.codes[static_cast<size_t>(m.aux_tape())] = cs.tape_code(aux);
        }
        st.columns.push_back({{cs.index(c), cplx(1.0, 0.0)}});
    }
    st.core = sigma.dense();
    return st;
}

inline ConfigState evolve(const ConfigSpace &cs, const ConfigState &rho, int t) {
    if (t < 0) {
        fail(ErrorKind::Validation, "evolve: negative step count");
    }
    ConfigState out = rho;
    for (int s = 0; s < t; s++) {
        for (auto &col : out.columns) {
            col = cs.step(col);
        }
    }
    return out;
}

struct HaltingProfile {
    std::optional<int> time;
    std::vector<double> final_weights;  // relative weight at t = 0..last simulated
    std::string diagnostic;
};

namespace detail {

/// Applies the halting convention to a sequence of relative final weights.
inline HaltingProfile classify_weights(std::vector<double> w, double eta) {
    HaltingProfile p;
    p.final_weights = std::move(w);
    for (size_t t = 0; t < p.final_weights.size(); t++) {
        double v = p.final_weights[t];
        if (v <= eta) {
            continue;
        }
        if (v >= 1.0 - eta) {
            p.time = static_cast<int>(t);
            return p;
        }
        p.diagnostic = "partial halting: final weight " + format_real(v) + " at t=" + std::to_string(t);
        return p;
    }
    p.diagnostic = "no halting within " + std::to_string(p.final_weights.size() - 1) + " steps";
    return p;
}

}  // namespace detail

/// Least t <= t_max at which the control state is final with weight >= 1 - eta
/// while it was <= eta at every earlier step.
inline HaltingProfile halting_profile(const ConfigSpace &cs, const ConfigState &rho, int t_max, double eta = kHaltEta) {
    double tr = rho.trace();
    if (tr <= 0) {
        return {std::nullopt, {}, "zero-trace input"};
    }
    std::vector<double> w;
    ConfigState cur = rho;
    for (int t = 0; t <= t_max; t++) {
        double v = cur.final_weight(cs) / tr;
        w.push_back(v);
        if (v > eta) {
            break;
        }
        if (t < t_max) {
            cur = evolve(cs, cur, 1);
        }
    }
    return detail::classify_weights(std::move(w), eta);
}

namespace detail {

/// Output-tape reading of a configuration: nullopt when the configuration is
/// not final or the output tape is not of the form s###.
inline std::optional<std::string> output_word(const ConfigSpace &cs, const Config &c) {
    const QTMDef &m = cs.machine();
    if (c.state != m.final_state) {
        return std::nullopt;
    }
    uint64_t code = c.codes[static_cast<size_t>(m.output_tape())];
    std::string s;
    bool blank_seen = false;
    for (int i = 0; i < cs.window(); i++) {
        int sym = cs.cell(code, i);
        if (sym == kBlank) {
            blank_seen = true;
        } else if (blank_seen) {
            return std::nullopt;
        } else {
            s.push_back(symbol_char(sym));
        }
    }
    return s;
}

}  // namespace detail

/// Output extraction: final configurations whose output tape reads s### map
/// to |s> coherently within each environment (heads and other tapes); every
/// other configuration is sent to the empty string incoherently.
inline IndeterminateState extract_output(const ConfigSpace &cs, const ConfigState &rho, int max_len) {
    const QTMDef &m = cs.machine();
    const auto r = static_cast<Eigen::Index>(rho.columns.size());
    // env key -> (string -> row of amplitudes over columns)
    std::map<std::pair<int, uint64_t>, std::map<std::string, Vector, decltype(&shortlex_less)>> envs;
    std::vector<std::string> strings;
    for (size_t a = 0; a < rho.columns.size(); a++) {
        for (const auto &[idx, v] : rho.columns[a]) {
            Config c = cs.config(idx);
            auto word = detail::output_word(cs, c);
            std::pair<int, uint64_t> key;
            std::string s;
            if (word) {
                c.codes[static_cast<size_t>(m.output_tape())] = 0;
                key = {0, cs.index(c)};
                s = *word;
            } else {
                key = {1, idx};
            }
            if (static_cast<int>(s.size()) > max_len) {
                fail(ErrorKind::Validation, "output string '" + s + "' longer than max_len " + std::to_string(max_len));
            }
            auto &rows = envs.try_emplace(key, shortlex_less).first->second;
            auto it = rows.find(s);
            if (it == rows.end()) {
                it = rows.emplace(s, Vector::Zero(r)).first;
                strings.push_back(s);
            }
            it->second(static_cast<Eigen::Index>(a)) += v;
        }
    }
    std::sort(strings.begin(), strings.end(), shortlex_less);
    strings.erase(std::unique(strings.begin(), strings.end()), strings.end());
    const auto n = static_cast<Eigen::Index>(strings.size());
    Matrix out = Matrix::Zero(n, n);
    for (const auto &[key, rows] : envs) {
        const auto e = static_cast<Eigen::Index>(rows.size());
        Matrix amat(e, r);
        std::vector<Eigen::Index> pos;
        Eigen::Index i = 0;
        for (const auto &[s, row] : rows) {
            amat.row(i++) = row.transpose();
            pos.push_back(std::lower_bound(strings.begin(), strings.end(), s, shortlex_less) - strings.begin());
        }
        Matrix blk = amat * rho.core * amat.adjoint();
        for (Eigen::Index p = 0; p < e; p++) {
            for (Eigen::Index q = 0; q < e; q++) {
                out(pos[static_cast<size_t>(p)], pos[static_cast<size_t>(q)]) += blk(p, q);
            }
        }
    }
    return {max_len, std::move(strings), std::move(out)};
}

/// Assembles the full sparse evolution operator (column c = image of config c).
inline Operator build_evolution(const ConfigSpace &cs) {
    if (cs.dim() > kMaxAssembledDim) {
        fail(ErrorKind::Validation, "configuration space too large to assemble (" + std::to_string(cs.dim()) + ")");
    }
    std::vector<Eigen::Triplet<cplx>> trips;
    trips.reserve(cs.dim() * 2);
    for (uint64_t c = 0; c < cs.dim(); c++) {
        auto col = cs.step(SparseVec<cplx>{{c, cplx(1.0, 0.0)}});
        for (const auto &[r, v] : col) {
            trips.emplace_back(static_cast<int>(r), static_cast<int>(c), v);
        }
    }
    SparseMatrix u(static_cast<Eigen::Index>(cs.dim()), static_cast<Eigen::Index>(cs.dim()));
    u.setFromTriplets(trips.begin(), trips.end());
    u.makeCompressed();
    return Operator(std::move(u));
}

struct WellformedReport {
    double unitary_defect = 0.0;
    bool pass = false;
};

/// max |u u* - I| over the assembled evolution.
inline WellformedReport wellformed_check(const Operator &u, double eps = kEpsNum) {
    const SparseMatrix *s = u.sparse();
    SparseMatrix tmp;
    if (!s) {
        tmp = u.dense().sparseView();
        s = &tmp;
    }
    SparseMatrix uu = (*s) * SparseMatrix(s->adjoint());
    double defect = 0.0;
    for (Eigen::Index r = 0; r < uu.outerSize(); r++) {
        bool diag_seen = false;
        for (SparseMatrix::InnerIterator it(uu, r); it; ++it) {
            cplx target = it.col() == r ? cplx(1.0, 0.0) : cplx(0.0, 0.0);
            diag_seen |= it.col() == r;
            defect = std::max(defect, std::abs(it.value() - target));
        }
        if (!diag_seen) {
            defect = std::max(defect, 1.0);
        }
    }
    return {defect, defect <= eps};
}

inline WellformedReport wellformed_check(const ConfigSpace &cs, double eps = kEpsNum) {
    return wellformed_check(build_evolution(cs), eps);
}

/// Exact unitarity check for machines with rational amplitudes: u u* = I
/// in Gaussian-rational arithmetic.
inline bool exact_unitary(const ConfigSpace &cs) {
    if (cs.dim() > kMaxAssembledDim) {
        fail(ErrorKind::Validation, "configuration space too large to assemble");
    }
    std::map<std::pair<uint64_t, uint64_t>, ExactComplex> uu;
    for (uint64_t c = 0; c < cs.dim(); c++) {
        auto col = cs.step(SparseVec<ExactComplex>{{c, ExactComplex(1)}});
        for (const auto &[i, a] : col) {
            for (const auto &[j, b] : col) {
                uu[{i, j}] += a * b.conj();
            }
        }
    }
    std::vector<bool> diag(cs.dim(), false);
    for (const auto &[ij, v] : uu) {
        if (ij.first == ij.second) {
            if (!(v == ExactComplex(1))) {
                return false;
            }
            diag[ij.first] = true;
        } else if (!v.is_zero()) {
            return false;
        }
    }
    return std::all_of(diag.begin(), diag.end(), [](bool b) { return b; });
}

/// Exact halting time of a basis input under exact arithmetic (eta = 0).
inline std::optional<int> exact_halting_time(const ConfigSpace &cs, const std::string &input, int t_max) {
    const QTMDef &m = cs.machine();
    Config c;
    c.state = m.start;
    c.codes.assign(static_cast<size_t>(m.tapes), 0);
    c.heads.assign(static_cast<size_t>(m.tapes), 0);
    c.codes[0] = cs.tape_code(input);
    SparseVec<ExactComplex> v{{cs.index(c), ExactComplex(1)}};
    for (int t = 0; t <= t_max; t++) {
        Rational w = 0;
        for (const auto &[i, a] : v) {
            if (cs.is_final(i)) {
                w += a.norm();
            }
        }
        if (w == 1) {
            return t;
        }
        if (w != 0) {
            return std::nullopt;
        }
        v = cs.step(v);
    }
    return std::nullopt;
}

/// Evolution of all 2^k basis inputs, cached per step. Every quantity needed
/// for a k-qubit input sigma at step t is a small 2^k x 2^k computation.
class Trajectory {
   public:
    Trajectory(ConfigSpace cs, int k, int t_max, std::string aux = "") : cs_(std::move(cs)), k_(k), aux_(std::move(aux)) {
        if (t_max < 0) {
            fail(ErrorKind::Validation, "t_max must be nonnegative");
        }
        const size_t d = size_t{1} << k;
        ConfigState st = embed_input(cs_, Operator::identity(d), aux_);
        steps_.push_back(st.columns);
        for (int t = 1; t <= t_max; t++) {
            std::vector<SparseVec<cplx>> next;
            for (const auto &col : steps_.back()) {
                next.push_back(cs_.step(col));
            }
            steps_.push_back(std::move(next));
        }
        for (int t = 0; t <= t_max; t++) {
            ConfigState s{steps_[static_cast<size_t>(t)], Matrix::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d))};
            final_gram_.push_back(s.gram([&](uint64_t i) { return cs_.is_final(i); }));
            total_gram_.push_back(s.gram());
        }
    }

    const ConfigSpace &space() const {
        return cs_;
    }
    int k() const {
        return k_;
    }
    int t_max() const {
        return static_cast<int>(steps_.size()) - 1;
    }
    size_t input_dim() const {
        return size_t{1} << k_;
    }
    const std::string &aux() const {
        return aux_;
    }

    /// V_t^* Pi_F V_t, indexed (b, a).
    const Matrix &final_gram(int t) const {
        return final_gram_.at(static_cast<size_t>(t));
    }
    const Matrix &total_gram(int t) const {
        return total_gram_.at(static_cast<size_t>(t));
    }

    ConfigState state(const Matrix &sigma, int t) const {
        check_sigma(sigma);
        return {steps_.at(static_cast<size_t>(t)), sigma};
    }

    HaltingProfile profile(const Matrix &sigma, double eta = kHaltEta) const {
        check_sigma(sigma);
        double tr = sigma.trace().real();
        if (tr <= 0) {
            return {std::nullopt, {}, "zero-trace input"};
        }
        std::vector<double> w;
        for (int t = 0; t <= t_max(); t++) {
            double v = (sigma * final_gram(t)).trace().real() / tr;
            w.push_back(v);
            if (v > eta) {
                break;
            }
        }
        return detail::classify_weights(std::move(w), eta);
    }

    IndeterminateState output(const Matrix &sigma, int t, int max_len) const {
        return extract_output(cs_, state(sigma, t), max_len);
    }

   private:
    void check_sigma(const Matrix &sigma) const {
        if (sigma.rows() != static_cast<Eigen::Index>(input_dim()) || sigma.cols() != sigma.rows()) {
            fail(ErrorKind::Validation, "input operator must act on Q_" + std::to_string(k_));
        }
    }

    ConfigSpace cs_;
    int k_;
    std::string aux_;
    std::vector<std::vector<SparseVec<cplx>>> steps_;
    std::vector<Matrix> final_gram_;
    std::vector<Matrix> total_gram_;
};

}  // namespace qtmlab
