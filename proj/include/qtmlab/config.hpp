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
#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "qtmlab/machine.hpp"

namespace qtmlab {

/// Sparse vector over configuration indices, sorted by index, no explicit zeros.
template <class Scalar>
using SparseVec = std::vector<std::pair<uint64_t, Scalar>>;

inline constexpr int kMaxWindow = 40;

struct Config {
    int state = 0;
    std::vector<uint64_t> codes;  // per tape, base-3 cell contents, cell 0 least significant
    std::vector<int> heads;
};

namespace detail {

inline bool is_zero_scalar(const cplx &z) {
    return z == cplx(0.0, 0.0);
}
inline bool is_zero_scalar(const ExactComplex &z) {
    return z.is_zero();
}
template <class Scalar>
Scalar branch_amplitude(const Branch &b);
template <>
inline cplx branch_amplitude<cplx>(const Branch &b) {
    return b.amp.value;
}
template <>
inline ExactComplex branch_amplitude<ExactComplex>(const Branch &b) {
    if (!b.amp.exact) {
        fail(ErrorKind::Validation, "exact evolution requires rational amplitudes");
    }
    return *b.amp.exact;
}

}  // namespace detail

/// Looped-tape configuration space of a machine. Index layout (mixed radix,
/// least significant first): state, then per tape (contents, head).
class ConfigSpace {
   public:
    ConfigSpace(std::shared_ptr<const QTMDef> machine, int window) : machine_(std::move(machine)), window_(window) {
        if (window_ < 1) {
            fail(ErrorKind::Validation, "window must be positive");
        }
        if (window_ > kMaxWindow) {
            fail(ErrorKind::Validation, "window " + std::to_string(window_) + " exceeds the memory budget (max " +
                                            std::to_string(kMaxWindow) + ")");
        }
        pow3_.assign(window_ + 1, 1);
        for (int i = 1; i <= window_; i++) {
            pow3_[i] = pow3_[i - 1] * 3;
        }
        unsigned __int128 d = static_cast<unsigned>(machine_->num_states());
        for (int t = 0; t < machine_->tapes; t++) {
            d *= static_cast<unsigned __int128>(pow3_[window_]) * static_cast<unsigned>(window_);
            if (d >= (static_cast<unsigned __int128>(1) << 62)) {
                fail(ErrorKind::Validation, "configuration space of window " + std::to_string(window_) +
                                                " exceeds the memory budget");
            }
        }
        dim_ = static_cast<uint64_t>(d);
    }
    ConfigSpace(const QTMDef &machine, int window) : ConfigSpace(std::make_shared<const QTMDef>(machine), window) {
    }
    explicit ConfigSpace(const QTMDef &machine) : ConfigSpace(machine, machine.window) {
    }

    const QTMDef &machine() const {
        return *machine_;
    }
    std::shared_ptr<const QTMDef> machine_ptr() const {
        return machine_;
    }
    int window() const {
        return window_;
    }
    uint64_t dim() const {
        return dim_;
    }
    uint64_t tape_codes() const {
        return pow3_[window_];
    }

    uint64_t index(const Config &c) const {
        uint64_t idx = 0;
        for (int t = machine_->tapes - 1; t >= 0; t--) {
            idx = idx * static_cast<uint64_t>(window_) + static_cast<uint64_t>(c.heads[t]);
            idx = idx * pow3_[window_] + c.codes[t];
        }
        return idx * static_cast<uint64_t>(machine_->num_states()) + static_cast<uint64_t>(c.state);
    }

    Config config(uint64_t idx) const {
        Config c;
        const auto nq = static_cast<uint64_t>(machine_->num_states());
        c.state = static_cast<int>(idx % nq);
        idx /= nq;
        for (int t = 0; t < machine_->tapes; t++) {
            c.codes.push_back(idx % pow3_[window_]);
            idx /= pow3_[window_];
            c.heads.push_back(static_cast<int>(idx % static_cast<uint64_t>(window_)));
            idx /= static_cast<uint64_t>(window_);
        }
        return c;
    }

    int state_of(uint64_t idx) const {
        return static_cast<int>(idx % static_cast<uint64_t>(machine_->num_states()));
    }
    bool is_final(uint64_t idx) const {
        return state_of(idx) == machine_->final_state;
    }

    int cell(uint64_t code, int pos) const {
        return static_cast<int>((code / pow3_[pos]) % 3);
    }
    uint64_t tape_code(const std::string &contents) const {
        if (static_cast<int>(contents.size()) > window_) {
            fail(ErrorKind::Validation, "tape contents longer than window");
        }
        uint64_t code = 0;
        for (int i = static_cast<int>(contents.size()) - 1; i >= 0; i--) {
            int s = symbol_code(contents[i]);
            if (s < 0) {
                fail(ErrorKind::Validation, "bad tape symbol");
            }
            code = code * 3 + static_cast<uint64_t>(s);
        }
        return code;
    }
    std::string tape_string(uint64_t code) const {
        std::string s;
        for (int i = 0; i < window_; i++) {
            s.push_back(symbol_char(cell(code, i)));
        }
        return s;
    }

    /// Human-readable form `(state, tape0@head0, ...)`.
    std::string describe(uint64_t idx) const {
        Config c = config(idx);
        std::string s = "(" + machine_->states[c.state];
        for (int t = 0; t < machine_->tapes; t++) {
            s += ", " + tape_string(c.codes[t]) + "@" + std::to_string(c.heads[t]);
        }
        return s + ")";
    }

    /// One application of the evolution operator to a sparse vector.
    template <class Scalar>
    SparseVec<Scalar> step(const SparseVec<Scalar> &v) const {
        const QTMDef &m = *machine_;
        std::vector<std::pair<uint64_t, Scalar>> out;
        out.reserve(v.size() * 2);
        std::vector<int> syms(m.tapes);
        for (const auto &[idx, a] : v) {
            Config c = config(idx);
            for (int t = 0; t < m.tapes; t++) {
                syms[t] = cell(c.codes[t], c.heads[t]);
            }
            size_t key = m.read_key(c.state, syms);
            if (!m.defined[key]) {
                fail(ErrorKind::Validation, "missing rule for configuration " + describe(idx));
            }
            for (const auto &b : m.table[key]) {
                Config n = c;
                n.state = b.target;
                for (int t = 0; t < m.tapes; t++) {
                    const uint64_t p = pow3_[c.heads[t]];
                    n.codes[t] = c.codes[t] - static_cast<uint64_t>(syms[t]) * p + static_cast<uint64_t>(b.write[t]) * p;
                    n.heads[t] = (c.heads[t] + b.moves[t] + window_) % window_;
                }
                out.emplace_back(index(n), a * detail::branch_amplitude<Scalar>(b));
            }
        }
        std::stable_sort(out.begin(), out.end(), [](const auto &x, const auto &y) { return x.first < y.first; });
        SparseVec<Scalar> merged;
        for (auto &e : out) {
            if (!merged.empty() && merged.back().first == e.first) {
                merged.back().second += e.second;
            } else {
                if (!merged.empty() && detail::is_zero_scalar(merged.back().second)) {
                    merged.pop_back();
                }
                merged.push_back(std::move(e));
            }
        }
        if (!merged.empty() && detail::is_zero_scalar(merged.back().second)) {
            merged.pop_back();
        }
        return merged;
    }

   private:
    std::shared_ptr<const QTMDef> machine_;
    int window_;
    std::vector<uint64_t> pow3_;
    uint64_t dim_ = 0;
};

/// <a|b> for sorted sparse vectors.
inline cplx sparse_dot(const SparseVec<cplx> &a, const SparseVec<cplx> &b) {
    cplx s = 0;
    size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i].first < b[j].first) {
            i++;
        } else if (a[i].first > b[j].first) {
            j++;
        } else {
            s += std::conj(a[i].second) * b[j].second;
            i++;
            j++;
        }
    }
    return s;
}

}  // namespace qtmlab
