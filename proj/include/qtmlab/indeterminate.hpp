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
#include <map>
#include <string>
#include <vector>

#include "qtmlab/linalg.hpp"

namespace qtmlab {

/// Index of a bit string inside Q_n (first character most significant).
inline size_t bits_index(const std::string &s) {
    size_t v = 0;
    for (char c : s) {
        if (c != '0' && c != '1') {
            fail(ErrorKind::Validation, "not a bit string: '" + s + "'");
        }
        v = (v << 1) | static_cast<size_t>(c == '1');
    }
    return v;
}

inline std::string bits_string(int n, size_t index) {
    std::string s(static_cast<size_t>(n), '0');
    for (int i = n - 1; i >= 0; i--) {
        s[static_cast<size_t>(i)] = (index & 1) ? '1' : '0';
        index >>= 1;
    }
    return s;
}

/// Shortlex order: by length, then lexicographic.
inline bool shortlex_less(const std::string &a, const std::string &b) {
    return a.size() != b.size() ? a.size() < b.size() : a < b;
}

/// All bit strings of length <= n in shortlex order.
inline std::vector<std::string> strings_up_to(int n) {
    std::vector<std::string> out;
    for (int len = 0; len <= n; len++) {
        for (size_t i = 0; i < (size_t{1} << len); i++) {
            out.push_back(bits_string(len, i));
        }
    }
    return out;
}

/// Operator on the indeterminate-length space Q_0 + Q_1 + ... + Q_max_len,
/// stored on its support: `rho` is expressed in the basis `support`
/// (shortlex-sorted strings); every other basis string carries zero.
class IndeterminateState {
   public:
    IndeterminateState() = default;
    IndeterminateState(int max_len, std::vector<std::string> support, Matrix rho)
        : max_len_(max_len), support_(std::move(support)), rho_(std::move(rho)) {
        if (!std::is_sorted(support_.begin(), support_.end(), shortlex_less)) {
            fail(ErrorKind::Validation, "support must be shortlex sorted");
        }
        for (const auto &s : support_) {
            if (static_cast<int>(s.size()) > max_len_) {
                fail(ErrorKind::Validation, "output string '" + s + "' longer than max_len " + std::to_string(max_len_));
            }
        }
        if (rho_.rows() != static_cast<Eigen::Index>(support_.size()) || rho_.cols() != rho_.rows()) {
            fail(ErrorKind::Validation, "support/matrix size mismatch");
        }
    }

    /// A single pure state sum_s amp_s |s>.
    static IndeterminateState pure(int max_len, std::vector<std::pair<std::string, cplx>> amps) {
        std::sort(amps.begin(), amps.end(), [](const auto &a, const auto &b) { return shortlex_less(a.first, b.first); });
        std::vector<std::string> sup;
        Vector v(static_cast<Eigen::Index>(amps.size()));
        Eigen::Index i = 0;
        for (const auto &[s, a] : amps) {
            sup.push_back(s);
            v(i++) = a;
        }
        return {max_len, std::move(sup), v * v.adjoint()};
    }
    static IndeterminateState zero(int max_len) {
        return {max_len, {}, Matrix(0, 0)};
    }

    int max_len() const {
        return max_len_;
    }
    const std::vector<std::string> &support() const {
        return support_;
    }
    const Matrix &matrix() const {
        return rho_;
    }
    double trace() const {
        return rho_.trace().real();
    }

    /// <a|rho|b> for basis strings a, b.
    cplx element(const std::string &a, const std::string &b) const {
        auto ia = find(a);
        auto ib = find(b);
        if (ia < 0 || ib < 0) {
            return 0;
        }
        return rho_(ia, ib);
    }

    /// Same operator expressed over a larger (sorted) support.
    Matrix embedded(const std::vector<std::string> &basis) const {
        Matrix m = Matrix::Zero(static_cast<Eigen::Index>(basis.size()), static_cast<Eigen::Index>(basis.size()));
        std::vector<Eigen::Index> pos(support_.size());
        for (size_t i = 0; i < support_.size(); i++) {
            auto it = std::lower_bound(basis.begin(), basis.end(), support_[i], shortlex_less);
            if (it == basis.end() || *it != support_[i]) {
                fail(ErrorKind::Validation, "embedding basis does not contain '" + support_[i] + "'");
            }
            pos[i] = it - basis.begin();
        }
        for (size_t i = 0; i < support_.size(); i++) {
            for (size_t j = 0; j < support_.size(); j++) {
                m(pos[i], pos[j]) = rho_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            }
        }
        return m;
    }

    /// The Q_ell diagonal block as a dense 2^ell operator.
    Operator block(int ell) const {
        if (ell < 0 || ell > max_len_) {
            fail(ErrorKind::Validation, "length " + std::to_string(ell) + " out of range");
        }
        if (ell > 20) {
            fail(ErrorKind::Validation, "block too large to densify");
        }
        const size_t d = size_t{1} << ell;
        Matrix m = Matrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
        for (size_t i = 0; i < support_.size(); i++) {
            if (static_cast<int>(support_[i].size()) != ell) {
                continue;
            }
            for (size_t j = 0; j < support_.size(); j++) {
                if (static_cast<int>(support_[j].size()) != ell) {
                    continue;
                }
                m(static_cast<Eigen::Index>(bits_index(support_[i])), static_cast<Eigen::Index>(bits_index(support_[j]))) =
                    rho_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            }
        }
        return Operator(std::move(m));
    }

    /// Q_ell block restricted to the support strings of length ell.
    IndeterminateState restricted(int ell) const {
        std::vector<std::string> sup;
        std::vector<Eigen::Index> idx;
        for (size_t i = 0; i < support_.size(); i++) {
            if (static_cast<int>(support_[i].size()) == ell) {
                sup.push_back(support_[i]);
                idx.push_back(static_cast<Eigen::Index>(i));
            }
        }
        Matrix m(static_cast<Eigen::Index>(idx.size()), static_cast<Eigen::Index>(idx.size()));
        for (size_t i = 0; i < idx.size(); i++) {
            for (size_t j = 0; j < idx.size(); j++) {
                m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rho_(idx[i], idx[j]);
            }
        }
        return {max_len_, std::move(sup), std::move(m)};
    }

    /// Dense operator over the whole space (dimension 2^(max_len+1) - 1).
    Operator full() const {
        if (max_len_ > 12) {
            fail(ErrorKind::Validation, "indeterminate space too large to densify");
        }
        return Operator(embedded_all());
    }

    friend IndeterminateState operator+(const IndeterminateState &a, const IndeterminateState &b) {
        auto basis = merged_support(a, b);
        return {std::max(a.max_len_, b.max_len_), basis, a.embedded(basis) + b.embedded(basis)};
    }
    IndeterminateState scaled(double w) const {
        return {max_len_, support_, rho_ * w};
    }

    static std::vector<std::string> merged_support(const IndeterminateState &a, const IndeterminateState &b) {
        std::vector<std::string> basis;
        std::set_union(a.support_.begin(), a.support_.end(), b.support_.begin(), b.support_.end(),
                       std::back_inserter(basis), shortlex_less);
        return basis;
    }

   private:
    Eigen::Index find(const std::string &s) const {
        auto it = std::lower_bound(support_.begin(), support_.end(), s, shortlex_less);
        if (it == support_.end() || *it != s) {
            return -1;
        }
        return it - support_.begin();
    }
    Matrix embedded_all() const {
        return embedded(strings_up_to(max_len_));
    }

    int max_len_ = 0;
    std::vector<std::string> support_;
    Matrix rho_;
};

inline double trace_distance(const IndeterminateState &a, const IndeterminateState &b) {
    auto basis = IndeterminateState::merged_support(a, b);
    if (basis.empty()) {
        return 0.0;
    }
    return trace_distance(a.embedded(basis), b.embedded(basis));
}

inline bool psd_leq(const IndeterminateState &a, const IndeterminateState &b, double eps = kEpsNum) {
    auto basis = IndeterminateState::merged_support(a, b);
    if (basis.empty()) {
        return true;
    }
    return min_eigenvalue(b.embedded(basis) - a.embedded(basis)) >= -eps;
}

}  // namespace qtmlab
