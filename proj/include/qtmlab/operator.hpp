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

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <complex>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "qtmlab/error.hpp"
#include "qtmlab/exact.hpp"

namespace qtmlab {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using SparseMatrix = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;

/// Dense row-major matrix of Gaussian rationals.
struct ExactMatrix {
    size_t dim = 0;
    std::vector<ExactComplex> data;

    ExactMatrix() = default;
    explicit ExactMatrix(size_t n) : dim(n), data(n * n) {
    }
    static ExactMatrix identity(size_t n) {
        ExactMatrix m(n);
        for (size_t i = 0; i < n; i++) {
            m.at(i, i) = ExactComplex(1);
        }
        return m;
    }

    ExactComplex &at(size_t r, size_t c) {
        return data[r * dim + c];
    }
    const ExactComplex &at(size_t r, size_t c) const {
        return data[r * dim + c];
    }

    ExactMatrix adjoint() const {
        ExactMatrix m(dim);
        for (size_t r = 0; r < dim; r++) {
            for (size_t c = 0; c < dim; c++) {
                m.at(c, r) = at(r, c).conj();
            }
        }
        return m;
    }
    ExactComplex trace() const {
        ExactComplex t;
        for (size_t i = 0; i < dim; i++) {
            t += at(i, i);
        }
        return t;
    }
    bool is_diagonal() const {
        for (size_t r = 0; r < dim; r++) {
            for (size_t c = 0; c < dim; c++) {
                if (r != c && !at(r, c).is_zero()) {
                    return false;
                }
            }
        }
        return true;
    }
    Matrix shadow() const {
        Matrix m(dim, dim);
        for (size_t r = 0; r < dim; r++) {
            for (size_t c = 0; c < dim; c++) {
                m(r, c) = at(r, c).value();
            }
        }
        return m;
    }

    friend ExactMatrix operator+(const ExactMatrix &a, const ExactMatrix &b) {
        ExactMatrix m(a.dim);
        for (size_t i = 0; i < a.data.size(); i++) {
            m.data[i] = a.data[i] + b.data[i];
        }
        return m;
    }
    friend ExactMatrix operator-(const ExactMatrix &a, const ExactMatrix &b) {
        ExactMatrix m(a.dim);
        for (size_t i = 0; i < a.data.size(); i++) {
            m.data[i] = a.data[i] - b.data[i];
        }
        return m;
    }
    friend ExactMatrix operator*(const ExactMatrix &a, const ExactMatrix &b) {
        ExactMatrix m(a.dim);
        for (size_t r = 0; r < a.dim; r++) {
            for (size_t k = 0; k < a.dim; k++) {
                const auto &x = a.at(r, k);
                if (x.is_zero()) {
                    continue;
                }
                for (size_t c = 0; c < a.dim; c++) {
                    if (!b.at(k, c).is_zero()) {
                        m.at(r, c) += x * b.at(k, c);
                    }
                }
            }
        }
        return m;
    }
    friend bool operator==(const ExactMatrix &a, const ExactMatrix &b) {
        return a.dim == b.dim && a.data == b.data;
    }
};

enum class Tri { Unknown, Yes, No };

struct OperatorFlags {
    Tri hermitian = Tri::Unknown;
    Tri psd = Tri::Unknown;
    Tri projection = Tri::Unknown;
    Tri trace_bounded_by_one = Tri::Unknown;
};

enum class Backend { Float, Exact };

/// Square complex operator in one of three layouts: dense float, sparse float,
/// or dense exact. Immutable after construction apart from flag annotation.
class Operator {
   public:
    Operator() : entries_(Matrix(0, 0)) {
    }
    explicit Operator(Matrix m) : entries_(std::move(m)) {
        if (std::get<Matrix>(entries_).rows() != std::get<Matrix>(entries_).cols()) {
            fail(ErrorKind::Validation, "operator must be square");
        }
    }
    explicit Operator(SparseMatrix m) : entries_(std::move(m)) {
        if (std::get<SparseMatrix>(entries_).rows() != std::get<SparseMatrix>(entries_).cols()) {
            fail(ErrorKind::Validation, "operator must be square");
        }
    }
    explicit Operator(ExactMatrix m) : entries_(std::move(m)) {
    }

    static Operator zero(size_t dim) {
        return Operator(Matrix(Matrix::Zero(dim, dim)));
    }
    static Operator identity(size_t dim) {
        return Operator(Matrix(Matrix::Identity(dim, dim)));
    }

    size_t dim() const {
        return std::visit(
            [](const auto &m) -> size_t {
                if constexpr (std::is_same_v<std::decay_t<decltype(m)>, ExactMatrix>) {
                    return m.dim;
                } else {
                    return static_cast<size_t>(m.rows());
                }
            },
            entries_);
    }
    Backend backend() const {
        return std::holds_alternative<ExactMatrix>(entries_) ? Backend::Exact : Backend::Float;
    }
    bool is_sparse() const {
        return std::holds_alternative<SparseMatrix>(entries_);
    }

    /// Float view (exact entries are replaced by their shadows).
    Matrix dense() const {
        if (auto *m = std::get_if<Matrix>(&entries_)) {
            return *m;
        }
        if (auto *s = std::get_if<SparseMatrix>(&entries_)) {
            return Matrix(*s);
        }
        return std::get<ExactMatrix>(entries_).shadow();
    }
    const ExactMatrix *exact() const {
        return std::get_if<ExactMatrix>(&entries_);
    }
    const SparseMatrix *sparse() const {
        return std::get_if<SparseMatrix>(&entries_);
    }

    cplx trace() const {
        if (auto *e = exact()) {
            return e->trace().value();
        }
        if (auto *s = sparse()) {
            cplx t = 0;
            for (Eigen::Index i = 0; i < s->rows(); i++) {
                t += s->coeff(i, i);
            }
            return t;
        }
        return std::get<Matrix>(entries_).trace();
    }

    OperatorFlags flags;

   private:
    std::variant<Matrix, SparseMatrix, ExactMatrix> entries_;
};

/// Unit vector in a finite space.
class PureState {
   public:
    PureState() = default;
    explicit PureState(Vector coeffs, double eps = kEpsNum) : coeffs_(std::move(coeffs)) {
        if (coeffs_.size() == 0) {
            fail(ErrorKind::Validation, "pure state must have positive dimension");
        }
        if (std::abs(coeffs_.squaredNorm() - 1.0) > eps) {
            fail(ErrorKind::Validation, "pure state is not normalized");
        }
    }
    static PureState basis(size_t dim, size_t index) {
        Vector v = Vector::Zero(dim);
        v(index) = 1.0;
        return PureState(std::move(v));
    }

    size_t dim() const {
        return static_cast<size_t>(coeffs_.size());
    }
    const Vector &coeffs() const {
        return coeffs_;
    }
    Matrix projector() const {
        return coeffs_ * coeffs_.adjoint();
    }
    Operator density() const {
        Operator op(projector());
        op.flags = {Tri::Yes, Tri::Yes, Tri::Yes, Tri::Yes};
        return op;
    }

   private:
    Vector coeffs_;
};

inline std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v == 0.0 ? 0.0 : v);
    return buf;
}

/// Writes the textual matrix format: `op <dim> <backend>` then one
/// `entry <row> <col> <re> <im>` line per nonzero entry, row-major.
inline void write_operator(std::ostream &out, const Operator &op) {
    out << "op " << op.dim() << " " << (op.backend() == Backend::Exact ? "exact" : "float") << "\n";
    if (auto *e = op.exact()) {
        for (size_t r = 0; r < e->dim; r++) {
            for (size_t c = 0; c < e->dim; c++) {
                const auto &z = e->at(r, c);
                if (!z.is_zero()) {
                    out << "entry " << r << " " << c << " " << rational_text(z.re()) << " "
                        << rational_text(z.im()) << "\n";
                }
            }
        }
        return;
    }
    Matrix m = op.dense();
    for (Eigen::Index r = 0; r < m.rows(); r++) {
        for (Eigen::Index c = 0; c < m.cols(); c++) {
            cplx z = m(r, c);
            if (z != cplx(0, 0)) {
                out << "entry " << r << " " << c << " " << format_real(z.real()) << " "
                    << format_real(z.imag()) << "\n";
            }
        }
    }
}

inline std::string operator_text(const Operator &op) {
    std::ostringstream ss;
    write_operator(ss, op);
    return ss.str();
}

inline Operator read_operator(std::istream &in) {
    std::string line;
    size_t lineno = 0;
    auto perr = [&](const std::string &msg) {
        fail(ErrorKind::Parse, "operator line " + std::to_string(lineno) + ": " + msg);
    };
    size_t dim = 0;
    bool exact = false;
    bool header = false;
    Matrix fm;
    ExactMatrix em;
    while (std::getline(in, line)) {
        lineno++;
        std::istringstream ls(line);
        std::string word;
        if (!(ls >> word)) {
            continue;
        }
        if (!header) {
            std::string backend;
            if (word != "op" || !(ls >> dim >> backend) || dim == 0) {
                perr("expected 'op <dim> <backend>'");
            }
            if (backend == "exact") {
                exact = true;
                em = ExactMatrix(dim);
            } else if (backend == "float") {
                fm = Matrix::Zero(dim, dim);
            } else {
                perr("unknown backend '" + backend + "'");
            }
            header = true;
            continue;
        }
        if (word != "entry") {
            perr("expected 'entry'");
        }
        size_t r, c;
        std::string re, im;
        if (!(ls >> r >> c >> re >> im) || r >= dim || c >= dim) {
            perr("malformed entry");
        }
        if (exact) {
            auto a = parse_rational(re);
            auto b = parse_rational(im);
            if (!a || !b) {
                perr("non-rational entry in exact operator");
            }
            em.at(r, c) = ExactComplex(*a, *b);
        } else {
            auto num = [&](const std::string &s) {
                if (s.find('/') != std::string::npos) {
                    auto q = parse_rational(s);
                    if (!q) {
                        perr("bad number '" + s + "'");
                    }
                    return to_double(*q);
                }
                char *end = nullptr;
                double v = std::strtod(s.c_str(), &end);
                if (end == s.c_str() || *end != '\0') {
                    perr("bad number '" + s + "'");
                }
                return v;
            };
            fm(r, c) = cplx(num(re), num(im));
        }
    }
    if (!header) {
        fail(ErrorKind::Parse, "operator: missing header");
    }
    return exact ? Operator(std::move(em)) : Operator(std::move(fm));
}

}  // namespace qtmlab
