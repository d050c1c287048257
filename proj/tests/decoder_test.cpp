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


#include <gtest/gtest.h>

#include "support.hpp"

using namespace qtmlab;
using namespace qtmlab::testing;

namespace {

Matrix basis_sigma(const std::string &x) {
    Matrix m = Matrix::Zero(Eigen::Index{1} << x.size(), Eigen::Index{1} << x.size());
    auto i = static_cast<Eigen::Index>(bits_index(x));
    m(i, i) = 1.0;
    return m;
}

/// Basis states plus (|a> + w|b>)/sqrt 2 for w in {1, -1, i, -i}.
std::vector<Vector> state_grid(int k) {
    const size_t d = size_t{1} << k;
    std::vector<Vector> out;
    for (size_t a = 0; a < d; a++) {
        out.push_back(Vector::Unit(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(a)));
    }
    const cplx phases[] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    for (size_t a = 0; a < d; a++) {
        for (size_t b = a + 1; b < d; b++) {
            for (auto w : phases) {
                Vector v = Vector::Zero(static_cast<Eigen::Index>(d));
                v(static_cast<Eigen::Index>(a)) = 1.0 / std::sqrt(2.0);
                v(static_cast<Eigen::Index>(b)) = w / std::sqrt(2.0);
                out.push_back(v);
            }
        }
    }
    return out;
}

/// Halting time by stepping the configuration state directly.
std::optional<int> direct_halting_time(const ConfigSpace &cs, const Matrix &sigma, int t_max) {
    return halting_profile(cs, embed_input(cs, Operator(sigma)), t_max).time;
}

/// Output by stepping the configuration state directly.
IndeterminateState direct_output(const ConfigSpace &cs, const Matrix &sigma, int t) {
    return extract_output(cs, evolve(cs, embed_input(cs, Operator(sigma)), t), cs.window());
}

size_t span_rank(const std::vector<Vector> &vs) {
    if (vs.empty()) {
        return 0;
    }
    Matrix m(vs.front().size(), static_cast<Eigen::Index>(vs.size()));
    for (size_t i = 0; i < vs.size(); i++) {
        m.col(static_cast<Eigen::Index>(i)) = vs[i];
    }
    Eigen::JacobiSVD<Matrix> svd(m);
    size_t r = 0;
    for (Eigen::Index i = 0; i < svd.singularValues().size(); i++) {
        r += svd.singularValues()(i) > 1e-8 ? 1 : 0;
    }
    return r;
}

Vector random_in(const HaltingProjection &hp, std::mt19937_64 &rng) {
    Vector v = Vector::Zero(static_cast<Eigen::Index>(hp.p.dim()));
    for (const auto &b : hp.basis) {
        v += random_vector(1, rng)(0) * b.coeffs();
    }
    return v.normalized();
}

const char *kMachines[] = {"id.qtm", "loop.qtm", "copy1.qtm", "branch1.qtm"};

}  // namespace

TEST(HaltingSubspace, IdentityRanks) {
    ConfigSpace cs(corpus_machine("id.qtm"));
    EXPECT_EQ(halting_subspace(cs, 1, 1, 4).rank, 2);
    EXPECT_EQ(halting_subspace(cs, 1, 2, 4).rank, 0);
}

TEST(HaltingSubspace, BranchRanksMatchGridOracle) {
    ConfigSpace cs(corpus_machine("branch1.qtm"));
    const int k = 2, t_max = 8;
    std::map<int, std::vector<Vector>> halting;
    for (const auto &v : state_grid(k)) {
        if (auto t = direct_halting_time(cs, v * v.adjoint(), t_max)) {
            halting[*t].push_back(v);
        }
    }
    Trajectory tr(cs, k, t_max);
    for (int t = 1; t <= t_max; t++) {
        auto hp = halting_subspace(tr, t);
        EXPECT_EQ(static_cast<size_t>(hp.rank), span_rank(halting[t])) << "t=" << t;
    }
    EXPECT_EQ(span_rank(halting[3]), 2u);
    EXPECT_EQ(span_rank(halting[5]), 2u);
}

TEST(HaltingSubspace, OutOfRangeTimeIsAnError) {
    ConfigSpace cs(corpus_machine("id.qtm"));
    Trajectory tr(cs, 1, 4);
    EXPECT_THROW(halting_subspace(tr, 0), Error);
    EXPECT_THROW(halting_subspace(tr, 5), Error);
}

TEST(EnumerateProjections, Examples) {
    ConfigSpace id(corpus_machine("id.qtm"));
    auto ps = enumerate_projections(Trajectory(id, 2, 8));
    ASSERT_EQ(ps.size(), 1u);
    EXPECT_EQ(ps[0].rank, 4);
    EXPECT_NEAR(check_enumeration(ps, 2).trace_sum, 4.0, 1e-9);

    ConfigSpace loop(corpus_machine("loop.qtm"));
    EXPECT_TRUE(enumerate_projections(Trajectory(loop, 2, 16)).empty());

    ConfigSpace br(corpus_machine("branch1.qtm"));
    auto c = check_enumeration(enumerate_projections(Trajectory(br, 2, 16)), 2);
    EXPECT_TRUE(c.within_bound);
}

TEST(EnumerateProjections, OrthogonalAcrossTimes) {
    for (const char *name : kMachines) {
        ConfigSpace cs(corpus_machine(name));
        for (int k = 1; k <= 3; k++) {
            auto c = check_enumeration(enumerate_projections(Trajectory(cs, k, 16)), k);
            EXPECT_TRUE(c.orthogonal) << name << " k=" << k;
            EXPECT_TRUE(c.within_bound) << name << " k=" << k;
        }
    }
}

TEST(EnumerateProjections, RandomMembersHaltAtTheirTime) {
    std::mt19937_64 rng(21);
    for (const char *name : {"copy1.qtm", "branch1.qtm"}) {
        ConfigSpace cs(corpus_machine(name));
        for (const auto &hp : enumerate_projections(Trajectory(cs, 2, 16))) {
            for (int s = 0; s < 100; s++) {
                Vector v = random_in(hp, rng);
                EXPECT_EQ(direct_halting_time(cs, v * v.adjoint(), 16), std::optional<int>(hp.t)) << name;
            }
        }
    }
}

TEST(EnumerateProjections, RandomNonMembersDoNotHalt) {
    std::mt19937_64 rng(22);
    ConfigSpace cs(corpus_machine("branch1.qtm"));
    Trajectory tr(cs, 2, 16);
    auto ps = enumerate_projections(tr);
    Matrix all = Matrix::Zero(4, 4);
    for (const auto &hp : ps) {
        all += hp.p.dense();
    }
    Matrix complement = Matrix::Identity(4, 4) - all;
    for (int s = 0; s < 50; s++) {
        Vector v = random_vector(4, rng);
        Vector w = complement * v;
        if (w.norm() < 1e-6) {
            continue;
        }
        w.normalize();
        EXPECT_FALSE(direct_halting_time(cs, w * w.adjoint(), 16).has_value());
    }
    // Generic inputs straddle two halting times.
    Vector g = random_vector(4, rng);
    auto prof = tr.profile(g * g.adjoint());
    EXPECT_FALSE(prof.time.has_value());
    EXPECT_FALSE(prof.diagnostic.empty());
}

TEST(EnumerateProjections, HaltingInputsAreDominated) {
    ConfigSpace cs(corpus_machine("copy1.qtm"));
    auto ps = enumerate_projections(Trajectory(cs, 3, 16));
    for (const auto &x : strings_up_to(3)) {
        if (x.size() != 3) {
            continue;
        }
        Matrix s = basis_sigma(x);
        auto t = direct_halting_time(cs, s, 16);
        ASSERT_TRUE(t.has_value());
        int i = dominating_projection(ps, Operator(s));
        ASSERT_GE(i, 0) << x;
        EXPECT_EQ(ps[static_cast<size_t>(i)].t, *t);
    }
}

TEST(TapeEmbed, AppendsBlankCells) {
    ConfigSpace cs(corpus_machine("id.qtm"), 3);
    ConfigState st = tape_embed(cs, Operator(basis_sigma("0")), 2);
    ConfigSpace ext = extended_space(cs, 2);
    EXPECT_EQ(ext.window(), 7);
    Config c;
    c.state = cs.machine().start;
    c.codes = {ext.tape_code("0######")};
    c.heads = {0};
    EXPECT_EQ(st.columns[0].front().first, ext.index(c));
}

TEST(TapeEmbed, TracePreservedAndZeroPaddingMatchesEmbed) {
    ConfigSpace cs(corpus_machine("copy1.qtm"), 3);
    std::mt19937_64 rng(23);
    Matrix s = random_density(4, 2, rng);
    EXPECT_NEAR(tape_embed(cs, Operator(s), 3).trace(), 1.0, 1e-12);
    ConfigState a = tape_embed(cs, Operator(s), 0);
    ConfigState b = embed_input(cs, Operator(s));
    EXPECT_EQ(max_abs(a.dense(cs) - b.dense(cs)), 0.0);
}

TEST(ApproximateUnitary, ExactMachineIsUnchanged) {
    ConfigSpace cs(corpus_machine("copy1.qtm"), 3);
    Matrix u = Matrix(*build_evolution(cs).sparse());
    Matrix ut = Matrix(*approximate_unitary(cs, Rational(1, 2)).sparse());
    EXPECT_EQ(max_abs(u - ut), 0.0);
}

TEST(ApproximateUnitary, DyadicRoundingWithinBudget) {
    std::mt19937_64 rng(24);
    QTMDef m = corpus_machine("branch1.qtm");
    ConfigSpace cs(m, 2);
    Matrix u = Matrix(*build_evolution(cs).sparse());
    for (Rational gamma : {Rational(1, 64), Rational(1)}) {
        RoundedMachine r = round_machine(m, gamma);
        EXPECT_LE(r.max_entry_error, r.entry_tolerance);
        EXPECT_LE(r.entry_tolerance, to_double(gamma) / (6.0 * r.support));
        Matrix ut = Matrix(*approximate_unitary(cs, gamma).sparse());
        for (int s = 0; s < 100; s++) {
            Matrix rho = random_density(static_cast<size_t>(u.rows()), 2, rng);
            double d = trace_distance(Matrix(u * rho * u.adjoint()), Matrix(ut * rho * ut.adjoint()));
            EXPECT_LT(d, to_double(gamma) / 3.0);
        }
    }
}

TEST(ApplyChannel, Examples) {
    ConfigSpace id(corpus_machine("id.qtm"));
    ApproxChannel ch(id, 1, 1, Rational(1, 4));
    auto out = apply_channel(ch, Operator(basis_sigma("0")));
    EXPECT_NEAR(out.element("0", "0").real(), 1.0, 1e-12);
    EXPECT_NEAR(out.trace(), 1.0, 1e-12);

    ConfigSpace loop(corpus_machine("loop.qtm"));
    ApproxChannel lch(loop, 1, 4, Rational(1, 4));
    auto lout = apply_channel(lch, Operator(basis_sigma("1")));
    EXPECT_NEAR(lout.element("", "").real(), 1.0, 1e-12);

    ConfigSpace copy(corpus_machine("copy1.qtm"));
    ApproxChannel cch(copy, 2, 1, Rational(1, 8));
    auto cout_ = apply_channel(cch, Operator(basis_sigma("01")));
    EXPECT_LE(trace_distance(cout_, direct_output(copy, basis_sigma("01"), 1)), 1.0 / 8);
    EXPECT_NEAR(cout_.element("01", "01").real(), 1.0, 1e-12);
}

TEST(ErrorCertificate, ExactMachineIsZero) {
    ConfigSpace cs(corpus_machine("copy1.qtm"));
    Trajectory tr(cs, 2, 8);
    auto hp = halting_subspace(tr, 3);
    ApproxChannel ch(cs, 2, 3, Rational(1, 8));
    auto c = error_certificate(ch, Operator(basis_sigma("10")), hp);
    EXPECT_EQ(c.distance, 0.0);
}

TEST(ErrorCertificate, FloatMachineWithinDeltaAndStepBounds) {
    std::mt19937_64 rng(25);
    ConfigSpace cs(corpus_machine("branch1.qtm"));
    Trajectory tr(cs, 2, 8);
    for (const auto &hp : enumerate_projections(tr)) {
        ApproxChannel ch(cs, 2, hp.t, Rational(1, 8));
        const double g = to_double(ch.gamma());
        for (int s = 0; s < 100; s++) {
            Vector v = random_in(hp, rng);
            auto c = error_certificate(ch, Operator(Matrix(v * v.adjoint())), hp);
            EXPECT_LE(c.distance, 1.0 / 8);
            for (size_t l = 0; l < c.step_errors.size(); l++) {
                EXPECT_LE(c.step_errors[l], g * static_cast<double>(l + 1) + kEpsNum);
            }
        }
    }
}

TEST(ErrorCertificate, RejectsUndominatedInput) {
    ConfigSpace cs(corpus_machine("branch1.qtm"));
    Trajectory tr(cs, 2, 8);
    auto hp = halting_subspace(tr, 3);
    ApproxChannel ch(cs, 2, 3, Rational(1, 8));
    EXPECT_THROW(error_certificate(ch, Operator(basis_sigma("00")), hp), Error);
}

TEST(Channel, OutputExtractionIsContractive) {
    std::mt19937_64 rng(26);
    ConfigSpace cs(corpus_machine("branch1.qtm"));
    Trajectory tr(cs, 2, 6);
    for (int s = 0; s < 50; s++) {
        Matrix a = random_density(4, 2, rng);
        Matrix b = random_density(4, 1, rng);
        int t = 1 + s % 6;
        double before = trace_distance(tr.state(a, t), tr.state(b, t));
        double after = trace_distance(tr.output(a, t, cs.window()), tr.output(b, t, cs.window()));
        EXPECT_LE(after, before + kEpsNum);
    }
}

TEST(Channel, OutputOfSemiDensityIsSemiDensity) {
    std::mt19937_64 rng(27);
    ConfigSpace cs(corpus_machine("branch1.qtm"));
    ApproxChannel ch(cs, 2, 5, Rational(1, 4));
    for (int s = 0; s < 20; s++) {
        Matrix sigma = random_density(4, 3, rng) * 0.7;
        auto out = ch.apply(Operator(sigma));
        EXPECT_LE(out.trace(), 0.7 + kEpsNum);
        EXPECT_GE(min_eigenvalue(out.matrix()), -kEpsNum);
    }
}

TEST(BuildO, Examples) {
    ConfigSpace id(corpus_machine("id.qtm"));
    auto os = build_O(id, 1, 64, 8);
    ASSERT_EQ(os.size(), 1u);
    EXPECT_NEAR(os[0].o.trace(), 2.0, 1e-9);
    ConfigSpace loop(corpus_machine("loop.qtm"));
    EXPECT_TRUE(build_O(loop, 1, 64, 16).empty());
    for (const char *name : kMachines) {
        ConfigSpace cs(corpus_machine(name));
        for (int k = 1; k <= 3; k++) {
            double tr = 0;
            for (const auto &o : build_O(cs, k, 1LL << (k + 5), 16)) {
                tr += o.o.trace();
            }
            EXPECT_LE(tr, std::ldexp(1.0, k) + kEpsNum) << name;
        }
    }
}

TEST(RestrictLength, BlocksOfIndeterminateStates) {
    auto s = IndeterminateState::pure(3, {{"1", cplx(0.6, 0)}, {"01", cplx(0.8, 0)}});
    Matrix b1 = restrict_length(s, 1).dense();
    EXPECT_NEAR(b1(1, 1).real(), 0.36, 1e-15);
    EXPECT_NEAR(b1(0, 0).real(), 0.0, 1e-15);
    EXPECT_NEAR(restrict_length(s, 2).dense()(1, 1).real(), 0.64, 1e-15);
    EXPECT_EQ(max_abs(restrict_length(s, 3).dense()), 0.0);
    std::mt19937_64 rng(28);
    for (int trial = 0; trial < 20; trial++) {
        std::vector<std::string> sup = strings_up_to(2);
        IndeterminateState r(2, sup, random_density(sup.size(), 3, rng));
        for (int ell = 0; ell <= 2; ell++) {
            EXPECT_LE(restrict_length(r, ell).trace().real(), r.trace() + kEpsNum);
        }
    }
}

TEST(CoverageTable, IdentityRows) {
    ConfigSpace cs(corpus_machine("id.qtm"));
    auto tab = coverage_table(cs, 1, 8, cs.window());
    ASSERT_EQ(tab.rows.size(), 2u);
    EXPECT_EQ(tab.rows[0].t, 1);
    EXPECT_EQ(tab.rows[0].ell, 1);
    EXPECT_EQ(tab.rows[0].y, "0");
    EXPECT_EQ(tab.rows[1].y, "1");
    EXPECT_NEAR(tab.rows[0].score, 1.0, 1e-9);
    EXPECT_NEAR(tab.rows[1].score, 1.0, 1e-9);
    EXPECT_EQ(tab.aux_mode, "parameter");
}

TEST(CoverageTable, NeverHaltingIsEmpty) {
    ConfigSpace cs(corpus_machine("loop.qtm"));
    EXPECT_TRUE(coverage_table(cs, 2, 16, cs.window()).rows.empty());
}

TEST(CoverageTable, RowsAreReachableAndClassicalOutputsCovered) {
    for (const char *name : {"copy1.qtm", "branch1.qtm", "id.qtm"}) {
        ConfigSpace cs(corpus_machine(name));
        for (int k = 1; k <= 3; k++) {
            auto tab = coverage_table(cs, k, 16, cs.window());
            const double j = std::ldexp(1.0, k + 5);
            EXPECT_LE(tab.rows.size(), size_t{1} << (k + 1)) << name;
            // Brute force over basis programs and pairwise superpositions.
            std::vector<std::pair<Matrix, int>> halting;
            for (const auto &v : state_grid(k)) {
                Matrix s = v * v.adjoint();
                if (auto t = direct_halting_time(cs, s, 16)) {
                    halting.emplace_back(s, *t);
                }
            }
            for (const auto &row : tab.rows) {
                bool reached = false;
                for (const auto &[s, t] : halting) {
                    auto out = direct_output(cs, s, t);
                    if (t == row.t && trace_distance(out, IndeterminateState::pure(cs.window(), {{row.y, 1.0}})) < 2.0 / j) {
                        reached = true;
                    }
                }
                EXPECT_TRUE(reached) << name << " k=" << k << " y=" << row.y;
            }
            for (size_t x = 0; x < (size_t{1} << k); x++) {
                Matrix s = basis_sigma(bits_string(k, x));
                auto t = direct_halting_time(cs, s, 16);
                if (!t) {
                    continue;
                }
                auto out = direct_output(cs, s, *t);
                for (const auto &y : out.support()) {
                    if (out.element(y, y).real() > 1.0 - 1e-12) {
                        bool found = std::any_of(tab.rows.begin(), tab.rows.end(), [&](const CoverageRow &r) { return r.y == y; });
                        EXPECT_TRUE(found) << name << " y=" << y;
                    }
                }
            }
        }
    }
}

TEST(CoverageTable, ScoresClearThreshold) {
    ConfigSpace cs(corpus_machine("branch1.qtm"));
    for (int k = 1; k <= 3; k++) {
        for (const auto &row : coverage_table(cs, k, 16, cs.window()).rows) {
            EXPECT_GE(row.score, 1.0 - std::ldexp(1.0, -k - 3) - kEpsNum);
        }
    }
}

TEST(Decode, IdentityOrderAndRoundTrip) {
    ConfigSpace id(corpus_machine("id.qtm"));
    EXPECT_EQ(decode(id, 1, 1, 8, id.window()), "0");
    EXPECT_EQ(decode(id, 1, 2, 8, id.window()), "1");
    EXPECT_THROW(decode(id, 1, 3, 8, id.window()), Error);
    ConfigSpace cs(corpus_machine("branch1.qtm"));
    auto tab = coverage_table(cs, 2, 16, cs.window());
    for (const auto &row : tab.rows) {
        bool found = false;
        for (long long b = 1; b <= static_cast<long long>(tab.rows.size()); b++) {
            found = found || decode(tab, b) == row.y;
        }
        EXPECT_TRUE(found) << row.y;
    }
}

TEST(NearOneCount, Examples) {
    auto full = near_one_count_check(Operator::identity(4), 2);
    EXPECT_EQ(full.count, 4u);
    EXPECT_LE(static_cast<double>(full.count), full.bound);
    EXPECT_EQ(near_one_count_check(Operator::zero(4), 2).count, 0u);
}

TEST(NearOneCount, RandomProjectionsNeverViolate) {
    std::mt19937_64 rng(29);
    for (int trial = 0; trial < 2000; trial++) {
        size_t d = size_t{1} << (1 + trial % 4);
        size_t m = static_cast<size_t>(rng() % (d + 1));
        Matrix p = m == 0 ? Matrix(Matrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d)))
                          : random_projection(d, m, rng);
        ASSERT_TRUE(near_one_count_check(Operator(p), 1 + trial % 3).holds) << trial;
    }
}
