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

#include <boost/version.hpp>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "qtmlab/prefix_chain.hpp"

namespace qtmlab::cli {

inline constexpr const char *kVersion = "0.1.0";

struct RunConfig {
    std::vector<std::string> machines;
    std::optional<int> k;
    int t_max = 16;
    std::optional<int> window;
    double eta = kHaltEta;
    std::optional<std::string> delta;
    std::optional<long long> j;
    std::optional<int> t;
    std::optional<int> ell_max;
    std::string dict = "basic";
    int dict_k_max = 4;
    int k_max = 3;
    int max_program_len = 8;
    int prefix_program_len = 12;
    std::string corpus;
    std::string classical;
    std::string quantum;
    std::string prefix;
    std::string mix;
    std::optional<std::string> x;
    std::optional<long long> b;
    std::optional<std::string> input;
    std::string state_file;
    size_t steps = 100;
    bool check_domination = false;
    int samples = 10;
    uint64_t seed = 1;
    Backend backend = Backend::Float;
    std::optional<int> expect_gap;
    std::optional<int> expect_c_dec;
    int threads = 1;
    std::string out;
};

inline int exit_code(ErrorKind k) {
    switch (k) {
        case ErrorKind::Validation:
            return 3;
        case ErrorKind::Bound:
            return 4;
        default:
            return 2;
    }
}

/// Report sink that tracks failed CHECK lines.
class Report {
   public:
    explicit Report(std::ostream &out) : out_(out) {
    }
    std::ostream &out() {
        return out_;
    }
    void check(const std::string &name, bool pass, const std::string &value, const std::string &bound,
               ErrorKind kind = ErrorKind::Bound) {
        out_ << "CHECK " << name << (pass ? " PASS " : " FAIL ") << value << " " << bound << "\n";
        if (!pass && !failure_) {
            failure_ = std::make_pair(kind, name);
        }
    }
    void check(const std::string &name, bool pass, double value, double bound, ErrorKind kind = ErrorKind::Bound) {
        check(name, pass, format_real(value), format_real(bound), kind);
    }
    /// Throws for the first failed check.
    void finish() const {
        if (failure_) {
            fail(failure_->first, "check failed: " + failure_->second);
        }
    }

   private:
    std::ostream &out_;
    std::optional<std::pair<ErrorKind, std::string>> failure_;
};

inline QTMDef load_machine(const std::string &path, Backend backend) {
    return parse_machine(slurp_file(path), backend);
}

inline const std::string &single_machine(const RunConfig &cfg) {
    if (cfg.machines.size() != 1) {
        fail(ErrorKind::Usage, "exactly one --machine is required");
    }
    return cfg.machines.front();
}

inline int require_k(const RunConfig &cfg) {
    if (!cfg.k) {
        fail(ErrorKind::Usage, "--k is required");
    }
    return *cfg.k;
}

inline std::vector<std::string> read_corpus(const std::string &path) {
    std::vector<std::string> out;
    std::istringstream in(slurp_file(path));
    for (std::string line; std::getline(in, line);) {
        line = line.substr(0, line.find("//"));
        std::istringstream words(line);
        for (std::string w; words >> w;) {
            out.push_back(word_parse(w));
        }
    }
    return out;
}

inline Dictionary make_dictionary(const RunConfig &cfg) {
    if (cfg.dict == "basic") {
        return basic_dictionary(cfg.dict_k_max);
    }
    Dictionary d = basic_dictionary(cfg.dict_k_max);
    add_states(d, slurp_file(cfg.dict));
    d.name += "+" + std::filesystem::path(cfg.dict).filename().string();
    return d;
}

inline std::string opt_int(const std::optional<int> &v) {
    return v ? std::to_string(*v) : "-";
}

inline void validate_config(const RunConfig &cfg) {
    auto positive = [](bool ok, const char *what) {
        if (!ok) {
            fail(ErrorKind::Usage, std::string(what) + " must be positive");
        }
    };
    positive(cfg.t_max >= 1, "--t-max");
    positive(!cfg.window || *cfg.window >= 1, "--window");
    positive(cfg.eta > 0, "--eta");
    positive(cfg.samples >= 1, "--samples");
    positive(cfg.steps >= 1, "--steps");
    positive(cfg.threads >= 1, "--threads");
    positive(cfg.dict_k_max >= 0, "--dict-k-max");
    positive(cfg.k_max >= 1, "--k-max");
    if (cfg.k && *cfg.k < 0) {
        fail(ErrorKind::Usage, "--k must be nonnegative");
    }
    if (cfg.delta && cfg.j) {
        fail(ErrorKind::Usage, "conflicting flags: --delta and --j");
    }
    if (cfg.input && !cfg.state_file.empty()) {
        fail(ErrorKind::Usage, "conflicting flags: --input and --state");
    }
    if (cfg.x && !cfg.corpus.empty()) {
        fail(ErrorKind::Usage, "conflicting flags: --x and --corpus");
    }
}

inline ConfigSpace make_space(const RunConfig &cfg, const QTMDef &m) {
    return ConfigSpace(m, cfg.window.value_or(m.window));
}

// --------------------------------------------------------------------------

inline void cmd_validate(const RunConfig &cfg, Report &rep) {
    if (cfg.machines.empty()) {
        fail(ErrorKind::Usage, "--machine is required");
    }
    for (const auto &path : cfg.machines) {
        QTMDef m = load_machine(path, cfg.backend);
        ConfigSpace cs = make_space(cfg, m);
        rep.out() << "machine " << m.name << " tapes " << m.tapes << " window " << cs.window() << " states "
                  << m.states.size() << " dim " << cs.dim() << " backend "
                  << (cfg.backend == Backend::Exact ? "exact" : "float") << "\n";
        auto w = wellformed_check(cs);
        rep.check("wellformed[" + m.name + "]", w.pass, w.unitary_defect, kEpsNum, ErrorKind::Validation);
        if (cfg.backend == Backend::Exact) {
            bool ok = exact_unitary(cs);
            rep.check("exact-unitary[" + m.name + "]", ok, ok ? "0" : "1", "0", ErrorKind::Validation);
        }
    }
}

inline void cmd_evolve(const RunConfig &cfg, Report &rep) {
    QTMDef m = load_machine(single_machine(cfg), cfg.backend);
    ConfigSpace cs = make_space(cfg, m);
    Matrix sigma;
    std::string label;
    if (cfg.input) {
        std::string x = word_parse(*cfg.input);
        sigma = Matrix::Zero(Eigen::Index{1} << x.size(), Eigen::Index{1} << x.size());
        auto i = static_cast<Eigen::Index>(bits_index(x));
        sigma(i, i) = 1.0;
        label = word_text(x);
    } else if (!cfg.state_file.empty()) {
        LowerComputation lc = parse_stream(slurp_file(cfg.state_file));
        if (lc.terms.empty()) {
            fail(ErrorKind::Validation, "state file has no terms");
        }
        IndeterminateState s = accumulate(lc, lc.terms.size());
        const int n = lc.terms.front().n;
        for (const auto &t : lc.terms) {
            if (t.n != n) {
                fail(ErrorKind::Validation, "state file mixes qubit counts");
            }
        }
        sigma = s.block(n).dense();
        label = std::filesystem::path(cfg.state_file).filename().string();
    } else {
        fail(ErrorKind::Usage, "--input or --state is required");
    }
    const int k = static_cast<int>(std::log2(static_cast<double>(sigma.rows())) + 0.5);
    Trajectory tr(cs, k, cfg.t_max);
    auto prof = tr.profile(sigma, cfg.eta);
    rep.out() << "machine " << m.name << " input " << label << " k " << k << " t_max " << cfg.t_max << "\n";
    for (size_t t = 0; t < prof.final_weights.size(); t++) {
        rep.out() << "final-weight t " << t << " " << format_real(prof.final_weights[t]) << "\n";
    }
    rep.out() << "halting " << opt_int(prof.time);
    if (!prof.diagnostic.empty()) {
        rep.out() << " diagnostic " << prof.diagnostic;
    }
    rep.out() << "\n";
    if (prof.time) {
        auto out = tr.output(sigma, *prof.time, cs.window());
        const auto &sup = out.support();
        for (size_t a = 0; a < sup.size(); a++) {
            for (size_t b = 0; b < sup.size(); b++) {
                cplx v = out.matrix()(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
                if (std::abs(v) > kEpsNum) {
                    rep.out() << "output " << word_text(sup[a]) << " " << word_text(sup[b]) << " "
                              << format_real(v.real()) << " " << format_real(v.imag()) << "\n";
                }
            }
        }
    }
}

inline void cmd_halting(const RunConfig &cfg, Report &rep) {
    QTMDef m = load_machine(single_machine(cfg), cfg.backend);
    ConfigSpace cs = make_space(cfg, m);
    const int k = require_k(cfg);
    Trajectory tr(cs, k, cfg.t_max);
    auto ps = enumerate_projections(tr);
    rep.out() << "machine " << m.name << " k " << k << " t_max " << cfg.t_max << "\n";
    for (const auto &p : ps) {
        rep.out() << "projection t " << p.t << " rank " << p.rank << " trace " << format_real(p.p.trace().real())
                  << "\n";
    }
    auto chk = check_enumeration(ps, k);
    rep.check("orthogonality[" + m.name + ",k=" + std::to_string(k) + "]", chk.orthogonal, chk.max_overlap, kEpsNum);
    rep.check("trace-sum[" + m.name + ",k=" + std::to_string(k) + "]", chk.within_bound, chk.trace_sum,
              chk.trace_bound);
}

inline Rational config_delta(const RunConfig &cfg) {
    std::string text = cfg.delta.value_or("1/4");
    auto r = parse_rational(text);
    if (!r) {
        fail(ErrorKind::Usage, "--delta must be a rational, got '" + text + "'");
    }
    return *r;
}

/// Haar-like random pure state inside span(basis).
inline Matrix random_state_in(const std::vector<PureState> &basis, std::mt19937_64 &rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Vector v = Vector::Zero(static_cast<Eigen::Index>(basis.front().dim()));
    for (const auto &b : basis) {
        double re = g(rng);
        double im = g(rng);
        v += cplx(re, im) * b.coeffs();
    }
    v.normalize();
    return v * v.adjoint();
}

inline void cmd_approx(const RunConfig &cfg, Report &rep) {
    QTMDef m = load_machine(single_machine(cfg), cfg.backend);
    ConfigSpace cs = make_space(cfg, m);
    const int k = require_k(cfg);
    const Rational delta = config_delta(cfg);
    Trajectory tr(cs, k, cfg.t_max);
    std::mt19937_64 rng(cfg.seed);
    rep.out() << "machine " << m.name << " k " << k << " delta " << rational_text(delta) << " samples "
              << cfg.samples << " seed " << cfg.seed << "\n";
    for (const auto &hp : enumerate_projections(tr)) {
        if (cfg.t && hp.t != *cfg.t) {
            continue;
        }
        ApproxChannel ch(cs, k, hp.t, delta);
        const auto &r = ch.rounding();
        rep.out() << "channel t " << hp.t << " gamma " << rational_text(ch.gamma()) << " precision-bits "
                  << r.precision_bits << " round-budget " << format_real(r.round_budget) << " max-entry-error "
                  << format_real(r.max_entry_error) << " window " << ch.window_ext() << " unitary-defect "
                  << format_real(ch.unitary_defect()) << "\n";
        double worst = 0, worst_excess = -1e300;
        bool within = true, steps_ok = true;
        for (int s = 0; s < cfg.samples; s++) {
            Operator sigma(random_state_in(hp.basis, rng));
            auto cert = error_certificate(ch, sigma, hp);
            worst = std::max(worst, cert.distance);
            for (size_t l = 0; l < cert.step_errors.size(); l++) {
                worst_excess = std::max(worst_excess, cert.step_errors[l] - cert.step_bounds[l]);
            }
            within = within && cert.within_delta;
            steps_ok = steps_ok && cert.steps_within_bounds;
        }
        const std::string tag = "[" + m.name + ",k=" + std::to_string(k) + ",t=" + std::to_string(hp.t) + "]";
        rep.check("certificate" + tag, within, worst, to_double(delta));
        rep.check("step-bounds" + tag, steps_ok, std::max(worst_excess, 0.0), 0.0);
    }
}

inline void cmd_coverage(const RunConfig &cfg, Report &rep) {
    QTMDef m = load_machine(single_machine(cfg), cfg.backend);
    ConfigSpace cs = make_space(cfg, m);
    const int k = require_k(cfg);
    auto tab = coverage_table(cs, k, cfg.t_max, cfg.ell_max.value_or(cs.window()), cfg.j);
    rep.out() << "machine " << m.name << " k " << k << " j " << tab.j << " aux " << tab.aux_mode << "\n";
    for (size_t b = 0; b < tab.rows.size(); b++) {
        const auto &r = tab.rows[b];
        rep.out() << "row " << b + 1 << " t " << r.t << " len " << r.ell << " y " << word_text(r.y) << " score "
                  << format_real(r.score) << "\n";
    }
    rep.out() << "trace-O " << format_real(tab.trace_O) << " trace-N " << format_real(tab.trace_N) << "\n";
    const std::string tag = "[" + m.name + ",k=" + std::to_string(k) + "]";
    rep.check("coverage-rows" + tag, static_cast<long long>(tab.rows.size()) <= tab.bound_2k1,
              std::to_string(tab.rows.size()), std::to_string(tab.bound_2k1));
    rep.check("near-one-count" + tag, tab.counts_hold, tab.counts_hold ? "0" : "1", "0");
}

inline void cmd_decode(const RunConfig &cfg, Report &rep) {
    QTMDef m = load_machine(single_machine(cfg), cfg.backend);
    ConfigSpace cs = make_space(cfg, m);
    if (!cfg.b) {
        fail(ErrorKind::Usage, "--b is required");
    }
    auto tab = coverage_table(cs, require_k(cfg), cfg.t_max, cfg.ell_max.value_or(cs.window()), cfg.j);
    rep.out() << word_text(decode(tab, *cfg.b)) << "\n";
}

struct PairSetup {
    ClassicalMachine classical;
    QTMDef quantum;
    Dictionary dict;
};

inline PairSetup load_pair(const RunConfig &cfg) {
    if (cfg.classical.empty() || cfg.quantum.empty()) {
        fail(ErrorKind::Usage, "--classical and --quantum are required");
    }
    return {parse_classical(slurp_file(cfg.classical)), load_machine(cfg.quantum, Backend::Float),
            make_dictionary(cfg)};
}

inline void write_complexity(const ComplexityReport &r, std::ostream &out) {
    out << "x " << word_text(r.x) << " C " << opt_int(r.c_plain.value) << " status " << status_text(r.c_plain.status)
        << " witness " << (r.c_plain.value ? word_text(r.c_plain.witness) : "-") << "\n";
    for (const auto &[k, v] : r.hbvl_eps) {
        out << "hbvl-eps 1/" << k << " " << opt_int(v) << "\n";
    }
    out << "hbvl " << opt_int(r.hbvl) << "\n";
    out << "gap " << opt_int(r.gap) << "\n";
    if (!r.warning.empty()) {
        out << "warning " << r.warning << "\n";
    }
}

inline void cmd_complexity(const RunConfig &cfg, Report &rep) {
    if (!cfg.x) {
        fail(ErrorKind::Usage, "--x is required");
    }
    auto pair = load_pair(cfg);
    QuantumRunner qr(pair.quantum, cfg.t_max, cfg.eta);
    rep.out() << "classical " << pair.classical.name() << " quantum " << pair.quantum.name << " dictionary "
              << pair.dict.name << " programs " << pair.dict.programs.size() << " k-max " << cfg.k_max << "\n";
    auto r = complexity_report(word_parse(*cfg.x), pair.classical, cfg.max_program_len, qr, pair.dict, cfg.k_max);
    write_complexity(r, rep.out());
    rep.check("hbvl-monotone[" + word_text(r.x) + "]", r.monotone, r.monotone ? "0" : "1", "0");
    rep.check("hbvl-dominates-eps[" + word_text(r.x) + "]", r.prop1, r.prop1 ? "0" : "1", "0");
}

inline void cmd_gap(const RunConfig &cfg, Report &rep) {
    if (cfg.corpus.empty()) {
        fail(ErrorKind::Usage, "--corpus is required");
    }
    auto pair = load_pair(cfg);
    auto corpus = read_corpus(cfg.corpus);
    QuantumRunner qr(pair.quantum, cfg.t_max, cfg.eta);
    auto g = complexity_gap(corpus, pair.classical, cfg.max_program_len, qr, pair.dict, cfg.k_max);
    rep.out() << "classical " << pair.classical.name() << " quantum " << pair.quantum.name << " dictionary "
              << pair.dict.name << " programs " << pair.dict.programs.size() << " k-max " << cfg.k_max << "\n";
    bool mono = true;
    for (const auto &r : g.rows) {
        if (r.gap) {
            rep.out() << "x " << word_text(r.x) << " C " << *r.c_plain.value << " Hbvl " << *r.hbvl << " gap "
                      << *r.gap << "\n";
        } else {
            rep.out() << "x " << word_text(r.x) << " excluded " << r.warning << "\n";
        }
        mono = mono && r.monotone && r.prop1;
    }
    ConfigSpace cs(pair.quantum, pair.quantum.window);
    auto dc = decoder_cross_check(cs, {1, 2, 3}, cfg.t_max, cs.window(), pair.classical, cfg.max_program_len);
    for (const auto &[k, over] : dc.per_k) {
        rep.out() << "decoder k " << k << " overhead " << over << "\n";
    }
    rep.out() << "max-gap " << g.max_gap << "\n";
    rep.out() << "c-sim " << g.c_sim << "\n";
    rep.out() << "c-dec " << dc.c_dec << "\n";
    rep.check("hbvl-monotone", mono, mono ? "0" : "1", "0");
    if (cfg.expect_gap) {
        rep.check("max-gap", g.max_gap == *cfg.expect_gap, std::to_string(g.max_gap), std::to_string(*cfg.expect_gap));
    }
    if (cfg.expect_c_dec) {
        rep.check("decoder-overhead", dc.c_dec <= *cfg.expect_c_dec && dc.uncovered.empty(),
                  std::to_string(dc.c_dec), std::to_string(*cfg.expect_c_dec));
    }
}

inline void cmd_nu(const RunConfig &cfg, Report &rep) {
    if (cfg.mix.empty()) {
        fail(ErrorKind::Usage, "--mix is required");
    }
    auto mix = parse_mixture(slurp_file(cfg.mix), std::filesystem::path(cfg.mix).parent_path());
    auto nu = build_nu(mix, cfg.steps);
    rep.out() << "mixture " << mix.name << " members " << mix.members.size() << " steps " << cfg.steps << "\n";
    for (const auto &m : mix.members) {
        rep.out() << "member " << m.label << " weight " << rational_text(m.weight) << " trace "
                  << format_real(m.state(cfg.steps).trace()) << " tail "
                  << (m.lc ? rational_text(tail_weight(*m.lc, cfg.steps)) : "0") << "\n";
    }
    rep.out() << "trace " << format_real(nu.trace()) << "\n";
    double diag = 0;
    for (const auto &x : nu.support()) {
        diag += nu.element(x, x).real();
    }
    rep.check("semi-measure", diag <= 1.0 + kEpsNum, diag, 1.0);
    if (cfg.check_domination) {
        for (const auto &d : domination(mix, nu, cfg.steps)) {
            rep.check("domination[" + d.label + "]", d.holds, d.holds ? "0" : "1", "0");
        }
    }
    if (mix.prefix && !cfg.corpus.empty()) {
        auto dr = diagonal_vs_m(nu, toy_m_table(*mix.prefix), read_corpus(cfg.corpus));
        rep.out() << "c1 " << format_real(dr.c1) << " argmin " << word_text(dr.argmin) << "\n";
        rep.out() << "c2 " << format_real(dr.c2) << " argmax " << word_text(dr.argmax) << "\n";
    }
}

// --------------------------------------------------------------------------

inline void cmd_bundle(const RunConfig &cfg, Report &rep);

inline const std::map<std::string, std::function<void(const RunConfig &, Report &)>> &commands() {
    static const std::map<std::string, std::function<void(const RunConfig &, Report &)>> table = {
        {"validate", cmd_validate}, {"evolve", cmd_evolve},         {"halting-spaces", cmd_halting},
        {"approx", cmd_approx},     {"coverage", cmd_coverage},     {"decode", cmd_decode},
        {"complexity", cmd_complexity}, {"gap", cmd_gap},           {"nu", cmd_nu},
        {"bundle", cmd_bundle},
    };
    return table;
}

/// Effective thread count: QTM_THREADS overrides the flag.
inline int thread_count(const RunConfig &cfg) {
    if (const char *env = std::getenv("QTM_THREADS")) {
        try {
            int v = std::stoi(env);
            if (v >= 1) {
                return v;
            }
        } catch (const std::logic_error &) {
        }
        fail(ErrorKind::Usage, std::string("QTM_THREADS must be a positive integer, got '") + env + "'");
    }
    return cfg.threads;
}

inline std::string basename_of(const std::string &p) {
    return std::filesystem::path(p).filename().string();
}

inline void write_chain(const RunConfig &cfg, Report &rep) {
    auto prefix = parse_classical(slurp_file(cfg.prefix));
    QTMDef qm = load_machine(cfg.quantum, Backend::Float);
    QuantumRunner qr(qm, cfg.t_max, cfg.eta);
    auto d = make_dictionary(cfg);
    auto ch = prefix_chain(read_corpus(cfg.corpus), qr, d, prefix, cfg.prefix_program_len, Rational(1, 3));
    rep.out() << "eps 1/3 dictionary " << d.name << "\n";
    for (const auto &row : ch.rows) {
        rep.out() << "x " << word_text(row.x) << " k " << row.k << " s " << row.s << " fidelity "
                  << format_real(row.fidelity);
        for (double c : row.c) {
            rep.out() << " " << format_real(c);
        }
        rep.out() << "\n";
    }
    for (int i = 0; i < kChainSteps; i++) {
        rep.out() << "step " << i + 1 << " constant " << format_real(ch.constants[static_cast<size_t>(i)]) << "\n";
    }
    rep.check("chain-fidelity", ch.fidelity_ok, ch.fidelity_ok ? "0" : "1", "0");
    rep.check("chain-finite", ch.all_finite && ch.excluded.empty(), std::to_string(ch.excluded.size()), "0");
}

inline void write_prop2(const RunConfig &cfg, Report &rep) {
    auto prefix = parse_classical(slurp_file(cfg.prefix));
    auto r = prop2_check(prop2_grid(64, 8), prefix, cfg.prefix_program_len, std::numeric_limits<double>::infinity());
    rep.out() << "samples a,b<=64 c<=8 required-constant " << format_real(r.required_const) << "\n";
}

/// Runs every stage and writes `=== file` sections plus a manifest.
inline void cmd_bundle(const RunConfig &cfg, Report &rep) {
    if (cfg.machines.empty()) {
        fail(ErrorKind::Usage, "--machine is required");
    }
    std::ostringstream archive;
    archive << "=== manifest\n";
    archive << "qtmlab " << kVersion << "\n";
    archive << "eigen " << EIGEN_WORLD_VERSION << "." << EIGEN_MAJOR_VERSION << "." << EIGEN_MINOR_VERSION << "\n";
    archive << "boost " << BOOST_LIB_VERSION << "\n";
    archive << "seed " << cfg.seed << "\n";
    archive << "threads-requested " << thread_count(cfg) << " threads-used 1\n";
    archive << "eps-num " << format_real(kEpsNum) << "\n";
    archive << "halting-eta " << format_real(cfg.eta) << "\n";
    archive << "subspace-tol " << format_real(kSubspaceTol) << "\n";
    archive << "t-max " << cfg.t_max << " samples " << cfg.samples << "\n";
    for (const auto &m : cfg.machines) {
        archive << "machine " << basename_of(m) << "\n";
    }
    auto stage = [&](const std::string &name, const std::function<void(Report &)> &body) {
        std::ostringstream section;
        Report r(section);
        try {
            body(r);
            r.finish();
        } catch (const Error &e) {
            throw Error(e.kind(), "stage " + name + ": " + e.what());
        }
        archive << "=== file " << name << "\n" << section.str();
    };
    stage("validate.txt", [&](Report &r) { cmd_validate(cfg, r); });
    for (const auto &path : cfg.machines) {
        RunConfig one = cfg;
        one.machines = {path};
        const std::string base = std::filesystem::path(path).stem().string();
        for (int k = 1; k <= 3; k++) {
            one.k = k;
            stage("halting-" + base + "-k" + std::to_string(k) + ".txt", [&](Report &r) { cmd_halting(one, r); });
        }
        one.k = 2;
        stage("approx-" + base + "-k2.txt", [&](Report &r) { cmd_approx(one, r); });
        for (int k = 1; k <= 3; k++) {
            one.k = k;
            stage("coverage-" + base + "-k" + std::to_string(k) + ".txt", [&](Report &r) { cmd_coverage(one, r); });
        }
    }
    if (!cfg.classical.empty() && !cfg.quantum.empty() && !cfg.corpus.empty()) {
        stage("gap.txt", [&](Report &r) { cmd_gap(cfg, r); });
    }
    if (!cfg.mix.empty()) {
        RunConfig nu_cfg = cfg;
        nu_cfg.check_domination = true;
        stage("nu.txt", [&](Report &r) { cmd_nu(nu_cfg, r); });
    }
    if (!cfg.prefix.empty() && !cfg.quantum.empty() && !cfg.corpus.empty()) {
        stage("chain.txt", [&](Report &r) { write_chain(cfg, r); });
    }
    if (!cfg.prefix.empty()) {
        stage("prop2.txt", [&](Report &r) { write_prop2(cfg, r); });
    }
    archive << "=== end\n";
    if (cfg.out.empty()) {
        rep.out() << archive.str();
    } else {
        std::ofstream f(cfg.out, std::ios::binary);
        if (!f) {
            fail(ErrorKind::Usage, "cannot write " + cfg.out);
        }
        f << archive.str();
        rep.out() << "bundle " << cfg.out << " bytes " << archive.str().size() << "\n";
    }
}

/// Runs one subcommand; returns the process exit code.
inline int run(const std::string &command, const RunConfig &cfg, std::ostream &out, std::ostream &err) {
    try {
        auto it = commands().find(command);
        if (it == commands().end()) {
            fail(ErrorKind::Usage, "unknown subcommand '" + command + "'");
        }
        validate_config(cfg);
        thread_count(cfg);
        Report rep(out);
        it->second(cfg, rep);
        rep.finish();
        return 0;
    } catch (const Error &e) {
        err << "error: " << e.what() << "\n";
        return exit_code(e.kind());
    }
}

}  // namespace qtmlab::cli
