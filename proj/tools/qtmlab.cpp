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


#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "qtmlab/cli.hpp"

int main(int argc, char **argv) {
    using qtmlab::cli::RunConfig;
    RunConfig cfg;
    std::string backend = "float";
    std::string input, x, delta;
    long long j = 0, b = 0;
    int k = -1, t = -1, window = 0, ell_max = -1, expect_gap = -1, expect_c_dec = -1;

    CLI::App app{"Quantum Turing machine laboratory"};
    app.set_version_flag("--version", std::string(qtmlab::cli::kVersion));
    app.require_subcommand(1);
    app.fallthrough();
    for (const auto &[name, fn] : qtmlab::cli::commands()) {
        app.add_subcommand(name)->fallthrough();
    }
    app.add_option("--machine", cfg.machines, "machine definition file (repeatable)");
    app.add_option("--k", k, "input length in qubits");
    app.add_option("--t-max", cfg.t_max, "largest simulated step");
    app.add_option("--t", t, "single halting time");
    app.add_option("--window", window, "tape window override");
    app.add_option("--eta", cfg.eta, "halting tolerance");
    app.add_option("--delta", delta, "channel accuracy (rational)");
    app.add_option("--j", j, "decoder precision");
    app.add_option("--ell-max", ell_max, "largest output length");
    app.add_option("--b", b, "row index for decode (1-based)");
    app.add_option("--input", input, "classical input bit string (- for empty)");
    app.add_option("--state", cfg.state_file, "input state as a stream file");
    app.add_option("--dict", cfg.dict, "dictionary: basic or a file of extra states");
    app.add_option("--dict-k-max", cfg.dict_k_max, "longest dictionary program");
    app.add_option("--k-max", cfg.k_max, "largest k in the hbvl quantifier");
    app.add_option("--max-program-len", cfg.max_program_len, "plain program search bound");
    app.add_option("--prefix-program-len", cfg.prefix_program_len, "prefix program search bound");
    app.add_option("--x", x, "target string");
    app.add_option("--corpus", cfg.corpus, "corpus file");
    app.add_option("--classical", cfg.classical, "classical program table");
    app.add_option("--quantum", cfg.quantum, "quantum reference machine");
    app.add_option("--prefix", cfg.prefix, "prefix program table");
    app.add_option("--mix", cfg.mix, "mixture file");
    app.add_option("--steps", cfg.steps, "stream terms to accumulate");
    app.add_flag("--check-domination", cfg.check_domination, "check every member against nu");
    app.add_option("--samples", cfg.samples, "random states per halting subspace");
    app.add_option("--seed", cfg.seed, "random seed");
    app.add_option("--backend", backend, "float or exact")->check(CLI::IsMember({"float", "exact"}));
    app.add_option("--expect-gap", expect_gap, "declared maximum gap");
    app.add_option("--expect-c-dec", expect_c_dec, "declared decoder overhead");
    app.add_option("--threads", cfg.threads, "worker threads (QTM_THREADS overrides)");
    app.add_option("--out", cfg.out, "bundle archive path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return 2;
    }

    cfg.backend = backend == "exact" ? qtmlab::Backend::Exact : qtmlab::Backend::Float;
    if (k >= 0) cfg.k = k;
    if (t >= 0) cfg.t = t;
    if (window > 0) cfg.window = window;
    if (ell_max >= 0) cfg.ell_max = ell_max;
    if (app.count("--delta")) cfg.delta = delta;
    if (app.count("--j")) cfg.j = j;
    if (app.count("--b")) cfg.b = b;
    if (app.count("--input")) cfg.input = input;
    if (app.count("--x")) cfg.x = x;
    if (expect_gap >= 0) cfg.expect_gap = expect_gap;
    if (expect_c_dec >= 0) cfg.expect_c_dec = expect_c_dec;

    return qtmlab::cli::run(app.get_subcommands().front()->get_name(), cfg, std::cout, std::cerr);
}
