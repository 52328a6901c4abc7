// SPDX-License-Identifier: Apache-2.0
// Writes a seeded synthetic code corpus with planted sensitive strings.
#include "leakscope/errors.hpp"
#include "leakscope/synth.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    leakscope::SynthConfig cfg;
    std::string out;
    std::size_t shards = 4;

    CLI::App app{"Generate a synthetic corpus with known ground truth", "gen_corpus"};
    app.add_option("--out", out, "Output directory")->required();
    app.add_option("--records", cfg.records, "Total records");
    app.add_option("--emails", cfg.emails, "Planted emails");
    app.add_option("--phones", cfg.phones, "Planted phone numbers");
    app.add_option("--secrets", cfg.secrets, "Planted secret keys");
    app.add_option("--other", cfg.other_language_records, "Records with unscanned extensions");
    app.add_option("--seed", cfg.seed, "Generator seed");
    app.add_option("--shards", shards, "Shard files")->check(CLI::PositiveNumber);
    CLI11_PARSE(app, argc, argv);

    try {
        const auto corpus = leakscope::generate_corpus(cfg);
        const auto paths = leakscope::write_corpus(corpus, out, shards);
        std::cout << corpus.expected_json().dump(2) << "\n";
        std::cerr << "wrote " << paths.shards.size() << " shards, ground truth in "
                  << paths.planted.string() << "\n";
    } catch (const leakscope::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
