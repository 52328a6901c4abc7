// SPDX-License-Identifier: Apache-2.0
// Serial reference vs OpenMP kernels on a synthetic corpus.
#include "leakscope/oracle_lm.hpp"
#include "leakscope/scanner.hpp"
#include "leakscope/synth.hpp"

#include <CLI11.hpp>
#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <vector>

namespace {

template <typename F>
double median_ms(int reps, F&& f) {
    std::vector<double> t;
    for (int i = 0; i < reps; ++i) {
        const auto start = std::chrono::steady_clock::now();
        f();
        t.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count());
    }
    std::sort(t.begin(), t.end());
    return t[t.size() / 2];
}

void row(const char* name, double serial, double parallel, bool equal) {
    std::printf("%-16s %10.1f %10.1f %8.2fx  %s\n", name, serial, parallel, serial / parallel,
                equal ? "identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
    leakscope::SynthConfig cfg;
    int reps = 3;
    int threads = 0;
    CLI::App app{"Benchmark serial vs parallel kernels", "bench_kernels"};
    app.add_option("--records", cfg.records, "Synthetic records");
    app.add_option("--reps", reps, "Repetitions (median reported)")->check(CLI::PositiveNumber);
    app.add_option("--threads", threads, "OpenMP threads (0 = default)");
    CLI11_PARSE(app, argc, argv);
    if (threads > 0) omp_set_num_threads(threads);

    const auto corpus = leakscope::generate_corpus(cfg);
    std::vector<std::string> lines;
    std::vector<leakscope::CorpusRecord> scanned;
    for (const auto& r : corpus.records) {
        lines.push_back(leakscope::corpus_line(r));
        if (r.language != leakscope::Language::Other) scanned.push_back(r);
    }
    const auto& table = leakscope::PatternTable::builtin();

    std::size_t bytes = 0;
    for (const auto& r : corpus.records) bytes += r.text.size();
    std::printf("%zu records, %.1f MiB, %d threads on %d cores\n\n", corpus.records.size(), bytes / 1048576.0,
                omp_get_max_threads(), omp_get_num_procs());
    std::printf("%-16s %10s %10s %9s\n", "kernel", "serial ms", "omp ms", "speedup");

    std::vector<leakscope::RecordScanResult> rs, rp;
    const double s1 = median_ms(reps, [&] { rs = leakscope::scan_records_serial(table, scanned); });
    const double p1 = median_ms(reps, [&] { rp = leakscope::scan_records_parallel(table, scanned); });
    row("scan_records", s1, p1, rs == rp);

    std::vector<leakscope::LineOutcome> ls, lp;
    const double s2 = median_ms(reps, [&] { ls = leakscope::process_lines_serial(table, lines); });
    const double p2 = median_ms(reps, [&] { lp = leakscope::process_lines_parallel(table, lines); });
    bool same = ls.size() == lp.size();
    for (std::size_t i = 0; same && i < ls.size(); ++i)
        same = ls[i].status == lp[i].status && ls[i].result == lp[i].result;
    row("process_lines", s2, p2, same);

    std::size_t es = 0, ep = 0;
    const double s3 = median_ms(reps, [&] { es = leakscope::build_oracle_serial(corpus.records, 32).entry_count(); });
    const double p3 = median_ms(reps, [&] { ep = leakscope::build_oracle_parallel(corpus.records, 32).entry_count(); });
    row("oracle_build", s3, p3, es == ep);
    return 0;
}
