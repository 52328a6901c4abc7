// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "leakscope/io.hpp"
#include "leakscope/scanner.hpp"
#include "leakscope/scorer.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace leakscope {

/// One count compared across releases. Relative change is (b - a) / a and
/// is absent when a == 0.
struct CountDelta {
    std::uint64_t a = 0;
    std::uint64_t b = 0;
    std::int64_t abs_diff = 0;
    std::optional<double> rel_change;      // raw fraction
    std::optional<double> rel_change_pct;  // percent, one decimal

    static CountDelta of(std::uint64_t a, std::uint64_t b);
    friend bool operator==(const CountDelta&, const CountDelta&) = default;
};

struct ScanDeltaRow {
    std::string language;  // "*" for the corpus total
    SensitiveCategory category = SensitiveCategory::Email;
    CountDelta records_with_match;
    CountDelta unique_match_total;

    friend bool operator==(const ScanDeltaRow&, const ScanDeltaRow&) = default;
};

struct ScanDelta {
    static constexpr int kSchemaVersion = 1;

    std::string label_a, label_b;
    std::string pattern_version_a, pattern_version_b;
    std::vector<std::string> warnings;
    CountDelta corpus_size;                         // record counts
    std::vector<std::pair<std::string, CountDelta>> records_per_language;
    std::vector<ScanDeltaRow> rows;                 // languages in order, then "*"
    PerCategory<CountDelta> corpus_distinct{};

    const ScanDeltaRow* find(std::string_view language, SensitiveCategory category) const;
    Json to_json() const;
    static ScanDelta from_json(const Json& j);
    friend bool operator==(const ScanDelta&, const ScanDelta&) = default;
};

/// Mismatched pattern-table versions produce a warning, not an error.
ScanDelta diff_scans(const ScanSummary& a, const ScanSummary& b);

enum class Direction { Increased, Decreased, Unchanged, Undefined };
std::string_view to_string(Direction d);

enum class Presence { Both, OnlyA, OnlyB };
std::string_view to_string(Presence p);

struct RateDelta {
    int k = 1;
    std::optional<double> rate_a, rate_b;
    std::optional<double> abs_change;      // b - a, as a fraction
    std::optional<double> rel_change;      // (b - a) / a
    std::optional<double> rel_change_pct;  // percent, one decimal
    Direction direction = Direction::Undefined;

    friend bool operator==(const RateDelta&, const RateDelta&) = default;
};

struct CellDelta {
    CellKey key;
    Presence presence = Presence::Both;
    std::optional<std::size_t> n_cases_a, n_cases_b;
    std::vector<RateDelta> by_k;

    const RateDelta* at_k(int k) const;
    friend bool operator==(const CellDelta&, const CellDelta&) = default;
};

struct DisclosureDelta {
    static constexpr int kSchemaVersion = 1;

    std::string label_a, label_b;
    std::string config_hash_a, config_hash_b;
    std::vector<int> k_values;  // union of both reports
    std::vector<std::string> warnings;
    std::vector<CellDelta> cells;  // sorted by key

    const CellDelta* find(const CellKey& key) const;
    Json to_json() const;
    static DisclosureDelta from_json(const Json& j);
    friend bool operator==(const DisclosureDelta&, const DisclosureDelta&) = default;
};

/// Throws SchemaMismatch on incompatible schema versions.
DisclosureDelta diff_reports(const DisclosureReport& a, const DisclosureReport& b);

enum class RenderFormat { Json, Markdown };
std::optional<RenderFormat> parse_render_format(std::string_view s);

std::string render(const ScanDelta& delta, RenderFormat format);
std::string render(const DisclosureDelta& delta, RenderFormat format);
std::string render(const DisclosureReport& report, RenderFormat format);

/// Regression gate over a disclosure delta. A cell regresses when its rate
/// rises by more than `max_increase` (absolute, as a fraction).
struct GateConfig {
    double max_increase = 0.0;
    std::vector<int> k_values;           // empty: every k in the delta
    std::optional<RiskType> risk_type;   // empty: both
    bool fail_on_new_cells = false;      // treat cells only in the later report as regressions
};

/// For scans the threshold applies to the relative growth of unique matches
/// per (language, category); a rise from zero always counts.
struct ScanGateConfig {
    double max_relative_increase = 0.0;
};

struct GateViolation {
    std::string cell;
    int k = 0;  // 0 for scan cells
    double before = 0;
    double after = 0;
    std::string reason;
};

struct GateResult {
    bool passed = true;
    std::size_t cells_checked = 0;
    std::vector<GateViolation> violations;

    Json to_json() const;
};

GateResult evaluate_gate(const DisclosureDelta& delta, const GateConfig& config);
GateResult evaluate_gate(const ScanDelta& delta, const ScanGateConfig& config);

}  // namespace leakscope
