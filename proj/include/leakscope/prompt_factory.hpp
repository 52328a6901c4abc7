// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "leakscope/corpus.hpp"
#include "leakscope/io.hpp"
#include "leakscope/masker.hpp"
#include "leakscope/sensitive_index.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace leakscope {

enum class Strategy { PS_1, PS_2, PS_3, PS_4, PS_5, PS_6 };
enum class PromptMode { Masking, Infilling, Completion };

inline constexpr std::array<Strategy, 6> kStrategies = {
    Strategy::PS_1, Strategy::PS_2, Strategy::PS_3, Strategy::PS_4, Strategy::PS_5, Strategy::PS_6};

std::string_view to_string(Strategy s);
std::optional<Strategy> parse_strategy(std::string_view name);
std::string_view to_string(PromptMode m);
PromptMode mode_of(Strategy s);

/// Minimum prefix length, in bytes, for completion-style prompts.
inline constexpr std::size_t kMinPrefixBytes = 16;

/// Prompt templates, one per strategy. Placeholders: {masked}, {prefix},
/// {suffix}, {hole}, {mask}, {language}, {fence}.
struct TemplateSet {
    std::string version;
    std::array<std::string, 6> templates;
    std::string hole_marker = "<FILL_ME>";

    static const TemplateSet& builtin();
    static TemplateSet from_json(const Json& j);
    Json to_json() const;
    const std::string& for_strategy(Strategy s) const {
        return templates[static_cast<std::size_t>(s)];
    }
};

enum class RiskType { Malicious, Unintentional };
std::string_view to_string(RiskType r);
std::optional<RiskType> parse_risk_type(std::string_view name);

inline constexpr std::array<std::string_view, 5> kDatasetTags = {"HumanEval", "MBPP", "MATH",
                                                                 "UNIT", "OBJECT"};

struct PromptCase {
    std::string prompt_id;
    RiskType risk_type = RiskType::Malicious;
    std::string prompt_text;
    std::optional<Strategy> strategy;          // malicious only
    std::optional<std::string> expected_secret_id;  // malicious only
    std::optional<std::string> dataset_tag;    // unintentional only
    // Malicious context, copied from the case so scoring needs no dataset.
    std::string case_id;
    std::optional<SensitiveCategory> category;
    std::string provider;
    std::optional<Language> language;

    Json to_json() const;
    static PromptCase from_json(const Json& j);
    friend bool operator==(const PromptCase&, const PromptCase&) = default;
};

/// Throws TargetNotInCase, PrefixTooShort (PS_3/PS_4), or SurfaceLeak when
/// the rendered text would contain the target's surface.
PromptCase render_malicious_prompt(const MaskedCase& masked, const GroundTruthSecret& target,
                                   Strategy strategy,
                                   const TemplateSet& templates = TemplateSet::builtin(),
                                   std::string_view mask_token = kMaskToken);

struct SuiteStats {
    std::size_t rendered = 0;
    std::size_t prefix_too_short = 0;
    std::size_t surface_leak = 0;
};

/// Every (case, secret, strategy) combination that renders cleanly.
std::vector<PromptCase> generate_malicious_suite(const AssessmentDataset& dataset,
                                                 const std::vector<Strategy>& strategies,
                                                 const TemplateSet& templates,
                                                 SuiteStats* stats = nullptr);

// --- unintentional suites -------------------------------------------------

struct UnitConversion {
    std::string dimension;
    std::vector<std::string> units;  // every ordered pair of distinct units is a task
};

struct ShapeTask {
    std::string shape;
    std::string property;
    std::vector<std::string> parameters;
};

const std::vector<UnitConversion>& builtin_unit_table();
const std::vector<ShapeTask>& builtin_shape_table();

struct SuiteSource {
    enum class Kind { Benchmark, Unit, Object };
    Kind kind = Kind::Benchmark;
    std::string dataset_tag;            // HumanEval, MBPP, MATH for benchmarks
    std::filesystem::path path;         // benchmark JSON-lines
    std::size_t count = 0;              // synthetic prompt count
    std::vector<UnitConversion> units = builtin_unit_table();
    std::vector<ShapeTask> shapes = builtin_shape_table();
};

/// Deterministic for a fixed seed. Throws SourceParseError.
std::vector<PromptCase> generate_unintentional_suite(const std::vector<SuiteSource>& sources,
                                                     std::uint64_t seed);

std::vector<PromptCase> load_benchmark(const std::filesystem::path& path,
                                       const std::string& dataset_tag);
std::vector<PromptCase> generate_unit_prompts(std::size_t n, std::uint64_t seed,
                                              const std::vector<UnitConversion>& table);
std::vector<PromptCase> generate_object_prompts(std::size_t n, std::uint64_t seed,
                                                const std::vector<ShapeTask>& table);

/// Removes unintentional prompts that already contain an index surface.
std::size_t drop_impure_prompts(std::vector<PromptCase>& prompts, const SensitiveIndex& index);

void write_prompts(const std::vector<PromptCase>& prompts, const std::filesystem::path& path);
std::vector<PromptCase> read_prompts(const std::filesystem::path& path);

}  // namespace leakscope
