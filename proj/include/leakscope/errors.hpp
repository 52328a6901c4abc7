// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace leakscope {

/// Base for every error the library raises. `kind()` is a stable tag that
/// the CLI maps onto exit codes and that tests match against.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

#define LEAKSCOPE_ERROR(Name)                                                  \
    class Name : public Error {                                                \
    public:                                                                    \
        explicit Name(const std::string& what) : Error(#Name, what) {}         \
    }

// scanner
LEAKSCOPE_ERROR(UnsupportedLanguage);
LEAKSCOPE_ERROR(ShardParseError);
LEAKSCOPE_ERROR(IoError);
LEAKSCOPE_ERROR(PatternError);
// masker
LEAKSCOPE_ERROR(NoMatches);
LEAKSCOPE_ERROR(EmptyScan);
LEAKSCOPE_ERROR(MaskResidue);
// prompt_factory
LEAKSCOPE_ERROR(TargetNotInCase);
LEAKSCOPE_ERROR(PrefixTooShort);
LEAKSCOPE_ERROR(SourceParseError);
LEAKSCOPE_ERROR(SurfaceLeak);
// probe_runner
LEAKSCOPE_ERROR(EndpointError);
LEAKSCOPE_ERROR(TimeoutError);
LEAKSCOPE_ERROR(ConfigError);
// scorer
LEAKSCOPE_ERROR(MissingExpected);
LEAKSCOPE_ERROR(InsufficientAttempts);
LEAKSCOPE_ERROR(DomainError);
// release_diff
LEAKSCOPE_ERROR(SchemaMismatch);

#undef LEAKSCOPE_ERROR

}  // namespace leakscope
