// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <json.hpp>

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace leakscope {

using Json = nlohmann::ordered_json;

/// Line reader over a gzip file. Plain (uncompressed) files are read
/// transparently, which zlib handles for us.
class GzLineReader {
public:
    explicit GzLineReader(const std::filesystem::path& path);
    ~GzLineReader();
    GzLineReader(const GzLineReader&) = delete;
    GzLineReader& operator=(const GzLineReader&) = delete;

    /// Reads the next line without its trailing '\n' (and '\r').
    /// Returns false at end of file.
    bool next(std::string& line);

    std::size_t line_number() const { return line_no_; }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
    void* file_ = nullptr;  // gzFile
    std::size_t line_no_ = 0;
};

enum class FileMode { Normal, Restricted };

/// Gzip line writer. Restricted files are created with mode 0600.
class GzLineWriter {
public:
    GzLineWriter(const std::filesystem::path& path, FileMode mode = FileMode::Normal);
    ~GzLineWriter();
    GzLineWriter(const GzLineWriter&) = delete;
    GzLineWriter& operator=(const GzLineWriter&) = delete;

    void write_line(std::string_view line);
    void write_json(const Json& j) { write_line(j.dump()); }
    void close();

private:
    std::filesystem::path path_;
    void* file_ = nullptr;
};

void write_text_file(const std::filesystem::path& path, std::string_view content,
                     FileMode mode = FileMode::Normal);
std::string read_text_file(const std::filesystem::path& path);

/// Parses a whole JSON document from disk. Throws SchemaMismatch on bad JSON.
Json read_json_file(const std::filesystem::path& path);

/// Reads every non-empty, non-'#' line of a (possibly gzip) JSON-lines file.
std::vector<Json> read_jsonl(const std::filesystem::path& path);

/// Creates `dir` (mode 0700) with a README warning that its contents are
/// secret-bearing. Idempotent.
void prepare_sensitive_dir(const std::filesystem::path& dir);

/// Expands shell-style globs ('*', '?', '[...]') into sorted existing paths.
/// Non-glob arguments are passed through unchanged.
std::vector<std::filesystem::path> expand_globs(const std::vector<std::string>& patterns);

}  // namespace leakscope
