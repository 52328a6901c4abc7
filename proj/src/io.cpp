// SPDX-License-Identifier: Apache-2.0
#include "leakscope/io.hpp"

#include "leakscope/errors.hpp"

#include <fcntl.h>
#include <glob.h>
#include <sys/stat.h>
#include <unistd.h>
#include <zlib.h>

#include <algorithm>
#include <fstream>
#include <sstream>

namespace leakscope {

namespace {

int open_for_write(const std::filesystem::path& path, FileMode mode) {
    const mode_t perms = mode == FileMode::Restricted ? 0600 : 0644;
    int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, perms);
    if (fd < 0) throw IoError("cannot open " + path.string() + " for writing");
    // An existing file keeps its old mode under O_CREAT, so force it.
    if (mode == FileMode::Restricted) ::fchmod(fd, 0600);
    return fd;
}

}  // namespace

GzLineReader::GzLineReader(const std::filesystem::path& path) : path_(path) {
    file_ = gzopen(path.c_str(), "rb");
    if (!file_) throw IoError("cannot open " + path.string());
    gzbuffer(static_cast<gzFile>(file_), 1 << 17);
}

GzLineReader::~GzLineReader() {
    if (file_) gzclose(static_cast<gzFile>(file_));
}

bool GzLineReader::next(std::string& line) {
    line.clear();
    auto* gz = static_cast<gzFile>(file_);
    char buf[1 << 14];
    bool got_any = false;
    while (gzgets(gz, buf, sizeof buf) != nullptr) {
        got_any = true;
        std::size_t n = std::char_traits<char>::length(buf);
        // gzgets stops at NUL bytes too; JSON text never contains raw NULs.
        if (n > 0 && buf[n - 1] == '\n') {
            line.append(buf, n - 1);
            if (!line.empty() && line.back() == '\r') line.pop_back();
            ++line_no_;
            return true;
        }
        line.append(buf, n);
    }
    int err = 0;
    const char* msg = gzerror(gz, &err);
    if (err != Z_OK && err != Z_STREAM_END)
        throw IoError(path_.string() + ": " + (msg ? msg : "gzip read error"));
    if (got_any) {
        ++line_no_;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return true;
    }
    return false;
}

GzLineWriter::GzLineWriter(const std::filesystem::path& path, FileMode mode) : path_(path) {
    int fd = open_for_write(path, mode);
    file_ = gzdopen(fd, "wb6");
    if (!file_) {
        ::close(fd);
        throw IoError("cannot open gzip stream for " + path.string());
    }
}

GzLineWriter::~GzLineWriter() {
    if (file_) gzclose(static_cast<gzFile>(file_));
}

void GzLineWriter::write_line(std::string_view line) {
    auto* gz = static_cast<gzFile>(file_);
    if (!line.empty() &&
        gzwrite(gz, line.data(), static_cast<unsigned>(line.size())) != static_cast<int>(line.size()))
        throw IoError("write failed: " + path_.string());
    if (gzputc(gz, '\n') != '\n') throw IoError("write failed: " + path_.string());
}

void GzLineWriter::close() {
    if (!file_) return;
    const int rc = gzclose(static_cast<gzFile>(file_));
    file_ = nullptr;
    if (rc != Z_OK) throw IoError("close failed: " + path_.string());
}

void write_text_file(const std::filesystem::path& path, std::string_view content, FileMode mode) {
    int fd = open_for_write(path, mode);
    std::size_t off = 0;
    while (off < content.size()) {
        const ssize_t w = ::write(fd, content.data() + off, content.size() - off);
        if (w <= 0) {
            ::close(fd);
            throw IoError("write failed: " + path.string());
        }
        off += static_cast<std::size_t>(w);
    }
    ::close(fd);
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Json read_json_file(const std::filesystem::path& path) {
    const std::string text = read_text_file(path);
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaMismatch(path.string() + ": " + e.what());
    }
}

std::vector<Json> read_jsonl(const std::filesystem::path& path) {
    GzLineReader reader(path);
    std::vector<Json> out;
    std::string line;
    while (reader.next(line)) {
        if (line.empty() || line.front() == '#') continue;
        try {
            out.push_back(Json::parse(line));
        } catch (const nlohmann::json::parse_error& e) {
            throw SchemaMismatch(path.string() + ":" + std::to_string(reader.line_number()) +
                                 ": " + e.what());
        }
    }
    return out;
}

std::vector<std::filesystem::path> expand_globs(const std::vector<std::string>& patterns) {
    std::vector<std::filesystem::path> out;
    for (const auto& pat : patterns) {
        if (pat.find_first_of("*?[") == std::string::npos) {
            out.emplace_back(pat);
            continue;
        }
        glob_t g{};
        if (::glob(pat.c_str(), 0, nullptr, &g) == 0)
            for (std::size_t i = 0; i < g.gl_pathc; ++i) out.emplace_back(g.gl_pathv[i]);
        globfree(&g);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

void prepare_sensitive_dir(const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    ::chmod(dir.c_str(), 0700);
    const auto readme = dir / "README";
    if (std::filesystem::exists(readme)) return;
    write_text_file(readme,
                    "WARNING: files in this directory contain raw sensitive strings (email\n"
                    "addresses, phone numbers, credentials) harvested from a corpus or emitted\n"
                    "by a model. Do not commit, publish or attach them to CI artifacts.\n");
}

}  // namespace leakscope
