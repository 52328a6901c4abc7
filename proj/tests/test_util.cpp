// SPDX-License-Identifier: Apache-2.0
#include "leakscope/corpus.hpp"
#include "leakscope/errors.hpp"
#include "leakscope/io.hpp"
#include "leakscope/util.hpp"
#include "support/temp_dir.hpp"

#include <doctest.h>
#include <sys/stat.h>

using namespace leakscope;

TEST_CASE("extension table maps the seven scanned languages") {
    CHECK(language_from_extension("py") == Language::Python);
    CHECK(language_from_extension(".PY") == Language::Python);
    CHECK(language_from_extension("c") == Language::C);
    CHECK(language_from_extension("h") == Language::C);
    CHECK(language_from_extension("cpp") == Language::Cpp);
    CHECK(language_from_extension("hpp") == Language::Cpp);
    CHECK(language_from_extension("java") == Language::Java);
    CHECK(language_from_extension("cs") == Language::CSharp);
    CHECK(language_from_extension("js") == Language::JavaScript);
    CHECK(language_from_extension("php") == Language::PHP);
    CHECK(language_from_extension("md") == Language::Other);
    CHECK(language_from_extension("") == Language::Other);
}

TEST_CASE("language and category names round-trip") {
    for (auto l : kScannedLanguages) CHECK(parse_language(to_string(l)) == l);
    for (auto c : kCategories) CHECK(parse_category(to_string(c)) == c);
    CHECK(to_string(Language::Cpp) == "C++");
    CHECK(to_string(Language::CSharp) == "C#");
    CHECK_FALSE(parse_category("ssn").has_value());
}

TEST_CASE("priority ranks secret over email over phone") {
    CHECK(priority_rank(SensitiveCategory::Secret) < priority_rank(SensitiveCategory::Email));
    CHECK(priority_rank(SensitiveCategory::Email) < priority_rank(SensitiveCategory::Phone));
}

TEST_CASE("strict UTF-8 validation") {
    CHECK(is_valid_utf8("plain ascii"));
    CHECK(is_valid_utf8("caf\xc3\xa9 \xe2\x82\xac \xf0\x9f\x98\x80"));
    CHECK_FALSE(is_valid_utf8("\xc3"));              // truncated
    CHECK_FALSE(is_valid_utf8("\xc0\xaf"));          // overlong '/'
    CHECK_FALSE(is_valid_utf8("\xed\xa0\x80"));      // surrogate
    CHECK_FALSE(is_valid_utf8("\xf4\x90\x80\x80"));  // above U+10FFFF
    CHECK_FALSE(is_valid_utf8("\xff"));
}

TEST_CASE("hashes match published vectors") {
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    static_assert(fnv1a64("") == 0xcbf29ce484222325ULL);
    static_assert(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("round1 keeps one decimal") {
    CHECK(round1(-91.0) == doctest::Approx(-91.0));
    CHECK(round1(28.877005) == doctest::Approx(28.9));
    CHECK(round1(4.3569) == doctest::Approx(4.4));
    CHECK(round1(-65.04) == doctest::Approx(-65.0));
}

TEST_CASE("gzip lines round-trip and restricted files are 0600") {
    testing::TempDir dir;
    const auto path = dir / "x.jsonl.gz";
    {
        GzLineWriter w(path, FileMode::Restricted);
        w.write_line("# header");
        w.write_json(Json{{"a", 1}});
        w.write_line("");
        w.write_json(Json{{"a", 2}});
        w.close();
    }
    struct stat st {};
    REQUIRE(::stat(path.c_str(), &st) == 0);
    CHECK((st.st_mode & 0777) == 0600);

    const auto rows = read_jsonl(path);
    REQUIRE(rows.size() == 2);
    CHECK(rows[1]["a"] == 2);

    GzLineReader r(path);
    std::string line;
    REQUIRE(r.next(line));
    CHECK(line == "# header");
    CHECK(r.line_number() == 1);
}

TEST_CASE("plain text files read through the gzip reader") {
    testing::TempDir dir;
    write_text_file(dir / "p.txt", "one\r\ntwo\n");
    GzLineReader r(dir / "p.txt");
    std::string line;
    REQUIRE(r.next(line));
    CHECK(line == "one");
    REQUIRE(r.next(line));
    CHECK(line == "two");
    CHECK_FALSE(r.next(line));
}

TEST_CASE("missing files raise IoError, bad JSON raises SchemaMismatch") {
    testing::TempDir dir;
    CHECK_THROWS_AS(GzLineReader(dir / "none.gz"), IoError);
    write_text_file(dir / "bad.json", "{not json");
    CHECK_THROWS_AS(read_json_file(dir / "bad.json"), SchemaMismatch);
}

TEST_CASE("glob expansion is sorted and deduplicated") {
    testing::TempDir dir;
    for (const char* n : {"b.gz", "a.gz", "c.txt"}) write_text_file(dir / n, "x");
    const auto pat = (dir / "*.gz").string();
    const auto got = expand_globs({pat, pat});
    REQUIRE(got.size() == 2);
    CHECK(got[0].filename() == "a.gz");
    CHECK(got[1].filename() == "b.gz");
}

TEST_CASE("sensitive directories get a warning README and 0700") {
    testing::TempDir dir;
    prepare_sensitive_dir(dir / "sensitive");
    CHECK(std::filesystem::exists(dir / "sensitive" / "README"));
    struct stat st {};
    REQUIRE(::stat((dir / "sensitive").c_str(), &st) == 0);
    CHECK((st.st_mode & 0777) == 0700);
}
