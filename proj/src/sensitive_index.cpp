// SPDX-License-Identifier: Apache-2.0
#include "leakscope/sensitive_index.hpp"

#include "leakscope/errors.hpp"
#include "leakscope/scanner.hpp"
#include "leakscope/util.hpp"

#include <algorithm>
#include <atomic>
#include <deque>
#include <map>

namespace leakscope {

// Aho-Corasick over ASCII-lowercased surfaces. Hits are verified against the
// original text so only email domains end up case-insensitive.
struct SensitiveIndex::Automaton {
    struct Node {
        std::vector<std::pair<unsigned char, int>> next;  // sorted by byte
        int fail = 0;
        int output_link = -1;  // nearest proper suffix node that ends a pattern
        std::vector<int> ends;  // pattern ids ending here
    };
    struct Pattern {
        SensitiveCategory category;
        std::string surface;
    };

    std::vector<Node> nodes;
    std::vector<Pattern> patterns;

    int child(int n, unsigned char c) const {
        const auto& nx = nodes[n].next;
        auto it = std::lower_bound(nx.begin(), nx.end(), std::make_pair(c, -1));
        return it != nx.end() && it->first == c ? it->second : -1;
    }

    void add(const std::string& lowered, int id) {
        int n = 0;
        for (unsigned char c : lowered) {
            int nx = child(n, c);
            if (nx < 0) {
                nx = static_cast<int>(nodes.size());
                nodes.emplace_back();
                auto& v = nodes[n].next;
                v.insert(std::lower_bound(v.begin(), v.end(), std::make_pair(c, -1)), {c, nx});
            }
            n = nx;
        }
        nodes[n].ends.push_back(id);
    }

    void link() {
        std::deque<int> queue;
        for (const auto& [c, nx] : nodes[0].next) {
            nodes[nx].fail = 0;
            queue.push_back(nx);
        }
        while (!queue.empty()) {
            const int n = queue.front();
            queue.pop_front();
            for (const auto& [c, nx] : nodes[n].next) {
                int f = nodes[n].fail;
                while (f != 0 && child(f, c) < 0) f = nodes[f].fail;
                const int fc = child(f, c);
                nodes[nx].fail = (fc >= 0 && fc != nx) ? fc : 0;
                const int fl = nodes[nx].fail;
                nodes[nx].output_link = !nodes[fl].ends.empty() ? fl : nodes[fl].output_link;
                queue.push_back(nx);
            }
        }
    }
};

SensitiveIndex::SensitiveIndex(std::string release_label, std::string pattern_version)
    : release_label_(std::move(release_label)), pattern_version_(std::move(pattern_version)) {}

void SensitiveIndex::insert(SensitiveCategory category, std::string_view surface) {
    if (surface.empty()) return;
    surfaces_[index_of(category)].insert(normalize_surface(category, surface));
    std::atomic_store(&automaton_, std::shared_ptr<const Automaton>{});
}

std::size_t SensitiveIndex::size() const {
    return surfaces_[0].size() + surfaces_[1].size() + surfaces_[2].size();
}

std::shared_ptr<const SensitiveIndex::Automaton> SensitiveIndex::automaton() const {
    auto current = std::atomic_load(&automaton_);
    if (current) return current;
    auto built = std::make_shared<Automaton>();
    built->nodes.emplace_back();
    for (auto c : kCategories)
        for (const auto& s : surfaces_[index_of(c)]) {
            built->add(ascii_lower(s), static_cast<int>(built->patterns.size()));
            built->patterns.push_back({c, s});
        }
    built->link();
    std::shared_ptr<const Automaton> frozen = std::move(built);
    std::atomic_store(&automaton_, frozen);
    return frozen;
}

std::vector<IndexHit> SensitiveIndex::find_in(std::string_view text) const {
    if (size() == 0 || text.empty()) return {};
    const auto holder = automaton();
    const Automaton& ac = *holder;
    std::map<int, std::size_t> first_offset;  // pattern id -> offset

    const auto verify = [&](int id, std::size_t end_pos) {
        const auto& p = ac.patterns[id];
        const std::size_t len = p.surface.size();
        const std::size_t start = end_pos + 1 - len;
        const std::string_view slice = text.substr(start, len);
        const bool ok = p.category == SensitiveCategory::Email
                            ? normalize_surface(p.category, slice) == p.surface
                            : slice == p.surface;
        if (ok) first_offset.emplace(id, start);  // keeps the earliest
    };

    int state = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        unsigned char c = static_cast<unsigned char>(text[i]);
        if (c >= 'A' && c <= 'Z') c = static_cast<unsigned char>(c - 'A' + 'a');
        int nx;
        while ((nx = ac.child(state, c)) < 0 && state != 0) state = ac.nodes[state].fail;
        state = nx < 0 ? 0 : nx;
        for (int n = state; n > 0; n = ac.nodes[n].output_link) {
            for (int id : ac.nodes[n].ends) verify(id, i);
            if (ac.nodes[n].output_link < 0) break;
        }
    }

    std::vector<IndexHit> hits;
    hits.reserve(first_offset.size());
    for (const auto& [id, off] : first_offset)
        hits.push_back({ac.patterns[id].category, ac.patterns[id].surface, off});
    std::sort(hits.begin(), hits.end(), [](const IndexHit& a, const IndexHit& b) {
        return std::tie(a.offset, a.surface) < std::tie(b.offset, b.surface);
    });
    return hits;
}

Json SensitiveIndex::to_json() const {
    Json surfaces;
    for (auto c : kCategories) surfaces[std::string(to_string(c))] = surfaces_[index_of(c)];
    return Json{{"schema_version", kSchemaVersion},
                {"kind", "sensitive_index"},
                {"release_label", release_label_},
                {"pattern_table_version", pattern_version_},
                {"surfaces", std::move(surfaces)}};
}

SensitiveIndex SensitiveIndex::from_json(const Json& j) {
    try {
        if (j.at("kind") != "sensitive_index" || j.at("schema_version").get<int>() != kSchemaVersion)
            throw SchemaMismatch("not a supported sensitive index");
        SensitiveIndex idx(j.at("release_label").get<std::string>(),
                           j.at("pattern_table_version").get<std::string>());
        for (auto c : kCategories)
            for (const auto& s : j.at("surfaces").at(std::string(to_string(c))))
                idx.insert(c, s.get<std::string>());
        return idx;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaMismatch(std::string("malformed sensitive index: ") + e.what());
    }
}

}  // namespace leakscope
