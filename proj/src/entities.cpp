#include "novelgraph/entities.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include "novelgraph/density.hpp"
#include "novelgraph/text.hpp"

namespace novelgraph {

namespace {

// Capitalized words that are not names: titles, pronouns, function words
// that open dialogue, calendar names.
const Gazetteer& non_name_words() {
    static const Gazetteer words{
        "I", "Mr", "Mrs", "Ms", "Dr", "Prof", "Professor", "Sir", "Madam", "Madame", "Lord", "Lady", "Miss",
        "Mister", "Aunt", "Uncle", "Captain", "St", "Saint", "King", "Queen", "Prince", "Princess", "He", "She",
        "They", "We", "You", "It", "His", "Her", "Their", "Our", "My", "Your", "Its", "Him", "Them", "Me", "Us",
        "The", "A", "An", "And", "But", "Or", "Nor", "So", "Then", "When", "While", "If", "As", "At", "In", "On",
        "Of", "To", "For", "With", "By", "From", "Yes", "No", "Oh", "Ah", "Well", "Not", "What", "Why", "How",
        "Where", "Who", "Whom", "Which", "This", "That", "These", "Those", "There", "Here", "Now", "Chapter",
        "After", "Before", "All", "Some", "One", "Two", "Three", "Do", "Did", "Does", "Is", "Was", "Were", "Are",
        "Be", "Had", "Have", "Has", "Will", "Would", "Could", "Should", "Can", "May", "Might", "Must", "Shall",
        "Let", "Just", "Still", "Perhaps", "Maybe", "Once", "Every", "Each", "Only", "Even", "Please", "Thank",
        "Good", "Dear", "Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday", "Sunday", "January",
        "February", "March", "April", "June", "July", "August", "September", "October", "November",
        "December", "Christmas", "Don't", "I'm", "I'll", "I've", "I'd", "It's", "That's", "There's", "What's",
        "Yeah", "Hello", "Hey", "Hi", "Goodbye", "Nothing", "Everything", "Someone", "Everyone", "Nobody"};
    return words;
}

bool title_or_function_word(std::string_view w) { return non_name_words().contains(w); }

bool opens_clause(const std::vector<text::Token>& tokens, std::size_t i, std::string_view s) {
    // First word of the sentence, or first word after an opening quote or colon.
    std::size_t j = i;
    while (j > 0) {
        const auto& prev = tokens[j - 1];
        if (prev.is_word) return false;
        std::size_t pos = 0;
        const auto pv = prev.view(s);
        const char32_t c = text::next_code_point(pv, pos);
        if (text::is_quote(c) || c == U':') return true;
        --j;
    }
    return true;
}

std::vector<std::string> name_tokens(std::string_view surface) { return text::split_whitespace(surface); }

bool is_initial(std::string_view token) {
    return text::code_point_length(token) == 2 && token.back() == '.' && text::is_capitalized(token);
}

bool abbreviates(std::string_view initial, std::string_view full) {
    if (!is_initial(initial) || is_initial(full) || text::code_point_length(full) < 2) return false;
    return full.substr(0, initial.size() - 1) == initial.substr(0, initial.size() - 1);
}

std::string_view longest_token(const std::vector<std::string>& tokens) {
    std::string_view best;
    std::size_t best_len = 0;
    for (const auto& t : tokens) {
        const auto len = text::code_point_length(t);
        if (len > best_len) {
            best = t;
            best_len = len;
        }
    }
    return best;
}

bool token_subset(const std::vector<std::string>& small, const std::vector<std::string>& large) {
    return std::all_of(small.begin(), small.end(),
                       [&](const std::string& t) { return std::find(large.begin(), large.end(), t) != large.end(); });
}

// `part` occurs as a contiguous run of whole tokens inside `whole`.
bool is_token_run_of(const std::vector<std::string>& part, const std::vector<std::string>& whole) {
    if (part.empty() || part.size() >= whole.size()) return false;
    for (std::size_t i = 0; i + part.size() <= whole.size(); ++i) {
        if (std::equal(part.begin(), part.end(), whole.begin() + static_cast<std::ptrdiff_t>(i))) return true;
    }
    return false;
}

std::string choose_canonical(const std::vector<std::string>& members,
                             const std::map<std::string, std::size_t>& frequency) {
    auto freq = [&](const std::string& s) {
        const auto it = frequency.find(s);
        return it == frequency.end() ? std::size_t{0} : it->second;
    };
    std::string top = members.front();
    for (const auto& m : members) {
        if (freq(m) > freq(top) || (freq(m) == freq(top) && m < top)) top = m;
    }
    const auto top_tokens = name_tokens(top);
    std::string best = top;
    for (const auto& m : members) {
        if (!token_subset(top_tokens, name_tokens(m))) continue;
        const auto lm = text::code_point_length(m);
        const auto lb = text::code_point_length(best);
        if (lm > lb || (lm == lb && m < best)) best = m;
    }
    return best;
}

struct Group {
    std::vector<std::string> members;  // sorted
    std::size_t frequency = 0;
};

AliasTable assemble(std::vector<Group> groups, const std::map<std::string, std::size_t>& frequency) {
    std::vector<Character> chars;
    for (auto& g : groups) {
        if (g.members.empty()) continue;
        std::sort(g.members.begin(), g.members.end());
        Character c;
        c.canonical = choose_canonical(g.members, frequency);
        c.aliases = g.members;
        c.count = 0;
        for (const auto& m : g.members) {
            const auto it = frequency.find(m);
            if (it != frequency.end()) c.count += it->second;
        }
        chars.push_back(std::move(c));
    }
    std::sort(chars.begin(), chars.end(), [](const Character& a, const Character& b) {
        if (a.count != b.count) return a.count > b.count;
        return a.canonical < b.canonical;
    });
    for (std::size_t i = 0; i < chars.size(); ++i) chars[i].id = "CHAR" + std::to_string(i);
    AliasTable table;
    table.characters = std::move(chars);
    table.frequency = frequency;
    return table;
}

}  // namespace

void DealiasConfig::validate() const {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("dealias epsilon must lie in (0, 1)");
    if (min_pts < 1) throw std::invalid_argument("dealias min_pts must be at least 1");
    if (!(attach_threshold >= 0.0 && attach_threshold <= 1.0))
        throw std::invalid_argument("dealias attach_threshold must lie in [0, 1]");
}

const Character* AliasTable::find_surface(std::string_view surface) const {
    for (const auto& c : characters) {
        if (std::binary_search(c.aliases.begin(), c.aliases.end(), surface)) return &c;
    }
    return nullptr;
}

const Character* AliasTable::find_id(std::string_view id) const {
    for (const auto& c : characters) {
        if (c.id == id) return &c;
    }
    return nullptr;
}

std::vector<std::string> AliasTable::surfaces() const {
    std::vector<std::string> out;
    for (const auto& c : characters) out.insert(out.end(), c.aliases.begin(), c.aliases.end());
    std::sort(out.begin(), out.end());
    return out;
}

nlohmann::ordered_json AliasTable::to_json() const {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& c : characters) {
        nlohmann::ordered_json entry;
        entry["canonical"] = c.canonical;
        entry["aliases"] = c.aliases;
        nlohmann::ordered_json counts = nlohmann::ordered_json::object();
        for (const auto& a : c.aliases) {
            const auto it = frequency.find(a);
            counts[a] = it == frequency.end() ? 0 : it->second;
        }
        entry["count"] = c.count;
        entry["alias_counts"] = counts;
        j[c.id] = entry;
    }
    return j;
}

AliasTable AliasTable::from_json(const nlohmann::json& j) {
    AliasTable table;
    for (const auto& [id, entry] : j.items()) {
        Character c;
        c.id = id;
        c.canonical = entry.at("canonical").get<std::string>();
        c.aliases = entry.at("aliases").get<std::vector<std::string>>();
        std::sort(c.aliases.begin(), c.aliases.end());
        c.count = entry.at("count").get<std::size_t>();
        if (entry.contains("alias_counts")) {
            for (const auto& [alias, n] : entry["alias_counts"].items()) table.frequency[alias] = n.get<std::size_t>();
        }
        table.characters.push_back(std::move(c));
    }
    std::sort(table.characters.begin(), table.characters.end(),
              [](const Character& a, const Character& b) { return text::character_id_less(a.id, b.id); });
    return table;
}

std::vector<std::pair<std::size_t, std::size_t>> WirePersonTagger::person_spans(std::string_view sentence) {
    const auto r = channel_->call_one({{"op", "tag"}, {"text", std::string(sentence)}});
    if (!r.contains("spans") || !r["spans"].is_array()) throw ProviderError("protocol violation: tag response without spans");
    std::vector<std::pair<std::size_t, std::size_t>> spans;
    for (const auto& span : r["spans"]) {
        if (!span.is_array() || span.size() != 2) throw ProviderError("protocol violation: malformed span " + span.dump());
        const auto b = span[0].get<std::size_t>();
        const auto e = span[1].get<std::size_t>();
        if (b >= e || e > sentence.size()) throw ProviderError("protocol violation: span out of range " + span.dump());
        spans.emplace_back(b, e);
    }
    return spans;
}

std::vector<Mention> detect_mentions(const Sentence& sentence, const Gazetteer* gazetteer, PersonTagger* tagger) {
    const std::string_view s = sentence.text;
    const auto tokens = text::tokenize(s);
    std::vector<bool> person(tokens.size(), false);

    if (tagger != nullptr) {
        for (const auto& [b, e] : tagger->person_spans(s)) {
            for (std::size_t i = 0; i < tokens.size(); ++i) {
                if (tokens[i].is_word && tokens[i].begin >= b && tokens[i].end <= e) person[i] = true;
            }
        }
    } else {
        auto candidate = [&](std::size_t i) {
            const auto w = tokens[i].view(s);
            return tokens[i].is_word && !text::is_character_id(w) && text::is_capitalized(w) &&
                   !title_or_function_word(w);
        };
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            if (!tokens[i].is_word) continue;
            const auto w = tokens[i].view(s);
            if (text::is_character_id(w)) continue;
            if (gazetteer != nullptr && gazetteer->contains(w)) {
                person[i] = true;
                continue;
            }
            if (!candidate(i)) continue;
            if (!opens_clause(tokens, i, s)) {
                person[i] = true;
            } else if (i + 1 < tokens.size() && candidate(i + 1) && !opens_clause(tokens, i + 1, s)) {
                // "Harry James Potter smiled": a capitalized run opening the sentence.
                person[i] = true;
            }
        }
    }

    std::vector<Mention> mentions;
    for (std::size_t i = 0; i < tokens.size();) {
        if (!person[i]) {
            ++i;
            continue;
        }
        std::size_t j = i + 1;
        while (j < tokens.size() && person[j]) ++j;
        Mention m;
        m.sentence = sentence.id;
        m.first_token = i;
        m.last_token = j;
        m.begin = tokens[i].begin;
        m.end = tokens[j - 1].end;
        m.surface = std::string(s.substr(m.begin, m.end - m.begin));
        mentions.push_back(std::move(m));
        i = j;
    }
    return mentions;
}

double normalized_levenshtein(std::string_view a, std::string_view b) {
    const auto x = text::to_u32(a);
    const auto y = text::to_u32(b);
    const std::size_t longest = std::max(x.size(), y.size());
    if (longest == 0) return 0.0;
    std::vector<std::size_t> prev(y.size() + 1);
    std::vector<std::size_t> cur(y.size() + 1);
    std::iota(prev.begin(), prev.end(), std::size_t{0});
    for (std::size_t i = 1; i <= x.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= y.size(); ++j) {
            const std::size_t sub = prev[j - 1] + (x[i - 1] == y[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return static_cast<double>(prev[y.size()]) / static_cast<double>(longest);
}

double name_distance(std::string_view a, std::string_view b) {
    if (a == b) return 0.0;
    double best = normalized_levenshtein(a, b);
    const auto ta = name_tokens(a);
    const auto tb = name_tokens(b);
    if (ta.empty() || tb.empty()) return best;

    bool guard = false;
    if (ta.size() < tb.size()) {
        guard = token_subset(ta, tb);
    } else if (tb.size() < ta.size()) {
        guard = token_subset(tb, ta);
    } else {
        guard = token_subset(ta, tb) || token_subset(tb, ta);
    }
    if (!guard) {
        for (const auto& x : ta) {
            for (const auto& y : tb) {
                if (abbreviates(x, y) || abbreviates(y, x)) guard = true;
            }
        }
    }
    if (guard) best = std::min(best, normalized_levenshtein(longest_token(ta), longest_token(tb)));
    return best;
}

std::string partition_key(std::string_view surface) {
    if (surface.empty()) return {};
    std::size_t pos = 0;
    text::next_code_point(surface, pos);
    return text::to_lower(surface.substr(0, pos));
}

AliasTable dealias_surfaces(const std::map<std::string, std::size_t>& frequency, const DealiasConfig& config) {
    config.validate();
    auto freq_of = [&](const std::string& s) { return frequency.at(s); };

    // Phase 1: density clustering inside each initial-letter partition.
    std::map<std::string, std::vector<std::string>> partitions;
    for (const auto& [surface, _] : frequency) partitions[partition_key(surface)].push_back(surface);

    std::vector<Group> clusters;
    std::vector<std::string> unassigned;
    for (const auto& [key, names] : partitions) {
        const auto labels = density_cluster(
            names.size(), [&](std::size_t i, std::size_t j) { return name_distance(names[i], names[j]); },
            config.epsilon, config.min_pts);
        const int n_clusters = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
        std::vector<Group> local(static_cast<std::size_t>(std::max(n_clusters, 0)));
        for (std::size_t i = 0; i < names.size(); ++i) {
            if (labels[i] == kNoise) {
                unassigned.push_back(names[i]);
            } else {
                local[static_cast<std::size_t>(labels[i])].members.push_back(names[i]);
            }
        }
        for (auto& g : local) clusters.push_back(std::move(g));
    }
    for (auto& g : clusters) {
        std::sort(g.members.begin(), g.members.end());
        for (const auto& m : g.members) g.frequency += freq_of(m);
    }
    std::sort(clusters.begin(), clusters.end(),
              [](const Group& a, const Group& b) { return a.members.front() < b.members.front(); });

    // Phase 2: attach leftovers to phase-1 clusters, by exact token first,
    // otherwise by name distance.
    std::vector<std::vector<std::string>> attached(clusters.size());
    std::vector<std::string> leftovers;
    for (const auto& surface : unassigned) {
        const auto tokens = name_tokens(surface);
        std::optional<std::size_t> chosen;
        for (std::size_t c = 0; c < clusters.size(); ++c) {
            const bool hit = std::any_of(clusters[c].members.begin(), clusters[c].members.end(),
                                         [&](const std::string& m) { return is_token_run_of(tokens, name_tokens(m)); });
            if (hit && (!chosen || clusters[c].frequency > clusters[*chosen].frequency)) chosen = c;
        }
        if (!chosen) {
            double best = 0.0;
            for (std::size_t c = 0; c < clusters.size(); ++c) {
                double d = 1.0;
                for (const auto& m : clusters[c].members) d = std::min(d, name_distance(surface, m));
                if (d > config.attach_threshold) continue;
                if (!chosen || d < best || (d == best && clusters[c].frequency > clusters[*chosen].frequency)) {
                    chosen = c;
                    best = d;
                }
            }
        }
        if (chosen) {
            attached[*chosen].push_back(surface);
        } else {
            leftovers.push_back(surface);
        }
    }
    for (std::size_t c = 0; c < clusters.size(); ++c) {
        for (auto& s : attached[c]) clusters[c].members.push_back(std::move(s));
    }

    // Phase 3: singletons.
    for (const auto& s : leftovers) clusters.push_back(Group{{s}, freq_of(s)});
    return assemble(std::move(clusters), frequency);
}

AliasTable dealias(std::span<const Mention> mentions, const DealiasConfig& config) {
    if (mentions.empty()) throw std::invalid_argument("dealias requires at least one mention");
    std::map<std::string, std::size_t> frequency;
    for (const auto& m : mentions) ++frequency[m.surface];
    return dealias_surfaces(frequency, config);
}

std::vector<std::pair<std::string, std::string>> parse_alias_overrides(std::string_view content) {
    std::vector<std::pair<std::string, std::string>> out;
    std::size_t line_no = 0;
    for (const auto& raw : text::split(content, '\n')) {
        ++line_no;
        const auto line = text::trim(raw);
        if (line.empty() || line.front() == '#') continue;
        const auto fields = text::split(line, '\t');
        if (fields.size() != 2 || !text::is_character_id(text::trim(fields[1])) || text::trim(fields[0]).empty())
            throw std::invalid_argument("malformed alias override on line " + std::to_string(line_no));
        out.emplace_back(std::string(text::trim(fields[0])), std::string(text::trim(fields[1])));
    }
    return out;
}

std::vector<std::pair<std::string, std::string>> read_alias_overrides(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot read alias override file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_alias_overrides(buf.str());
}

void apply_alias_overrides(AliasTable& table, std::span<const std::pair<std::string, std::string>> overrides) {
    for (const auto& [surface, id] : overrides) {
        for (auto& c : table.characters) {
            std::erase(c.aliases, surface);
        }
        auto it = std::find_if(table.characters.begin(), table.characters.end(),
                               [&](const Character& c) { return c.id == id; });
        if (it == table.characters.end()) {
            table.characters.push_back(Character{id, surface, {}, 0});
            it = std::prev(table.characters.end());
        }
        it->aliases.push_back(surface);
        std::sort(it->aliases.begin(), it->aliases.end());
        if (!table.frequency.contains(surface)) table.frequency[surface] = 0;
    }
    std::erase_if(table.characters, [](const Character& c) { return c.aliases.empty(); });
    for (auto& c : table.characters) {
        c.count = 0;
        for (const auto& a : c.aliases) c.count += table.frequency[a];
        c.canonical = choose_canonical(c.aliases, table.frequency);
    }
    std::sort(table.characters.begin(), table.characters.end(),
              [](const Character& a, const Character& b) { return text::character_id_less(a.id, b.id); });
}

std::string canonicalize_text(std::string_view s, const AliasTable& table) {
    // Index surfaces by their first token; longest surface first within a bucket.
    std::map<std::string, std::vector<std::pair<std::string, std::string>>, std::less<>> index;
    for (const auto& c : table.characters) {
        for (const auto& alias : c.aliases) {
            const auto toks = text::tokenize(alias);
            if (toks.empty()) continue;
            index[std::string(toks.front().view(alias))].emplace_back(alias, c.id);
        }
    }
    for (auto& [_, bucket] : index) {
        std::sort(bucket.begin(), bucket.end(), [](const auto& a, const auto& b) {
            if (a.first.size() != b.first.size()) return a.first.size() > b.first.size();
            return a.first < b.first;
        });
    }

    const auto tokens = text::tokenize(s);
    std::string out;
    std::size_t copied = 0;
    std::size_t skip_until = 0;
    for (const auto& tok : tokens) {
        if (tok.begin < skip_until || !tok.is_word) continue;
        const auto it = index.find(tok.view(s));
        if (it == index.end()) continue;
        for (const auto& [alias, id] : it->second) {
            if (s.substr(tok.begin, alias.size()) != alias) continue;
            const std::size_t end = tok.begin + alias.size();
            if (end < s.size()) {
                std::size_t pos = end;
                if (text::is_word_char(text::next_code_point(s, pos))) continue;
            }
            out.append(s.substr(copied, tok.begin - copied));
            out += id;
            copied = end;
            skip_until = end;
            break;
        }
    }
    out.append(s.substr(copied));
    return out;
}

std::vector<Sentence> canonicalize(std::span<const Sentence> sentences, const AliasTable& table) {
    std::vector<Sentence> out;
    out.reserve(sentences.size());
    for (const auto& s : sentences) {
        Sentence c = s;
        c.text = canonicalize_text(s.text, table);
        out.push_back(std::move(c));
    }
    return out;
}

}  // namespace novelgraph
