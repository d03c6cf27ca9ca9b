#include "novelgraph/labeling.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "novelgraph/text.hpp"

namespace novelgraph {

using nlohmann::json;

std::string to_string(SummarySource source) { return source == SummarySource::provider ? "provider" : "medoid"; }

std::string WireSummarizer::summarize(std::span<const std::string> sentences) {
    const auto r = channel_->call_one({{"op", "summarize"}, {"sentences", std::vector<std::string>(sentences.begin(), sentences.end())}});
    if (!r.contains("summary") || !r["summary"].is_string())
        throw ProviderError("protocol violation: summarize response without summary");
    auto s = r["summary"].get<std::string>();
    if (text::trim(s).empty()) throw ProviderError("provider returned an empty summary");
    return s;
}

InstanceIndex index_instances(std::span<const RelationalInstance> instances) {
    InstanceIndex index;
    for (const auto& i : instances) index.emplace(i.instance_id, &i);
    return index;
}

namespace {

const RelationalInstance& lookup(const InstanceIndex& instances, std::string_view id) {
    const auto it = instances.find(id);
    if (it == instances.end()) throw std::invalid_argument("unknown instance id: " + std::string(id));
    return *it->second;
}

}  // namespace

ClusterSummary summarize_cluster(const RelationCluster& cluster, const InstanceIndex& instances, Summarizer* summarizer) {
    if (cluster.members.empty()) throw std::invalid_argument("cannot summarize an empty cluster");
    ClusterSummary out;
    out.cluster_id = cluster.cluster_id;
    if (summarizer != nullptr) {
        std::vector<std::string> sentences;
        std::set<SentenceId> seen;
        for (const auto& id : cluster.members) {
            const auto& inst = lookup(instances, id);
            if (seen.insert(inst.sentence).second) sentences.push_back(inst.full_text);
        }
        try {
            out.text = summarizer->summarize(sentences);
            out.source = SummarySource::provider;
            return out;
        } catch (const ProviderError& e) {
            out.fallback_reason = e.what();
        }
    }
    const auto& medoid = lookup(instances, cluster.medoid.empty() ? cluster.members.front() : cluster.medoid);
    out.text = medoid.full_text;
    out.source = SummarySource::medoid;
    out.source_instance_id = medoid.instance_id;
    return out;
}

namespace {

// Base forms of common narrative verbs.
const std::unordered_set<std::string_view>& verb_lexicon() {
    static const std::unordered_set<std::string_view> lexicon = {
        "accept", "accompany", "accuse", "act", "add", "admire", "admit", "adore", "advise", "agree", "allow",
        "amuse", "announce", "annoy", "answer", "apologize", "appear", "applaud", "apply", "approach", "argue",
        "arrest", "arrive", "ask", "assist", "attack", "avoid", "bang", "bark", "bathe", "battle", "be", "beat",
        "beckon", "become", "beg", "begin", "believe", "belong", "betray", "bite", "blame", "bless", "blink",
        "blush", "boast", "bow", "break", "breathe", "bring", "brush", "build", "bully", "burn", "bury", "buy",
        "call", "calm", "care", "carry", "catch", "challenge", "change", "charm", "chase", "chat", "cheat",
        "check", "cheer", "choose", "chuckle", "clap", "clasp", "climb", "cling", "close", "comfort", "come",
        "command", "complain", "confess", "confront", "congratulate", "consider", "console", "continue", "copy",
        "correct", "cough", "count", "court", "cover", "crawl", "cry", "cuddle", "curse", "cut", "dance", "dare",
        "deceive", "decide", "defend", "deny", "describe", "deserve", "despise", "die", "dine", "disappear",
        "discover", "dislike", "do", "drag", "draw", "dream", "dress", "drink", "drive", "drop", "duel", "eat",
        "embrace", "encourage", "engage", "enjoy", "enter", "envy", "escape", "examine", "excuse", "expect",
        "explain", "face", "fall", "fear", "feed", "feel", "fetch", "fight", "find", "finish", "flee", "fling",
        "float", "fly", "follow", "forbid", "forget", "forgive", "free", "frighten", "frown", "gasp", "gaze",
        "get", "giggle", "give", "glance", "glare", "glide", "go", "grab", "grow", "greet", "grin", "grip", "groan",
        "growl", "grumble", "grunt", "guard", "guess", "guide", "hand", "hang", "happen", "harm", "hate", "have",
        "head", "hear", "help", "hesitate", "hide", "hit", "hold", "hope", "hug", "hum", "hurry", "hurt",
        "ignore", "imagine", "inform", "insist", "insult", "interrupt", "introduce", "invite", "join", "joke",
        "jump", "keep", "kick", "kill", "kiss", "kneel", "knock", "know", "laugh", "lead", "lean", "learn",
        "leave", "lend", "let", "lie", "lift", "like", "listen", "live", "look", "lose", "love", "make", "marry", "meet",
        "mention", "mind", "miss", "mock", "mourn", "move", "mumble", "murmur", "mutter", "nod", "notice", "obey",
        "offer", "open", "order", "owe", "pass", "pat", "pause", "pay", "peer", "persuade", "pick", "pinch",
        "pity", "plan", "play", "plead", "please", "point", "pour", "praise", "pray", "prefer", "prepare",
        "pretend", "promise", "protect", "protest", "pull", "punch", "punish", "push", "put", "question", "quarrel",
        "raise", "reach", "read", "realize", "receive", "recognize", "refuse", "remember", "remind", "repeat",
        "reply", "rescue", "resent", "rest", "return", "reveal", "ride", "ring", "rise", "roar", "run", "rush",
        "save", "say", "scold", "scowl", "scream", "search", "see", "seek", "seem", "seize", "send", "serve",
        "shake", "share", "shout", "shove", "show", "shriek", "shrug", "shut", "sigh", "sing", "sit", "slap",
        "sidle", "sleep", "slip", "smile", "smirk", "snap", "snarl", "sneer", "sniff", "snort", "sob", "speak", "spin",
        "spot", "stand", "stare", "start", "stay", "steal", "step", "stop", "stride", "strike", "stroke",
        "struggle", "study", "stumble", "stutter", "suggest", "support", "suppose", "surprise", "swear",
        "tackle", "take", "talk", "teach", "tease", "tell", "thank", "think", "threaten", "throw", "tickle",
        "touch", "trust", "try", "turn", "understand", "visit", "wait", "wake", "walk", "wander", "want", "warn",
        "watch", "wave", "weep", "welcome", "whisper", "win", "wink", "wish", "wonder", "worry", "write", "yell",
    };
    return lexicon;
}

// Irregular inflections. Keys are never themselves lexicon entries.
const std::unordered_map<std::string_view, std::string_view>& irregular() {
    static const std::unordered_map<std::string_view, std::string_view> table = {
        {"am", "be"}, {"is", "be"}, {"are", "be"}, {"was", "be"}, {"were", "be"}, {"been", "be"},
        {"being", "be"}, {"has", "have"}, {"had", "have"}, {"having", "have"}, {"does", "do"}, {"did", "do"},
        {"done", "do"}, {"doing", "do"}, {"said", "say"}, {"says", "say"}, {"went", "go"}, {"gone", "go"},
        {"goes", "go"}, {"came", "come"}, {"saw", "see"}, {"seen", "see"}, {"took", "take"}, {"taken", "take"},
        {"gave", "give"}, {"given", "give"}, {"got", "get"}, {"gotten", "get"}, {"made", "make"},
        {"knew", "know"}, {"known", "know"}, {"thought", "think"}, {"told", "tell"}, {"found", "find"},
        {"felt", "feel"}, {"left", "leave"}, {"kept", "keep"}, {"held", "hold"}, {"stood", "stand"},
        {"understood", "understand"}, {"heard", "hear"}, {"met", "meet"}, {"ran", "run"}, {"sat", "sit"},
        {"spoke", "speak"}, {"spoken", "speak"}, {"brought", "bring"}, {"bought", "buy"}, {"caught", "catch"},
        {"taught", "teach"}, {"fought", "fight"}, {"sought", "seek"}, {"began", "begin"}, {"begun", "begin"},
        {"became", "become"}, {"broke", "break"}, {"broken", "break"}, {"chose", "choose"}, {"chosen", "choose"},
        {"drew", "draw"}, {"drawn", "draw"}, {"drank", "drink"}, {"drunk", "drink"}, {"drove", "drive"},
        {"driven", "drive"}, {"ate", "eat"}, {"eaten", "eat"}, {"fell", "fall"}, {"fallen", "fall"},
        {"fed", "feed"}, {"fled", "flee"}, {"flung", "fling"}, {"flew", "fly"}, {"flown", "fly"},
        {"forbade", "forbid"}, {"forbidden", "forbid"}, {"forgot", "forget"}, {"forgotten", "forget"},
        {"forgave", "forgive"}, {"forgiven", "forgive"}, {"grew", "grow"}, {"hid", "hide"}, {"hidden", "hide"},
        {"hung", "hang"}, {"knelt", "kneel"}, {"led", "lead"}, {"lent", "lend"}, {"lay", "lie"}, {"lain", "lie"},
        {"lost", "lose"}, {"paid", "pay"}, {"rode", "ride"}, {"ridden", "ride"}, {"rang", "ring"},
        {"rung", "ring"}, {"rose", "rise"}, {"risen", "rise"}, {"sent", "send"}, {"shook", "shake"},
        {"shaken", "shake"}, {"slept", "sleep"}, {"sang", "sing"}, {"sung", "sing"}, {"stole", "steal"},
        {"stolen", "steal"}, {"strode", "stride"}, {"struck", "strike"}, {"swore", "swear"}, {"sworn", "swear"},
        {"threw", "throw"}, {"thrown", "throw"}, {"woke", "wake"}, {"woken", "wake"}, {"wept", "weep"},
        {"won", "win"}, {"wrote", "write"}, {"written", "write"}, {"bit", "bite"}, {"bitten", "bite"},
        {"clung", "cling"}, {"spun", "spin"}, {"dreamt", "dream"}, {"learnt", "learn"}, {"burnt", "burn"},
        {"dying", "die"}, {"lying", "lie"}, {"beaten", "beat"},
    };
    return table;
}

const std::unordered_set<std::string_view>& auxiliaries() {
    static const std::unordered_set<std::string_view> aux = {
        "be", "am", "is", "are", "was", "were", "been", "being", "have", "has", "had", "having",
        "do", "does", "did", "done", "doing",
    };
    return aux;
}

const std::unordered_set<std::string_view>& particles() {
    static const std::unordered_set<std::string_view> p = {
        "to", "at", "with", "about", "for", "on", "onto", "in", "into", "up", "down", "out", "over", "off",
        "away", "back", "from", "after", "upon", "toward", "towards", "through", "around", "across", "past",
        "by", "along",
    };
    return p;
}

const std::unordered_set<std::string_view>& determiners() {
    static const std::unordered_set<std::string_view> d = {
        "the", "a", "an", "this", "that", "these", "those", "his", "her", "its", "their", "our", "my", "your",
        "some", "any", "no", "every", "each", "another",
    };
    return d;
}

bool lexical(std::string_view w) { return verb_lexicon().contains(w); }

bool is_consonant(char c) { return std::string_view("aeiou").find(c) == std::string_view::npos; }

// Resolves a stripped stem ("smil", "grinn", "walk") to a lexicon lemma.
std::optional<std::string> resolve_stem(const std::string& stem) {
    if (stem.size() < 2) return std::nullopt;
    if (lexical(stem)) return stem;
    if (lexical(stem + "e")) return stem + "e";
    const auto n = stem.size();
    if (n >= 3 && stem[n - 1] == stem[n - 2] && is_consonant(stem[n - 1])) {
        auto undoubled = stem.substr(0, n - 1);
        if (lexical(undoubled)) return undoubled;
    }
    return std::nullopt;
}

bool ends_with(std::string_view s, std::string_view suffix) { return s.size() > suffix.size() && s.ends_with(suffix); }

}  // namespace

bool is_verb_lemma(std::string_view word) { return lexical(word); }
bool is_auxiliary(std::string_view word) { return auxiliaries().contains(word); }
bool is_particle(std::string_view word) { return particles().contains(word); }

std::string lemmatize(std::string_view word) {
    const std::string w(word);
    if (const auto it = irregular().find(w); it != irregular().end()) return std::string(it->second);
    if (lexical(w)) return w;
    if (ends_with(w, "ies") || ends_with(w, "ied")) {
        const auto y = w.substr(0, w.size() - 3) + "y";
        if (lexical(y)) return y;
    }
    if (ends_with(w, "ing")) {
        if (const auto r = resolve_stem(w.substr(0, w.size() - 3))) return *r;
    }
    if (ends_with(w, "ed")) {
        if (const auto r = resolve_stem(w.substr(0, w.size() - 2))) return *r;
    }
    if (ends_with(w, "es")) {
        const auto stem = w.substr(0, w.size() - 2);
        if (lexical(stem)) return stem;
    }
    if (ends_with(w, "s") && !ends_with(w, "ss")) {
        const auto stem = w.substr(0, w.size() - 1);
        if (lexical(stem)) return stem;
    }
    return w;
}

std::vector<VerbToken> find_verbs(std::string_view phrase) {
    const auto tokens = text::tokenize(phrase);
    std::vector<VerbToken> verbs;
    std::string previous;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (!tokens[i].is_word) {
            previous.clear();
            continue;
        }
        const auto surface = text::to_lower(tokens[i].view(phrase));
        if (text::is_character_id(tokens[i].view(phrase))) {
            previous.clear();
            continue;
        }
        const bool after_determiner = determiners().contains(previous);
        previous = surface;
        if (after_determiner) continue;
        const auto lemma = lemmatize(surface);
        const bool inflected = surface != lemma || irregular().contains(surface);
        if (lexical(lemma) && (surface == lemma || inflected)) verbs.push_back({surface, lemma, i});
    }
    const bool all_auxiliary = std::all_of(verbs.begin(), verbs.end(), [](const VerbToken& v) { return is_auxiliary(v.surface) || is_auxiliary(v.lemma); });
    if (!all_auxiliary) {
        std::erase_if(verbs, [](const VerbToken& v) { return is_auxiliary(v.surface) || is_auxiliary(v.lemma); });
    }
    return verbs;
}

std::string label_phrase(const ClusterSummary& summary, const RelationalInstance& instance) {
    const auto occurrences = character_occurrences(summary.text);
    std::vector<CharacterOccurrence> firsts;
    for (const auto& o : occurrences) {
        if (std::none_of(firsts.begin(), firsts.end(), [&](const CharacterOccurrence& f) { return f.id == o.id; }))
            firsts.push_back(o);
    }
    if (firsts.size() == 2) return summary.text.substr(firsts[0].end, firsts[1].begin - firsts[0].end);
    return instance.inter_text;
}

RelationLabel extract_label(const ClusterSummary& summary, const RelationalInstance& instance) {
    RelationLabel out;
    out.cluster_id = summary.cluster_id;
    const auto phrase = label_phrase(summary, instance);
    const auto verbs = find_verbs(phrase);
    if (verbs.empty()) {
        out.label = std::string(kUnlabeled);
        out.unlabeled = true;
        return out;
    }

    std::vector<std::string> parts;
    for (const auto& v : verbs) {
        out.lemmas.push_back(v.lemma);
        parts.push_back(v.lemma);
    }
    // A progressive verb directly followed by a particle keeps its surface
    // form and the particle ("talking_to").
    const auto tokens = text::tokenize(phrase);
    const auto& last = verbs.back();
    const auto next = last.token_index + 1;
    if (last.surface.ends_with("ing") && next < tokens.size() && tokens[next].is_word) {
        const auto particle = text::to_lower(tokens[next].view(phrase));
        if (is_particle(particle)) parts.back() = last.surface + "_" + particle;
    }

    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i > 0) out.label += '_';
        for (const char c : parts[i]) {
            if ((c >= 'a' && c <= 'z') || c == '_') out.label += c;
        }
    }
    return out;
}

namespace {

std::string single_line(std::string_view s) {
    std::string out(s);
    for (char& c : out) {
        if (c == '\t' || c == '\n' || c == '\r') c = ' ';
    }
    return out;
}

}  // namespace

std::string labels_to_tsv(std::span<const RelationLabel> labels, std::span<const ClusterSummary> summaries) {
    std::map<std::size_t, std::string> summary_of;
    for (const auto& s : summaries) summary_of[s.cluster_id] = s.text;
    std::vector<const RelationLabel*> ordered;
    for (const auto& l : labels) ordered.push_back(&l);
    std::sort(ordered.begin(), ordered.end(), [](const auto* a, const auto* b) { return a->cluster_id < b->cluster_id; });
    std::string out;
    for (const auto* l : ordered) {
        out += std::to_string(l->cluster_id) + '\t' + l->label + '\t' + single_line(summary_of[l->cluster_id]) + '\n';
    }
    return out;
}

std::vector<LabelRow> labels_from_tsv(std::string_view tsv) {
    std::vector<LabelRow> rows;
    for (const auto& line : text::split(tsv, '\n')) {
        if (line.empty()) continue;
        const auto fields = text::split(line, '\t');
        if (fields.size() != 3) throw std::invalid_argument("malformed label row: " + line);
        rows.push_back({std::stoul(fields[0]), fields[1], fields[2]});
    }
    return rows;
}

}  // namespace novelgraph
