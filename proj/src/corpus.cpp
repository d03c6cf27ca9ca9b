#include "novelgraph/corpus.hpp"

#include <unicode/normalizer2.h>
#include <unicode/unistr.h>

#include <array>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include "novelgraph/text.hpp"

namespace novelgraph {

namespace {

std::string to_nfc(std::string_view s) {
    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
    if (U_FAILURE(status)) throw CorpusError("unicode normalizer unavailable");
    const auto input = icu::UnicodeString::fromUTF8(icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
    const icu::UnicodeString normalized = nfc->normalize(input, status);
    if (U_FAILURE(status)) throw CorpusError("unicode normalization failed");
    std::string out;
    normalized.toUTF8String(out);
    return out;
}

bool is_blank(std::string_view line) { return text::trim(line).empty(); }

bool is_abbreviation(std::string_view word) {
    static constexpr std::array<std::string_view, 5> kTitles{"Mr", "Mrs", "Dr", "St", "Prof"};
    for (const auto t : kTitles) {
        if (word == t) return true;
    }
    if (text::code_point_length(word) == 1) return text::is_capitalized(word);
    return false;
}

// The alphabetic word immediately preceding byte offset `pos`.
std::string_view word_before(std::string_view s, std::size_t pos) {
    std::size_t b = pos;
    while (b > 0) {
        const auto byte = static_cast<unsigned char>(s[b - 1]);
        if (!std::isalpha(byte) && (byte & 0x80) == 0) break;
        --b;
    }
    return s.substr(b, pos - b);
}

}  // namespace

std::string normalize_text(std::string_view raw) {
    std::string unified;
    unified.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (raw[i] == '\r') {
            unified.push_back('\n');
            if (i + 1 < raw.size() && raw[i + 1] == '\n') ++i;
        } else if (raw[i] == '\t') {
            unified.push_back(' ');
        } else {
            unified.push_back(raw[i]);
        }
    }
    const std::string nfc = to_nfc(unified);

    std::string out;
    std::string paragraph;
    auto flush = [&] {
        if (paragraph.empty()) return;
        if (!out.empty()) out += "\n\n";
        out += paragraph;
        paragraph.clear();
    };
    for (const auto& line : text::split(nfc, '\n')) {
        if (is_blank(line)) {
            flush();
            continue;
        }
        if (!paragraph.empty()) paragraph.push_back(' ');
        paragraph += text::trim(line);
    }
    flush();
    return out;
}

Corpus load_corpus(std::span<const std::filesystem::path> paths) {
    Corpus corpus;
    std::map<std::string, int> stems;
    for (const auto& path : paths) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw CorpusError("cannot read input file: " + path.string());
        std::ostringstream buf;
        buf << in.rdbuf();
        if (in.bad()) throw CorpusError("error while reading input file: " + path.string());

        Document doc;
        doc.raw_text = normalize_text(buf.str());
        if (doc.raw_text.empty()) throw CorpusError("input file is empty: " + path.string());

        const std::string stem = path.stem().string();
        const int seen = ++stems[stem];
        doc.doc_id = seen == 1 ? stem : stem + "_" + std::to_string(seen);
        doc.title = stem;
        doc.source_path = path.string();
        corpus.documents.push_back(std::move(doc));
    }
    return corpus;
}

std::vector<Sentence> segment_sentences(const Document& document) {
    const std::string_view s = document.raw_text;
    std::vector<Sentence> out;
    std::size_t start = std::string_view::npos;  // first byte of the open sentence
    std::size_t last_non_space = 0;              // one past the last non-space byte

    auto close = [&](std::size_t end) {
        if (start == std::string_view::npos) return;
        Sentence sent;
        sent.id = {document.doc_id, out.size()};
        sent.begin = start;
        sent.end = end;
        sent.text = std::string(s.substr(start, end - start));
        out.push_back(std::move(sent));
        start = std::string_view::npos;
    };

    std::size_t pos = 0;
    while (pos < s.size()) {
        const std::size_t cp_start = pos;
        const char32_t c = text::next_code_point(s, pos);
        if (text::is_space(c)) {
            // Paragraph break.
            if (c == U'\n' && pos < s.size() && s[pos] == '\n') close(last_non_space);
            continue;
        }
        if (start == std::string_view::npos) start = cp_start;
        last_non_space = pos;
        if (c != U'.' && c != U'!' && c != U'?') continue;

        std::size_t run_end = pos;
        while (run_end < s.size() && (s[run_end] == '.' || s[run_end] == '!' || s[run_end] == '?')) ++run_end;
        const bool lone_period = c == U'.' && run_end == pos;
        pos = run_end;
        last_non_space = run_end;
        if (run_end >= s.size()) break;

        std::size_t probe = run_end;
        bool saw_space = false;
        bool paragraph_break = false;
        while (probe < s.size()) {
            std::size_t next = probe;
            const char32_t d = text::next_code_point(s, next);
            if (!text::is_space(d)) break;
            if (d == U'\n' && next < s.size() && s[next] == '\n') paragraph_break = true;
            saw_space = true;
            probe = next;
        }
        if (!saw_space || probe >= s.size()) continue;
        if (paragraph_break) continue;  // handled by the whitespace branch

        std::size_t after = probe;
        const char32_t next_char = text::next_code_point(s, after);
        if (!text::is_upper(next_char) && !text::is_quote(next_char)) continue;
        if (lone_period && is_abbreviation(word_before(s, run_end - 1))) continue;
        close(run_end);
    }
    close(last_non_space);
    return out;
}

std::vector<Sentence> segment_corpus(const Corpus& corpus) {
    std::vector<Sentence> all;
    for (const auto& doc : corpus.documents) {
        auto sentences = segment_sentences(doc);
        all.insert(all.end(), std::make_move_iterator(sentences.begin()), std::make_move_iterator(sentences.end()));
    }
    return all;
}

std::string sentences_to_tsv(std::span<const Sentence> sentences) {
    std::string out;
    for (const auto& s : sentences) {
        out += s.id.doc_id;
        out += '\t';
        out += std::to_string(s.id.index);
        out += '\t';
        out += s.text;
        out += '\n';
    }
    return out;
}

std::vector<Sentence> sentences_from_tsv(std::string_view tsv) {
    std::vector<Sentence> out;
    std::size_t line_no = 0;
    for (const auto& line : text::split(tsv, '\n')) {
        ++line_no;
        if (line.empty()) continue;
        const auto fields = text::split(line, '\t');
        if (fields.size() != 3) throw CorpusError("malformed sentence table line " + std::to_string(line_no));
        Sentence s;
        s.id.doc_id = fields[0];
        try {
            s.id.index = std::stoul(fields[1]);
        } catch (const std::exception&) {
            throw CorpusError("malformed sentence index on line " + std::to_string(line_no));
        }
        s.text = fields[2];
        s.end = s.text.size();
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace novelgraph
