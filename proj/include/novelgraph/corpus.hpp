#pragma once

#include <compare>
#include <cstddef>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace novelgraph {

class CorpusError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Document {
    std::string doc_id;
    std::string title;
    std::string raw_text;  // NFC, paragraph-internal line breaks collapsed
    std::string source_path;
};

struct SentenceId {
    std::string doc_id;
    std::size_t index = 0;

    auto operator<=>(const SentenceId&) const = default;
    std::string str() const { return doc_id + ":" + std::to_string(index); }
};

struct Sentence {
    SentenceId id;
    std::string text;
    // Byte span into the owning document's raw_text. For canonicalized
    // sentences the span still refers to the original text.
    std::size_t begin = 0;
    std::size_t end = 0;
};

struct Corpus {
    std::vector<Document> documents;
};

// NFC-normalizes, unifies line endings, collapses single line breaks inside a
// paragraph to one space and tabs to spaces. Paragraphs are joined by a blank
// line.
std::string normalize_text(std::string_view raw);

// One Document per path, in input order. doc_id is the file stem, suffixed
// with "_2", "_3", ... when stems collide.
Corpus load_corpus(std::span<const std::filesystem::path> paths);

// Deterministic rule-based segmentation:
//  - split after a run of . ! ? that is followed by whitespace and then an
//    uppercase letter or a quote mark;
//  - a lone '.' after Mr, Mrs, Dr, St, Prof or a single capital never splits;
//  - a blank line (paragraph break) always splits.
std::vector<Sentence> segment_sentences(const Document& document);
std::vector<Sentence> segment_corpus(const Corpus& corpus);

// doc_id<TAB>index<TAB>text, one sentence per line.
std::string sentences_to_tsv(std::span<const Sentence> sentences);
std::vector<Sentence> sentences_from_tsv(std::string_view tsv);

}  // namespace novelgraph
