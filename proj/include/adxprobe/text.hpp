#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace adxprobe {

/// Word list for greedy longest-match segmentation of CJK runs.
class Dictionary {
public:
    Dictionary() = default;
    explicit Dictionary(const std::vector<std::string>& words);

    // One word per line; '#' starts a comment line.
    static Dictionary load(const std::filesystem::path& path);

    void add(std::string_view word);
    bool contains(std::u32string_view word) const;
    std::size_t max_length() const { return max_length_; }
    std::size_t size() const { return words_.size(); }

private:
    std::unordered_set<std::u32string> words_;
    std::size_t max_length_ = 1;
};

struct TokenizedDocument {
    std::string url;
    std::vector<std::string> tokens;
    std::map<std::string, int> term_counts;

    std::size_t length() const { return tokens.size(); }
};

TokenizedDocument make_document(std::string url, std::vector<std::string> tokens);

/// A start tag found in markup. Attribute names are lowercased.
struct HtmlTag {
    std::string name;
    std::map<std::string, std::string> attributes;
    std::size_t begin = 0; // offset of '<'
    std::size_t end = 0;   // offset one past '>'

    std::optional<std::string> attr(const std::string& key) const;
};

std::vector<HtmlTag> scan_tags(std::string_view html);

// Visible text: tags, comments, script and style bodies removed; entities decoded;
// whitespace collapsed. With `drop_title` the <title> text is removed as well.
std::string strip_markup(std::string_view html, bool drop_title = false);

std::optional<std::string> extract_title(std::string_view html);

std::string decode_entities(std::string_view text);

// Latin/digit runs lowercased; CJK runs split by greedy longest match falling
// back to single characters; everything else separates tokens.
std::vector<std::string> tokenize(std::string_view text, const Dictionary& dict);

TokenizedDocument extract_text(std::string_view html, const Dictionary& dict, std::string url = {});

// Lowercases Latin letters and trims surrounding whitespace.
std::string normalize_term(std::string_view term);

} // namespace adxprobe
