#include "adxprobe/text.hpp"

#include "adxprobe/error.hpp"
#include "adxprobe/utf8.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

namespace adxprobe {

namespace {

std::u32string lower_u32(std::u32string_view in)
{
    std::u32string out;
    out.reserve(in.size());
    for (char32_t c : in)
        out.push_back(utf8::to_lower(c));
    return out;
}

bool ieq_at(std::string_view hay, std::size_t pos, std::string_view needle)
{
    if (pos + needle.size() > hay.size())
        return false;
    for (std::size_t i = 0; i < needle.size(); ++i)
        if (std::tolower(static_cast<unsigned char>(hay[pos + i])) != needle[i])
            return false;
    return true;
}

std::size_t ifind(std::string_view hay, std::string_view needle, std::size_t from)
{
    for (std::size_t i = from; i + needle.size() <= hay.size(); ++i)
        if (ieq_at(hay, i, needle))
            return i;
    return std::string_view::npos;
}

// Offset one past the '>' closing the tag that starts at `lt`, honouring quotes.
std::size_t tag_end(std::string_view html, std::size_t lt)
{
    char quote = 0;
    for (std::size_t i = lt + 1; i < html.size(); ++i) {
        const char c = html[i];
        if (quote) {
            if (c == quote)
                quote = 0;
        } else if (c == '"' || c == '\'') {
            quote = c;
        } else if (c == '>') {
            return i + 1;
        }
    }
    return html.size();
}

HtmlTag parse_tag(std::string_view html, std::size_t lt, std::size_t end)
{
    HtmlTag tag;
    tag.begin = lt;
    tag.end = end;
    std::string_view body = html.substr(lt + 1, end - lt - 1);
    if (body.ends_with(">"))
        body.remove_suffix(1);
    if (body.ends_with("/"))
        body.remove_suffix(1);
    std::size_t i = 0;
    while (i < body.size() && !std::isspace(static_cast<unsigned char>(body[i])))
        tag.name += static_cast<char>(std::tolower(static_cast<unsigned char>(body[i++])));
    while (i < body.size()) {
        while (i < body.size() && (std::isspace(static_cast<unsigned char>(body[i])) || body[i] == '/'))
            ++i;
        std::string key;
        while (i < body.size() && body[i] != '=' && !std::isspace(static_cast<unsigned char>(body[i])))
            key += static_cast<char>(std::tolower(static_cast<unsigned char>(body[i++])));
        while (i < body.size() && std::isspace(static_cast<unsigned char>(body[i])))
            ++i;
        std::string value;
        if (i < body.size() && body[i] == '=') {
            ++i;
            while (i < body.size() && std::isspace(static_cast<unsigned char>(body[i])))
                ++i;
            if (i < body.size() && (body[i] == '"' || body[i] == '\'')) {
                const char q = body[i++];
                const auto close = body.find(q, i);
                value = std::string(body.substr(i, close == std::string_view::npos ? std::string_view::npos : close - i));
                i = close == std::string_view::npos ? body.size() : close + 1;
            } else {
                while (i < body.size() && !std::isspace(static_cast<unsigned char>(body[i])))
                    value += body[i++];
            }
        }
        if (!key.empty())
            tag.attributes.emplace(std::move(key), decode_entities(value));
    }
    return tag;
}

} // namespace

Dictionary::Dictionary(const std::vector<std::string>& words)
{
    for (const auto& w : words)
        add(w);
}

Dictionary Dictionary::load(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw InputError("cannot read dictionary " + path.string());
    Dictionary dict;
    std::string line;
    while (std::getline(in, line)) {
        if (line.starts_with("#"))
            continue;
        dict.add(line);
    }
    return dict;
}

void Dictionary::add(std::string_view word)
{
    const std::string norm = normalize_term(word);
    if (norm.empty())
        return;
    auto cps = utf8::decode(norm);
    std::u32string w(cps.begin(), cps.end());
    max_length_ = std::max(max_length_, w.size());
    words_.insert(std::move(w));
}

bool Dictionary::contains(std::u32string_view word) const
{
    return words_.contains(std::u32string(word));
}

TokenizedDocument make_document(std::string url, std::vector<std::string> tokens)
{
    TokenizedDocument doc;
    doc.url = std::move(url);
    std::erase_if(tokens, [](const std::string& t) { return t.empty(); });
    for (const auto& t : tokens)
        ++doc.term_counts[t];
    doc.tokens = std::move(tokens);
    return doc;
}

std::optional<std::string> HtmlTag::attr(const std::string& key) const
{
    auto it = attributes.find(key);
    if (it == attributes.end())
        return std::nullopt;
    return it->second;
}

std::vector<HtmlTag> scan_tags(std::string_view html)
{
    std::vector<HtmlTag> tags;
    std::size_t i = 0;
    while ((i = html.find('<', i)) != std::string_view::npos) {
        if (html.substr(i, 4) == "<!--") {
            const auto close = html.find("-->", i + 4);
            i = close == std::string_view::npos ? html.size() : close + 3;
            continue;
        }
        if (i + 1 >= html.size() || !std::isalpha(static_cast<unsigned char>(html[i + 1]))) {
            ++i;
            continue;
        }
        const auto end = tag_end(html, i);
        HtmlTag tag = parse_tag(html, i, end);
        i = end;
        if (tag.name == "script" || tag.name == "style") {
            const auto close = ifind(html, "</" + tag.name, i);
            i = close == std::string_view::npos ? html.size() : close;
        }
        tags.push_back(std::move(tag));
    }
    return tags;
}

std::string decode_entities(std::string_view text)
{
    std::string out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] != '&') {
            out += text[i];
            continue;
        }
        const auto semi = text.find(';', i);
        if (semi == std::string_view::npos || semi - i > 10) {
            out += '&';
            continue;
        }
        const std::string_view name = text.substr(i + 1, semi - i - 1);
        std::string rep;
        if (name == "amp") rep = "&";
        else if (name == "lt") rep = "<";
        else if (name == "gt") rep = ">";
        else if (name == "quot") rep = "\"";
        else if (name == "apos") rep = "'";
        else if (name == "nbsp") rep = " ";
        else if (name.starts_with("#")) {
            try {
                const bool hex = name.size() > 1 && (name[1] == 'x' || name[1] == 'X');
                const unsigned long cp = std::stoul(std::string(name.substr(hex ? 2 : 1)), nullptr, hex ? 16 : 10);
                if (cp > 0 && cp <= 0x10FFFF)
                    rep = utf8::encode(static_cast<char32_t>(cp));
            } catch (const std::exception&) {
            }
        }
        if (rep.empty()) {
            out += '&';
            continue;
        }
        out += rep;
        i = semi;
    }
    return out;
}

std::string strip_markup(std::string_view html, bool drop_title)
{
    std::string raw;
    raw.reserve(html.size());
    std::size_t i = 0;
    while (i < html.size()) {
        const char c = html[i];
        if (c != '<') {
            raw += c;
            ++i;
            continue;
        }
        if (html.substr(i, 4) == "<!--") {
            const auto close = html.find("-->", i + 4);
            i = close == std::string_view::npos ? html.size() : close + 3;
            raw += ' ';
            continue;
        }
        const bool opening = i + 1 < html.size() && std::isalpha(static_cast<unsigned char>(html[i + 1]));
        const bool closing = i + 1 < html.size() && (html[i + 1] == '/' || html[i + 1] == '!' || html[i + 1] == '?');
        if (!opening && !closing) {
            raw += c;
            ++i;
            continue;
        }
        const auto end = tag_end(html, i);
        if (opening) {
            const HtmlTag tag = parse_tag(html, i, end);
            if (tag.name == "script" || tag.name == "style" || (drop_title && tag.name == "title")) {
                const auto close = ifind(html, "</" + tag.name, end);
                i = close == std::string_view::npos ? html.size() : tag_end(html, close);
                raw += ' ';
                continue;
            }
        }
        raw += ' ';
        i = end;
    }
    const std::string decoded = decode_entities(raw);
    std::string out;
    bool space = false;
    for (char ch : decoded) {
        if (std::isspace(static_cast<unsigned char>(ch))) {
            space = !out.empty();
            continue;
        }
        if (space)
            out += ' ';
        space = false;
        out += ch;
    }
    return out;
}

std::optional<std::string> extract_title(std::string_view html)
{
    for (const auto& tag : scan_tags(html)) {
        if (tag.name != "title")
            continue;
        const auto close = ifind(html, "</title", tag.end);
        std::string_view inner = html.substr(tag.end, close == std::string_view::npos ? std::string_view::npos : close - tag.end);
        std::string text = strip_markup(inner);
        if (text.empty())
            return std::nullopt;
        return text;
    }
    return std::nullopt;
}

std::vector<std::string> tokenize(std::string_view text, const Dictionary& dict)
{
    std::vector<std::string> tokens;
    const auto cps = utf8::decode(text);
    std::size_t i = 0;
    while (i < cps.size()) {
        const char32_t c = cps[i];
        if (utf8::is_word_char(c)) {
            std::u32string word;
            while (i < cps.size() && utf8::is_word_char(cps[i]))
                word.push_back(utf8::to_lower(cps[i++]));
            tokens.push_back(utf8::encode(word));
        } else if (utf8::is_cjk(c)) {
            std::size_t run_end = i;
            while (run_end < cps.size() && utf8::is_cjk(cps[run_end]))
                ++run_end;
            while (i < run_end) {
                std::size_t len = std::min(dict.max_length(), run_end - i);
                for (; len > 1; --len)
                    if (dict.contains(std::u32string_view(&cps[i], len)))
                        break;
                tokens.push_back(utf8::encode(std::u32string(&cps[i], len)));
                i += len;
            }
        } else {
            ++i;
        }
    }
    return tokens;
}

TokenizedDocument extract_text(std::string_view html, const Dictionary& dict, std::string url)
{
    return make_document(std::move(url), tokenize(strip_markup(html), dict));
}

std::string normalize_term(std::string_view term)
{
    const auto first = term.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos)
        return {};
    const auto last = term.find_last_not_of(" \t\r\n");
    const auto cps = utf8::decode(term.substr(first, last - first + 1));
    return utf8::encode(lower_u32(std::u32string(cps.begin(), cps.end())));
}

} // namespace adxprobe
