#include "kgdial/tokenize.hpp"

#include "kgdial/error.hpp"

#include <memory>

#include <unicode/brkiter.h>
#include <unicode/locid.h>
#include <unicode/unistr.h>

namespace kgdial {

namespace {

icu::BreakIterator& word_iterator() {
    thread_local std::unique_ptr<icu::BreakIterator> it = [] {
        UErrorCode status = U_ZERO_ERROR;
        std::unique_ptr<icu::BreakIterator> bi(icu::BreakIterator::createWordInstance(icu::Locale::getRoot(), status));
        if (U_FAILURE(status))
            throw Error(std::string("ICU word break iterator: ") + u_errorName(status));
        return bi;
    }();
    return *it;
}

icu::BreakIterator& character_iterator() {
    thread_local std::unique_ptr<icu::BreakIterator> it = [] {
        UErrorCode status = U_ZERO_ERROR;
        std::unique_ptr<icu::BreakIterator> bi(
            icu::BreakIterator::createCharacterInstance(icu::Locale::getRoot(), status));
        if (U_FAILURE(status))
            throw Error(std::string("ICU character break iterator: ") + u_errorName(status));
        return bi;
    }();
    return *it;
}

icu::UnicodeString from_utf8(std::string_view s) {
    return icu::UnicodeString::fromUTF8(icu::StringPiece(s.data(), static_cast<std::int32_t>(s.size())));
}

} // namespace

std::vector<std::string> word_tokens(std::string_view utf8) {
    std::vector<std::string> tokens;
    if (utf8.empty())
        return tokens;
    const icu::UnicodeString text = from_utf8(utf8);
    auto& it = word_iterator();
    it.setText(text);
    std::int32_t start = it.first();
    for (std::int32_t end = it.next(); end != icu::BreakIterator::DONE; start = end, end = it.next()) {
        if (it.getRuleStatus() == UBRK_WORD_NONE)
            continue;
        std::string token;
        text.tempSubStringBetween(start, end).toUTF8String(token);
        tokens.push_back(std::move(token));
    }
    return tokens;
}

std::size_t word_count(std::string_view utf8) { return word_tokens(utf8).size(); }

std::size_t grapheme_count(std::string_view utf8) {
    if (utf8.empty())
        return 0;
    const icu::UnicodeString text = from_utf8(utf8);
    auto& it = character_iterator();
    it.setText(text);
    std::size_t count = 0;
    it.first();
    while (it.next() != icu::BreakIterator::DONE)
        ++count;
    return count;
}

std::string truncate_graphemes(std::string_view utf8, std::size_t limit) {
    const icu::UnicodeString text = from_utf8(utf8);
    auto& it = character_iterator();
    it.setText(text);
    std::int32_t end = it.first();
    for (std::size_t i = 0; i < limit; ++i) {
        const std::int32_t next = it.next();
        if (next == icu::BreakIterator::DONE)
            break;
        end = next;
    }
    std::string out;
    text.tempSubStringBetween(0, end).toUTF8String(out);
    return out;
}

std::string to_lower(std::string_view utf8) {
    icu::UnicodeString text = from_utf8(utf8);
    text.toLower(icu::Locale::getRoot());
    std::string out;
    text.toUTF8String(out);
    return out;
}

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n\f\v");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r\n\f\v");
    return std::string(s.substr(first, last - first + 1));
}

} // namespace kgdial
