#pragma once

// Text normalization primitives shared by parsing, extraction, cleaning and
// fusion. Everything operates on UTF-8; "characters" are Unicode scalar
// values.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace ckg {

/// UTF-8 text together with, for every byte, the scalar-value offset in the
/// original input that produced it.
struct MappedText {
  std::string text;
  std::vector<std::size_t> origin;
};

/// NFKC, full-width to half-width folding, whitespace runs collapsed to a
/// single space, leading and trailing whitespace removed. Original case is
/// kept. Idempotent.
std::string normalize_text(std::string_view s);

/// Same as normalize_text but keeps a byte-to-source-offset map. `base` is
/// added to every origin entry.
MappedText normalize_mapped(std::string_view s, std::size_t base = 0);

/// Per-scalar simple case folding, used for matching only.
std::string fold_case(std::string_view s);
MappedText fold_case_mapped(const MappedText& in);

/// normalize_text + case fold + trailing punctuation stripped. This is the key
/// used for name lookups and entity matching.
std::string match_key(std::string_view name);

/// Levenshtein distance over scalar values.
std::size_t edit_distance(std::u32string_view a, std::u32string_view b);
std::size_t edit_distance(std::string_view a, std::string_view b);

/// edit_distance / max(|a|,|b|); 0 for two empty strings.
double normalized_edit_distance(std::string_view a, std::string_view b);

/// Splits normalized text on spaces.
std::vector<std::string> split_tokens(std::string_view normalized);

}  // namespace ckg
