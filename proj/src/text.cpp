#include "ckg/text.hpp"

#include <unicode/normalizer2.h>
#include <unicode/unistr.h>

#include <algorithm>
#include <utility>

#include "ckg/error.hpp"
#include "ckg/unicode.hpp"

namespace ckg {

namespace {

struct MappedScalar {
  char32_t cp;
  std::size_t origin;
};

const icu::Normalizer2& nfkc() {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* n = icu::Normalizer2::getNFKCInstance(status);
  if (U_FAILURE(status) || n == nullptr) throw Error(ErrorCode::IoError, "ICU NFKC unavailable");
  return *n;
}

void normalize_segment(const icu::Normalizer2& norm, const std::u32string& segment, std::size_t origin,
                       std::vector<MappedScalar>& out) {
  if (segment.empty()) return;
  const icu::UnicodeString src =
      icu::UnicodeString::fromUTF32(reinterpret_cast<const UChar32*>(segment.data()),
                                    static_cast<int32_t>(segment.size()));
  UErrorCode status = U_ZERO_ERROR;
  const icu::UnicodeString dst = norm.normalize(src, status);
  if (U_FAILURE(status)) throw Error(ErrorCode::ParseError, "NFKC normalization failed");
  for (int32_t i = 0; i < dst.length();) {
    const UChar32 c = dst.char32At(i);
    out.push_back({static_cast<char32_t>(c), origin});
    i += U16_LENGTH(c);
  }
}

// NFKC applied segment by segment (segments start at normalization
// boundaries) so every output scalar can be traced to its source.
std::vector<MappedScalar> nfkc_mapped(const std::u32string& input, std::size_t base) {
  const icu::Normalizer2& norm = nfkc();
  std::vector<MappedScalar> out;
  out.reserve(input.size());
  std::u32string segment;
  std::size_t segment_origin = base;
  for (std::size_t i = 0; i < input.size(); ++i) {
    const char32_t c = input[i];
    if (!segment.empty() && norm.hasBoundaryBefore(static_cast<UChar32>(c))) {
      normalize_segment(norm, segment, segment_origin, out);
      segment.clear();
    }
    if (segment.empty()) segment_origin = base + i;
    segment.push_back(c);
  }
  normalize_segment(norm, segment, segment_origin, out);
  return out;
}

MappedText encode_mapped(const std::vector<MappedScalar>& scalars) {
  MappedText out;
  out.text.reserve(scalars.size());
  out.origin.reserve(scalars.size());
  for (const auto& s : scalars) {
    const std::size_t before = out.text.size();
    unicode::append(out.text, s.cp);
    out.origin.insert(out.origin.end(), out.text.size() - before, s.origin);
  }
  return out;
}

bool is_terminal_punctuation(char32_t c) {
  switch (c) {
    case U'.': case U',': case U';': case U':': case U'!': case U'?':
    case U'。': case U'，': case U'；': case U'：': case U'！':
    case U'？': case U'、': case U'…':
      return true;
    default:
      return false;
  }
}

}  // namespace

MappedText normalize_mapped(std::string_view s, std::size_t base) {
  const std::vector<MappedScalar> folded = nfkc_mapped(unicode::decode(s), base);
  std::vector<MappedScalar> collapsed;
  collapsed.reserve(folded.size());
  bool pending_space = false;
  std::size_t space_origin = 0;
  for (const auto& m : folded) {
    if (unicode::is_whitespace(m.cp)) {
      if (!pending_space) space_origin = m.origin;
      pending_space = true;
      continue;
    }
    if (pending_space && !collapsed.empty()) collapsed.push_back({U' ', space_origin});
    pending_space = false;
    collapsed.push_back(m);
  }
  return encode_mapped(collapsed);
}

std::string normalize_text(std::string_view s) { return normalize_mapped(s).text; }

MappedText fold_case_mapped(const MappedText& in) {
  MappedText out;
  out.text.reserve(in.text.size());
  out.origin.reserve(in.origin.size());
  std::size_t i = 0;
  const std::u32string scalars = unicode::decode(in.text);
  for (char32_t c : scalars) {
    const std::size_t origin = in.origin.empty() ? 0 : in.origin[i];
    const std::size_t before = out.text.size();
    unicode::append(out.text, unicode::fold(c));
    out.origin.insert(out.origin.end(), out.text.size() - before, origin);
    std::string tmp;
    unicode::append(tmp, c);
    i += tmp.size();
  }
  return out;
}

std::string fold_case(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char32_t c : unicode::decode(s)) unicode::append(out, unicode::fold(c));
  return out;
}

std::string match_key(std::string_view name) {
  std::u32string key = unicode::decode(fold_case(normalize_text(name)));
  while (!key.empty() && (is_terminal_punctuation(key.back()) || key.back() == U' ')) key.pop_back();
  return unicode::encode(key);
}

std::size_t edit_distance(std::u32string_view a, std::u32string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> prev(b.size() + 1);
  std::vector<std::size_t> cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t subst = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, subst});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
  return edit_distance(unicode::decode(a), unicode::decode(b));
}

double normalized_edit_distance(std::string_view a, std::string_view b) {
  const std::u32string ua = unicode::decode(a);
  const std::u32string ub = unicode::decode(b);
  const std::size_t longest = std::max(ua.size(), ub.size());
  if (longest == 0) return 0.0;
  return static_cast<double>(edit_distance(ua, ub)) / static_cast<double>(longest);
}

std::vector<std::string> split_tokens(std::string_view normalized) {
  std::vector<std::string> tokens;
  std::size_t pos = 0;
  while (pos <= normalized.size()) {
    const std::size_t next = normalized.find(' ', pos);
    const std::size_t end = next == std::string_view::npos ? normalized.size() : next;
    if (end > pos) tokens.emplace_back(normalized.substr(pos, end - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return tokens;
}

}  // namespace ckg
