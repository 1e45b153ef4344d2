#include <algorithm>
#include <array>
#include <cstring>

#include "csi/ingest.hpp"

namespace csi {

namespace {

struct NamedEntity {
  std::string_view name;
  char32_t code;
};

// Sorted by name (byte order) for binary search.
constexpr auto kEntities = [] {
  std::array<NamedEntity, 106> table = {{
      {"AElig", 198},  {"Aacute", 193}, {"Acirc", 194},  {"Agrave", 192},
      {"Aring", 197},  {"Atilde", 195}, {"Auml", 196},   {"Ccedil", 199},
      {"ETH", 208},    {"Eacute", 201}, {"Ecirc", 202},  {"Egrave", 200},
      {"Euml", 203},   {"Iacute", 205}, {"Icirc", 206},  {"Igrave", 204},
      {"Iuml", 207},   {"Ntilde", 209}, {"OElig", 338},  {"Oacute", 211},
      {"Ocirc", 212},  {"Ograve", 210}, {"Oslash", 216}, {"Otilde", 213},
      {"Ouml", 214},   {"Scaron", 352}, {"THORN", 222},  {"Uacute", 218},
      {"Ucirc", 219},  {"Ugrave", 217}, {"Uuml", 220},   {"Yacute", 221},
      {"Yuml", 376},   {"aacute", 225}, {"acirc", 226},  {"acute", 180},
      {"aelig", 230},  {"agrave", 224}, {"amp", 38},     {"apos", 39},
      {"aring", 229},  {"atilde", 227}, {"auml", 228},   {"brvbar", 166},
      {"ccedil", 231}, {"cedil", 184},  {"cent", 162},   {"copy", 169},
      {"curren", 164}, {"deg", 176},    {"divide", 247}, {"eacute", 233},
      {"ecirc", 234},  {"egrave", 232}, {"eth", 240},    {"euml", 235},
      {"frac12", 189}, {"frac14", 188}, {"frac34", 190}, {"gt", 62},
      {"iacute", 237}, {"icirc", 238},  {"iexcl", 161},  {"igrave", 236},
      {"iquest", 191}, {"iuml", 239},   {"laquo", 171},  {"lt", 60},
      {"macr", 175},   {"micro", 181},  {"middot", 183}, {"nbsp", 160},
      {"not", 172},    {"ntilde", 241}, {"oacute", 243}, {"ocirc", 244},
      {"oelig", 339},  {"ograve", 242}, {"ordf", 170},   {"ordm", 186},
      {"oslash", 248}, {"otilde", 245}, {"ouml", 246},   {"para", 182},
      {"plusmn", 177}, {"pound", 163},  {"quot", 34},    {"raquo", 187},
      {"reg", 174},    {"scaron", 353}, {"sect", 167},   {"shy", 173},
      {"sup1", 185},   {"sup2", 178},   {"sup3", 179},   {"szlig", 223},
      {"thorn", 254},  {"times", 215},  {"uacute", 250}, {"ucirc", 251},
      {"ugrave", 249}, {"uml", 168},    {"uuml", 252},   {"yacute", 253},
      {"yen", 165},    {"yuml", 255},
  }};
  return table;
}();

static_assert(std::is_sorted(kEntities.begin(), kEntities.end(),
                             [](const NamedEntity& a, const NamedEntity& b) {
                               return a.name < b.name;
                             }));

// UTF-8 encodings for every table entry, built once.
struct EntityUtf8 {
  std::array<std::array<char, 4>, kEntities.size()> bytes{};
  std::array<std::uint8_t, kEntities.size()> length{};
};

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

const EntityUtf8& entity_utf8() {
  static const EntityUtf8 table = [] {
    EntityUtf8 t;
    for (std::size_t i = 0; i < kEntities.size(); ++i) {
      std::string s;
      append_utf8(s, kEntities[i].code);
      std::copy(s.begin(), s.end(), t.bytes[i].begin());
      t.length[i] = static_cast<std::uint8_t>(s.size());
    }
    return t;
  }();
  return table;
}

bool is_name_start(int c) {
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_' ||
         c == ':' || c >= 0x80;
}

bool is_name_char(int c) {
  return is_name_start(c) || (c >= '0' && c <= '9') || c == '-' || c == '.';
}

bool is_ws(int c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

std::string trim(std::string s) {
  auto not_ws = [](unsigned char c) { return !is_ws(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_ws));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_ws).base(), s.end());
  return s;
}

}  // namespace

std::optional<std::string_view> lookup_entity(std::string_view name) noexcept {
  auto it = std::lower_bound(
      kEntities.begin(), kEntities.end(), name,
      [](const NamedEntity& e, std::string_view n) { return e.name < n; });
  if (it == kEntities.end() || it->name != name) return std::nullopt;
  const auto& t = entity_utf8();
  auto i = static_cast<std::size_t>(it - kEntities.begin());
  return std::string_view(t.bytes[i].data(), t.length[i]);
}

std::vector<std::string> RawRecord::values(std::string_view tag) const {
  std::vector<std::string> out;
  for (const auto& [k, v] : fields)
    if (k == tag) out.push_back(v);
  return out;
}

const std::string* RawRecord::first(std::string_view tag) const {
  for (const auto& [k, v] : fields)
    if (k == tag) return &v;
  return nullptr;
}

XmlDumpReader::XmlDumpReader(std::istream& in, std::size_t buffer_size)
    : in_(in), buf_(std::max<std::size_t>(buffer_size, 16)) {}

bool XmlDumpReader::fill() {
  if (pos_ < len_) return true;
  in_.read(buf_.data(), static_cast<std::streamsize>(buf_.size()));
  len_ = static_cast<std::size_t>(in_.gcount());
  pos_ = 0;
  return len_ > 0;
}

int XmlDumpReader::peek() {
  if (!fill()) return -1;
  return static_cast<unsigned char>(buf_[pos_]);
}

int XmlDumpReader::get() {
  if (!fill()) return -1;
  int c = static_cast<unsigned char>(buf_[pos_++]);
  ++offset_;
  if (c == '\n') ++line_;
  return c;
}

// Consumes s when the upcoming bytes equal it. Only used for short literals,
// so a partial match across a buffer boundary is handled by pulling bytes
// into a small lookahead.
bool XmlDumpReader::starts_with(std::string_view s) {
  if (!fill()) return false;
  if (len_ - pos_ < s.size()) {
    // Shift the tail to the front and top up the buffer.
    std::size_t rest = len_ - pos_;
    std::memmove(buf_.data(), buf_.data() + pos_, rest);
    in_.read(buf_.data() + rest, static_cast<std::streamsize>(buf_.size() - rest));
    len_ = rest + static_cast<std::size_t>(in_.gcount());
    pos_ = 0;
    if (len_ < s.size()) return false;
  }
  if (std::memcmp(buf_.data() + pos_, s.data(), s.size()) != 0) return false;
  for (std::size_t i = 0; i < s.size(); ++i) get();
  return true;
}

void XmlDumpReader::fail(Errc kind, std::string message) {
  throw Fault{kind, offset_, line_, std::move(message)};
}

void XmlDumpReader::fail_at(Errc kind, std::uint64_t pos, std::uint64_t line,
                            std::string message) {
  throw Fault{kind, pos, line, std::move(message)};
}

std::string XmlDumpReader::read_name() {
  std::string name;
  if (!is_name_start(peek())) fail(Errc::malformed_xml, "expected a name");
  while (is_name_char(peek())) name += static_cast<char>(get());
  return name;
}

void XmlDumpReader::skip_ws() {
  while (is_ws(peek())) get();
}

void XmlDumpReader::skip_until(std::string_view terminator) {
  while (!starts_with(terminator)) {
    if (get() < 0)
      fail(Errc::malformed_xml, "unterminated construct, expected '" +
                                    std::string(terminator) + "'");
  }
}

void XmlDumpReader::skip_doctype() {
  // After "<!DOCTYPE". An internal subset in brackets may contain '>'.
  int depth = 0;
  for (;;) {
    int c = get();
    if (c < 0) fail(Errc::malformed_xml, "unterminated DOCTYPE");
    if (c == '[') ++depth;
    else if (c == ']') --depth;
    else if (c == '>' && depth <= 0) return;
    else if (c == '"' || c == '\'') {
      int q = c;
      while ((c = get()) != q)
        if (c < 0) fail(Errc::malformed_xml, "unterminated DOCTYPE literal");
    }
  }
}

void XmlDumpReader::read_reference(std::string& out) {
  // After '&'.
  auto pos = offset_ - 1;
  auto line = line_;
  std::string name;
  for (;;) {
    int c = get();
    if (c < 0) fail_at(Errc::malformed_xml, pos, line, "unterminated reference");
    if (c == ';') break;
    if (is_ws(c) || c == '<' || c == '&' || name.size() > 32)
      fail_at(Errc::malformed_xml, pos, line, "unterminated reference");
    name += static_cast<char>(c);
  }
  if (name.empty()) fail_at(Errc::malformed_xml, pos, line, "empty reference");
  if (name[0] == '#') {
    char32_t cp = 0;
    bool hex = name.size() > 1 && (name[1] == 'x' || name[1] == 'X');
    std::size_t start = hex ? 2 : 1;
    if (start >= name.size())
      fail_at(Errc::malformed_xml, pos, line, "bad character reference");
    for (std::size_t i = start; i < name.size(); ++i) {
      char ch = name[i];
      int digit;
      if (ch >= '0' && ch <= '9') digit = ch - '0';
      else if (hex && ch >= 'a' && ch <= 'f') digit = ch - 'a' + 10;
      else if (hex && ch >= 'A' && ch <= 'F') digit = ch - 'A' + 10;
      else fail_at(Errc::malformed_xml, pos, line, "bad character reference");
      cp = cp * (hex ? 16 : 10) + static_cast<char32_t>(digit);
      if (cp > 0x10FFFF)
        fail_at(Errc::malformed_xml, pos, line, "character reference out of range");
    }
    if (cp == 0 || (cp >= 0xD800 && cp <= 0xDFFF))
      fail_at(Errc::malformed_xml, pos, line, "invalid character reference");
    append_utf8(out, cp);
    return;
  }
  auto text = lookup_entity(name);
  if (!text) {
    // Structure is intact; the enclosing record is dropped once it closes.
    if (!pending_) pending_ = Fault{Errc::unknown_entity, pos, line,
                                    "unknown entity '" + name + "'"};
    return;
  }
  out += *text;
}

void XmlDumpReader::read_attributes(std::map<std::string, std::string>& attrs,
                                    bool& self_closing) {
  self_closing = false;
  for (;;) {
    skip_ws();
    int c = peek();
    if (c == '>') {
      get();
      return;
    }
    if (c == '/') {
      get();
      if (get() != '>') fail(Errc::malformed_xml, "expected '>' after '/'");
      self_closing = true;
      return;
    }
    if (c < 0) fail(Errc::malformed_xml, "unexpected end of input in tag");
    std::string name = read_name();
    skip_ws();
    if (get() != '=') fail(Errc::malformed_xml, "expected '=' after attribute name");
    skip_ws();
    int quote = get();
    if (quote != '"' && quote != '\'')
      fail(Errc::malformed_xml, "attribute value must be quoted");
    std::string value;
    for (;;) {
      int ch = get();
      if (ch < 0) fail(Errc::malformed_xml, "unterminated attribute value");
      if (ch == quote) break;
      if (ch == '<') fail(Errc::malformed_xml, "'<' in attribute value");
      if (ch == '&') read_reference(value);
      else value += static_cast<char>(ch);
    }
    attrs[std::move(name)] = std::move(value);
  }
}

void XmlDumpReader::open_root() {
  starts_with("\xEF\xBB\xBF");  // optional byte order mark
  for (;;) {
    skip_ws();
    int c = peek();
    if (c < 0) fail(Errc::malformed_xml, "no root element");
    if (c != '<') fail(Errc::malformed_xml, "content before root element");
    get();
    if (starts_with("?")) {
      skip_until("?>");
    } else if (starts_with("!--")) {
      skip_until("-->");
    } else if (starts_with("!DOCTYPE")) {
      skip_doctype();
    } else {
      root_name_ = read_name();
      std::map<std::string, std::string> attrs;
      bool self_closing = false;
      read_attributes(attrs, self_closing);
      root_open_ = true;
      if (self_closing) done_ = true;
      return;
    }
  }
}

// Skips ahead to the end tag of the broken record. Returns false at EOF.
bool XmlDumpReader::resync(const std::string& kind) {
  const std::string close = "</" + kind;
  for (;;) {
    if (starts_with(close)) {
      skip_ws();
      if (peek() == '>') {
        get();
        return true;
      }
      continue;
    }
    if (get() < 0) return false;
  }
}

std::optional<RawRecord> XmlDumpReader::read_record(std::string kind) {
  // After "<kind".
  RawRecord rec;
  rec.element_kind = std::move(kind);
  pending_.reset();
  bool self_closing = false;
  read_attributes(rec.attributes, self_closing);
  if (auto it = rec.attributes.find("key"); it != rec.attributes.end())
    rec.source_key = it->second;
  current_key_ = rec.source_key;

  std::vector<std::string> stack{rec.element_kind};
  std::string field_text;
  while (!self_closing) {
    int c = get();
    if (c < 0) fail(Errc::malformed_xml, "unexpected end of input inside record");
    if (c == '<') {
      if (starts_with("/")) {
        auto pos = offset_ - 2;
        auto line = line_;
        std::string name = read_name();
        skip_ws();
        if (get() != '>') fail(Errc::malformed_xml, "expected '>' in end tag");
        if (name != stack.back())
          fail_at(Errc::malformed_xml, pos, line,
                  "mismatched end tag </" + name + ">, expected </" + stack.back() + ">");
        stack.pop_back();
        if (stack.empty()) break;
        if (stack.size() == 1)
          rec.fields.emplace_back(std::move(name), trim(std::move(field_text)));
      } else if (starts_with("!--")) {
        skip_until("-->");
      } else if (starts_with("![CDATA[")) {
        while (!starts_with("]]>")) {
          int ch = get();
          if (ch < 0) fail(Errc::malformed_xml, "unterminated CDATA section");
          if (stack.size() >= 2) field_text += static_cast<char>(ch);
        }
      } else if (starts_with("?")) {
        skip_until("?>");
      } else {
        std::string name = read_name();
        std::map<std::string, std::string> attrs;
        bool child_closed = false;
        read_attributes(attrs, child_closed);
        if (stack.size() == 1) field_text.clear();
        if (!child_closed) stack.push_back(std::move(name));
        else if (stack.size() == 1) rec.fields.emplace_back(std::move(name), std::string());
      }
    } else if (c == '&') {
      std::string decoded;
      read_reference(decoded);
      if (stack.size() >= 2) field_text += decoded;
    } else if (stack.size() >= 2) {
      field_text += static_cast<char>(c);
    }
  }

  if (pending_) {
    issues_.push_back({pending_->kind, pending_->position, pending_->line,
                       rec.source_key, "", pending_->message});
    pending_.reset();
    return std::nullopt;
  }
  if (rec.source_key.empty()) {
    issues_.push_back({Errc::malformed_xml, record_pos_, record_line_, "", "",
                       "<" + rec.element_kind + "> record without key attribute"});
    return std::nullopt;
  }
  return rec;
}

std::optional<RawRecord> XmlDumpReader::next() {
  while (!done_) {
    std::string kind;
    try {
      if (!root_open_) {
        open_root();
        pending_.reset();
        continue;
      }
      int c = get();
      if (c < 0) fail(Errc::malformed_xml, "unexpected end of input, root element not closed");
      if (c != '<') continue;  // stray text between records is ignored
      record_pos_ = offset_ - 1;
      record_line_ = line_;
      current_key_.clear();
      if (starts_with("/")) {
        std::string name = read_name();
        skip_ws();
        if (get() != '>') fail(Errc::malformed_xml, "expected '>' in end tag");
        if (name != root_name_)
          fail_at(Errc::malformed_xml, record_pos_, record_line_,
                  "stray end tag </" + name + ">");
        done_ = true;
        return std::nullopt;
      }
      if (starts_with("!--")) {
        skip_until("-->");
        continue;
      }
      if (starts_with("?")) {
        skip_until("?>");
        continue;
      }
      kind = read_name();
      if (auto rec = read_record(kind)) return rec;
    } catch (const Fault& f) {
      issues_.push_back({f.kind, f.position, f.line, current_key_, "", f.message});
      pending_.reset();
      if (!root_open_ || peek() < 0) {
        done_ = true;
      } else if (!kind.empty() && !resync(kind)) {
        issues_.push_back({Errc::malformed_xml, offset_, line_, "", "",
                           "unexpected end of input while skipping broken record"});
        done_ = true;
      }
    }
  }
  return std::nullopt;
}

}  // namespace csi
