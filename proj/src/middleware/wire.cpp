#include "camflow/mw/wire.hpp"

#include <limits>

#include "camflow/error.hpp"

namespace camflow::mw {

namespace {

constexpr std::uint8_t kValuePresent = 0x01;
constexpr std::uint8_t kLabelPresent = 0x02;

void put_u8(std::string& out, std::uint8_t v) { out.push_back(static_cast<char>(v)); }

void put_u32(std::string& out, std::uint64_t v) {
  if (v > std::numeric_limits<std::uint32_t>::max()) {
    throw Error(Errc::invalid_argument, "field too large for the wire format");
  }
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_bytes(std::string& out, std::string_view s) {
  put_u32(out, s.size());
  out.append(s);
}

void put_tags(std::string& out, const Label& l) {
  put_u32(out, l.size());
  for (const auto& t : l) put_u64(out, t.id);
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  bool done() const noexcept { return pos_ == bytes_.size(); }
  std::size_t pos() const noexcept { return pos_; }

  std::uint8_t u8() { return static_cast<std::uint8_t>(take(1)[0]); }
  std::uint32_t u32() {
    auto b = take(4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<std::uint8_t>(b[i]);
    return v;
  }
  std::uint64_t u64() {
    auto b = take(8);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<std::uint8_t>(b[i]);
    return v;
  }
  std::string_view bytes() { return take(u32()); }

  Label tags(TagKind kind) {
    std::uint32_t n = u32();
    if (n > (bytes_.size() - pos_) / 8) fail("tag count exceeds record");
    Label l(kind);
    for (std::uint32_t i = 0; i < n; ++i) l.insert(Tag{u64(), kind});
    if (l.size() != n) fail("duplicate tag id");
    return l;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(Errc::malformed_record, "wire offset " + std::to_string(pos_) + ": " + what);
  }

 private:
  std::string_view take(std::size_t n) {
    if (n > bytes_.size() - pos_) fail("truncated");
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

Message read_body(Reader& r) {
  Message msg;
  msg.schema = std::string(r.bytes());
  std::uint32_t count = r.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    Attribute a;
    a.name = std::string(r.bytes());
    std::uint8_t flags = r.u8();
    if (flags & ~(kValuePresent | kLabelPresent)) r.fail("unknown attribute flags");
    Label s = r.tags(TagKind::secrecy);
    Label in = r.tags(TagKind::integrity);
    std::string_view value = r.bytes();
    if (flags & kLabelPresent) {
      a.label = SecurityContext(std::move(s), std::move(in));
    } else if (!s.empty() || !in.empty()) {
      r.fail("tags on an unlabelled attribute");
    }
    if (flags & kValuePresent) {
      a.value = std::string(value);
    } else if (!value.empty()) {
      r.fail("bytes on a null attribute");
    }
    msg.attributes.push_back(std::move(a));
  }
  return msg;
}

}  // namespace

std::string encode_message(const Message& msg) {
  std::string body;
  put_bytes(body, msg.schema);
  put_u32(body, msg.attributes.size());
  for (const auto& a : msg.attributes) {
    put_bytes(body, a.name);
    std::uint8_t flags = (a.value ? kValuePresent : 0) | (a.label ? kLabelPresent : 0);
    put_u8(body, flags);
    SecurityContext empty;
    const SecurityContext& label = a.label ? *a.label : empty;
    put_tags(body, label.secrecy);
    put_tags(body, label.integrity);
    put_bytes(body, a.value ? std::string_view(*a.value) : std::string_view{});
  }
  std::string out;
  put_u32(out, body.size());
  out += body;
  return out;
}

Message decode_message(std::string_view bytes) {
  auto msgs = decode_messages(bytes);
  if (msgs.size() != 1) {
    throw Error(Errc::malformed_record,
                "expected one wire record, found " + std::to_string(msgs.size()));
  }
  return std::move(msgs.front());
}

std::string encode_messages(const std::vector<Message>& msgs) {
  std::string out;
  for (const auto& m : msgs) out += encode_message(m);
  return out;
}

std::vector<Message> decode_messages(std::string_view bytes) {
  std::vector<Message> out;
  Reader outer(bytes);
  while (!outer.done()) {
    std::string_view record = outer.bytes();
    Reader r(record);
    out.push_back(read_body(r));
    if (!r.done()) r.fail("trailing bytes in record");
  }
  return out;
}

}  // namespace camflow::mw
