#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "camflow/mw/message.hpp"

namespace camflow::mw {

/// Little-endian, length-prefixed encoding of one message. The layout is
/// described in docs/wire-format.md.
std::string encode_message(const Message& msg);

/// Decodes exactly one record. Throws malformed_record on truncation,
/// trailing bytes or bad flags.
Message decode_message(std::string_view bytes);

/// Concatenated records, as written to a fixture or replay file.
std::string encode_messages(const std::vector<Message>& msgs);
std::vector<Message> decode_messages(std::string_view bytes);

}  // namespace camflow::mw
