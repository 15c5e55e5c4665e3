// Copyright 2026 The qbridge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <bitset>
#include <cstdio>
#include <cstdint>

#include "qbridge/qsim.hpp"

namespace qbridge::qsim {

namespace {

std::vector<char32_t> utf8_code_points(std::string_view text) {
  std::vector<char32_t> out;
  std::size_t i = 0;
  auto fail = [] { throw EmoticonError(EmoticonError::Code::InvalidUtf8, "input is not valid UTF-8"); };
  while (i < text.size()) {
    const auto lead = static_cast<unsigned char>(text[i]);
    int extra = 0;
    char32_t cp = 0;
    if (lead < 0x80) {
      cp = lead;
    } else if ((lead & 0xE0) == 0xC0) {
      extra = 1;
      cp = lead & 0x1F;
    } else if ((lead & 0xF0) == 0xE0) {
      extra = 2;
      cp = lead & 0x0F;
    } else if ((lead & 0xF8) == 0xF0) {
      extra = 3;
      cp = lead & 0x07;
    } else {
      fail();
    }
    if (i + static_cast<std::size_t>(extra) >= text.size()) fail();
    for (int k = 1; k <= extra; ++k) {
      const auto cont = static_cast<unsigned char>(text[i + static_cast<std::size_t>(k)]);
      if ((cont & 0xC0) != 0x80) fail();
      cp = (cp << 6) | (cont & 0x3F);
    }
    static constexpr char32_t kMinForLength[] = {0, 0x80, 0x800, 0x10000};
    if (cp < kMinForLength[extra] || cp > 0x10FFFF) fail();
    out.push_back(cp);
    i += static_cast<std::size_t>(extra) + 1;
  }
  return out;
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else {
    // Latin-1 range only: two bytes suffice.
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

std::string code_point_label(char32_t cp) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "U+%04X", static_cast<unsigned>(cp));
  return buf;
}

bool has_glyph(unsigned code) { return (code >= 0x20 && code <= 0x7E) || code >= 0xA0; }

}  // namespace

std::string encode_emoticon(std::string_view utf8) {
  const auto cps = utf8_code_points(utf8);
  if (cps.size() != 2) {
    throw EmoticonError(EmoticonError::Code::WrongLength,
                        "emoticon must be exactly 2 characters, got " + std::to_string(cps.size()));
  }
  std::string bits;
  for (char32_t cp : cps) {
    if (cp > 0xFF) {
      throw EmoticonError(EmoticonError::Code::NonEncodableCharacter,
                          "character " + code_point_label(cp) + " is outside the 8-bit Latin-1 range");
    }
    bits += std::bitset<8>(cp).to_string();
  }
  return bits;
}

std::string decode_emoticon(std::string_view bits) {
  if (bits.size() != 16) {
    throw EmoticonError(EmoticonError::Code::UndecodableKey,
                        "emoticon key must be 16 bits, got " + std::to_string(bits.size()));
  }
  std::string out;
  for (std::size_t byte = 0; byte < 2; ++byte) {
    unsigned code = 0;
    for (std::size_t k = 0; k < 8; ++k) {
      const char c = bits[byte * 8 + k];
      if (c != '0' && c != '1') throw EmoticonError(EmoticonError::Code::UndecodableKey, "key is not a bitstring");
      code = (code << 1) | static_cast<unsigned>(c == '1');
    }
    if (!has_glyph(code)) {
      throw EmoticonError(EmoticonError::Code::UndecodableKey,
                          "key " + std::string(bits) + " decodes to control code " + std::to_string(code));
    }
    append_utf8(out, code);
  }
  return out;
}

std::map<std::string, double> decode_counts(const Counts& counts) {
  std::int64_t total = 0;
  for (const auto& [_, n] : counts) total += n;
  std::map<std::string, double> freq;
  if (total <= 0) return freq;
  for (const auto& [key, n] : counts) {
    freq[decode_emoticon(key)] += static_cast<double>(n) / static_cast<double>(total);
  }
  return freq;
}

}  // namespace qbridge::qsim
