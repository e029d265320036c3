#include "sumbrella/wire.hpp"

#include <cstring>
#include <optional>

namespace sumbrella::wire {

namespace {

void put_u16le(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(std::uint8_t(v & 0xFF));
  out.push_back(std::uint8_t(v >> 8));
}

void put_i32le(std::vector<std::uint8_t>& out, std::int32_t v) {
  auto u = std::uint32_t(v);
  out.push_back(std::uint8_t(u & 0xFF));
  out.push_back(std::uint8_t((u >> 8) & 0xFF));
  out.push_back(std::uint8_t((u >> 16) & 0xFF));
  out.push_back(std::uint8_t((u >> 24) & 0xFF));
}

std::uint16_t get_u16le(const std::uint8_t* p) {
  return std::uint16_t(p[0] | (std::uint16_t(p[1]) << 8));
}

std::int32_t get_i32le(const std::uint8_t* p) {
  std::uint32_t u = std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) |
                    (std::uint32_t(p[2]) << 16) | (std::uint32_t(p[3]) << 24);
  return std::int32_t(u);
}

struct Layout {
  MsgType type;
  std::size_t payload_len;
};

Layout layout_of(const Message& msg) {
  struct Visitor {
    Layout operator()(const CmdCableSetMode&) const { return {MsgType::CmdCableSetMode, 2}; }
    Layout operator()(const CmdCableWaveParams&) const { return {MsgType::CmdCableWaveParams, 11}; }
    Layout operator()(const CmdPneuTargets&) const { return {MsgType::CmdPneuTargets, 6}; }
    Layout operator()(const TlmCableStatus&) const { return {MsgType::TlmCableStatus, 21}; }
    Layout operator()(const TlmPneuStatus&) const { return {MsgType::TlmPneuStatus, 12}; }
    Layout operator()(const Heartbeat&) const { return {MsgType::Heartbeat, 2}; }
    Layout operator()(const Ack&) const { return {MsgType::Ack, 3}; }
  };
  return std::visit(Visitor{}, msg);
}

void append_payload(std::vector<std::uint8_t>& out, const CmdCableSetMode& m) {
  if (m.leaf_mask < 1 || m.leaf_mask > 7) throw EncodeError("CmdCableSetMode: leaf_mask outside [1,7]");
  if (m.mode > 3) throw EncodeError("CmdCableSetMode: mode outside [0,3]");
  out.push_back(m.leaf_mask);
  out.push_back(m.mode);
}

void append_payload(std::vector<std::uint8_t>& out, const CmdCableWaveParams& m) {
  for (auto a : m.amplitude_q8) out.push_back(a);
  put_u16le(out, m.frequency_chz);
  for (auto p : m.phase_mrad) put_u16le(out, p);
}

void append_payload(std::vector<std::uint8_t>& out, const CmdPneuTargets& m) {
  for (auto t : m.target_dkpa) put_u16le(out, t);
}

void append_payload(std::vector<std::uint8_t>& out, const TlmCableStatus& m) {
  for (int i = 0; i < 3; ++i) {
    if (m.mode[size_t(i)] > 4) throw EncodeError("TlmCableStatus: mode code outside [0,4]");
    out.push_back(m.mode[size_t(i)]);
    put_i32le(out, m.position[size_t(i)]);
    put_u16le(out, m.torque_raw[size_t(i)]);
  }
}

void append_payload(std::vector<std::uint8_t>& out, const TlmPneuStatus& m) {
  for (int i = 0; i < 3; ++i) {
    if (m.route[size_t(i)] > 2) throw EncodeError("TlmPneuStatus: route code outside [0,2]");
    put_u16le(out, m.pressure_dkpa[size_t(i)]);
    out.push_back(m.route[size_t(i)]);
    out.push_back(m.duty_q8[size_t(i)]);
  }
}

void append_payload(std::vector<std::uint8_t>& out, const Heartbeat& m) {
  put_u16le(out, m.seq);
}

void append_payload(std::vector<std::uint8_t>& out, const Ack& m) {
  out.push_back(m.acked_type);
  put_u16le(out, m.seq);
}

std::optional<Message> parse_payload(std::uint8_t type, std::span<const std::uint8_t> p) {
  switch (MsgType(type)) {
    case MsgType::CmdCableSetMode: {
      if (p.size() != 2) return std::nullopt;
      CmdCableSetMode m{p[0], p[1]};
      if (m.leaf_mask < 1 || m.leaf_mask > 7 || m.mode > 3) return std::nullopt;
      return m;
    }
    case MsgType::CmdCableWaveParams: {
      if (p.size() != 11) return std::nullopt;
      CmdCableWaveParams m;
      m.amplitude_q8 = {p[0], p[1], p[2]};
      m.frequency_chz = get_u16le(&p[3]);
      for (int i = 0; i < 3; ++i) m.phase_mrad[size_t(i)] = get_u16le(&p[5 + 2 * i]);
      return m;
    }
    case MsgType::CmdPneuTargets: {
      if (p.size() != 6) return std::nullopt;
      CmdPneuTargets m;
      for (int i = 0; i < 3; ++i) m.target_dkpa[size_t(i)] = get_u16le(&p[2 * i]);
      return m;
    }
    case MsgType::TlmCableStatus: {
      if (p.size() != 21) return std::nullopt;
      TlmCableStatus m;
      for (int i = 0; i < 3; ++i) {
        const std::uint8_t* q = &p[size_t(7 * i)];
        m.mode[size_t(i)] = q[0];
        if (m.mode[size_t(i)] > 4) return std::nullopt;
        m.position[size_t(i)] = get_i32le(q + 1);
        m.torque_raw[size_t(i)] = get_u16le(q + 5);
      }
      return m;
    }
    case MsgType::TlmPneuStatus: {
      if (p.size() != 12) return std::nullopt;
      TlmPneuStatus m;
      for (int i = 0; i < 3; ++i) {
        const std::uint8_t* q = &p[size_t(4 * i)];
        m.pressure_dkpa[size_t(i)] = get_u16le(q);
        m.route[size_t(i)] = q[2];
        if (m.route[size_t(i)] > 2) return std::nullopt;
        m.duty_q8[size_t(i)] = q[3];
      }
      return m;
    }
    case MsgType::Heartbeat: {
      if (p.size() != 2) return std::nullopt;
      return Heartbeat{get_u16le(p.data())};
    }
    case MsgType::Ack: {
      if (p.size() != 3) return std::nullopt;
      return Ack{p[0], get_u16le(&p[1])};
    }
  }
  return std::nullopt;
}

}  // namespace

std::uint16_t crc16(std::span<const std::uint8_t> bytes) {
  std::uint16_t crc = 0xFFFF;
  for (std::uint8_t b : bytes) {
    crc ^= std::uint16_t(b) << 8;
    for (int i = 0; i < 8; ++i) {
      crc = (crc & 0x8000) ? std::uint16_t((crc << 1) ^ 0x1021) : std::uint16_t(crc << 1);
    }
  }
  return crc;
}

std::vector<std::uint8_t> encode(const Message& msg) {
  const Layout lo = layout_of(msg);
  std::vector<std::uint8_t> out;
  out.reserve(lo.payload_len + 6);
  out.push_back(kSync0);
  out.push_back(kSync1);
  out.push_back(std::uint8_t(lo.payload_len));
  out.push_back(std::uint8_t(lo.type));
  std::visit([&](const auto& m) { append_payload(out, m); }, msg);
  const std::uint16_t crc = crc16({out.data() + 2, out.size() - 2});
  out.push_back(std::uint8_t(crc >> 8));  // crc is big-endian on the wire
  out.push_back(std::uint8_t(crc & 0xFF));
  return out;
}

DecodeResult Decoder::push(std::span<const std::uint8_t> bytes) {
  DecodeResult out;
  buf_.insert(buf_.end(), bytes.begin(), bytes.end());

  std::size_t pos = 0;
  for (;;) {
    const std::size_t avail = buf_.size() - pos;
    if (avail < 1) break;
    if (buf_[pos] != kSync0) {
      ++pos;
      continue;
    }
    if (avail < 2) break;
    if (buf_[pos + 1] != kSync1) {
      ++pos;
      continue;
    }
    if (avail < 3) break;
    const std::uint8_t len = buf_[pos + 2];
    if (len > kMaxPayload) {
      out.errors.push_back({DecodeErrorKind::LengthOverflow, consumed_ + pos});
      ++pos;
      continue;
    }
    const std::size_t total = std::size_t(len) + 6;
    if (avail < total) break;  // wait for the rest of the frame

    const std::uint16_t calc = crc16({&buf_[pos + 2], std::size_t(len) + 2});
    const std::uint16_t rx =
        std::uint16_t((std::uint16_t(buf_[pos + 4 + len]) << 8) | buf_[pos + 5 + len]);
    if (calc != rx) {
      out.errors.push_back({DecodeErrorKind::BadCrc, consumed_ + pos});
      ++pos;
      continue;
    }
    auto msg = parse_payload(buf_[pos + 3], {&buf_[pos + 4], len});
    if (msg) {
      out.messages.push_back(*msg);
    } else {
      out.errors.push_back({DecodeErrorKind::UnknownType, consumed_ + pos});
    }
    pos += total;  // well-framed either way
  }

  buf_.erase(buf_.begin(), buf_.begin() + std::ptrdiff_t(pos));
  consumed_ += pos;
  return out;
}

}  // namespace sumbrella::wire
