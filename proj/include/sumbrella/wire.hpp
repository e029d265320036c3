#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

namespace sumbrella::wire {

// Frame layout, normative for both serial links:
//
//   0xAA 0x55 | length u8 | msg_type u8 | payload[length] | crc16 (big-endian)
//
// length counts payload bytes only (max 64). The CRC is CRC-16/CCITT-FALSE
// (poly 0x1021, init 0xFFFF, no reflection, no final xor) computed over
// length | msg_type | payload. Multi-byte integers inside payloads are
// little-endian.

inline constexpr std::uint8_t kSync0 = 0xAA;
inline constexpr std::uint8_t kSync1 = 0x55;
inline constexpr std::size_t kMaxPayload = 64;
inline constexpr std::size_t kMaxFrame = kMaxPayload + 6;

enum class MsgType : std::uint8_t {
  CmdCableSetMode = 0x01,
  CmdCableWaveParams = 0x02,
  CmdPneuTargets = 0x03,
  TlmCableStatus = 0x10,
  TlmPneuStatus = 0x11,
  Heartbeat = 0x20,
  Ack = 0x21,
};

// Cable mode codes carried by CmdCableSetMode.
inline constexpr std::uint8_t kCableModeHold = 0;
inline constexpr std::uint8_t kCableModePullUp = 1;
inline constexpr std::uint8_t kCableModeRelease = 2;
inline constexpr std::uint8_t kCableModeWave = 3;

struct CmdCableSetMode {
  std::uint8_t leaf_mask = 1;  // bits 0..2, must be in [1,7]
  std::uint8_t mode = 0;       // 0 Hold, 1 PullUp, 2 Release, 3 Wave
  bool operator==(const CmdCableSetMode&) const = default;
};

struct CmdCableWaveParams {
  std::array<std::uint8_t, 3> amplitude_q8{};   // 0..255 -> 0..1
  std::uint16_t frequency_chz = 0;              // centi-hertz
  std::array<std::uint16_t, 3> phase_mrad{};    // milli-radians
  bool operator==(const CmdCableWaveParams&) const = default;
};

struct CmdPneuTargets {
  std::array<std::uint16_t, 3> target_dkpa{};  // deci-kPa
  bool operator==(const CmdPneuTargets&) const = default;
};

struct TlmCableStatus {
  std::array<std::uint8_t, 3> mode{};         // LeafMode code 0..4
  std::array<std::int32_t, 3> position{};     // winch ticks
  std::array<std::uint16_t, 3> torque_raw{};  // deci torque units
  bool operator==(const TlmCableStatus&) const = default;
};

struct TlmPneuStatus {
  std::array<std::uint16_t, 3> pressure_dkpa{};
  std::array<std::uint8_t, 3> route{};  // 0 Hold, 1 Inflate, 2 Exhaust
  std::array<std::uint8_t, 3> duty_q8{};
  bool operator==(const TlmPneuStatus&) const = default;
};

struct Heartbeat {
  std::uint16_t seq = 0;
  bool operator==(const Heartbeat&) const = default;
};

struct Ack {
  std::uint8_t acked_type = 0;
  std::uint16_t seq = 0;
  bool operator==(const Ack&) const = default;
};

using Message = std::variant<CmdCableSetMode, CmdCableWaveParams, CmdPneuTargets,
                             TlmCableStatus, TlmPneuStatus, Heartbeat, Ack>;

std::uint16_t crc16(std::span<const std::uint8_t> bytes);

class EncodeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Serializes one message into a complete frame. Throws EncodeError if the
// message violates its field invariants.
std::vector<std::uint8_t> encode(const Message& msg);

enum class DecodeErrorKind : std::uint8_t { BadCrc, UnknownType, LengthOverflow };

struct DecodeError {
  DecodeErrorKind kind;
  std::uint64_t offset;  // stream offset of the frame's first byte
  bool operator==(const DecodeError&) const = default;
};

struct DecodeResult {
  std::vector<Message> messages;
  std::vector<DecodeError> errors;
};

// Incremental frame decoder. Bytes may arrive in arbitrary chunks; a partial
// frame is retained across calls (at most kMaxFrame bytes). On a bad CRC or
// length the decoder discards a single byte and rescans for sync.
class Decoder {
 public:
  DecodeResult push(std::span<const std::uint8_t> bytes);
  std::size_t buffered() const { return buf_.size(); }

 private:
  std::vector<std::uint8_t> buf_;
  std::uint64_t consumed_ = 0;  // stream offset of buf_[0]
};

}  // namespace sumbrella::wire
