#pragma once

// Compact binary codec for the RRC / NAS / MAC / RLC subset the simulator
// exchanges over the air. Wire layout is documented in docs/wire_format.md.

#include "ovsim/time.h"

#include <array>
#include <bitset>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace ovsim::codec {

using bytes = std::vector<std::uint8_t>;

/// Truncated, tag-invalid or otherwise undecodable input.
class codec_error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// RLC reassembly over a segment set with gaps or no final segment.
class sequence_error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Identities and information elements

struct imsi_id {
  std::string digits; ///< exactly 15 decimal digits
  friend bool operator==(const imsi_id&, const imsi_id&) = default;
};
struct tmsi_id {
  std::uint32_t value = 0;
  friend bool operator==(const tmsi_id&, const tmsi_id&) = default;
};
/// 40-bit random value used in the RRC request when no TMSI is held.
struct random_id {
  std::uint64_t value = 0;
  friend bool operator==(const random_id&, const random_id&) = default;
};

using ue_identity = std::variant<imsi_id, tmsi_id, random_id>;

constexpr std::uint64_t k_random_id_mask = (std::uint64_t{1} << 40) - 1;

/// Validates and wraps an IMSI string; throws std::invalid_argument.
imsi_id make_imsi(std::string digits);
bool    is_valid_imsi(const std::string& digits);

enum class establishment_cause : std::uint8_t { mo_signalling, mo_data, mt_access };

/// 3-bit code carried in the RRC request (mt-access=2, mo-signalling=3, mo-data=4).
std::uint8_t                       cause_code(establishment_cause c);
std::optional<establishment_cause> cause_from_code(std::uint8_t code);
const char*                        to_string(establishment_cause c);

enum class reject_semantics { illegal_ue, all_services_forbidden, integrity_failure, unknown };

struct reject_cause {
  std::uint8_t code = 8;

  static constexpr std::uint8_t illegal_ue             = 3;
  static constexpr std::uint8_t all_services_forbidden = 8;
  static constexpr std::uint8_t integrity_failure      = 9;

  reject_semantics semantics() const;
  friend bool      operator==(const reject_cause&, const reject_cause&) = default;
};

using capability_vector = std::bitset<32>;
using session_key       = std::array<std::uint8_t, 16>;
using auth_rand         = std::array<std::uint8_t, 16>;

// ---------------------------------------------------------------------------
// RRC

struct connection_request {
  ue_identity         identity = random_id{}; ///< tmsi_id or random_id only
  establishment_cause cause    = establishment_cause::mo_signalling;
  friend bool operator==(const connection_request&, const connection_request&) = default;
};
struct connection_setup {
  bytes       dedicated_config;
  friend bool operator==(const connection_setup&, const connection_setup&) = default;
};
struct connection_setup_complete {
  bytes       nas_payload;
  friend bool operator==(const connection_setup_complete&, const connection_setup_complete&) = default;
};
struct paging {
  std::vector<std::uint32_t> tmsis; ///< non-empty
  friend bool operator==(const paging&, const paging&) = default;
};
struct connection_release {
  friend bool operator==(const connection_release&, const connection_release&) = default;
};

using rrc_message =
    std::variant<connection_request, connection_setup, connection_setup_complete, paging, connection_release>;

// ---------------------------------------------------------------------------
// NAS

struct attach_request {
  ue_identity       identity = imsi_id{};
  capability_vector capabilities;
  friend bool operator==(const attach_request&, const attach_request&) = default;
};
struct attach_accept {
  std::uint32_t tmsi = 0; ///< TMSI allocated to the UE
  friend bool   operator==(const attach_accept&, const attach_accept&) = default;
};
struct attach_complete {
  friend bool operator==(const attach_complete&, const attach_complete&) = default;
};
struct attach_reject {
  reject_cause cause;
  friend bool  operator==(const attach_reject&, const attach_reject&) = default;
};
struct service_request {
  std::uint8_t  seq       = 0;
  std::uint16_t short_mac = 0;
  friend bool   operator==(const service_request&, const service_request&) = default;
};
struct service_reject {
  reject_cause cause;
  friend bool  operator==(const service_reject&, const service_reject&) = default;
};
/// Only the IMSI identity type is ever requested.
struct identity_request {
  friend bool operator==(const identity_request&, const identity_request&) = default;
};
struct identity_response {
  ue_identity identity = imsi_id{};
  friend bool operator==(const identity_response&, const identity_response&) = default;
};
struct authentication_request {
  auth_rand   rand{};
  friend bool operator==(const authentication_request&, const authentication_request&) = default;
};
struct authentication_response {
  std::uint64_t res = 0;
  friend bool   operator==(const authentication_response&, const authentication_response&) = default;
};
struct security_mode_command {
  capability_vector replayed_capabilities;
  friend bool       operator==(const security_mode_command&, const security_mode_command&) = default;
};
struct security_mode_complete {
  friend bool operator==(const security_mode_complete&, const security_mode_complete&) = default;
};
struct security_mode_reject {
  friend bool operator==(const security_mode_reject&, const security_mode_reject&) = default;
};
/// SMS delivered over NAS; type0 marks a Short Message Type 0 ("silent SMS").
struct silent_sms {
  bool        type0 = true;
  friend bool operator==(const silent_sms&, const silent_sms&) = default;
};

using nas_message = std::variant<attach_request, attach_accept, attach_complete, attach_reject, service_request,
                                 service_reject, identity_request, identity_response, authentication_request,
                                 authentication_response, security_mode_command, security_mode_complete,
                                 security_mode_reject, silent_sms>;

// ---------------------------------------------------------------------------
// MAC / RLC

/// Uplink resource allocation: the addressed UE transmits at `at`.
struct uplink_grant {
  subframe_time at;
  std::uint16_t rnti       = 0;
  std::uint16_t size_bytes = 0;
  friend bool   operator==(const uplink_grant&, const uplink_grant&) = default;
};

/// Timing-advance granularity: 16 * Ts = 16 / 30.72 MHz.
constexpr double k_ta_step_us = 16.0 / 30.72;

struct random_access_response {
  std::uint8_t  preamble = 0;
  std::uint16_t rnti     = 0;
  std::uint16_t ta_steps = 0;
  uplink_grant  grant;

  double      timing_advance_us() const { return ta_steps * k_ta_step_us; }
  friend bool operator==(const random_access_response&, const random_access_response&) = default;
};
struct contention_resolution {
  std::uint64_t id = 0; ///< 48 bits
  friend bool   operator==(const contention_resolution&, const contention_resolution&) = default;
};
struct harq_ack {
  std::uint8_t process_id = 0; ///< 3 bits
  friend bool  operator==(const harq_ack&, const harq_ack&) = default;
};
struct tpc_command {
  std::int8_t delta_db = 0; ///< one of -1, 0, +1, +3
  friend bool operator==(const tpc_command&, const tpc_command&) = default;
};
struct rlc_segment {
  std::uint16_t sn   = 0; ///< 10 bits
  bool          last = false;
  bytes         data;
  friend bool   operator==(const rlc_segment&, const rlc_segment&) = default;
};
/// Logical channels: CCCH carries the RRC connection setup, SRB1 everything after.
constexpr std::uint8_t k_lcid_ccch = 0;
constexpr std::uint8_t k_lcid_srb1 = 1;

struct payload {
  std::uint8_t             lcid = k_lcid_srb1;
  std::vector<rlc_segment> segments;
  friend bool              operator==(const payload&, const payload&) = default;
};
/// RLC status report: every SN up to and including ack_sn was received.
struct rlc_status {
  std::uint8_t  lcid   = k_lcid_srb1;
  std::uint16_t ack_sn = 0;
  friend bool   operator==(const rlc_status&, const rlc_status&) = default;
};
struct ta_command {
  std::int8_t steps = 0; ///< signed adjustment in k_ta_step_us units
  friend bool operator==(const ta_command&, const ta_command&) = default;
};

using mac_pdu = std::variant<random_access_response, contention_resolution, harq_ack, tpc_command, payload,
                             uplink_grant, rlc_status, ta_command>;

// ---------------------------------------------------------------------------
// Encode / decode

enum class layer : std::uint8_t { rrc, nas, mac };
const char* to_string(layer l);

using message = std::variant<rrc_message, nas_message, mac_pdu>;

bytes encode(const rrc_message& m);
bytes encode(const nas_message& m);
bytes encode(const mac_pdu& m);
bytes encode(const message& m);

rrc_message decode_rrc(std::span<const std::uint8_t> in);
nas_message decode_nas(std::span<const std::uint8_t> in);
mac_pdu     decode_mac(std::span<const std::uint8_t> in);
message     decode(std::span<const std::uint8_t> in, layer l);

/// A transport block is a concatenation of encoded MAC PDUs.
bytes                encode_transport_block(std::span<const mac_pdu> pdus);
std::vector<mac_pdu> decode_transport_block(std::span<const std::uint8_t> in);

/// Which layer an encoded SDU belongs to, judged by its leading tag byte.
std::optional<layer> detect_layer(std::span<const std::uint8_t> in);

/// Contention-resolution identity: the first 48 bits of the encoded request
/// (the request encodes to exactly 48 bits, so the mapping is 1:1).
std::uint64_t      contention_id(const connection_request& req);
connection_request request_from_contention_id(std::uint64_t id);

// ---------------------------------------------------------------------------
// RLC segmentation

constexpr std::size_t k_default_segment_bytes = 40;
constexpr std::size_t k_max_sn                = 1023;

/// Splits `data` into ceil(size / max_segment_bytes) segments numbered from 0
/// (one empty segment for empty input). Throws std::invalid_argument if
/// max_segment_bytes is zero or more than 1024 segments would be needed.
std::vector<rlc_segment> segment(std::span<const std::uint8_t> data,
                                 std::size_t                   max_segment_bytes = k_default_segment_bytes);

/// Inverse of segment(). Duplicate SNs are ignored; throws sequence_error
/// unless SNs 0..k are all present and segment k is the last one.
bytes reassemble(std::span<const rlc_segment> segments);

// ---------------------------------------------------------------------------
// Keyed-tag placeholders for NAS integrity and AKA (SipHash-2-4 underneath).

std::uint16_t service_short_mac(const session_key& key, std::uint32_t tmsi, std::uint8_t seq);
std::uint64_t auth_response(const session_key& key, const auth_rand& rand);

/// Subscriber key used when a scenario does not provision one explicitly
/// (BLAKE2b of the IMSI digits, truncated to 128 bits).
session_key default_session_key(std::string_view imsi);

// ---------------------------------------------------------------------------
// Human-readable rendering, used by logs and the replay tool.

std::string describe(const ue_identity& id);
std::string describe(const rrc_message& m);
std::string describe(const nas_message& m);
std::string describe(const mac_pdu& m);
std::string message_name(const rrc_message& m);
std::string message_name(const nas_message& m);
std::string message_name(const mac_pdu& m);

std::string to_hex(std::span<const std::uint8_t> data);
bytes       from_hex(std::string_view hex); ///< throws codec_error

} // namespace ovsim::codec
