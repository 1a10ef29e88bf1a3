#include "ovsim/codec.h"

#include <sodium.h>

#include <algorithm>
#include <map>

namespace ovsim::codec {

namespace {

// Tag assignments. High nibble selects the layer: 0x1/0x2 RRC, 0x4 NAS, 0x8 MAC.
constexpr std::uint8_t k_tag_conn_request_nibble = 0x10;
constexpr std::uint8_t k_tag_conn_setup          = 0x21;
constexpr std::uint8_t k_tag_conn_setup_complete = 0x22;
constexpr std::uint8_t k_tag_paging              = 0x23;
constexpr std::uint8_t k_tag_conn_release        = 0x24;

constexpr std::uint8_t k_tag_attach_request   = 0x41;
constexpr std::uint8_t k_tag_attach_accept    = 0x42;
constexpr std::uint8_t k_tag_attach_complete  = 0x43;
constexpr std::uint8_t k_tag_attach_reject    = 0x44;
constexpr std::uint8_t k_tag_service_request  = 0x45;
constexpr std::uint8_t k_tag_service_reject   = 0x46;
constexpr std::uint8_t k_tag_identity_request = 0x47;
constexpr std::uint8_t k_tag_identity_resp    = 0x48;
constexpr std::uint8_t k_tag_auth_request     = 0x49;
constexpr std::uint8_t k_tag_auth_response    = 0x4a;
constexpr std::uint8_t k_tag_smc              = 0x4b;
constexpr std::uint8_t k_tag_smc_complete     = 0x4c;
constexpr std::uint8_t k_tag_smc_reject       = 0x4d;
constexpr std::uint8_t k_tag_sms              = 0x4e;

constexpr std::uint8_t k_tag_rar          = 0x81;
constexpr std::uint8_t k_tag_contention   = 0x82;
constexpr std::uint8_t k_tag_harq_ack     = 0x83;
constexpr std::uint8_t k_tag_tpc          = 0x84;
constexpr std::uint8_t k_tag_payload      = 0x85;
constexpr std::uint8_t k_tag_grant        = 0x86;
constexpr std::uint8_t k_tag_rlc_status   = 0x87;
constexpr std::uint8_t k_tag_ta_command   = 0x88;

constexpr std::uint8_t k_id_imsi   = 1;
constexpr std::uint8_t k_id_tmsi   = 2;
constexpr std::uint8_t k_id_random = 3;

constexpr std::uint8_t k_identity_type_imsi = 1;

class writer
{
public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v)
  {
    u8(static_cast<std::uint8_t>(v >> 8));
    u8(static_cast<std::uint8_t>(v));
  }
  void u32(std::uint32_t v)
  {
    u16(static_cast<std::uint16_t>(v >> 16));
    u16(static_cast<std::uint16_t>(v));
  }
  void be(std::uint64_t v, int n)
  {
    for (int i = n - 1; i >= 0; --i) {
      u8(static_cast<std::uint8_t>(v >> (8 * i)));
    }
  }
  void raw(std::span<const std::uint8_t> d) { out_.insert(out_.end(), d.begin(), d.end()); }
  bytes take() { return std::move(out_); }

private:
  bytes out_;
};

class reader
{
public:
  explicit reader(std::span<const std::uint8_t> in) : in_(in) {}

  std::uint8_t u8()
  {
    need(1);
    return in_[pos_++];
  }
  std::uint16_t u16()
  {
    const std::uint16_t hi = u8();
    return static_cast<std::uint16_t>((hi << 8) | u8());
  }
  std::uint32_t u32()
  {
    const std::uint32_t hi = u16();
    return (hi << 16) | u16();
  }
  std::uint64_t be(int n)
  {
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) {
      v = (v << 8) | u8();
    }
    return v;
  }
  std::span<const std::uint8_t> raw(std::size_t n)
  {
    need(n);
    auto s = in_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t remaining() const { return in_.size() - pos_; }
  void        expect_end() const
  {
    if (remaining() != 0) {
      throw codec_error("trailing bytes after message");
    }
  }

private:
  void need(std::size_t n) const
  {
    if (remaining() < n) {
      throw codec_error("truncated input");
    }
  }

  std::span<const std::uint8_t> in_;
  std::size_t                   pos_ = 0;
};

bytes tlv(std::uint8_t tag, const bytes& body)
{
  if (body.size() > 0xffff) {
    throw std::invalid_argument("message body exceeds 65535 bytes");
  }
  writer w;
  w.u8(tag);
  w.u16(static_cast<std::uint16_t>(body.size()));
  w.raw(body);
  return w.take();
}

/// Reads one TLV header + body; the body reader is returned.
struct tlv_view {
  std::uint8_t                  tag;
  std::span<const std::uint8_t> body;
};

tlv_view read_tlv(reader& r)
{
  const std::uint8_t  tag = r.u8();
  const std::uint16_t len = r.u16();
  return {tag, r.raw(len)};
}

// -- identities --------------------------------------------------------------

void write_imsi_bcd(writer& w, const std::string& digits)
{
  for (std::size_t i = 0; i < 14; i += 2) {
    w.u8(static_cast<std::uint8_t>(((digits[i] - '0') << 4) | (digits[i + 1] - '0')));
  }
  w.u8(static_cast<std::uint8_t>(((digits[14] - '0') << 4) | 0x0f));
}

std::string read_imsi_bcd(reader& r)
{
  std::string digits;
  for (int i = 0; i < 8; ++i) {
    const std::uint8_t b  = r.u8();
    const int          hi = b >> 4;
    const int          lo = b & 0x0f;
    if (hi > 9) {
      throw codec_error("invalid IMSI digit");
    }
    digits.push_back(static_cast<char>('0' + hi));
    if (i == 7) {
      if (lo != 0x0f) {
        throw codec_error("invalid IMSI filler");
      }
    } else {
      if (lo > 9) {
        throw codec_error("invalid IMSI digit");
      }
      digits.push_back(static_cast<char>('0' + lo));
    }
  }
  return digits;
}

void write_identity(writer& w, const ue_identity& id)
{
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, imsi_id>) {
          if (!is_valid_imsi(v.digits)) {
            throw std::invalid_argument("IMSI must have exactly 15 digits");
          }
          w.u8(k_id_imsi);
          write_imsi_bcd(w, v.digits);
        } else if constexpr (std::is_same_v<T, tmsi_id>) {
          w.u8(k_id_tmsi);
          w.u32(v.value);
        } else {
          if (v.value > k_random_id_mask) {
            throw std::invalid_argument("random identity exceeds 40 bits");
          }
          w.u8(k_id_random);
          w.be(v.value, 5);
        }
      },
      id);
}

ue_identity read_identity(reader& r)
{
  switch (r.u8()) {
    case k_id_imsi:
      return imsi_id{read_imsi_bcd(r)};
    case k_id_tmsi:
      return tmsi_id{r.u32()};
    case k_id_random:
      return random_id{r.be(5)};
    default:
      throw codec_error("unknown identity type");
  }
}

void write_grant(writer& w, const uplink_grant& g)
{
  if (g.at.subframe > 9 || g.at.frame > 0xffffffffull) {
    throw std::invalid_argument("grant time out of range");
  }
  w.u32(static_cast<std::uint32_t>(g.at.frame));
  w.u8(g.at.subframe);
  w.u16(g.rnti);
  w.u16(g.size_bytes);
}

uplink_grant read_grant(reader& r)
{
  uplink_grant g;
  g.at.frame    = r.u32();
  g.at.subframe = r.u8();
  if (g.at.subframe > 9) {
    throw codec_error("subframe out of range");
  }
  g.rnti       = r.u16();
  g.size_bytes = r.u16();
  return g;
}

bytes encode_connection_request(const connection_request& req)
{
  std::uint8_t  id_type = 0;
  std::uint64_t value   = 0;
  if (const auto* t = std::get_if<tmsi_id>(&req.identity)) {
    id_type = 0;
    value   = t->value;
  } else if (const auto* rnd = std::get_if<random_id>(&req.identity)) {
    if (rnd->value > k_random_id_mask) {
      throw std::invalid_argument("random identity exceeds 40 bits");
    }
    id_type = 1;
    value   = rnd->value;
  } else {
    throw std::invalid_argument("RRC connection request cannot carry an IMSI");
  }
  writer w;
  w.u8(static_cast<std::uint8_t>(k_tag_conn_request_nibble | (id_type << 3) | cause_code(req.cause)));
  w.be(value, 5);
  return w.take();
}

connection_request decode_connection_request(std::uint64_t packed48)
{
  const auto first = static_cast<std::uint8_t>(packed48 >> 40);
  if ((first & 0xf0) != k_tag_conn_request_nibble) {
    throw codec_error("not a connection request");
  }
  const auto cause = cause_from_code(first & 0x07);
  if (!cause) {
    throw codec_error("invalid establishment cause");
  }
  const std::uint64_t value = packed48 & k_random_id_mask;
  connection_request  req;
  req.cause = *cause;
  if ((first & 0x08) != 0) {
    req.identity = random_id{value};
  } else {
    if (value > 0xffffffffull) {
      throw codec_error("S-TMSI with non-zero MME code");
    }
    req.identity = tmsi_id{static_cast<std::uint32_t>(value)};
  }
  return req;
}

void check_reject(const reject_cause&) {}

} // namespace

// ---------------------------------------------------------------------------

bool is_valid_imsi(const std::string& digits)
{
  return digits.size() == 15 && std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; });
}

imsi_id make_imsi(std::string digits)
{
  if (!is_valid_imsi(digits)) {
    throw std::invalid_argument("IMSI must have exactly 15 digits: '" + digits + "'");
  }
  return imsi_id{std::move(digits)};
}

std::uint8_t cause_code(establishment_cause c)
{
  switch (c) {
    case establishment_cause::mt_access:
      return 2;
    case establishment_cause::mo_signalling:
      return 3;
    case establishment_cause::mo_data:
      return 4;
  }
  return 0;
}

std::optional<establishment_cause> cause_from_code(std::uint8_t code)
{
  switch (code) {
    case 2:
      return establishment_cause::mt_access;
    case 3:
      return establishment_cause::mo_signalling;
    case 4:
      return establishment_cause::mo_data;
    default:
      return std::nullopt;
  }
}

const char* to_string(establishment_cause c)
{
  switch (c) {
    case establishment_cause::mo_signalling:
      return "mo-signalling";
    case establishment_cause::mo_data:
      return "mo-data";
    case establishment_cause::mt_access:
      return "mt-access";
  }
  return "?";
}

reject_semantics reject_cause::semantics() const
{
  switch (code) {
    case illegal_ue:
      return reject_semantics::illegal_ue;
    case all_services_forbidden:
      return reject_semantics::all_services_forbidden;
    case integrity_failure:
      return reject_semantics::integrity_failure;
    default:
      return reject_semantics::unknown;
  }
}

const char* to_string(layer l)
{
  switch (l) {
    case layer::rrc:
      return "rrc";
    case layer::nas:
      return "nas";
    case layer::mac:
      return "mac";
  }
  return "?";
}

// -- RRC ---------------------------------------------------------------------

bytes encode(const rrc_message& m)
{
  return std::visit(
      [](const auto& v) -> bytes {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, connection_request>) {
          return encode_connection_request(v);
        } else if constexpr (std::is_same_v<T, connection_setup>) {
          return tlv(k_tag_conn_setup, v.dedicated_config);
        } else if constexpr (std::is_same_v<T, connection_setup_complete>) {
          return tlv(k_tag_conn_setup_complete, v.nas_payload);
        } else if constexpr (std::is_same_v<T, paging>) {
          if (v.tmsis.empty()) {
            throw std::invalid_argument("paging record list must be non-empty");
          }
          writer w;
          for (auto t : v.tmsis) {
            w.u32(t);
          }
          return tlv(k_tag_paging, w.take());
        } else {
          return tlv(k_tag_conn_release, {});
        }
      },
      m);
}

rrc_message decode_rrc(std::span<const std::uint8_t> in)
{
  if (in.empty()) {
    throw codec_error("empty input");
  }
  if ((in[0] & 0xf0) == k_tag_conn_request_nibble) {
    if (in.size() != 6) {
      throw codec_error("connection request must be exactly 6 bytes");
    }
    reader r(in);
    return decode_connection_request(r.be(6));
  }
  reader r(in);
  auto   t = read_tlv(r);
  r.expect_end();
  reader body(t.body);
  switch (t.tag) {
    case k_tag_conn_setup:
      return connection_setup{bytes(t.body.begin(), t.body.end())};
    case k_tag_conn_setup_complete:
      return connection_setup_complete{bytes(t.body.begin(), t.body.end())};
    case k_tag_paging: {
      if (t.body.empty() || t.body.size() % 4 != 0) {
        throw codec_error("malformed paging record list");
      }
      paging p;
      while (body.remaining() > 0) {
        p.tmsis.push_back(body.u32());
      }
      return p;
    }
    case k_tag_conn_release:
      body.expect_end();
      return connection_release{};
    default:
      throw codec_error("unknown RRC tag");
  }
}

// -- NAS ---------------------------------------------------------------------

bytes encode(const nas_message& m)
{
  writer w;
  std::uint8_t tag = 0;
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, attach_request>) {
          tag = k_tag_attach_request;
          write_identity(w, v.identity);
          w.u32(static_cast<std::uint32_t>(v.capabilities.to_ulong()));
        } else if constexpr (std::is_same_v<T, attach_accept>) {
          tag = k_tag_attach_accept;
          w.u32(v.tmsi);
        } else if constexpr (std::is_same_v<T, attach_complete>) {
          tag = k_tag_attach_complete;
        } else if constexpr (std::is_same_v<T, attach_reject>) {
          tag = k_tag_attach_reject;
          check_reject(v.cause);
          w.u8(v.cause.code);
        } else if constexpr (std::is_same_v<T, service_request>) {
          tag = k_tag_service_request;
          w.u8(v.seq);
          w.u16(v.short_mac);
        } else if constexpr (std::is_same_v<T, service_reject>) {
          tag = k_tag_service_reject;
          w.u8(v.cause.code);
        } else if constexpr (std::is_same_v<T, identity_request>) {
          tag = k_tag_identity_request;
          w.u8(k_identity_type_imsi);
        } else if constexpr (std::is_same_v<T, identity_response>) {
          tag = k_tag_identity_resp;
          if (!std::holds_alternative<imsi_id>(v.identity)) {
            throw std::invalid_argument("identity response must carry an IMSI");
          }
          write_identity(w, v.identity);
        } else if constexpr (std::is_same_v<T, authentication_request>) {
          tag = k_tag_auth_request;
          w.raw(v.rand);
        } else if constexpr (std::is_same_v<T, authentication_response>) {
          tag = k_tag_auth_response;
          w.be(v.res, 8);
        } else if constexpr (std::is_same_v<T, security_mode_command>) {
          tag = k_tag_smc;
          w.u32(static_cast<std::uint32_t>(v.replayed_capabilities.to_ulong()));
        } else if constexpr (std::is_same_v<T, security_mode_complete>) {
          tag = k_tag_smc_complete;
        } else if constexpr (std::is_same_v<T, security_mode_reject>) {
          tag = k_tag_smc_reject;
        } else {
          tag = k_tag_sms;
          w.u8(v.type0 ? 1 : 0);
        }
      },
      m);
  return tlv(tag, w.take());
}

nas_message decode_nas(std::span<const std::uint8_t> in)
{
  if (in.empty()) {
    throw codec_error("empty input");
  }
  reader r(in);
  auto   t = read_tlv(r);
  r.expect_end();
  reader      b(t.body);
  nas_message out;
  switch (t.tag) {
    case k_tag_attach_request: {
      attach_request a;
      a.identity     = read_identity(b);
      a.capabilities = capability_vector(b.u32());
      out            = a;
      break;
    }
    case k_tag_attach_accept:
      out = attach_accept{b.u32()};
      break;
    case k_tag_attach_complete:
      out = attach_complete{};
      break;
    case k_tag_attach_reject:
      out = attach_reject{reject_cause{b.u8()}};
      break;
    case k_tag_service_request: {
      service_request s;
      s.seq       = b.u8();
      s.short_mac = b.u16();
      out         = s;
      break;
    }
    case k_tag_service_reject:
      out = service_reject{reject_cause{b.u8()}};
      break;
    case k_tag_identity_request:
      if (b.u8() != k_identity_type_imsi) {
        throw codec_error("unsupported identity type requested");
      }
      out = identity_request{};
      break;
    case k_tag_identity_resp: {
      identity_response resp{read_identity(b)};
      if (!std::holds_alternative<imsi_id>(resp.identity)) {
        throw codec_error("identity response without IMSI");
      }
      out = resp;
      break;
    }
    case k_tag_auth_request: {
      authentication_request a;
      auto                   raw = b.raw(16);
      std::copy(raw.begin(), raw.end(), a.rand.begin());
      out = a;
      break;
    }
    case k_tag_auth_response:
      out = authentication_response{b.be(8)};
      break;
    case k_tag_smc:
      out = security_mode_command{capability_vector(b.u32())};
      break;
    case k_tag_smc_complete:
      out = security_mode_complete{};
      break;
    case k_tag_smc_reject:
      out = security_mode_reject{};
      break;
    case k_tag_sms: {
      const auto flag = b.u8();
      if (flag > 1) {
        throw codec_error("invalid SMS flag");
      }
      out = silent_sms{flag == 1};
      break;
    }
    default:
      throw codec_error("unknown NAS tag");
  }
  b.expect_end();
  return out;
}

// -- MAC ---------------------------------------------------------------------

bytes encode(const mac_pdu& m)
{
  writer       w;
  std::uint8_t tag = 0;
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, random_access_response>) {
          tag = k_tag_rar;
          w.u8(v.preamble);
          w.u16(v.rnti);
          w.u16(v.ta_steps);
          write_grant(w, v.grant);
        } else if constexpr (std::is_same_v<T, contention_resolution>) {
          tag = k_tag_contention;
          if (v.id >> 48 != 0) {
            throw std::invalid_argument("contention resolution id exceeds 48 bits");
          }
          w.be(v.id, 6);
        } else if constexpr (std::is_same_v<T, harq_ack>) {
          tag = k_tag_harq_ack;
          if (v.process_id > 7) {
            throw std::invalid_argument("HARQ process id exceeds 3 bits");
          }
          w.u8(v.process_id);
        } else if constexpr (std::is_same_v<T, tpc_command>) {
          tag = k_tag_tpc;
          if (v.delta_db != -1 && v.delta_db != 0 && v.delta_db != 1 && v.delta_db != 3) {
            throw std::invalid_argument("TPC delta must be one of -1, 0, +1, +3");
          }
          w.u8(static_cast<std::uint8_t>(v.delta_db));
        } else if constexpr (std::is_same_v<T, payload>) {
          tag = k_tag_payload;
          if (v.segments.size() > 0xff) {
            throw std::invalid_argument("too many RLC segments in one PDU");
          }
          w.u8(v.lcid);
          w.u8(static_cast<std::uint8_t>(v.segments.size()));
          for (const auto& s : v.segments) {
            if (s.sn > k_max_sn || s.data.size() > 0xffff) {
              throw std::invalid_argument("RLC segment out of range");
            }
            w.u16(static_cast<std::uint16_t>((s.last ? 0x8000 : 0) | s.sn));
            w.u16(static_cast<std::uint16_t>(s.data.size()));
            w.raw(s.data);
          }
        } else if constexpr (std::is_same_v<T, uplink_grant>) {
          tag = k_tag_grant;
          write_grant(w, v);
        } else if constexpr (std::is_same_v<T, rlc_status>) {
          tag = k_tag_rlc_status;
          if (v.ack_sn > k_max_sn) {
            throw std::invalid_argument("RLC ack SN exceeds 10 bits");
          }
          w.u8(v.lcid);
          w.u16(v.ack_sn);
        } else {
          tag = k_tag_ta_command;
          if (v.steps < -31 || v.steps > 32) {
            throw std::invalid_argument("TA command out of range");
          }
          w.u8(static_cast<std::uint8_t>(v.steps));
        }
      },
      m);
  return tlv(tag, w.take());
}

namespace {

mac_pdu decode_mac_body(const tlv_view& t)
{
  reader  b(t.body);
  mac_pdu out;
  switch (t.tag) {
    case k_tag_rar: {
      random_access_response rar;
      rar.preamble = b.u8();
      rar.rnti     = b.u16();
      rar.ta_steps = b.u16();
      rar.grant    = read_grant(b);
      out          = rar;
      break;
    }
    case k_tag_contention:
      out = contention_resolution{b.be(6)};
      break;
    case k_tag_harq_ack: {
      const auto pid = b.u8();
      if (pid > 7) {
        throw codec_error("HARQ process id out of range");
      }
      out = harq_ack{pid};
      break;
    }
    case k_tag_tpc: {
      const auto d = static_cast<std::int8_t>(b.u8());
      if (d != -1 && d != 0 && d != 1 && d != 3) {
        throw codec_error("invalid TPC delta");
      }
      out = tpc_command{d};
      break;
    }
    case k_tag_payload: {
      payload p;
      p.lcid         = b.u8();
      const auto cnt = b.u8();
      for (unsigned i = 0; i < cnt; ++i) {
        const auto hdr = b.u16();
        if ((hdr & 0x7c00) != 0) {
          throw codec_error("RLC SN exceeds 10 bits");
        }
        rlc_segment s;
        s.last       = (hdr & 0x8000) != 0;
        s.sn         = hdr & 0x03ff;
        const auto n = b.u16();
        auto       d = b.raw(n);
        s.data.assign(d.begin(), d.end());
        p.segments.push_back(std::move(s));
      }
      out = std::move(p);
      break;
    }
    case k_tag_grant:
      out = read_grant(b);
      break;
    case k_tag_rlc_status: {
      rlc_status s;
      s.lcid   = b.u8();
      s.ack_sn = b.u16();
      if (s.ack_sn > k_max_sn) {
        throw codec_error("RLC ack SN out of range");
      }
      out = s;
      break;
    }
    case k_tag_ta_command: {
      const auto steps = static_cast<std::int8_t>(b.u8());
      if (steps < -31 || steps > 32) {
        throw codec_error("TA command out of range");
      }
      out = ta_command{steps};
      break;
    }
    default:
      throw codec_error("unknown MAC tag");
  }
  b.expect_end();
  return out;
}

} // namespace

mac_pdu decode_mac(std::span<const std::uint8_t> in)
{
  if (in.empty()) {
    throw codec_error("empty input");
  }
  reader r(in);
  auto   t = read_tlv(r);
  r.expect_end();
  return decode_mac_body(t);
}

bytes encode(const message& m)
{
  return std::visit([](const auto& v) { return encode(v); }, m);
}

message decode(std::span<const std::uint8_t> in, layer l)
{
  switch (l) {
    case layer::rrc:
      return decode_rrc(in);
    case layer::nas:
      return decode_nas(in);
    case layer::mac:
      return decode_mac(in);
  }
  throw codec_error("unknown layer");
}

bytes encode_transport_block(std::span<const mac_pdu> pdus)
{
  bytes out;
  for (const auto& p : pdus) {
    auto b = encode(p);
    out.insert(out.end(), b.begin(), b.end());
  }
  return out;
}

std::vector<mac_pdu> decode_transport_block(std::span<const std::uint8_t> in)
{
  if (in.empty()) {
    throw codec_error("empty transport block");
  }
  std::vector<mac_pdu> out;
  reader               r(in);
  while (r.remaining() > 0) {
    out.push_back(decode_mac_body(read_tlv(r)));
  }
  return out;
}

std::optional<layer> detect_layer(std::span<const std::uint8_t> in)
{
  if (in.empty()) {
    return std::nullopt;
  }
  switch (in[0] >> 4) {
    case 0x1:
    case 0x2:
      return layer::rrc;
    case 0x4:
      return layer::nas;
    case 0x8:
      return layer::mac;
    default:
      return std::nullopt;
  }
}

std::uint64_t contention_id(const connection_request& req)
{
  const auto b = encode_connection_request(req);
  reader     r(b);
  return r.be(6);
}

connection_request request_from_contention_id(std::uint64_t id)
{
  if (id >> 48 != 0) {
    throw codec_error("contention id exceeds 48 bits");
  }
  return decode_connection_request(id);
}

// -- RLC ---------------------------------------------------------------------

std::vector<rlc_segment> segment(std::span<const std::uint8_t> data, std::size_t max_segment_bytes)
{
  if (max_segment_bytes == 0) {
    throw std::invalid_argument("max_segment_bytes must be positive");
  }
  const std::size_t count = data.empty() ? 1 : (data.size() + max_segment_bytes - 1) / max_segment_bytes;
  if (count > k_max_sn + 1) {
    throw std::invalid_argument("payload needs more than 1024 RLC segments");
  }
  std::vector<rlc_segment> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t begin = i * max_segment_bytes;
    const std::size_t end   = std::min(data.size(), begin + max_segment_bytes);
    rlc_segment       s;
    s.sn   = static_cast<std::uint16_t>(i);
    s.last = i + 1 == count;
    s.data.assign(data.begin() + static_cast<std::ptrdiff_t>(begin), data.begin() + static_cast<std::ptrdiff_t>(end));
    out.push_back(std::move(s));
  }
  return out;
}

bytes reassemble(std::span<const rlc_segment> segments)
{
  std::map<std::uint16_t, const rlc_segment*> by_sn;
  for (const auto& s : segments) {
    by_sn.emplace(s.sn, &s); // first copy wins, duplicates ignored
  }
  bytes         out;
  std::uint16_t expected = 0;
  for (const auto& [sn, seg] : by_sn) {
    if (sn != expected) {
      throw sequence_error("RLC segment " + std::to_string(expected) + " missing");
    }
    out.insert(out.end(), seg->data.begin(), seg->data.end());
    if (seg->last) {
      return out;
    }
    ++expected;
  }
  throw sequence_error("no final RLC segment");
}

// -- keyed tags --------------------------------------------------------------

namespace {

std::uint64_t keyed_tag(const session_key& key, std::span<const std::uint8_t> msg)
{
  static_assert(crypto_shorthash_KEYBYTES == 16);
  static_assert(crypto_shorthash_BYTES == 8);
  std::array<unsigned char, 8> out{};
  crypto_shorthash(out.data(), msg.data(), msg.size(), key.data());
  std::uint64_t v = 0;
  for (auto b : out) {
    v = (v << 8) | b;
  }
  return v;
}

} // namespace

std::uint16_t service_short_mac(const session_key& key, std::uint32_t tmsi, std::uint8_t seq)
{
  const std::array<std::uint8_t, 6> msg{k_tag_service_request,          seq,
                                        static_cast<std::uint8_t>(tmsi >> 24), static_cast<std::uint8_t>(tmsi >> 16),
                                        static_cast<std::uint8_t>(tmsi >> 8),  static_cast<std::uint8_t>(tmsi)};
  return static_cast<std::uint16_t>(keyed_tag(key, msg));
}

std::uint64_t auth_response(const session_key& key, const auth_rand& rand)
{
  return keyed_tag(key, rand);
}

session_key default_session_key(std::string_view imsi)
{
  static constexpr std::string_view label = "ovsim-subscriber-key:";
  std::string                       input(label);
  input.append(imsi);
  session_key key{};
  crypto_generichash(key.data(), key.size(), reinterpret_cast<const unsigned char*>(input.data()), input.size(),
                     nullptr, 0);
  return key;
}

// -- hex ---------------------------------------------------------------------

std::string to_hex(std::span<const std::uint8_t> data)
{
  static constexpr char digits[] = "0123456789abcdef";
  std::string           s;
  s.reserve(data.size() * 2);
  for (auto b : data) {
    s.push_back(digits[b >> 4]);
    s.push_back(digits[b & 0x0f]);
  }
  return s;
}

bytes from_hex(std::string_view hex)
{
  if (hex.size() % 2 != 0) {
    throw codec_error("odd-length hex string");
  }
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') {
      return c - '0';
    }
    if (c >= 'a' && c <= 'f') {
      return c - 'a' + 10;
    }
    if (c >= 'A' && c <= 'F') {
      return c - 'A' + 10;
    }
    throw codec_error("invalid hex digit");
  };
  bytes out;
  out.reserve(hex.size() / 2);
  for (std::size_t i = 0; i < hex.size(); i += 2) {
    out.push_back(static_cast<std::uint8_t>((nibble(hex[i]) << 4) | nibble(hex[i + 1])));
  }
  return out;
}

} // namespace ovsim::codec
