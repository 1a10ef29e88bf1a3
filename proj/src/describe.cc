#include "ovsim/codec.h"

#include <cstdio>
#include <sstream>

namespace ovsim::codec {

namespace {

std::string hex32(std::uint32_t v)
{
  char buf[16];
  std::snprintf(buf, sizeof(buf), "0x%08x", v);
  return buf;
}

std::string hex_caps(const capability_vector& caps)
{
  char buf[16];
  std::snprintf(buf, sizeof(buf), "0x%08lx", caps.to_ulong());
  return buf;
}

std::string cause_text(const reject_cause& c)
{
  switch (c.semantics()) {
    case reject_semantics::illegal_ue:
      return "#3 illegal-ue";
    case reject_semantics::all_services_forbidden:
      return "#8 all-services-forbidden";
    case reject_semantics::integrity_failure:
      return "#9 integrity-failure";
    case reject_semantics::unknown:
      break;
  }
  return "#" + std::to_string(c.code) + " unknown";
}

} // namespace

std::string describe(const ue_identity& id)
{
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, imsi_id>) {
          return "imsi:" + v.digits;
        } else if constexpr (std::is_same_v<T, tmsi_id>) {
          return "tmsi:" + hex32(v.value);
        } else {
          char buf[24];
          std::snprintf(buf, sizeof(buf), "random:0x%010llx", static_cast<unsigned long long>(v.value));
          return buf;
        }
      },
      id);
}

std::string message_name(const rrc_message& m)
{
  static const char* names[] = {"ConnectionRequest", "ConnectionSetup", "ConnectionSetupComplete", "Paging",
                                "ConnectionRelease"};
  return names[m.index()];
}

std::string message_name(const nas_message& m)
{
  static const char* names[] = {"AttachRequest",         "AttachAccept",          "AttachComplete",
                                "AttachReject",          "ServiceRequest",        "ServiceReject",
                                "IdentityRequest",       "IdentityResponse",      "AuthenticationRequest",
                                "AuthenticationResponse", "SecurityModeCommand", "SecurityModeComplete",
                                "SecurityModeReject",    "SilentSms"};
  return names[m.index()];
}

std::string message_name(const mac_pdu& m)
{
  static const char* names[] = {"RandomAccessResponse", "ContentionResolution", "HarqAck",   "TpcCommand",
                                "Payload",              "UplinkGrant",          "RlcStatus", "TaCommand"};
  return names[m.index()];
}

std::string describe(const rrc_message& m)
{
  std::ostringstream os;
  os << message_name(m);
  if (const auto* req = std::get_if<connection_request>(&m)) {
    os << " identity=" << describe(req->identity) << " cause=" << to_string(req->cause);
  } else if (const auto* s = std::get_if<connection_setup>(&m)) {
    os << " config=" << to_hex(s->dedicated_config);
  } else if (const auto* c = std::get_if<connection_setup_complete>(&m)) {
    try {
      os << " nas=[" << describe(decode_nas(c->nas_payload)) << "]";
    } catch (const codec_error&) {
      os << " nas=" << to_hex(c->nas_payload);
    }
  } else if (const auto* p = std::get_if<paging>(&m)) {
    os << " records=" << p->tmsis.size();
    if (p->tmsis.size() <= 4) {
      for (auto t : p->tmsis) {
        os << " " << hex32(t);
      }
    }
  }
  return os.str();
}

std::string describe(const nas_message& m)
{
  std::ostringstream os;
  os << message_name(m);
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, attach_request>) {
          os << " identity=" << describe(v.identity) << " caps=" << hex_caps(v.capabilities);
        } else if constexpr (std::is_same_v<T, attach_accept>) {
          os << " tmsi=" << hex32(v.tmsi);
        } else if constexpr (std::is_same_v<T, attach_reject> || std::is_same_v<T, service_reject>) {
          os << " cause=" << cause_text(v.cause);
        } else if constexpr (std::is_same_v<T, service_request>) {
          char buf[32];
          std::snprintf(buf, sizeof(buf), " seq=%u mac=0x%04x", v.seq, v.short_mac);
          os << buf;
        } else if constexpr (std::is_same_v<T, identity_request>) {
          os << " type=imsi";
        } else if constexpr (std::is_same_v<T, identity_response>) {
          os << " identity=" << describe(v.identity);
        } else if constexpr (std::is_same_v<T, authentication_request>) {
          os << " rand=" << to_hex(v.rand);
        } else if constexpr (std::is_same_v<T, authentication_response>) {
          char buf[32];
          std::snprintf(buf, sizeof(buf), " res=0x%016llx", static_cast<unsigned long long>(v.res));
          os << buf;
        } else if constexpr (std::is_same_v<T, security_mode_command>) {
          os << " caps=" << hex_caps(v.replayed_capabilities);
        } else if constexpr (std::is_same_v<T, silent_sms>) {
          os << " type0=" << (v.type0 ? 1 : 0);
        }
      },
      m);
  return os.str();
}

std::string describe(const mac_pdu& m)
{
  std::ostringstream os;
  os << message_name(m);
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, random_access_response>) {
          os << " preamble=" << int(v.preamble) << " rnti=" << v.rnti << " ta=" << v.ta_steps
             << " grant=" << to_string(v.grant.at);
        } else if constexpr (std::is_same_v<T, contention_resolution>) {
          char buf[24];
          std::snprintf(buf, sizeof(buf), " id=0x%012llx", static_cast<unsigned long long>(v.id));
          os << buf;
        } else if constexpr (std::is_same_v<T, harq_ack>) {
          os << " pid=" << int(v.process_id);
        } else if constexpr (std::is_same_v<T, tpc_command>) {
          os << " delta=" << int(v.delta_db);
        } else if constexpr (std::is_same_v<T, payload>) {
          os << " lcid=" << int(v.lcid) << " segments=" << v.segments.size();
        } else if constexpr (std::is_same_v<T, uplink_grant>) {
          os << " at=" << to_string(v.at) << " rnti=" << v.rnti << " size=" << v.size_bytes;
        } else if constexpr (std::is_same_v<T, rlc_status>) {
          os << " lcid=" << int(v.lcid) << " ack_sn=" << v.ack_sn;
        } else if constexpr (std::is_same_v<T, ta_command>) {
          os << " steps=" << int(v.steps);
        }
      },
      m);
  return os.str();
}

} // namespace ovsim::codec
