#include "ovsim/network.h"

#include <stdexcept>

namespace ovsim {

namespace {

bool persistent(std::uint8_t cause)
{
  return cause == codec::reject_cause::illegal_ue || cause == codec::reject_cause::all_services_forbidden;
}

} // namespace

mme::mme(simulator& sim, enb_node& enb, mme_config cfg) :
  sim_(sim), enb_(enb), cfg_(std::move(cfg)), rng_(sim.derive_rng("mme"))
{
  if (cfg_.sms_latency_min < 0 || cfg_.sms_latency_max < cfg_.sms_latency_min) {
    throw std::invalid_argument("SMS latency range is empty");
  }
  for (const auto& b : cfg_.blocked_imsis) {
    if (b.empty()) {
      throw std::invalid_argument("empty blocked IMSI entry");
    }
  }
  for (const auto& s : cfg_.subscribers) {
    if (!codec::is_valid_imsi(s.imsi)) {
      throw std::invalid_argument("invalid subscriber IMSI: " + s.imsi);
    }
    if (find_by_imsi(s.imsi) != nullptr) {
      throw std::invalid_argument("duplicate subscriber IMSI: " + s.imsi);
    }
    subscriber sub;
    sub.imsi         = s.imsi;
    sub.tmsi         = s.tmsi;
    sub.capabilities = s.capabilities;
    sub.key          = s.key.value_or(codec::default_session_key(s.imsi));
    sub.registered   = s.tmsi.has_value();
    subscribers_.push_back(std::move(sub));
    if (s.tmsi) {
      if (!by_tmsi_.emplace(*s.tmsi, subscribers_.size() - 1).second) {
        throw std::invalid_argument("duplicate subscriber TMSI");
      }
    }
  }
}

mme::subscriber* mme::find_by_imsi(const std::string& imsi)
{
  for (auto& s : subscribers_) {
    if (s.imsi == imsi) {
      return &s;
    }
  }
  return nullptr;
}

mme::subscriber* mme::find_by_tmsi(std::uint32_t tmsi)
{
  auto it = by_tmsi_.find(tmsi);
  return it == by_tmsi_.end() ? nullptr : &subscribers_[it->second];
}

std::optional<std::uint32_t> mme::tmsi_of(const std::string& imsi) const
{
  for (const auto& s : subscribers_) {
    if (s.imsi == imsi) {
      return s.tmsi;
    }
  }
  return std::nullopt;
}

bool mme::is_blocked(const std::string& imsi) const
{
  for (const auto& b : cfg_.blocked_imsis) {
    if (b.back() == '*') {
      if (imsi.compare(0, b.size() - 1, b, 0, b.size() - 1) == 0) {
        return true;
      }
    } else if (b == imsi) {
      return true;
    }
  }
  return false;
}

std::optional<std::pair<std::string, unsigned>> mme::search_blocked_imsi(const std::string& prefix,
                                                                         unsigned max_trials, rng& r) const
{
  if (prefix.size() > 15) {
    throw std::invalid_argument("IMSI prefix longer than 15 digits");
  }
  for (unsigned trial = 1; trial <= max_trials; ++trial) {
    std::string imsi = prefix;
    while (imsi.size() < 15) {
      imsi.push_back(static_cast<char>('0' + r.uniform(0, 9)));
    }
    if (is_blocked(imsi)) {
      return std::make_pair(imsi, trial);
    }
  }
  return std::nullopt;
}

std::uint32_t mme::allocate_tmsi()
{
  for (;;) {
    const auto t = static_cast<std::uint32_t>(rng_.next_u64());
    if (t != 0 && by_tmsi_.count(t) == 0) {
      return t;
    }
  }
}

void mme::send(std::uint16_t rnti, const codec::nas_message& msg)
{
  const auto b  = codec::encode(msg);
  auto       ev = sim_.log().emit(sim_.tti(), "mme", "mme_tx");
  ev.add("rnti", rnti).add("msg", codec::message_name(msg)).add("hex", codec::to_hex(b));
  enb_.send_nas(rnti, b);
}

void mme::detection(std::uint16_t rnti, const char* method)
{
  sim_.log().emit(sim_.tti(), "mme", "attack_detected").add("method", method).add("rnti", rnti);
}

void mme::abort(std::uint16_t rnti, const char* reason)
{
  procs_.erase(rnti);
  sim_.log().emit(sim_.tti(), "mme", "procedure_abort").add("rnti", rnti).add("reason", reason);
}

void mme::reject(std::uint16_t rnti, bool attach, std::uint8_t cause)
{
  procs_.erase(rnti);
  if (persistent(cause) && cfg_.hardening.never_send_persistent_rejects) {
    auto ev = sim_.log().emit(sim_.tti(), "mme", "reject_suppressed");
    ev.add("rnti", rnti).add("cause", cause).add("msg", attach ? "AttachReject" : "ServiceReject");
    enb_.release(rnti);
    return;
  }
  if (attach) {
    send(rnti, codec::attach_reject{codec::reject_cause{cause}});
  } else {
    send(rnti, codec::service_reject{codec::reject_cause{cause}});
  }
  enb_.release(rnti);
}

void mme::on_initial_nas(std::uint16_t rnti, const codec::connection_request& rrc, const codec::bytes& nas)
{
  codec::nas_message msg;
  try {
    msg = codec::decode_nas(nas);
  } catch (const codec::codec_error&) {
    abort(rnti, "malformed_initial_nas");
    return;
  }
  auto ev = sim_.log().emit(sim_.tti(), "mme", "mme_rx");
  ev.add("rnti", rnti).add("msg", codec::message_name(msg)).add("cause", codec::to_string(rrc.cause));
  if (const auto* a = std::get_if<codec::attach_request>(&msg)) {
    handle_attach(rnti, *a, rrc.cause);
  } else if (const auto* s = std::get_if<codec::service_request>(&msg)) {
    handle_service(rnti, *s, rrc);
  } else {
    abort(rnti, "unexpected_initial_nas");
  }
}

void mme::handle_attach(std::uint16_t rnti, const codec::attach_request& req, codec::establishment_cause cause)
{
  if (cfg_.hardening.establishment_cause_check && cause != codec::establishment_cause::mo_signalling) {
    detection(rnti, "cause_mismatch");
    procs_.erase(rnti);
    return;
  }
  procedure p;
  p.attach       = true;
  p.cause        = cause;
  p.capabilities = req.capabilities;

  if (const auto* imsi = std::get_if<codec::imsi_id>(&req.identity)) {
    if (is_blocked(imsi->digits)) {
      reject(rnti, true, codec::reject_cause::all_services_forbidden);
      return;
    }
    if (find_by_imsi(imsi->digits) == nullptr) {
      reject(rnti, true, codec::reject_cause::illegal_ue);
      return;
    }
    p.imsi = imsi->digits;
    start_authentication(rnti, procs_[rnti] = p);
    return;
  }
  if (const auto* tmsi = std::get_if<codec::tmsi_id>(&req.identity)) {
    if (auto* sub = find_by_tmsi(tmsi->value)) {
      p.imsi = sub->imsi;
      start_authentication(rnti, procs_[rnti] = p);
      return;
    }
  }
  p.at          = stage::identity;
  procs_[rnti] = p;
  send(rnti, codec::identity_request{});
}

void mme::start_authentication(std::uint16_t rnti, procedure& p)
{
  for (auto& b : p.rand) {
    b = static_cast<std::uint8_t>(rng_.next_u64());
  }
  p.at = stage::authentication;
  send(rnti, codec::authentication_request{p.rand});
}

void mme::handle_service(std::uint16_t rnti, const codec::service_request& req, const codec::connection_request& rrc)
{
  subscriber* sub = nullptr;
  if (const auto* t = std::get_if<codec::tmsi_id>(&rrc.identity)) {
    sub = find_by_tmsi(t->value);
  }
  const bool valid =
      sub != nullptr && sub->registered && codec::service_short_mac(sub->key, *sub->tmsi, req.seq) == req.short_mac;
  if (!valid) {
    if (cfg_.hardening.silent_drop_invalid_service_mac) {
      detection(rnti, "invalid_service_mac");
      procs_.erase(rnti);
      return;
    }
    reject(rnti, false, codec::reject_cause::integrity_failure);
    return;
  }
  procedure p;
  p.attach       = false;
  p.cause        = rrc.cause;
  p.imsi         = sub->imsi;
  p.capabilities = sub->capabilities;
  p.at           = stage::security;
  procs_[rnti]   = p;
  send(rnti, codec::security_mode_command{p.capabilities});
}

void mme::on_uplink_nas(std::uint16_t rnti, const codec::bytes& nas)
{
  codec::nas_message msg;
  try {
    msg = codec::decode_nas(nas);
  } catch (const codec::codec_error&) {
    sim_.log().emit(sim_.tti(), "mme", "mme_malformed").add("rnti", rnti);
    return;
  }
  sim_.log().emit(sim_.tti(), "mme", "mme_rx").add("rnti", rnti).add("msg", codec::message_name(msg));

  auto it = procs_.find(rnti);
  if (it == procs_.end()) {
    sim_.log().emit(sim_.tti(), "mme", "mme_unexpected").add("rnti", rnti).add("msg", codec::message_name(msg));
    return;
  }
  procedure& p = it->second;

  if (const auto* r = std::get_if<codec::identity_response>(&msg)) {
    const auto* imsi = std::get_if<codec::imsi_id>(&r->identity);
    if (p.at != stage::identity || imsi == nullptr) {
      abort(rnti, "bad_identity_response");
      return;
    }
    if (is_blocked(imsi->digits)) {
      reject(rnti, p.attach, codec::reject_cause::all_services_forbidden);
      return;
    }
    if (find_by_imsi(imsi->digits) == nullptr) {
      reject(rnti, p.attach, codec::reject_cause::illegal_ue);
      return;
    }
    p.imsi = imsi->digits;
    start_authentication(rnti, p);
    return;
  }

  if (const auto* r = std::get_if<codec::authentication_response>(&msg)) {
    auto* sub = find_by_imsi(p.imsi);
    if (p.at != stage::authentication || sub == nullptr) {
      abort(rnti, "unexpected_auth_response");
      return;
    }
    if (r->res != codec::auth_response(sub->key, p.rand)) {
      sim_.log().emit(sim_.tti(), "mme", "auth_failure").add("rnti", rnti).add("imsi", p.imsi);
      abort(rnti, "auth_failure");
      enb_.release(rnti);
      return;
    }
    p.at    = stage::security;
    auto ev = sim_.log().emit(sim_.tti(), "mme", "smc_replay");
    ev.add("rnti", rnti).add("imsi", p.imsi).hex("caps", p.capabilities.to_ulong(), 8);
    send(rnti, codec::security_mode_command{p.capabilities});
    return;
  }

  if (std::holds_alternative<codec::security_mode_complete>(msg)) {
    auto* sub = find_by_imsi(p.imsi);
    if (p.at != stage::security || sub == nullptr) {
      abort(rnti, "unexpected_smc_complete");
      return;
    }
    if (!p.attach) {
      p.at = stage::resumed;
      sim_.log().emit(sim_.tti(), "mme", "service_resumed").add("rnti", rnti).add("imsi", p.imsi);
      deliver_pending_sms(rnti, *sub);
      return;
    }
    if (!sub->tmsi || cfg_.tmsi_reallocation == tmsi_policy::on_attach) {
      if (sub->tmsi) {
        by_tmsi_.erase(*sub->tmsi);
      }
      sub->tmsi = allocate_tmsi();
      by_tmsi_[*sub->tmsi] = static_cast<std::size_t>(sub - subscribers_.data());
    }
    p.at = stage::accept;
    send(rnti, codec::attach_accept{*sub->tmsi});
    return;
  }

  if (std::holds_alternative<codec::security_mode_reject>(msg)) {
    abort(rnti, "smc_rejected");
    return;
  }

  if (std::holds_alternative<codec::attach_complete>(msg)) {
    auto* sub = find_by_imsi(p.imsi);
    if (p.at != stage::accept || sub == nullptr) {
      abort(rnti, "unexpected_attach_complete");
      return;
    }
    sub->registered   = true;
    sub->capabilities = p.capabilities;
    p.at              = stage::resumed;
    auto ev           = sim_.log().emit(sim_.tti(), "mme", "subscriber_registered");
    ev.add("rnti", rnti).add("imsi", p.imsi).hex("tmsi", *sub->tmsi, 8);
    deliver_pending_sms(rnti, *sub);
    return;
  }

  sim_.log().emit(sim_.tti(), "mme", "mme_unexpected").add("rnti", rnti).add("msg", codec::message_name(msg));
}

void mme::on_connection_released(std::uint16_t rnti)
{
  procs_.erase(rnti);
}

void mme::deliver_pending_sms(std::uint16_t rnti, subscriber& s)
{
  while (s.pending_sms > 0) {
    --s.pending_sms;
    send(rnti, codec::silent_sms{s.pending_silent});
    sim_.log().emit(sim_.tti(), "mme", "sms_delivered").add("rnti", rnti).add("imsi", s.imsi);
  }
}

void mme::send_sms(const std::string& imsi, bool silent)
{
  auto* sub = find_by_imsi(imsi);
  if (sub == nullptr || !sub->tmsi) {
    throw std::invalid_argument("SMS target has no TMSI: " + imsi);
  }
  const auto latency = static_cast<sim_ms>(
      rng_.uniform(static_cast<std::uint64_t>(cfg_.sms_latency_min), static_cast<std::uint64_t>(cfg_.sms_latency_max)));
  auto ev = sim_.log().emit(sim_.tti(), "mme", "sms_submit");
  ev.add("imsi", imsi).add("silent", silent).add("latency_ms", latency);

  const auto index = static_cast<std::size_t>(sub - subscribers_.data());
  sim_.schedule_in(latency, [this, index, silent] {
    auto& s = subscribers_[index];
    ++s.pending_sms;
    s.pending_silent = silent;
    for (const auto& [rnti, p] : procs_) {
      if (p.imsi == s.imsi && p.at == stage::resumed) {
        deliver_pending_sms(rnti, s);
        return;
      }
    }
    sim_.log().emit(sim_.tti(), "mme", "page").hex("tmsi", *s.tmsi, 8).add("imsi", s.imsi);
    enb_.page(*s.tmsi);
  });
}

} // namespace ovsim
