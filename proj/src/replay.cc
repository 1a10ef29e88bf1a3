#include "ovsim/scenario.h"

#include <iomanip>
#include <map>
#include <sstream>

namespace ovsim {

namespace {

std::string decode_hex(std::string_view hex)
{
  try {
    const auto b = codec::from_hex(hex);
    const auto l = codec::detect_layer(b);
    if (l == codec::layer::nas) {
      return codec::describe(codec::decode_nas(b));
    }
    if (l == codec::layer::rrc) {
      return codec::describe(codec::decode_rrc(b));
    }
  } catch (const codec::codec_error&) {
  }
  return "<" + std::string(hex) + ">";
}

std::string raw_fields(const event& e, std::initializer_list<std::string_view> skip = {"rnti"})
{
  std::string s;
  for (const auto& [k, v] : e.fields) {
    if (std::find(skip.begin(), skip.end(), k) != skip.end()) {
      continue;
    }
    s += " " + k + "=" + escape_value(v);
  }
  return s;
}

std::string ladder_line(const event& e)
{
  const auto hex = e.get("hex");
  std::string body;
  if (e.kind == "nas_tx" && hex) {
    body = "-> " + decode_hex(*hex);
  } else if (e.kind == "nas_rx" && hex) {
    body = "<- " + decode_hex(*hex);
  } else if (e.kind == "ul_sdu" && hex) {
    body = "<- " + decode_hex(*hex);
  } else if (e.kind == "mme_tx" && hex) {
    body = "-> " + decode_hex(*hex);
  } else if (e.kind == "inject" && hex) {
    body = "=> " + decode_hex(*hex) + " (overshadow)";
  } else if (e.kind == "rrc_request") {
    body = "-> ConnectionRequest(" + std::string(e.get("identity").value_or("?")) + ", " +
           std::string(e.get("cause").value_or("?")) + ")";
  } else if (e.kind == "rrc_rx") {
    body = "<- " + std::string(e.get("msg").value_or("?"));
  } else {
    body = "   " + e.kind + raw_fields(e);
  }
  std::ostringstream os;
  os << "  t=" << std::left << std::setw(9) << e.tti << std::setw(10) << e.node << " " << body;
  return os.str();
}

} // namespace

std::string replay_log(const std::vector<event>& log)
{
  std::vector<std::string>                                 order;
  std::map<std::string, std::vector<const event*>>         conns;
  std::vector<const event*>                                other;
  for (const auto& e : log) {
    const auto rnti = e.get("rnti");
    if (!rnti || e.kind == "slot") {
      other.push_back(&e);
      continue;
    }
    const std::string key(*rnti);
    if (conns.find(key) == conns.end()) {
      order.push_back(key);
    }
    conns[key].push_back(&e);
  }

  std::ostringstream os;
  for (const auto& key : order) {
    const auto& evs = conns[key];
    os << "== rnti " << key << " (first t=" << evs.front()->tti << ")\n";
    for (const auto* e : evs) {
      os << ladder_line(*e) << "\n";
    }
  }
  if (!other.empty()) {
    os << "== other events\n";
    for (const auto* e : other) {
      std::ostringstream line;
      line << "  t=" << std::left << std::setw(9) << e->tti << std::setw(10) << e->node << "    " << e->kind
           << raw_fields(*e, {});
      os << line.str() << "\n";
    }
  }
  return os.str();
}

} // namespace ovsim
