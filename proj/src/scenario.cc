#include "ovsim/scenario.h"

#include <cmath>
#include <sstream>

namespace ovsim {

scenario::scenario(const scenario_config& cfg, std::optional<std::uint64_t> seed_override) :
  cfg_(cfg), seed_(seed_override.value_or(cfg.seed))
{
  sim_                    = std::make_unique<simulator>(cfg_.channel, seed_);
  sim_->log().phy_enabled = cfg_.log_phy;

  enb_ = &sim_->emplace_node<enb_node>("enb", cfg_.enb_pos, cfg_.enb, cfg_.mme);
  for (const auto& u : cfg_.ues) {
    auto& n = sim_->emplace_node<ue_node>(u.name, u.pos, u.cfg, enb_->id());
    if (u.power_on_at >= 0) {
      sim_->schedule_at(static_cast<std::uint64_t>(u.power_on_at), [&n] { n.power_on(); });
    }
  }
  for (const auto& a : cfg_.attackers) {
    sim_->emplace_node<attacker_node>(a.name, a.pos, a.plan, enb_->id(), &enb_->core());
  }
  for (const auto& a : cfg_.actions) {
    auto* target = ue(a.target);
    if (target == nullptr) {
      throw config_error("unknown UE '" + a.target + "'", a.line, "action." + a.name);
    }
    const auto  type   = a.type;
    const bool  silent = a.silent;
    auto*       core   = &enb_->core();
    sim_->schedule_at(static_cast<std::uint64_t>(a.at), [target, type, silent, core, this, name = a.name] {
      sim_->log().emit(sim_->tti(), "harness", "action").add("name", name).add("target", target->name());
      switch (type) {
      case action_type::power_on: target->power_on(); break;
      case action_type::user_reset: target->user_reset(); break;
      case action_type::start_data: target->start_data(); break;
      case action_type::send_sms:
        try {
          core->send_sms(target->imsi(), silent);
        } catch (const std::invalid_argument& e) {
          sim_->log().emit(sim_->tti(), "harness", "action_failed").add("name", name).add("error", e.what());
        }
        break;
      }
    });
  }
}

scenario::~scenario() = default;

ue_node* scenario::ue(const std::string& name)
{
  return dynamic_cast<ue_node*>(sim_->find_node(name));
}

attacker_node* scenario::attacker(const std::string& name)
{
  return dynamic_cast<attacker_node*>(sim_->find_node(name));
}

void scenario::run()
{
  run_until(static_cast<std::uint64_t>(cfg_.horizon));
}

void scenario::run_until(std::uint64_t tti)
{
  sim_->run_until(tti);
}

scenario_result scenario::result() const
{
  scenario_result r;
  r.seed     = seed_;
  r.end_tti  = sim_->tti();
  r.events   = sim_->log().events();
  r.log_text = sim_->log().render();
  for (const auto& a : cfg_.assertions) {
    r.assertions.push_back(evaluate_assertion(a, r.events));
  }
  r.metrics.emplace_back("events", static_cast<double>(r.events.size()));
  r.metrics.emplace_back("end_t", static_cast<double>(r.end_tti));
  for (const auto& [name, filter] : cfg_.metrics) {
    double n = 0;
    for (const auto& e : r.events) {
      n += filter.matches(e) ? 1 : 0;
    }
    r.metrics.emplace_back(name, n);
  }
  return r;
}

scenario_result run_scenario(const scenario_config& cfg, std::optional<std::uint64_t> seed_override)
{
  if (cfg.horizon == 0) {
    scenario_result r;
    r.seed = seed_override.value_or(cfg.seed);
    for (const auto& a : cfg.assertions) {
      r.assertions.push_back({a.name, assertion_status::skipped, "horizon is 0"});
    }
    r.metrics.emplace_back("events", 0.0);
    r.metrics.emplace_back("end_t", 0.0);
    for (const auto& m : cfg.metrics) {
      r.metrics.emplace_back(m.first, 0.0);
    }
    return r;
  }
  scenario s(cfg, seed_override);
  s.run();
  return s.result();
}

bool scenario_result::passed() const
{
  for (const auto& a : assertions) {
    if (a.status == assertion_status::fail) {
      return false;
    }
  }
  return true;
}

std::string scenario_result::render_metrics() const
{
  std::ostringstream os;
  os << "seed=" << seed << "\n";
  for (const auto& [k, v] : metrics) {
    os << k << "=" << (v == std::floor(v) ? std::to_string(static_cast<long long>(v)) : format_double(v)) << "\n";
  }
  return os.str();
}

std::string scenario_result::render_assertions() const
{
  std::ostringstream os;
  for (const auto& a : assertions) {
    os << to_string(a.status) << " " << a.name;
    if (!a.detail.empty()) {
      os << ": " << a.detail;
    }
    os << "\n";
  }
  return os.str();
}

} // namespace ovsim
