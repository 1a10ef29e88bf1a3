#include "ovsim/simulator.h"

#include <algorithm>
#include <stdexcept>

namespace ovsim {

simulator::simulator(phy::channel_model model, std::uint64_t seed) : model_(std::move(model)), seed_(seed)
{
  model_.validate();
}

node* simulator::find_node(phy::node_id id) const
{
  for (const auto& n : nodes_) {
    if (n->id() == id) {
      return n.get();
    }
  }
  return nullptr;
}

node* simulator::find_node(std::string_view name) const
{
  for (const auto& n : nodes_) {
    if (n->name() == name) {
      return n.get();
    }
  }
  return nullptr;
}

void simulator::transmit(phy::transmission tx)
{
  if (tx.at.index() <= now_) {
    throw std::invalid_argument("transmission scheduled at " + to_string(tx.at) + " is not in the future");
  }
  if (tx.payload.empty()) {
    throw std::invalid_argument("transmission payload must be non-empty");
  }
  queue_[tx.at.index()].push_back(std::move(tx));
}

simulator::timer_id simulator::schedule_at(std::uint64_t tti, std::function<void()> fn)
{
  const timer_id id = next_timer_++;
  timers_.emplace(id, std::move(fn));
  timer_heap_.emplace(std::max(tti, now_ + 1), id);
  return id;
}

void simulator::cancel(timer_id id)
{
  timers_.erase(id);
}

void simulator::notify_uplink_sdu(std::uint16_t rnti, const codec::bytes& sdu)
{
  for (const auto& fn : observers_) {
    fn(now_, rnti, sdu);
  }
}

void simulator::deliver_slots()
{
  auto it = queue_.find(now_);
  if (it == queue_.end()) {
    return;
  }
  const std::vector<phy::transmission> txs = std::move(it->second);
  queue_.erase(it);

  std::map<phy::slot_key, std::vector<const phy::transmission*>> slots;
  for (const auto& tx : txs) {
    slots[phy::key_of(tx)].push_back(&tx);
  }

  phy::transmission phantom;
  if (reference_) {
    phantom.source       = reference_->source;
    phantom.dir          = phy::direction::downlink;
    phantom.tx_power_dbm = reference_->tx_power_dbm;
  }

  for (const auto& rx : nodes_) {
    for (const auto& [key, group] : slots) {
      if (!rx->interested(key)) {
        continue;
      }
      std::vector<phy::transmission>        candidates;
      std::vector<const phy::transmission*> origin;
      bool                                  cell_present = false;
      for (const auto* tx : group) {
        if (tx->source == rx->id()) {
          continue;
        }
        cell_present = cell_present || (reference_ && tx->source == reference_->source);
        candidates.push_back(*tx);
        origin.push_back(tx);
      }
      if (candidates.empty()) {
        continue;
      }
      if (key.dir == phy::direction::downlink && reference_ && !cell_present && rx->id() != reference_->source) {
        candidates.push_back(phantom);
        origin.push_back(nullptr);
      }

      const auto out        = phy::resolve_slot(candidates, rx->id(), model_);
      const bool real_win   = out.kind == phy::outcome_kind::decoded && origin[*out.winner] != nullptr;
      const auto final_kind = out.kind == phy::outcome_kind::decoded && !real_win ? phy::outcome_kind::silence
                                                                                  : out.kind;
      if (log_.phy_enabled) {
        auto b = log_.emit(now_, rx->name(), "slot");
        b.add("dir", phy::to_string(key.dir)).add("rnti", key.rnti).add("prach", key.prach);
        b.add("txs", candidates.size()).add("outcome", phy::to_string(final_kind));
        if (out.winner) {
          const auto* w = find_node(candidates[*out.winner].source);
          b.add("strongest", w ? w->name() : std::string("cell"));
          b.add("rx_dbm", out.rx_power_dbm).add("gap_db", out.gap_db).add("offset_us", out.arrival_offset_us);
        }
      }

      if (real_win) {
        delivery d;
        d.tx                = origin[*out.winner];
        d.rx_power_dbm      = out.rx_power_dbm;
        d.arrival_offset_us = out.arrival_offset_us;
        d.contenders        = group.size();
        rx->on_receive(d);
      }
      for (std::size_t i = 0; i < origin.size(); ++i) {
        if (origin[i] == nullptr) {
          continue;
        }
        if (auto* src = find_node(origin[i]->source)) {
          src->on_tx_result(*origin[i], *rx, out, real_win && *out.winner == i);
        }
      }
    }
  }
}

void simulator::fire_timers()
{
  while (!timer_heap_.empty() && timer_heap_.top().first <= now_) {
    const auto id = timer_heap_.top().second;
    timer_heap_.pop();
    auto it = timers_.find(id);
    if (it == timers_.end()) {
      continue;
    }
    auto fn = std::move(it->second);
    timers_.erase(it);
    fn();
  }
}

subframe_time simulator::advance_clock()
{
  ++now_;
  deliver_slots();
  fire_timers();
  const auto t = now();
  for (const auto& n : nodes_) {
    n->on_subframe(t);
  }
  return t;
}

std::optional<std::uint64_t> simulator::next_pending() const
{
  std::optional<std::uint64_t> next;
  if (!queue_.empty()) {
    next = queue_.begin()->first;
  }
  if (!timer_heap_.empty()) {
    const auto t = timer_heap_.top().first;
    next         = next ? std::min(*next, t) : t;
  }
  return next;
}

void simulator::run_until(std::uint64_t horizon)
{
  while (now_ < horizon && !stop_) {
    const bool any_busy = std::any_of(nodes_.begin(), nodes_.end(), [](const auto& n) { return n->busy(); });
    if (!any_busy) {
      const auto next   = next_pending();
      const auto target = next ? std::min(*next, horizon) : horizon;
      if (target > now_ + 1) {
        now_ = target - 1;
      }
    }
    advance_clock();
  }
}

} // namespace ovsim
