#pragma once

// Subframe-clocked event loop. Owns the clock, the slot queue, timers and
// the nodes; resolves every queued slot through phy::resolve_slot once per
// interested receiver.

#include "ovsim/event_log.h"
#include "ovsim/phy.h"
#include "ovsim/rng.h"

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <string>
#include <vector>

namespace ovsim {

class simulator;

struct delivery {
  const phy::transmission* tx = nullptr;
  double                   rx_power_dbm      = 0.0;
  double                   arrival_offset_us = 0.0;
  std::size_t              contenders        = 1;
};

class node
{
public:
  node(simulator& sim, phy::node_id id, std::string name) : sim_(sim), id_(id), name_(std::move(name)) {}
  virtual ~node() = default;
  node(const node&)            = delete;
  node& operator=(const node&) = delete;

  phy::node_id       id() const { return id_; }
  const std::string& name() const { return name_; }

  /// Whether this node listens to the given slot. Only interested receivers
  /// get the slot resolved on their behalf.
  virtual bool interested(const phy::slot_key& key) const = 0;
  virtual void on_receive(const delivery& d) = 0;

  /// Outcome of one of this node's transmissions at one receiver.
  virtual void on_tx_result(const phy::transmission&, const node& /*receiver*/, const phy::slot_outcome&,
                            bool /*won*/)
  {
  }

  /// Called at the end of every processed subframe.
  virtual void on_subframe(subframe_time) {}

  /// True while the node needs on_subframe calls even without traffic or
  /// timers. Idle spans where no node is busy are skipped.
  virtual bool busy() const { return false; }

protected:
  simulator& sim_;

private:
  phy::node_id id_;
  std::string  name_;
};

/// The serving cell's always-on downlink (reference signals). A downlink
/// receiver hears it in every slot, so a foreign downlink emission must
/// out-power the cell even when the cell sends nothing addressed to the RNTI.
struct reference_carrier {
  phy::node_id source       = 0;
  double       tx_power_dbm = 46.0;
};

class simulator
{
public:
  using timer_id        = std::uint64_t;
  using uplink_observer = std::function<void(std::uint64_t tti, std::uint16_t rnti, const codec::bytes& sdu)>;

  simulator(phy::channel_model model, std::uint64_t seed);

  template <typename T, typename... Args>
  T& emplace_node(std::string name, phy::position pos, Args&&... args)
  {
    const phy::node_id id = next_id_++;
    model_.positions[id]  = pos;
    auto  n               = std::make_unique<T>(*this, id, std::move(name), std::forward<Args>(args)...);
    T&    ref             = *n;
    nodes_.push_back(std::move(n));
    return ref;
  }

  node*       find_node(phy::node_id id) const;
  node*       find_node(std::string_view name) const;
  const auto& nodes() const { return nodes_; }

  const phy::channel_model& channel() const { return model_; }
  event_log&                log() { return log_; }
  const event_log&          log() const { return log_; }
  std::uint64_t             seed() const { return seed_; }
  rng                       derive_rng(std::string_view stream) const { return rng::derive(seed_, stream); }

  std::uint64_t tti() const { return now_; }
  subframe_time now() const { return subframe_time::from_index(now_); }

  void set_reference_carrier(reference_carrier rc) { reference_ = rc; }

  /// Queues a transmission. Throws std::invalid_argument unless tx.at is in
  /// the future and the payload is non-empty.
  void transmit(phy::transmission tx);

  /// Runs `fn` during subframe `tti` (after deliveries, before ticks). Past
  /// or current times run at the next subframe.
  timer_id schedule_at(std::uint64_t tti, std::function<void()> fn);
  timer_id schedule_in(sim_ms delay, std::function<void()> fn) { return schedule_at(now_ + delay, std::move(fn)); }
  void     cancel(timer_id id);

  void add_uplink_observer(uplink_observer fn) { observers_.push_back(std::move(fn)); }
  void notify_uplink_sdu(std::uint16_t rnti, const codec::bytes& sdu);

  /// Advances exactly one subframe: deliveries, timers, then ticks.
  subframe_time advance_clock();

  /// Runs until the clock reads `horizon`, skipping subframes in which
  /// nothing is queued, due, or busy.
  void run_until(std::uint64_t horizon);

  /// Makes run_until return after the current subframe.
  void request_stop() { stop_ = true; }
  bool stop_requested() const { return stop_; }

private:
  using timer_entry = std::pair<std::uint64_t, timer_id>;

  void deliver_slots();
  void fire_timers();
  std::optional<std::uint64_t> next_pending() const;

  phy::channel_model                                     model_;
  std::uint64_t                                          seed_;
  std::uint64_t                                          now_     = 0;
  phy::node_id                                           next_id_ = 1;
  std::vector<std::unique_ptr<node>>                     nodes_;
  std::map<std::uint64_t, std::vector<phy::transmission>> queue_;
  std::map<timer_id, std::function<void()>>              timers_;
  std::priority_queue<timer_entry, std::vector<timer_entry>, std::greater<>> timer_heap_;
  timer_id                                               next_timer_ = 1;
  std::optional<reference_carrier>                       reference_;
  std::vector<uplink_observer>                           observers_;
  event_log                                              log_;
  bool                                                   stop_ = false;
};

} // namespace ovsim
