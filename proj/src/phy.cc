#include "ovsim/phy.h"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ovsim::phy {

namespace {
// Absorbs binary rounding of decimal dB and us values at the decision boundaries.
constexpr double k_eps = 1e-9;
} // namespace

const char* to_string(direction d)
{
  return d == direction::uplink ? "ul" : "dl";
}

const char* to_string(outcome_kind k)
{
  switch (k) {
    case outcome_kind::decoded:
      return "decoded";
    case outcome_kind::collision:
      return "collision";
    case outcome_kind::silence:
      return "silence";
  }
  return "?";
}

void channel_model::validate() const
{
  if (!(capture_margin_db > 0.0)) {
    throw std::invalid_argument("capture_margin_db must be positive");
  }
  if (!(path_loss_exponent >= 2.0)) {
    throw std::invalid_argument("path_loss_exponent must be at least 2");
  }
  if (!(timing_tolerance_us >= 0.0)) {
    throw std::invalid_argument("timing_tolerance_us must be non-negative");
  }
  if (!(prach_window_us >= 0.0)) {
    throw std::invalid_argument("prach_window_us must be non-negative");
  }
}

position channel_model::position_of(node_id n) const
{
  auto it = positions.find(n);
  if (it == positions.end()) {
    throw unknown_node_error("no position for node " + std::to_string(n));
  }
  return it->second;
}

double distance_m(const channel_model& model, node_id a, node_id b)
{
  const auto pa = model.position_of(a);
  const auto pb = model.position_of(b);
  return std::hypot(pa.x - pb.x, pa.y - pb.y);
}

double path_loss_db(const channel_model& model, node_id a, node_id b)
{
  const double d = distance_m(model, a, b);
  if (!(d > 0.0)) {
    throw std::domain_error("path loss undefined for co-located nodes " + std::to_string(a) + " and " +
                            std::to_string(b));
  }
  return model.reference_loss_db + 10.0 * model.path_loss_exponent * std::log10(d);
}

double propagation_delay_us(double distance)
{
  return distance / k_light_m_per_us;
}

std::uint16_t ta_steps_for_distance(double distance)
{
  const double steps = std::round(2.0 * propagation_delay_us(distance) / codec::k_ta_step_us);
  return static_cast<std::uint16_t>(std::clamp(steps, 0.0, 65535.0));
}

double ue_tx_power_dbm(double target_rx_dbm, double path_loss, double tpc_accum_db, double p_max_dbm)
{
  return std::min(p_max_dbm, target_rx_dbm + path_loss + tpc_accum_db);
}

slot_key key_of(const transmission& tx)
{
  return {tx.at.index(), tx.dir, tx.prach, tx.rnti};
}

double rx_power_dbm(const channel_model& model, const transmission& tx, node_id receiver)
{
  return tx.tx_power_dbm - path_loss_db(model, tx.source, receiver);
}

double arrival_offset_us(const channel_model& model, const transmission& tx, node_id receiver)
{
  if (tx.dir == direction::downlink) {
    return tx.timing_offset_us;
  }
  const double rtt = 2.0 * propagation_delay_us(distance_m(model, tx.source, receiver));
  return tx.timing_offset_us + rtt - tx.timing_advance_us;
}

slot_outcome resolve_powers(const std::vector<double>& rx_dbm, const std::vector<double>& offsets_us,
                            double margin_db, double tolerance_us)
{
  slot_outcome out;
  if (rx_dbm.empty()) {
    return out;
  }
  // Strongest first; lowest index wins equal powers so the choice is stable.
  std::size_t best = 0;
  for (std::size_t i = 1; i < rx_dbm.size(); ++i) {
    if (rx_dbm[i] > rx_dbm[best]) {
      best = i;
    }
  }
  double runner_up = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < rx_dbm.size(); ++i) {
    if (i != best) {
      runner_up = std::max(runner_up, rx_dbm[i]);
    }
  }
  out.winner            = best;
  out.rx_power_dbm      = rx_dbm[best];
  out.arrival_offset_us = offsets_us[best];
  out.gap_db            = rx_dbm[best] - runner_up;
  out.timing_miss       = std::abs(offsets_us[best]) > tolerance_us + k_eps;

  const bool captured = out.gap_db >= margin_db - k_eps;
  out.kind            = captured && !out.timing_miss ? outcome_kind::decoded : outcome_kind::collision;
  return out;
}

slot_outcome resolve_slot(const std::vector<transmission>& txs, node_id receiver, const channel_model& model)
{
  std::vector<double> powers;
  std::vector<double> offsets;
  powers.reserve(txs.size());
  offsets.reserve(txs.size());
  bool prach = false;
  for (const auto& tx : txs) {
    powers.push_back(rx_power_dbm(model, tx, receiver));
    offsets.push_back(arrival_offset_us(model, tx, receiver));
    prach = prach || tx.prach;
  }
  const double tolerance = prach ? model.prach_window_us : model.timing_tolerance_us;
  return resolve_powers(powers, offsets, model.capture_margin_db, tolerance);
}

} // namespace ovsim::phy
