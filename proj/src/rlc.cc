#include "ovsim/rlc.h"

namespace ovsim {

std::vector<codec::bytes> rlc_rx::push(const codec::rlc_segment& seg)
{
  std::vector<codec::bytes> out;
  if (seg.sn < sdu_start_) {
    return out; // already delivered
  }
  pending_.emplace(seg.sn, seg);

  std::uint16_t next = highest_ ? static_cast<std::uint16_t>(*highest_ + 1) : 0;
  while (pending_.count(next) != 0) {
    highest_ = next++;
  }

  for (;;) {
    std::uint16_t sn = sdu_start_;
    while (pending_.count(sn) != 0 && !pending_.at(sn).last) {
      ++sn;
    }
    auto end = pending_.find(sn);
    if (end == pending_.end()) {
      break;
    }
    codec::bytes sdu;
    for (std::uint16_t i = sdu_start_; i <= sn; ++i) {
      const auto& d = pending_.at(i).data;
      sdu.insert(sdu.end(), d.begin(), d.end());
      pending_.erase(i);
    }
    sdu_start_ = static_cast<std::uint16_t>(sn + 1);
    out.push_back(std::move(sdu));
  }
  return out;
}

std::uint16_t rlc_tx::enqueue(const codec::bytes& sdu)
{
  auto segs = codec::segment(sdu, segment_bytes_);
  for (auto& s : segs) {
    s.sn = static_cast<std::uint16_t>(next_sn_ & codec::k_max_sn);
    ++next_sn_;
    queue_.push_back(std::move(s));
  }
  return queue_.back().sn;
}

std::size_t payload_pdu_size(const std::vector<codec::rlc_segment>& segs)
{
  std::size_t n = 3 + 2; // TLV header, lcid, count
  for (const auto& s : segs) {
    n += 4 + s.data.size();
  }
  return n;
}

std::vector<codec::rlc_segment> rlc_tx::take(std::size_t budget)
{
  std::vector<codec::rlc_segment> out;
  std::size_t                     used = 5;
  while (!queue_.empty()) {
    const std::size_t need = 4 + queue_.front().data.size();
    if (!out.empty() && used + need > budget) {
      break;
    }
    used += need;
    out.push_back(std::move(queue_.front()));
    queue_.pop_front();
  }
  return out;
}

} // namespace ovsim
