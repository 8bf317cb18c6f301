#include "fusetrack/clear.hpp"

#include <algorithm>
#include <cmath>

#include "fusetrack/association.hpp"

namespace fusetrack {

Rates rates(const ClearCounts& counts) {
  if (counts.gt_total <= 0) throw EmptyGroundTruth{};
  const double gt = static_cast<double>(counts.gt_total);
  return {100.0 * counts.fp / gt, 100.0 * counts.fn / gt, 100.0 * counts.idsw / gt};
}

double mota(const ClearCounts& counts) {
  const Rates r = rates(counts);
  return 100.0 - r.fnr - r.fpr - r.idswr;
}

double motp(const ClearCounts& counts, MotpDenominator denom) {
  if (counts.matches <= 0) throw NoMatches{};
  const double d = denom == MotpDenominator::gt ? static_cast<double>(counts.gt_total)
                                                : static_cast<double>(counts.matches);
  return counts.distance_sum / d;
}

ClearEvaluator::ClearEvaluator(double gate_m, MotpDenominator denom)
    : gate_(gate_m), denom_(denom) {}

void ClearEvaluator::add_frame(const GroundTruthFrame& gt,
                               const std::vector<HypothesisPoint>& hyps) {
  counts_.gt_total += static_cast<long long>(gt.objects.size());

  std::vector<char> gt_done(gt.objects.size(), 0);
  std::vector<char> hyp_done(hyps.size(), 0);
  std::map<int, int> next_active;

  auto hyp_index = [&](int id) -> int {
    for (std::size_t k = 0; k < hyps.size(); ++k) {
      if (!hyp_done[k] && hyps[k].id == id) return static_cast<int>(k);
    }
    return -1;
  };

  auto commit = [&](std::size_t gi, std::size_t hi, double dist) {
    const int gid = gt.objects[gi].id;
    const int hid = hyps[hi].id;
    auto last = last_hyp_.find(gid);
    if (last != last_hyp_.end() && last->second != hid) counts_.idsw += 1;
    last_hyp_[gid] = hid;
    next_active[gid] = hid;
    counts_.matches += 1;
    counts_.distance_sum += dist;
    records_.push_back({gt.t, gid, hid, dist});
    gt_done[gi] = 1;
    hyp_done[hi] = 1;
  };

  // Correspondence continuity from the previous frame.
  for (std::size_t gi = 0; gi < gt.objects.size(); ++gi) {
    auto it = active_.find(gt.objects[gi].id);
    if (it == active_.end()) continue;
    const int hi = hyp_index(it->second);
    if (hi < 0) continue;
    const Vec2 gpos(gt.objects[gi].x, gt.objects[gi].y);
    const double dist = (hyps[hi].position - gpos).norm();
    if (dist <= gate_) commit(gi, hi, dist);
  }

  // Hungarian on the remainder.
  std::vector<std::size_t> free_gt, free_hyp;
  for (std::size_t gi = 0; gi < gt.objects.size(); ++gi)
    if (!gt_done[gi]) free_gt.push_back(gi);
  for (std::size_t hi = 0; hi < hyps.size(); ++hi)
    if (!hyp_done[hi]) free_hyp.push_back(hi);

  if (!free_gt.empty() && !free_hyp.empty()) {
    constexpr double kBlocked = 1e12;
    Eigen::MatrixXd cost(free_gt.size(), free_hyp.size());
    for (std::size_t a = 0; a < free_gt.size(); ++a) {
      const Vec2 gpos(gt.objects[free_gt[a]].x, gt.objects[free_gt[a]].y);
      for (std::size_t b = 0; b < free_hyp.size(); ++b) {
        const double dist = (hyps[free_hyp[b]].position - gpos).norm();
        cost(a, b) = dist <= gate_ ? dist : kBlocked;
      }
    }
    const Assignment assignment = hungarian_solve(cost, kBlocked);
    for (const auto& [a, b] : assignment.matches) {
      commit(free_gt[a], free_hyp[b], cost(a, b));
    }
  }

  for (std::size_t gi = 0; gi < gt.objects.size(); ++gi)
    if (!gt_done[gi]) counts_.fn += 1;
  for (std::size_t hi = 0; hi < hyps.size(); ++hi)
    if (!hyp_done[hi]) counts_.fp += 1;

  active_ = std::move(next_active);
}

ClearReport ClearEvaluator::report() const {
  ClearReport r;
  r.counts = counts_;
  r.rates = rates(counts_);
  r.mota = mota(counts_);
  r.motp = counts_.matches > 0 ? motp(counts_, denom_) : 0.0;
  r.match_records = records_;
  return r;
}

}  // namespace fusetrack
