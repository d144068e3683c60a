#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "graspcap/align/kdtree.hpp"
#include "graspcap/align/procrustes.hpp"
#include "graspcap/core/error.hpp"
#include "graspcap/core/rigid_transform.hpp"

namespace graspcap::align {

// Defaults are tuning knobs, not calibrated values.
struct IcpParams {
  int max_iterations = 50;
  double convergence_tol = 1e-5;  // metres of RMS change
  double trim_fraction = 0.2;     // worst pairs dropped each iteration
  double max_pair_distance = 0.1; // metres; infinity disables the gate
  bool with_scale = false;

  static constexpr double unlimited = std::numeric_limits<double>::infinity();

  void validate() const {
    require(max_iterations >= 1, "ICP needs max_iterations >= 1");
    require(convergence_tol > 0.0, "ICP needs convergence_tol > 0");
    require(trim_fraction >= 0.0 && trim_fraction < 1.0, "trim_fraction must be in [0, 1)");
    require(max_pair_distance > 0.0, "max_pair_distance must be positive");
  }
};

struct RegistrationResult {
  RigidTransform transform;
  double rms_residual = 0.0;
  int iterations_used = 0;
  bool converged = false;
  std::size_t pairs_used = 0;
  // RMS of the kept pairs at the start of each iteration.
  std::vector<double> rms_history;
};

/// Point-to-point ICP of `source` onto a pre-built index of the target.
/// The returned transform maps source coordinates into the target frame and
/// already includes `init`.
inline RegistrationResult icp(const Points& source, const KdTree& target, const RigidTransform& init,
                              const IcpParams& params = {}) {
  params.validate();
  if (source.empty() || target.empty()) throw EmptyCloud("ICP needs non-empty source and target");

  const double gate2 = std::isinf(params.max_pair_distance)
                           ? std::numeric_limits<double>::infinity()
                           : params.max_pair_distance * params.max_pair_distance;
  // Kept-pair count is tied to the source size so the objective is comparable
  // across iterations.
  const auto keep_target = std::max<std::size_t>(
      3, static_cast<std::size_t>(std::ceil((1.0 - params.trim_fraction) * source.size())));

  struct Pair {
    double d2;
    std::size_t src, dst;
  };
  std::vector<Pair> pairs;
  pairs.reserve(source.size());
  Points moved(source.size()), matched;

  RegistrationResult result;
  result.transform = init;
  double previous = std::numeric_limits<double>::infinity();
  RigidTransform previous_transform = init;

  for (int iter = 1; iter <= params.max_iterations; ++iter) {
    pairs.clear();
    for (std::size_t i = 0; i < source.size(); ++i) {
      moved[i] = result.transform(source[i]);
      const auto hit = target.nearest(moved[i]);
      if (hit.squared_distance <= gate2) pairs.push_back({hit.squared_distance, i, hit.index});
    }
    if (pairs.empty())
      throw AllPairsRejected("no correspondence within " + std::to_string(params.max_pair_distance) + " m");

    const std::size_t keep = std::min(keep_target, pairs.size());
    std::nth_element(pairs.begin(), pairs.begin() + static_cast<std::ptrdiff_t>(keep - 1), pairs.end(),
                     [](const Pair& a, const Pair& b) { return a.d2 < b.d2; });
    double sum = 0.0;
    for (std::size_t k = 0; k < keep; ++k) sum += pairs[k].d2;
    const double rms = std::sqrt(sum / static_cast<double>(keep));

    if (rms > previous) {
      // Rounding noise near the optimum: keep the better previous estimate.
      result.transform = previous_transform;
      result.converged = true;
      break;
    }
    result.rms_history.push_back(rms);
    result.rms_residual = rms;
    result.iterations_used = iter;
    result.pairs_used = keep;
    if (rms == 0.0 || previous - rms < params.convergence_tol) {
      result.converged = true;
      break;
    }
    if (iter == params.max_iterations) break;
    previous = rms;
    previous_transform = result.transform;

    Points from(keep);
    matched.resize(keep);
    for (std::size_t k = 0; k < keep; ++k) {
      from[k] = moved[pairs[k].src];
      matched[k] = target.points()[pairs[k].dst];
    }
    const RigidTransform step = procrustes(from, matched, params.with_scale);
    result.transform = step * result.transform;
  }
  return result;
}

inline RegistrationResult icp(const Points& source, const Points& target, const RigidTransform& init,
                              const IcpParams& params = {}) {
  if (source.empty() || target.empty()) throw EmptyCloud("ICP needs non-empty source and target");
  return icp(source, KdTree(target), init, params);
}

}  // namespace graspcap::align
