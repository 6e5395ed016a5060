#pragma once

namespace droplab {

/// Constants of the skeleton bounds, calibrated once on the frozen audit
/// corpus (largest observed ratio times 1.5, rounded up) by
///   droplet-lab skeleton-audit --p 0.55 --box 256 --replicas 1000 --min-l 4
///     --seed 2024 --tau data/tau_p055.json --calibrate
/// i.e. the first 1000 uncontaminated droplets with l_eff >= 4, normalized
/// tau, s = diam_tau / 2 * {1, 1/2, 1/4, 1/8} plus the scale_params s.
/// Do not refit per instance.
struct SkeletonConstants {
  double K5;  ///< count:    m + 1 < K5 diam / s
  double K6;  ///< area:     |Int \ Int HPath| <= K6 s^2
  double K7;  ///< distance: sup dist(Co, HPath) <= K7 s^2 / diam
  double K8;  ///< functional: W(dCo) <= W(HPath) + K8 s^2 / diam
};

inline constexpr SkeletonConstants kSkeletonConstants{3.75, 5.0, 23.3, 34.4};

}  // namespace droplab
