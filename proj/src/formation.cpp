#include <cmath>

#include "swarmlink/harness.hpp"

namespace swarmlink::harness {

FormationResidual formation_error(std::span<const Vec2> positions, std::span<const Vec2> slots) {
  if (positions.size() != slots.size()) {
    throw InvalidArgument("formation_error: " + std::to_string(positions.size()) + " positions for " +
                          std::to_string(slots.size()) + " slots");
  }
  FormationResidual r;
  const std::size_t n = positions.size();
  if (n == 0) return r;
  Vec2 pc, sc;
  for (std::size_t i = 0; i < n; ++i) {
    pc += positions[i];
    sc += slots[i];
  }
  pc = pc / static_cast<double>(n);
  sc = sc / static_cast<double>(n);
  // Closed-form 2D orthogonal Procrustes.
  double sin_sum = 0.0;
  double cos_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 s = slots[i] - sc;
    const Vec2 p = positions[i] - pc;
    cos_sum += dot(s, p);
    sin_sum += cross(s, p);
  }
  r.rotation = (sin_sum == 0.0 && cos_sum == 0.0) ? 0.0 : std::atan2(sin_sum, cos_sum);
  r.translation = pc - rotate(sc, r.rotation);
  double sq = 0.0;
  r.per_robot.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 d = positions[i] - (rotate(slots[i], r.rotation) + r.translation);
    r.per_robot[i] = norm(d);
    sq += dot(d, d);
  }
  r.rms = std::sqrt(sq / static_cast<double>(n));
  return r;
}

double formation_error(std::span<const dynamics::RobotState> states, const FormationSpec& spec) {
  std::vector<Vec2> p;
  p.reserve(states.size());
  for (const auto& s : states) p.push_back(s.position);
  return formation_error(p, spec.slots).rms;
}

}  // namespace swarmlink::harness
