#include "core/link.hpp"

#include <algorithm>
#include <cmath>

#include "core/errors.hpp"

namespace genrel {

namespace {

double clipped(double u, double eps) {
  return std::clamp(u, eps, 1.0 - eps);
}

}  // namespace

double Link::eval(double u) const {
  if (!std::isfinite(u)) raise(ErrorCode::non_finite_value, "non-finite input to link");
  if (kind == LinkKind::identity) return u;
  const double v = clipped(u, clip_eps);
  return std::log(v / (1.0 - v));
}

double Link::deriv(double u) const {
  if (!std::isfinite(u)) raise(ErrorCode::non_finite_value, "non-finite input to link derivative");
  if (kind == LinkKind::identity) return 1.0;
  const double v = clipped(u, clip_eps);
  return 1.0 / (v * (1.0 - v));
}

Link Link::from_name(const std::string& name, double clip_eps) {
  if (clip_eps <= 0.0 || clip_eps >= 0.5) {
    raise(ErrorCode::out_of_range, "link clip_eps must lie in (0, 0.5)");
  }
  if (name == "identity") return Link{LinkKind::identity, clip_eps};
  if (name == "logit") return Link{LinkKind::logit, clip_eps};
  raise(ErrorCode::config_error, "unknown link '" + name + "' (expected identity or logit)");
}

}  // namespace genrel
