#ifndef GENREL_LINK_HPP
#define GENREL_LINK_HPP

#include <string>

namespace genrel {

enum class LinkKind { identity, logit };

// Known link function applied to a genetic value before taking covariance.
// The logit link clips its probability argument to [clip_eps, 1 - clip_eps]
// so evaluation and derivative stay finite.
struct Link {
  LinkKind kind = LinkKind::identity;
  double clip_eps = 1e-6;

  double eval(double u) const;
  double deriv(double u) const;
  bool is_identity() const { return kind == LinkKind::identity; }
  const char* name() const { return kind == LinkKind::identity ? "identity" : "logit"; }

  static Link from_name(const std::string& name, double clip_eps = 1e-6);
};

}  // namespace genrel

#endif
