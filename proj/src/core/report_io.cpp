#include "core/report_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "core/errors.hpp"

namespace genrel {

std::string format_real(double value) {
  if (!std::isfinite(value)) {
    raise(ErrorCode::serialization_invariant, "refusing to serialize a non-finite real");
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", value);
  return buf;
}

namespace {

void put(ReportItems& items, const std::string& key, const std::string& value) {
  items.emplace_back(key, value);
}

void put_real(ReportItems& items, const std::string& key, double value) {
  items.emplace_back(key, format_real(value));
}

void put_int(ReportItems& items, const std::string& key, long long value) {
  items.emplace_back(key, std::to_string(value));
}

}  // namespace

ReportItems report_items(const EstimateReport& r) {
  ReportItems items;
  put(items, "format", "genrel-estimate-report-v1");
  put(items, "version", GENREL_VERSION_STRING);
  put(items, "target", target_name(r.target));
  put_real(items, "point", r.point);
  put_real(items, "se", r.se);
  put_real(items, "ci_lower", r.ci_lower);
  put_real(items, "ci_upper", r.ci_upper);
  put_real(items, "alpha", r.alpha);
  put_real(items, "z_alpha_half", r.z);
  put_int(items, "seed", static_cast<long long>(r.seed));
  put(items, "learner_m", r.learner_m_desc);
  put(items, "learner_h", r.learner_h_desc);
  put(items, "link_g1", r.link1_name);
  put(items, "link_g2", r.link2_name);
  put_real(items, "link_clip_eps", r.clip_eps);
  put(items, "mean_convention", r.mean_convention);
  put(items, "variance_variant", variance_variant_name(r.variance_variant));
  put_int(items, "n", r.counts.total_n);
  put_int(items, "n_y", r.counts.total_n_y);
  put_int(items, "n_z", r.counts.total_n_z);
  put_int(items, "n_overlap", r.counts.total_n0);
  for (int k = 0; k < 2; ++k) {
    const std::string prefix = "fold" + std::to_string(k + 1) + "_";
    put_int(items, prefix + "n", r.fold[k].n);
    put_int(items, prefix + "n_y", r.fold[k].n_y);
    put_int(items, prefix + "n_z", r.fold[k].n_z);
    put_int(items, prefix + "n_overlap", r.fold[k].n0);
    put_real(items, prefix + "i_n", r.fold[k].i_n);
    put_real(items, prefix + "b0y", r.fold[k].b0y);
    put_real(items, prefix + "b0z", r.fold[k].b0z);
    if (r.target == Target::correlation) {
      put_real(items, prefix + "rho", r.fold[k].rho);
      put_real(items, prefix + "j", r.fold[k].j);
    } else {
      put_real(items, prefix + "k", r.fold[k].k);
    }
  }
  put_int(items, "flag_rho_out_of_range", r.rho_out_of_range ? 1 : 0);
  put_int(items, "flag_fold_imbalance", r.fold_imbalance ? 1 : 0);
  return items;
}

ReportItems report_items(const MonteCarloTable& t) {
  ReportItems items;
  put(items, "format", "genrel-mc-report-v1");
  put(items, "version", GENREL_VERSION_STRING);
  put(items, "dgp", t.dgp_desc);
  put(items, "estimator", t.estimator_desc.empty() ? "-" : t.estimator_desc);
  put_int(items, "reps", t.reps);
  put_int(items, "successes", t.successes);
  put_int(items, "failures", t.failures);
  for (const auto& [name, count] : t.failure_counts) {
    put_int(items, "failures_" + name, count);
  }
  put_real(items, "truth", t.truth);
  put(items, "truth_provenance", t.truth_provenance);
  if (t.truth_mc_se) put_real(items, "truth_mc_se", *t.truth_mc_se);
  put_real(items, "alpha", t.alpha);
  put_int(items, "base_seed", static_cast<long long>(t.base_seed));
  if (t.has_ci) {
    put_real(items, "cp", t.cp);
    put_real(items, "len", t.len);
    put_real(items, "se", t.se_mean);
  } else {
    put(items, "cp", "na");
    put(items, "len", "na");
    put(items, "se", "na");
  }
  put_real(items, "bias", t.bias);
  if (t.has_rbias) {
    put_real(items, "rbias", t.rbias);
  } else {
    put(items, "rbias", "na");
  }
  put_real(items, "mc_sd", t.mc_sd);
  put_real(items, "mean_point", t.mean_point);
  return items;
}

std::string serialize_report(const ReportItems& items) {
  std::ostringstream out;
  for (const auto& [key, value] : items) {
    out << key << " = " << value << "\n";
  }
  return out.str();
}

void write_report(const ReportItems& items, const std::string& path) {
  const std::string text = serialize_report(items);  // serialize before touching the file
  std::ofstream out(path, std::ios::trunc);
  if (!out) raise(ErrorCode::io_error, "cannot open '" + path + "' for writing");
  out << text;
  if (!out) raise(ErrorCode::io_error, "failed writing '" + path + "'");
}

ReportItems parse_report(const std::string& text) {
  ReportItems items;
  std::istringstream in(text);
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto pos = line.find(" = ");
    if (pos == std::string::npos) {
      raise(ErrorCode::io_error, "malformed report line " + std::to_string(line_no));
    }
    items.emplace_back(line.substr(0, pos), line.substr(pos + 3));
  }
  return items;
}

ReportItems read_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorCode::io_error, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_report(buf.str());
}

std::string summary_line(const EstimateReport& r) {
  std::ostringstream out;
  out << (r.target == Target::covariance ? "I" : "rho") << " = " << format_real(r.point)
      << " +/- " << format_real(r.z * r.se) << " [" << format_real(r.ci_lower) << ", "
      << format_real(r.ci_upper) << "]";
  return out.str();
}

}  // namespace genrel
