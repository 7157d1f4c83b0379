#include "core/config.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "core/errors.hpp"

namespace genrel {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
  raise(ErrorCode::config_error, "bad value '" + value + "' for " + key);
}

long parse_long(const std::string& key, const std::string& value) {
  long out = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) bad_value(key, value);
  return out;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) bad_value(key, value);
  return out;
}

double parse_double(const std::string& key, const std::string& value) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) bad_value(key, value);
  return out;
}

std::vector<int> parse_int_list(const std::string& key, const std::string& value) {
  std::vector<int> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    out.push_back(static_cast<int>(parse_long(key, trim(item))));
  }
  if (out.empty()) bad_value(key, value);
  return out;
}

DgpSpec& dgp_of(RunConfig& config) {
  if (!config.dgp) config.dgp.emplace();
  return *config.dgp;
}

void set_learner_key(LearnerSpec& learner, const std::string& section,
                     const std::string& key, const std::string& value) {
  const std::string full = section + "." + key;
  if (key == "kind") {
    if (value == "lasso") learner.kind = LearnerKind::lasso;
    else if (value == "ridge") learner.kind = LearnerKind::ridge;
    else if (value == "mlp") learner.kind = LearnerKind::mlp;
    else if (value == "oracle") learner.kind = LearnerKind::oracle;
    else if (value == "constant") learner.kind = LearnerKind::constant;
    else bad_value(full, value);
  } else if (key == "family") {
    if (value == "gaussian") learner.family = Family::gaussian;
    else if (value == "binomial") learner.family = Family::binomial;
    else bad_value(full, value);
  } else if (key == "seed") {
    learner.seed = parse_u64(full, value);
  } else if (key == "lasso.cv_folds") {
    learner.lasso.cv_folds = static_cast<int>(parse_long(full, value));
  } else if (key == "lasso.lambda_grid_size") {
    learner.lasso.lambda_grid_size = static_cast<int>(parse_long(full, value));
  } else if (key == "lasso.max_iter") {
    learner.lasso.max_iter = static_cast<int>(parse_long(full, value));
  } else if (key == "lasso.tol") {
    learner.lasso.tol = parse_double(full, value);
  } else if (key == "lasso.lambda_min_ratio") {
    learner.lasso.lambda_min_ratio = parse_double(full, value);
  } else if (key == "lasso.fixed_lambda") {
    learner.lasso.fixed_lambda = parse_double(full, value);
  } else if (key == "ridge.lambda") {
    learner.ridge.lambda = parse_double(full, value);
  } else if (key == "mlp.hidden") {
    learner.mlp.hidden = parse_int_list(full, value);
  } else if (key == "mlp.max_iter") {
    learner.mlp.max_iter = static_cast<int>(parse_long(full, value));
  } else if (key == "mlp.learning_rate") {
    if (value != "adaptive" && value != "constant") bad_value(full, value);
    learner.mlp.learning_rate = value;
  } else if (key == "mlp.batch_size") {
    learner.mlp.batch_size = static_cast<int>(parse_long(full, value));
  } else if (key == "mlp.init_step") {
    learner.mlp.init_step = parse_double(full, value);
  } else if (key == "mlp.patience") {
    learner.mlp.patience = static_cast<int>(parse_long(full, value));
  } else if (key == "constant.value") {
    learner.constant_value = parse_double(full, value);
  } else {
    raise(ErrorCode::config_error, "unknown key '" + full + "'");
  }
}

}  // namespace

void set_config_key(RunConfig& config, const std::string& dotted_key,
                    const std::string& value) {
  const auto dot = dotted_key.find('.');
  if (dot == std::string::npos) {
    raise(ErrorCode::config_error, "key '" + dotted_key + "' is missing its section");
  }
  const std::string section = dotted_key.substr(0, dot);
  const std::string key = dotted_key.substr(dot + 1);

  if (section == "data") {
    if (key == "path") {
      config.data_path = value;
    } else if (key == "source") {
      dgp_of(config).example = example_from_name(value);
    } else if (key == "n_y") {
      dgp_of(config).n_y = parse_long(dotted_key, value);
    } else if (key == "n_z") {
      dgp_of(config).n_z = parse_long(dotted_key, value);
    } else if (key == "n") {
      const long n = parse_long(dotted_key, value);
      dgp_of(config).n_y = n;
      dgp_of(config).n_z = n;
    } else if (key == "p") {
      dgp_of(config).p = parse_long(dotted_key, value);
    } else if (key == "s1") {
      dgp_of(config).s1 = parse_long(dotted_key, value);
    } else if (key == "s2") {
      dgp_of(config).s2 = parse_long(dotted_key, value);
    } else if (key == "s") {
      const long s = parse_long(dotted_key, value);
      dgp_of(config).s1 = s;
      dgp_of(config).s2 = s;
    } else if (key == "overlap") {
      if (value == "full") dgp_of(config).overlap = Overlap::full;
      else if (value == "none") dgp_of(config).overlap = Overlap::none;
      else bad_value(dotted_key, value);
    } else {
      raise(ErrorCode::config_error, "unknown key '" + dotted_key + "'");
    }
  } else if (section == "learner_m") {
    set_learner_key(config.learner_m, section, key, value);
  } else if (section == "learner_h") {
    set_learner_key(config.learner_h, section, key, value);
  } else if (section == "links") {
    if (key == "g1") {
      config.g1 = Link::from_name(value, config.g1.clip_eps);
    } else if (key == "g2") {
      config.g2 = Link::from_name(value, config.g2.clip_eps);
    } else if (key == "clip_eps") {
      const double eps = parse_double(dotted_key, value);
      if (eps <= 0.0 || eps >= 0.5) bad_value(dotted_key, value);
      config.g1.clip_eps = eps;
      config.g2.clip_eps = eps;
    } else {
      raise(ErrorCode::config_error, "unknown key '" + dotted_key + "'");
    }
  } else if (section == "run") {
    if (key == "target") {
      if (value == "covariance") config.target = Target::covariance;
      else if (value == "correlation") config.target = Target::correlation;
      else bad_value(dotted_key, value);
    } else if (key == "method") {
      if (value == "crossfit") config.method = Method::crossfit;
      else if (value == "fullsample") config.method = Method::fullsample;
      else if (value == "naive") config.method = Method::naive;
      else bad_value(dotted_key, value);
    } else if (key == "variance_variant") {
      if (value == "proposition2") config.variance_variant = VarianceVariant::proposition2;
      else if (value == "theorem5") config.variance_variant = VarianceVariant::theorem5;
      else bad_value(dotted_key, value);
    } else if (key == "alpha") {
      config.alpha = parse_double(dotted_key, value);
      if (config.alpha <= 0.0 || config.alpha >= 1.0) bad_value(dotted_key, value);
    } else if (key == "seed") {
      config.seed = parse_u64(dotted_key, value);
    } else if (key == "reps") {
      config.reps = parse_long(dotted_key, value);
    } else if (key == "draws") {
      config.draws = parse_long(dotted_key, value);
    } else if (key == "out") {
      config.out_path = value;
    } else if (key == "preset") {
      apply_preset(config, value);
    } else {
      raise(ErrorCode::config_error, "unknown key '" + dotted_key + "'");
    }
  } else {
    raise(ErrorCode::config_error, "unknown section '" + section + "'");
  }
}

void apply_config_text(RunConfig& config, const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line, section;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#' || stripped[0] == ';') continue;
    if (stripped.front() == '[') {
      if (stripped.back() != ']') {
        raise(ErrorCode::config_error,
              origin + ":" + std::to_string(line_no) + ": malformed section header");
      }
      section = trim(stripped.substr(1, stripped.size() - 2));
      if (section != "data" && section != "learner_m" && section != "learner_h" &&
          section != "links" && section != "run") {
        raise(ErrorCode::config_error,
              origin + ":" + std::to_string(line_no) + ": unknown section '" + section + "'");
      }
      continue;
    }
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      raise(ErrorCode::config_error,
            origin + ":" + std::to_string(line_no) + ": expected key = value");
    }
    if (section.empty()) {
      raise(ErrorCode::config_error,
            origin + ":" + std::to_string(line_no) + ": key outside any section");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty() || value.empty()) {
      raise(ErrorCode::config_error,
            origin + ":" + std::to_string(line_no) + ": empty key or value");
    }
    set_config_key(config, section + "." + key, value);
  }
}

void apply_config_file(RunConfig& config, const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorCode::io_error, "cannot open config '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  apply_config_text(config, buf.str(), path);
}

namespace {

void preset_dgp(RunConfig& c, ExampleDgp example, long n, long p, long s1, long s2,
                Overlap overlap) {
  DgpSpec spec;
  spec.example = example;
  spec.n_y = spec.n_z = n;
  spec.p = p;
  spec.s1 = s1;
  spec.s2 = s2;
  spec.overlap = overlap;
  c.dgp = spec;
  c.data_path.reset();
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"ex1_desk",  "ex1_desk_nonoverlap", "ex1_full", "ex1_full_nonoverlap",
          "ex2_desk",  "ex3_desk",            "ex4_desk", "thm2_desk"};
}

bool is_preset(const std::string& name) {
  for (const auto& known : preset_names()) {
    if (known == name) return true;
  }
  return false;
}

void apply_preset(RunConfig& c, const std::string& name) {
  if (name == "ex1_desk" || name == "ex1_desk_nonoverlap" || name == "ex1_full" ||
      name == "ex1_full_nonoverlap") {
    const bool full_size = name.rfind("ex1_full", 0) == 0;
    const Overlap overlap =
        name.find("nonoverlap") != std::string::npos ? Overlap::none : Overlap::full;
    preset_dgp(c, ExampleDgp::ex1_linear_cov, full_size ? 400 : 200, full_size ? 400 : 100,
               10, 10, overlap);
    c.learner_m = LearnerSpec{};
    c.learner_h = LearnerSpec{};
    c.g1 = c.g2 = Link{};
    c.target = Target::covariance;
    c.method = Method::crossfit;
    c.reps = 500;
  } else if (name == "ex2_desk") {
    preset_dgp(c, ExampleDgp::ex2_linear_corr, 200, 100, 20, 5, Overlap::full);
    c.learner_m = LearnerSpec{};
    c.learner_h = LearnerSpec{};
    c.g1 = c.g2 = Link{};
    c.target = Target::correlation;
    c.method = Method::crossfit;
    c.reps = 500;
  } else if (name == "ex3_desk") {
    preset_dgp(c, ExampleDgp::ex3_nonlinear, 400, 50, 0, 0, Overlap::full);
    LearnerSpec mlp;
    mlp.kind = LearnerKind::mlp;
    mlp.mlp.hidden = {32, 32};
    mlp.mlp.max_iter = 500;
    c.learner_m = mlp;
    c.learner_h = mlp;
    c.g1 = c.g2 = Link{};
    c.target = Target::covariance;
    c.method = Method::crossfit;
    c.reps = 200;
  } else if (name == "ex4_desk") {
    preset_dgp(c, ExampleDgp::ex4_logistic, 200, 100, 5, 5, Overlap::full);
    LearnerSpec lasso;
    lasso.family = Family::binomial;
    c.learner_m = lasso;
    c.learner_h = lasso;
    c.g1 = c.g2 = Link{LinkKind::logit, 1e-6};
    c.target = Target::covariance;
    c.method = Method::crossfit;
    c.reps = 500;
  } else if (name == "thm2_desk") {
    preset_dgp(c, ExampleDgp::ex1_linear_cov, 2000, 10, 2, 2, Overlap::full);
    LearnerSpec oracle;
    oracle.kind = LearnerKind::oracle;
    c.learner_m = oracle;
    LearnerSpec zero;
    zero.kind = LearnerKind::constant;
    zero.constant_value = 0.0;
    c.learner_h = zero;
    c.g1 = c.g2 = Link{};
    c.target = Target::covariance;
    c.method = Method::fullsample;
    c.reps = 200;
  } else {
    raise(ErrorCode::config_error, "unknown preset '" + name + "'");
  }
}

void load_config_or_preset(RunConfig& config, const std::string& source) {
  if (std::filesystem::exists(source)) {
    apply_config_file(config, source);
  } else if (is_preset(source)) {
    apply_preset(config, source);
  } else {
    raise(ErrorCode::io_error, "'" + source + "' is neither a config file nor a preset");
  }
}

EstimatorConfig estimator_config(const RunConfig& config) {
  EstimatorConfig out;
  out.target = config.target;
  out.method = config.method;
  out.learner_m = config.learner_m;
  out.learner_h = config.learner_h;
  out.g1 = config.g1;
  out.g2 = config.g2;
  out.alpha = config.alpha;
  out.variance_variant = config.variance_variant;
  return out;
}

}  // namespace genrel
