#include "seqrpf/config.hpp"

#include <fstream>

namespace seqrpf {

namespace {

[[noreturn]] void bad(const std::string& what) { fail(Errc::config_error, what); }

const json& field(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) bad(where + ": missing key '" + key + "'");
  return *it;
}

Eigen::MatrixXi parse_binary_matrix(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) bad(where + ": expected a matrix");
  const int rows = static_cast<int>(j.size());
  const int cols = static_cast<int>(j[0].size());
  Eigen::MatrixXi m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    if (!j[r].is_array() || static_cast<int>(j[r].size()) != cols)
      bad(where + ": ragged matrix rows");
    for (int c = 0; c < cols; ++c) {
      if (!j[r][c].is_number_integer()) bad(where + ": matrix entries must be integers");
      m(r, c) = j[r][c].get<int>();
    }
  }
  return m;
}

Eigen::VectorXd parse_vector(const json& j, const std::string& where) {
  if (!j.is_array()) bad(where + ": expected an array of numbers");
  Eigen::VectorXd v(static_cast<long>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) bad(where + ": entries must be numbers");
    v(static_cast<long>(i)) = j[i].get<double>();
  }
  return v;
}

// fills one side (potentials or observables) of an already-shaped spec
void apply_generator(SftSpec& spec, bool potential_side, const json& gen,
                     const std::string& where) {
  if (!gen.is_object()) bad(where + ": generator must be an object");
  const std::string type = field(gen, "type", where).get<std::string>();
  auto& target = potential_side ? spec.potentials : spec.observables;

  if (type == "constant") {
    check_keys(gen, {"type", "value"}, where);
    const double v = num_at(gen, "value", where);
    for (int s = 0; s < spec.window(); ++s) target[s].setConstant(v);
  } else if (type == "symbol-linear") {
    check_keys(gen, {"type", "scale", "offset"}, where);
    if (spec.memory != 1) bad(where + ": symbol-linear needs memory 1");
    const double scale = num_or(gen, "scale", 1.0, where);
    const double offset = num_or(gen, "offset", 0.0, where);
    for (int s = 0; s < spec.window(); ++s)
      for (int a = 0; a < spec.alphabet_sizes[s]; ++a) target[s](a) = offset + scale * a;
  } else if (type == "seeded-uniform") {
    check_keys(gen, {"type", "lo", "hi", "seed"}, where);
    const double lo = num_at(gen, "lo", where);
    const double hi = num_at(gen, "hi", where);
    const std::uint64_t seed = u64_or(gen, "seed", 1, where);
    if (potential_side) randomize_potentials(spec, lo, hi, seed);
    else randomize_observables(spec, lo, hi, seed);
  } else if (type == "values") {
    check_keys(gen, {"type", "data"}, where);
    const json& data = field(gen, "data", where);
    if (!data.is_array() || data.empty()) bad(where + ": 'data' must be a nonempty array");
    const bool per_slot = data[0].is_array();
    for (int s = 0; s < spec.window(); ++s) {
      const json& row = per_slot ? data[s % data.size()] : data;
      Eigen::VectorXd v = parse_vector(row, where);
      if (v.size() != target[s].size())
        bad(where + ": slot " + std::to_string(s) + " expects " +
            std::to_string(target[s].size()) + " values, got " + std::to_string(v.size()));
      target[s] = v;
    }
  } else {
    bad(where + ": unknown generator type '" + type + "'");
  }
}

SftSpec parse_sft(const json& sys) {
  const std::string where = "system";
  const std::string preset = str_or(sys, "preset", "", where);

  if (preset == "seeded-primitive") {
    check_keys(sys, {"type", "preset", "alphabet", "window_len", "f_amp", "u_amp", "seed",
                     "potential", "observable", "extension"},
               where);
    SftSpec spec = make_seeded_primitive(
        static_cast<int>(int_or(sys, "alphabet", 3, where)), int_or(sys, "window_len", 16, where),
        num_or(sys, "f_amp", 0.25, where), num_or(sys, "u_amp", 1.0, where),
        u64_or(sys, "seed", 1, where));
    if (sys.contains("potential")) apply_generator(spec, true, sys["potential"], where);
    if (sys.contains("observable")) apply_generator(spec, false, sys["observable"], where);
    if (str_or(sys, "extension", "periodic", where) == "frozen")
      spec.extension = Extension::frozen;
    validate(spec);
    return spec;
  }
  if (preset == "full-shift" || preset == "golden-mean") {
    check_keys(sys, {"type", "preset", "alphabet", "window_len", "potential", "observable",
                     "extension"},
               where);
    const long w = int_or(sys, "window_len", 16, where);
    SftSpec spec = preset == "full-shift"
                       ? make_full_shift(static_cast<int>(int_or(sys, "alphabet", 2, where)), w)
                       : make_golden_mean(w);
    if (sys.contains("potential")) apply_generator(spec, true, sys["potential"], where);
    if (sys.contains("observable")) apply_generator(spec, false, sys["observable"], where);
    if (str_or(sys, "extension", "periodic", where) == "frozen")
      spec.extension = Extension::frozen;
    validate(spec);
    return spec;
  }
  if (!preset.empty()) bad(where + ": unknown preset '" + preset + "'");

  check_keys(sys, {"type", "window_len", "j_lo", "alphabet", "transitions", "potential",
                   "observable", "memory", "extension"},
             where);
  SftSpec spec;
  const long w = int_or(sys, "window_len", 0, where);
  if (w < 1) bad(where + ": 'window_len' must be a positive integer");
  spec.j_lo = int_or(sys, "j_lo", 0, where);
  spec.j_hi = spec.j_lo + w - 1;
  spec.memory = static_cast<int>(int_or(sys, "memory", 1, where));
  if (str_or(sys, "extension", "periodic", where) == "frozen") spec.extension = Extension::frozen;

  const json& alpha = field(sys, "alphabet", where);
  if (alpha.is_number_integer()) {
    spec.alphabet_sizes.assign(w, alpha.get<int>());
  } else if (alpha.is_array()) {
    for (const auto& a : alpha) spec.alphabet_sizes.push_back(a.get<int>());
    if (static_cast<long>(spec.alphabet_sizes.size()) != w)
      bad(where + ": 'alphabet' array must have one entry per window slot");
  } else {
    bad(where + ": 'alphabet' must be an integer or an array");
  }

  const json& trans = field(sys, "transitions", where);
  if (trans.is_string()) {
    const std::string name = trans.get<std::string>();
    for (int s = 0; s < w; ++s) {
      const int d = spec.alphabet_sizes[s];
      const int dn = spec.alphabet_sizes[(s + 1) % w];
      if (name == "full") {
        spec.transitions.push_back(Eigen::MatrixXi::Ones(d, dn));
      } else if (name == "golden-mean") {
        if (d != 2 || dn != 2) bad(where + ": golden-mean transitions need alphabet 2");
        Eigen::MatrixXi t(2, 2);
        t << 1, 1, 1, 0;
        spec.transitions.push_back(t);
      } else {
        bad(where + ": unknown transitions name '" + name + "'");
      }
    }
  } else if (trans.is_array() && !trans.empty() && trans[0].is_array() && !trans[0].empty() &&
             trans[0][0].is_array()) {
    // one matrix per slot
    if (static_cast<long>(trans.size()) != w)
      bad(where + ": 'transitions' must list one matrix per window slot");
    for (int s = 0; s < w; ++s)
      spec.transitions.push_back(parse_binary_matrix(trans[s], where + ".transitions"));
  } else {
    // a single matrix reused on every slot
    const Eigen::MatrixXi m = parse_binary_matrix(trans, where + ".transitions");
    for (int s = 0; s < w; ++s) spec.transitions.push_back(m);
  }

  for (int s = 0; s < w; ++s) {
    spec.potentials.emplace_back(Eigen::VectorXd::Zero(spec.tuple_count(spec.j_lo + s)));
    spec.observables.emplace_back(Eigen::VectorXd::Zero(spec.tuple_count(spec.j_lo + s)));
  }
  if (sys.contains("potential")) apply_generator(spec, true, sys["potential"], where);
  if (sys.contains("observable")) apply_generator(spec, false, sys["observable"], where);
  validate(spec);
  return spec;
}

CircleSpec parse_circle(const json& sys) {
  const std::string where = "system";
  check_keys(sys, {"type", "multiplier", "eps", "window_len", "cutoff"}, where);
  CircleSpec spec = make_circle_doubling(static_cast<int>(int_or(sys, "multiplier", 2, where)),
                                         num_or(sys, "eps", 0.1, where),
                                         int_or(sys, "window_len", 4, where),
                                         static_cast<int>(int_or(sys, "cutoff", 8, where)));
  validate(spec);
  return spec;
}

EnvSpec parse_env(const json& sys) {
  const std::string where = "system";
  check_keys(sys, {"type", "layers", "driver", "marked", "window_len", "n0"}, where);
  EnvSpec env;
  const json& layers = field(sys, "layers", where);
  if (!layers.is_array() || layers.empty()) bad(where + ": 'layers' must be a nonempty array");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const std::string lw = where + ".layers[" + std::to_string(i) + "]";
    check_keys(layers[i], {"transition", "potential", "observable"}, lw);
    EnvLayer lay;
    lay.transition = parse_binary_matrix(field(layers[i], "transition", lw), lw);
    lay.potential = parse_vector(field(layers[i], "potential", lw), lw);
    lay.observable = parse_vector(field(layers[i], "observable", lw), lw);
    env.layers.push_back(std::move(lay));
  }

  const json& driver = field(sys, "driver", where);
  const std::string dw = where + ".driver";
  const std::string dtype = field(driver, "type", dw).get<std::string>();
  if (dtype == "independent") {
    check_keys(driver, {"type", "probs"}, dw);
    const json& probs = field(driver, "probs", dw);
    if (!probs.is_array() || probs.empty()) bad(dw + ": 'probs' must be a nonempty array");
    env.driver.kind = DriverKind::independent;
    if (probs[0].is_array()) {
      for (const auto& p : probs) env.driver.probs.push_back(parse_vector(p, dw));
    } else {
      env.driver.probs.push_back(parse_vector(probs, dw));
    }
  } else if (dtype == "markov") {
    check_keys(driver, {"type", "initial", "kernels"}, dw);
    env.driver.kind = DriverKind::markov;
    env.driver.initial = parse_vector(field(driver, "initial", dw), dw);
    const json& kernels = field(driver, "kernels", dw);
    if (!kernels.is_array() || kernels.empty()) bad(dw + ": 'kernels' must be a nonempty array");
    const bool per_slot = kernels[0].is_array() && !kernels[0].empty() && kernels[0][0].is_array();
    if (per_slot) {
      for (const auto& k : kernels) {
        const int Y = static_cast<int>(k.size());
        Eigen::MatrixXd m(Y, k[0].size());
        for (int r = 0; r < Y; ++r) m.row(r) = parse_vector(k[r], dw).transpose();
        env.driver.kernels.push_back(std::move(m));
      }
    } else {
      const int Y = static_cast<int>(kernels.size());
      Eigen::MatrixXd m(Y, kernels[0].size());
      for (int r = 0; r < Y; ++r) m.row(r) = parse_vector(kernels[r], dw).transpose();
      env.driver.kernels.push_back(std::move(m));
    }
  } else {
    bad(dw + ": unknown driver type '" + dtype + "'");
  }

  if (sys.contains("marked")) {
    const json& marked = sys["marked"];
    if (!marked.is_array()) bad(where + ": 'marked' must be an array of layer indices");
    for (const auto& y : marked) env.marked.push_back(y.get<int>());
  }
  env.window_len = int_or(sys, "window_len", 64, where);
  env.n0 = static_cast<int>(int_or(sys, "n0", 2, where));
  validate(env);
  return env;
}

}  // namespace

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& where) {
  if (!obj.is_object()) bad(where + ": expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed) ok = ok || it.key() == k;
    if (!ok) bad(where + ": unknown key '" + it.key() + "'");
  }
}

double num_at(const json& obj, const char* key, const std::string& where) {
  const json& v = field(obj, key, where);
  if (!v.is_number()) bad(where + ": '" + key + "' must be a number");
  return v.get<double>();
}

double num_or(const json& obj, const char* key, double fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  return num_at(obj, key, where);
}

long int_or(const json& obj, const char* key, long fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj[key];
  if (!v.is_number_integer()) bad(where + ": '" + key + "' must be an integer");
  return v.get<long>();
}

std::uint64_t u64_or(const json& obj, const char* key, std::uint64_t fallback,
                     const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj[key];
  if (!v.is_number_unsigned() && !v.is_number_integer())
    bad(where + ": '" + key + "' must be a nonnegative integer");
  if (v.is_number_integer() && v.get<long long>() < 0)
    bad(where + ": '" + key + "' must be nonnegative");
  return v.get<std::uint64_t>();
}

std::string str_or(const json& obj, const char* key, const std::string& fallback,
                   const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj[key];
  if (!v.is_string()) bad(where + ": '" + key + "' must be a string");
  return v.get<std::string>();
}

bool bool_or(const json& obj, const char* key, bool fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj[key];
  if (!v.is_boolean()) bad(where + ": '" + key + "' must be a boolean");
  return v.get<bool>();
}

std::vector<long> int_list_or(const json& obj, const char* key, std::vector<long> fallback,
                              const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj[key];
  if (!v.is_array()) bad(where + ": '" + key + "' must be an array of integers");
  std::vector<long> out;
  for (const auto& e : v) {
    if (!e.is_number_integer()) bad(where + ": '" + key + "' must hold integers");
    out.push_back(e.get<long>());
  }
  return out;
}

std::vector<double> num_list_or(const json& obj, const char* key, std::vector<double> fallback,
                                const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj[key];
  if (!v.is_array()) bad(where + ": '" + key + "' must be an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) bad(where + ": '" + key + "' must hold numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

ExperimentConfig parse_config(const json& root) {
  check_keys(root, {"system", "params", "seed"}, "config");
  ExperimentConfig cfg;
  const json& sys = field(root, "system", "config");
  const std::string type = field(sys, "type", "system").get<std::string>();
  if (type == "sft") {
    cfg.system.kind = SystemKind::sft;
    cfg.system.sft = parse_sft(sys);
  } else if (type == "circle") {
    cfg.system.kind = SystemKind::circle;
    cfg.system.circle = parse_circle(sys);
  } else if (type == "environment") {
    cfg.system.kind = SystemKind::environment;
    cfg.system.env = parse_env(sys);
  } else {
    bad("system: unknown type '" + type + "'");
  }
  cfg.params = root.contains("params") ? root["params"] : json::object();
  if (!cfg.params.is_object()) bad("config: 'params' must be an object");
  cfg.seed = u64_or(root, "seed", 1, "config");
  cfg.canonical = root.dump();
  cfg.hash = fnv1a(cfg.canonical);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f.good()) bad("cannot open config file " + path);
  json root;
  try {
    // Comments are allowed so config files can carry annotations; the
    // canonical form (and hence the manifest hash) is the stripped dump.
    root = json::parse(f, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    bad("config is not valid JSON: " + std::string(e.what()));
  }
  return parse_config(root);
}

}  // namespace seqrpf
