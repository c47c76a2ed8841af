#include "casim/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace casim {

namespace {

std::string join_errors(const std::vector<std::string>& errors) {
  std::string out = "scenario has " + std::to_string(errors.size()) + " problem(s):";
  for (const auto& e : errors) out += "\n  - " + e;
  return out;
}

}  // namespace

ScenarioError::ScenarioError(std::vector<std::string> errors)
    : std::runtime_error(join_errors(errors)), errors_(std::move(errors)) {}

// ---------------------------------------------------------------------------
// Shared key/value application
// ---------------------------------------------------------------------------

namespace {

struct KvItem {
  std::string block;
  std::string key;
  std::string value;     // raw text after '='
  std::string location;  // "line 12" or "spectrum.channels"
};

struct DemandLine {
  std::string class_field, snr_field;
  std::vector<double> nums;  // theta [, theta_min, theta_max]
  std::string location;
};

// Scenario under construction plus everything that needs cross-checking later.
struct Builder {
  Scenario sc;
  std::vector<std::string> errors;
  std::vector<DemandLine> demand_lines;
  bool have_amc = false;
  bool have_snr_matrix = false;

  void error(const std::string& loc, const std::string& msg) {
    errors.push_back(msg + " (" + loc + ")");
  }
};

std::string trim(std::string s) {
  auto issp = [](unsigned char c) { return std::isspace(c); };
  while (!s.empty() && issp(s.front())) s.erase(s.begin());
  while (!s.empty() && issp(s.back())) s.pop_back();
  return s;
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> parts;
  std::string cur;
  std::stringstream ss(s);
  while (std::getline(ss, cur, ',')) parts.push_back(trim(cur));
  if (parts.empty()) parts.push_back(trim(s));
  return parts;
}

bool parse_number(const std::string& s, double& out) {
  if (s == "inf" || s == "infinity") {
    out = std::numeric_limits<double>::infinity();
    return true;
  }
  try {
    std::size_t pos = 0;
    out = std::stod(s, &pos);
    return pos == s.size();
  } catch (...) {
    return false;
  }
}

bool parse_bool(const std::string& s, bool& out) {
  if (s == "true" || s == "yes" || s == "1" || s == "on") { out = true; return true; }
  if (s == "false" || s == "no" || s == "0" || s == "off") { out = false; return true; }
  return false;
}

std::vector<double> parse_number_list(Builder& b, const KvItem& item) {
  std::vector<double> out;
  for (const std::string& part : split_csv(item.value)) {
    double v;
    if (!parse_number(part, v)) {
      b.error(item.location, item.block + "." + item.key + ": '" + part +
                                 "' is not a number");
      return {};
    }
    out.push_back(v);
  }
  return out;
}

bool expect_count(Builder& b, const KvItem& item, const std::vector<double>& nums,
                  std::size_t n) {
  if (nums.size() == n) return true;
  b.error(item.location, item.block + "." + item.key + ": expected " +
                             std::to_string(n) + " value(s), got " +
                             std::to_string(nums.size()));
  return false;
}

double single_number(Builder& b, const KvItem& item, double fallback = 0.0) {
  std::vector<double> nums = parse_number_list(b, item);
  if (nums.size() != 1) {
    if (!nums.empty())
      b.error(item.location, item.block + "." + item.key + ": expected one value");
    return fallback;
  }
  return nums[0];
}

int single_int(Builder& b, const KvItem& item, int fallback = 0) {
  double v = single_number(b, item, fallback);
  if (v != std::floor(v)) {
    b.error(item.location, item.block + "." + item.key + ": must be an integer");
    return fallback;
  }
  return static_cast<int>(v);
}

bool single_bool(Builder& b, const KvItem& item, bool fallback = false) {
  bool v = fallback;
  if (!parse_bool(trim(item.value), v))
    b.error(item.location, item.block + "." + item.key + ": expected true/false");
  return v;
}

void apply_spectrum(Builder& b, const KvItem& item) {
  SpectrumConfig& sp = b.sc.spectrum;
  if (item.key == "channels") {
    sp.channels = single_int(b, item, 1);
  } else if (item.key == "message_bits") {
    sp.frame.message_bits = single_number(b, item, 1.0);
  } else if (item.key == "channel_constant") {
    sp.frame.channel_constant = single_number(b, item, 1.0);
  } else if (item.key == "symbol_rate") {
    sp.frame.symbol_rate = single_number(b, item, 1.0);
  } else if (item.key == "amc_mode") {
    std::vector<double> nums = parse_number_list(b, item);
    if (!expect_count(b, item, nums, 4)) return;
    if (!b.have_amc) {
      sp.amc_table.clear();
      b.have_amc = true;
    }
    sp.amc_table.push_back(
        {static_cast<int>(nums[0]), nums[1], nums[2], nums[3]});
  } else if (item.key == "pu_off_to_on") {
    sp.pu_off_to_on = parse_number_list(b, item);
  } else if (item.key == "pu_on_to_off") {
    sp.pu_on_to_off = parse_number_list(b, item);
  } else {
    b.error(item.location, "unknown key spectrum." + item.key);
  }
}

void apply_traffic(Builder& b, const KvItem& item) {
  TrafficConfig& tr = b.sc.traffic;
  if (item.key == "pu_arrival_rate") {
    tr.pu_arrival_rate = single_number(b, item);
  } else if (item.key == "pu_service_rate") {
    tr.pu_service_rate = single_number(b, item, 1.0);
  } else if (item.key == "su_arrival_rate") {
    tr.su_arrival_rate = parse_number_list(b, item);
  } else if (item.key == "su_service_rate") {
    tr.su_service_rate = parse_number_list(b, item);
  } else if (item.key == "demand") {
    // class, snr, theta [, theta_min, theta_max]; '*' wildcards both selectors
    std::vector<std::string> parts = split_csv(item.value);
    if (parts.size() != 3 && parts.size() != 5) {
      b.error(item.location,
              "traffic.demand: expected 'class, snr, theta[, theta_min, theta_max]'");
      return;
    }
    DemandLine dl;
    dl.class_field = parts[0];
    dl.snr_field = parts[1];
    dl.location = item.location;
    for (std::size_t i = 2; i < parts.size(); ++i) {
      double v;
      if (!parse_number(parts[i], v) || v != std::floor(v)) {
        b.error(item.location, "traffic.demand: '" + parts[i] + "' is not an integer");
        return;
      }
      dl.nums.push_back(v);
    }
    b.demand_lines.push_back(std::move(dl));
  } else if (item.key == "snr_matrix") {
    std::vector<double> nums = parse_number_list(b, item);
    if (!expect_count(b, item, nums, 9)) return;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) tr.snr_matrix[r][c] = nums[3 * r + c];
    b.have_snr_matrix = true;
  } else if (item.key == "snr_initial") {
    std::vector<double> nums = parse_number_list(b, item);
    if (!expect_count(b, item, nums, 3)) return;
    for (int i = 0; i < 3; ++i) tr.snr_initial[i] = nums[i];
  } else if (item.key == "snr_rate") {
    tr.snr_rate = single_number(b, item);
  } else {
    b.error(item.location, "unknown key traffic." + item.key);
  }
}

void apply_policy(Builder& b, const KvItem& item) {
  PolicySettings& po = b.sc.policy;
  if (item.key == "policy") {
    std::optional<PolicyKind> k = policy_from_string(trim(item.value));
    if (!k) {
      b.error(item.location,
              "policy.policy: expected one of IBS, RBS, IBS_Q, RBS_Q");
      return;
    }
    po.policy = *k;
  } else if (item.key == "queue1_capacity") {
    po.queue1_capacity = single_int(b, item);
  } else if (item.key == "queue2_capacity") {
    po.queue2_capacity = single_int(b, item);
  } else if (item.key == "queue_capacity") {
    po.queue1_capacity = po.queue2_capacity = single_int(b, item);
  } else if (item.key == "deadline") {
    po.deadline = single_number(b, item, po.deadline);
  } else if (item.key == "strict_hol") {
    po.strict_hol = single_bool(b, item);
  } else if (item.key == "exp_deadline") {
    po.exp_deadline = single_bool(b, item);
  } else if (item.key == "contiguous") {
    po.contiguous = single_bool(b, item);
  } else {
    b.error(item.location, "unknown key policy." + item.key);
  }
}

void apply_sim(Builder& b, const KvItem& item) {
  SimConfig& sim = b.sc.sim;
  if (item.key == "horizon") {
    sim.horizon = single_number(b, item, sim.horizon);
  } else if (item.key == "warmup") {
    sim.warmup = single_number(b, item, sim.warmup);
  } else if (item.key == "replications") {
    sim.replications = single_int(b, item, 1);
  } else if (item.key == "seed") {
    double v = single_number(b, item, 1);
    if (v < 0 || v != std::floor(v)) {
      b.error(item.location, "sim.seed: must be a nonnegative integer");
      return;
    }
    sim.seed = static_cast<std::uint64_t>(v);
  } else {
    b.error(item.location, "unknown key sim." + item.key);
  }
}

void apply_item(Builder& b, const KvItem& item) {
  if (item.block == "spectrum") apply_spectrum(b, item);
  else if (item.block == "traffic") apply_traffic(b, item);
  else if (item.block == "policy") apply_policy(b, item);
  else if (item.block == "sim") apply_sim(b, item);
  else b.error(item.location, "unknown block [" + item.block + "]");
}

// Demand lines are resolved once the class count is known; later lines
// override earlier ones, '*' matches everything.
void resolve_demand(Builder& b) {
  TrafficConfig& tr = b.sc.traffic;
  int classes = tr.num_classes();
  std::vector<std::array<bool, 3>> set(classes, {false, false, false});
  tr.demand.assign(classes, {DemandRule{}, DemandRule{}, DemandRule{}});

  if (b.demand_lines.empty()) {
    // Documented default: unit demand everywhere.
    for (auto& per_class : tr.demand)
      per_class.fill(DemandRule{1, 1, 1});
    return;
  }

  for (const DemandLine& dl : b.demand_lines) {
    std::vector<int> class_ids;
    if (dl.class_field == "*") {
      for (int k = 0; k < classes; ++k) class_ids.push_back(k);
    } else {
      double v;
      if (!parse_number(dl.class_field, v) || v != std::floor(v) || v < 0 ||
          v >= classes) {
        b.error(dl.location, "traffic.demand: class '" + dl.class_field +
                                 "' out of range [0, " + std::to_string(classes - 1) + "]");
        continue;
      }
      class_ids.push_back(static_cast<int>(v));
    }
    std::vector<int> snr_ids;
    if (dl.snr_field == "*") {
      snr_ids = {0, 1, 2};
    } else if (auto s = snr_class_from_string(dl.snr_field)) {
      snr_ids.push_back(static_cast<int>(*s));
    } else {
      b.error(dl.location,
              "traffic.demand: snr '" + dl.snr_field + "' must be good/moderate/bad or *");
      continue;
    }
    DemandRule rule;
    rule.theta = static_cast<int>(dl.nums[0]);
    if (dl.nums.size() == 3) {
      rule.theta_min = static_cast<int>(dl.nums[1]);
      rule.theta_max = static_cast<int>(dl.nums[2]);
    } else {
      rule.theta_min = rule.theta_max = rule.theta;
    }
    for (int k : class_ids)
      for (int s : snr_ids) {
        tr.demand[k][s] = rule;
        set[k][s] = true;
      }
  }

  for (int k = 0; k < classes; ++k)
    for (int s = 0; s < 3; ++s)
      if (!set[k][s])
        b.errors.push_back("traffic.demand: no rule covers class " + std::to_string(k) +
                           ", snr " + to_string(static_cast<SnrClass>(s)));
}

void finish(Builder& b) {
  resolve_demand(b);
  if (!b.errors.empty()) throw ScenarioError(std::move(b.errors));
  validate_scenario(b.sc);
}

// ---------------------------------------------------------------------------
// Text and JSON front ends
// ---------------------------------------------------------------------------

Scenario parse_text(const std::string& text) {
  Builder b;
  std::istringstream in(text);
  std::string line;
  std::string block;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string loc = "line " + std::to_string(lineno);
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        b.error(loc, "malformed block header '" + line + "'");
        continue;
      }
      block = trim(line.substr(1, line.size() - 2));
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      b.error(loc, "expected 'key = value', got '" + line + "'");
      continue;
    }
    if (block.empty()) {
      b.error(loc, "key outside any [block]");
      continue;
    }
    KvItem item{block, trim(line.substr(0, eq)), trim(line.substr(eq + 1)), loc};
    apply_item(b, item);
  }
  finish(b);
  return b.sc;
}

std::string json_value_to_text(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_array()) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) out += ", ";
      out += json_value_to_text(v[i]);
    }
    return out;
  }
  std::ostringstream os;
  os.precision(17);
  os << v.get<double>();
  return os.str();
}

Scenario parse_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ScenarioError({std::string("invalid JSON: ") + e.what()});
  }
  Builder b;
  for (const auto& [block, body] : j.items()) {
    if (!body.is_object()) {
      b.error(block, "block must be an object");
      continue;
    }
    for (const auto& [key, value] : body.items()) {
      std::string loc = block + "." + key;
      // Arrays of arrays become one repeated key per row (amc_mode, demand).
      if (value.is_array() && !value.empty() && value.front().is_array()) {
        for (const auto& row : value)
          apply_item(b, {block, key, json_value_to_text(row), loc});
      } else {
        apply_item(b, {block, key, json_value_to_text(value), loc});
      }
    }
  }
  finish(b);
  return b.sc;
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    if (c == '{') return parse_json(text);
    break;
  }
  return parse_text(text);
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError({"cannot open scenario file '" + path + "'"});
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

// ---------------------------------------------------------------------------
// Cross-field validation
// ---------------------------------------------------------------------------

void validate_scenario(const Scenario& sc) {
  std::vector<std::string> errors;
  auto check = [&](bool ok, const std::string& msg) {
    if (!ok) errors.push_back(msg);
  };

  const SpectrumConfig& sp = sc.spectrum;
  check(sp.channels >= 1, "spectrum.channels: must be >= 1");
  check(sp.frame.message_bits > 0, "spectrum.message_bits: must be > 0");
  check(sp.frame.channel_constant > 0, "spectrum.channel_constant: must be > 0");
  check(sp.frame.symbol_rate > 0, "spectrum.symbol_rate: must be > 0");
  try {
    validate_amc_table(sp.amc_table);
  } catch (const std::exception& e) {
    errors.push_back(std::string("spectrum.amc_mode: ") + e.what());
  }
  for (const char* key : {"pu_off_to_on", "pu_on_to_off"}) {
    const auto& v = std::string(key) == "pu_off_to_on" ? sp.pu_off_to_on : sp.pu_on_to_off;
    if (!v.empty())
      check(v.size() == 1 || static_cast<int>(v.size()) == sp.channels,
            std::string("spectrum.") + key + ": needs 1 or M=" +
                std::to_string(sp.channels) + " values");
    for (double p : v)
      check(p >= 0.0 && p <= 1.0,
            std::string("spectrum.") + key + ": value " + std::to_string(p) +
                " out of range [0, 1]");
  }
  if (!sp.pu_off_to_on.empty() && !sp.pu_on_to_off.empty() && sp.channels >= 1) {
    for (int i = 0; i < sp.channels; ++i) {
      double a = sp.pu_off_to_on[sp.pu_off_to_on.size() == 1 ? 0 : i];
      double c = sp.pu_on_to_off[sp.pu_on_to_off.size() == 1 ? 0 : i];
      check(a + c > 0.0, "spectrum channel " + std::to_string(i) +
                             ": frozen chain, A_i + C_i must be > 0");
    }
  }

  const TrafficConfig& tr = sc.traffic;
  check(tr.pu_arrival_rate >= 0, "traffic.pu_arrival_rate: must be >= 0");
  check(tr.pu_service_rate > 0, "traffic.pu_service_rate: must be > 0");
  check(!tr.su_arrival_rate.empty(), "traffic.su_arrival_rate: need at least one class");
  check(tr.su_service_rate.size() == tr.su_arrival_rate.size(),
        "traffic.su_service_rate: must list one rate per class");
  for (double l : tr.su_arrival_rate)
    check(l >= 0, "traffic.su_arrival_rate: rates must be >= 0");
  for (double m : tr.su_service_rate)
    check(m > 0, "traffic.su_service_rate: rates must be > 0");
  try {
    validate_snr_matrix(tr.snr_matrix);
  } catch (const std::exception& e) {
    errors.push_back(std::string("traffic.snr_matrix: ") + e.what());
  }
  double init_sum = tr.snr_initial[0] + tr.snr_initial[1] + tr.snr_initial[2];
  check(std::abs(init_sum - 1.0) <= 1e-9 && tr.snr_initial[0] >= 0 &&
            tr.snr_initial[1] >= 0 && tr.snr_initial[2] >= 0,
        "traffic.snr_initial: must be a distribution over 3 classes");
  check(tr.snr_rate >= 0, "traffic.snr_rate: must be >= 0");

  int total_slots = 0;
  bool frame_ok = sp.channels >= 1 && sp.frame.message_bits > 0 &&
                  sp.frame.channel_constant > 0 && sp.frame.symbol_rate > 0 &&
                  !sp.amc_table.empty();
  if (frame_ok) total_slots = sp.channels * sp.slots();
  check(static_cast<int>(tr.demand.size()) == tr.num_classes(),
        "traffic.demand: need one rule set per class");
  if (static_cast<int>(tr.demand.size()) == tr.num_classes()) {
    for (int k = 0; k < tr.num_classes(); ++k) {
      for (int s = 0; s < 3; ++s) {
        const DemandRule& d = tr.demand[k][s];
        std::string tag = "traffic.demand[class " + std::to_string(k) + ", " +
                          to_string(static_cast<SnrClass>(s)) + "]";
        check(d.theta >= 1, tag + ": theta must be >= 1");
        check(d.theta_min >= 1, tag + ": theta_min must be >= 1");
        check(d.theta_min <= d.theta_max,
              tag + ": theta_min must be <= theta_max");
        if (frame_ok) {
          check(d.theta <= total_slots, tag + ": theta exceeds M*S = " +
                                            std::to_string(total_slots));
          check(d.theta_max <= total_slots, tag + ": theta_max exceeds M*S = " +
                                                std::to_string(total_slots));
        }
      }
    }
  }

  const PolicySettings& po = sc.policy;
  check(po.queue1_capacity >= 0, "policy.queue1_capacity: must be >= 0");
  check(po.queue2_capacity >= 0, "policy.queue2_capacity: must be >= 0");
  check(po.deadline > 0, "policy.deadline: must be > 0 (inf disables expiry)");

  const SimConfig& sim = sc.sim;
  check(sim.horizon >= 0, "sim.horizon: must be >= 0");
  check(sim.warmup >= 0 && sim.warmup <= sim.horizon,
        "sim.warmup: must lie in [0, horizon]");
  check(sim.replications >= 1, "sim.replications: must be >= 1");

  if (!errors.empty()) throw ScenarioError(std::move(errors));
}

// ---------------------------------------------------------------------------
// Sweep parameter paths
// ---------------------------------------------------------------------------

const std::vector<std::string>& sweepable_params() {
  static const std::vector<std::string> paths = {
      "traffic.pu_arrival_rate",  "traffic.pu_service_rate",
      "traffic.su_arrival_rate",  "traffic.su_arrival_rate.<class>",
      "traffic.su_service_rate",  "traffic.su_service_rate.<class>",
      "policy.queue_capacity",    "policy.queue1_capacity",
      "policy.queue2_capacity",   "policy.deadline",
      "sim.horizon",              "sim.warmup",
  };
  return paths;
}

namespace {

int require_index(const std::string& path, const std::string& suffix, std::size_t n) {
  std::size_t idx = 0;
  try {
    std::size_t pos = 0;
    idx = std::stoul(suffix, &pos);
    if (pos != suffix.size()) throw std::invalid_argument("");
  } catch (...) {
    throw std::invalid_argument("sweep path '" + path + "': bad class index '" +
                                suffix + "'");
  }
  if (idx >= n)
    throw std::invalid_argument("sweep path '" + path + "': class index out of range");
  return static_cast<int>(idx);
}

int require_count(const std::string& path, double value) {
  if (value < 0 || value != std::floor(value))
    throw std::invalid_argument("sweep path '" + path +
                                "': value must be a nonnegative integer");
  return static_cast<int>(value);
}

}  // namespace

void apply_param(Scenario& sc, const std::string& path, double value) {
  auto starts_with = [&](const std::string& prefix) {
    return path.rfind(prefix, 0) == 0;
  };
  if (path == "traffic.pu_arrival_rate") {
    sc.traffic.pu_arrival_rate = value;
  } else if (path == "traffic.pu_service_rate") {
    sc.traffic.pu_service_rate = value;
  } else if (path == "traffic.su_arrival_rate") {
    std::fill(sc.traffic.su_arrival_rate.begin(), sc.traffic.su_arrival_rate.end(), value);
  } else if (starts_with("traffic.su_arrival_rate.")) {
    int k = require_index(path, path.substr(std::string("traffic.su_arrival_rate.").size()),
                          sc.traffic.su_arrival_rate.size());
    sc.traffic.su_arrival_rate[k] = value;
  } else if (path == "traffic.su_service_rate") {
    std::fill(sc.traffic.su_service_rate.begin(), sc.traffic.su_service_rate.end(), value);
  } else if (starts_with("traffic.su_service_rate.")) {
    int k = require_index(path, path.substr(std::string("traffic.su_service_rate.").size()),
                          sc.traffic.su_service_rate.size());
    sc.traffic.su_service_rate[k] = value;
  } else if (path == "policy.queue_capacity") {
    sc.policy.queue1_capacity = sc.policy.queue2_capacity = require_count(path, value);
  } else if (path == "policy.queue1_capacity") {
    sc.policy.queue1_capacity = require_count(path, value);
  } else if (path == "policy.queue2_capacity") {
    sc.policy.queue2_capacity = require_count(path, value);
  } else if (path == "policy.deadline") {
    sc.policy.deadline = value;
  } else if (path == "sim.horizon") {
    sc.sim.horizon = value;
  } else if (path == "sim.warmup") {
    sc.sim.warmup = value;
  } else {
    std::string msg = "unknown sweep path '" + path + "'; supported:";
    for (const auto& p : sweepable_params()) msg += " " + p;
    throw std::invalid_argument(msg);
  }
  validate_scenario(sc);
}

}  // namespace casim
