#include "qtomo/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "qtomo/errors.hpp"
#include "qtomo/measurement.hpp"
#include "qtomo/parallel.hpp"

namespace qtomo {

// Stream tags for make_rng.
namespace {
constexpr std::uint64_t kTruthStream = 1;
constexpr std::uint64_t kDataStream = 2;
constexpr std::uint64_t kProbStream = 3;
constexpr std::uint64_t kDensStream = 4;
}  // namespace

std::string to_string(EstimatorKind k) {
  switch (k) {
    case EstimatorKind::Inversion: return "inversion";
    case EstimatorKind::Thresholding: return "thresholding";
    case EstimatorKind::Prob: return "prob";
    case EstimatorKind::Dens: return "dens";
  }
  return "?";
}

EstimatorKind parse_estimator(std::string_view s) {
  if (s == "inversion") return EstimatorKind::Inversion;
  if (s == "thresholding") return EstimatorKind::Thresholding;
  if (s == "prob") return EstimatorKind::Prob;
  if (s == "dens") return EstimatorKind::Dens;
  throw DomainError("unknown estimator '" + std::string(s) + "' (expected inversion, thresholding, prob, dens)");
}

std::string to_string(MseScale s) { return s == MseScale::Frobenius ? "frobenius" : "entrywise"; }

MseScale parse_mse_scale(std::string_view s) {
  if (s == "frobenius") return MseScale::Frobenius;
  if (s == "entrywise") return MseScale::Entrywise;
  throw DomainError("unknown mse_scale '" + std::string(s) + "' (expected frobenius or entrywise)");
}

std::string LambdaChoice::str() const {
  if (!value) return to_string(rule);
  std::ostringstream os;
  os.precision(17);
  os << *value;
  return os.str();
}

LambdaChoice LambdaChoice::parse(std::string_view s) {
  if (s == "m2" || s == "N4" || s == "theory") return {parse_lambda_rule(s), std::nullopt};
  try {
    std::size_t pos = 0;
    const std::string text(s);
    const double v = std::stod(text, &pos);
    if (pos != text.size() || !(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("bad");
    return {LambdaRule::HalfM, v};
  } catch (const std::exception&) {
    throw DomainError("bad lambda '" + std::string(s) + "' (expected m2, N4, theory or a number >= 0)");
  }
}

ExperimentConfig::ExperimentConfig() {
  for (auto kind : {ScenarioKind::Pure, ScenarioKind::Rank2, ScenarioKind::ApproxRank2,
                    ScenarioKind::MaximallyMixed})
    scenarios.push_back(StateScenario{kind, 0.98});
}

void ExperimentConfig::validate() const {
  if (n < 1 || n > 6) throw DomainError("n must be between 1 and 6");
  if (m_values.empty()) throw DomainError("m_values is empty");
  for (auto m : m_values)
    if (m < 1) throw DomainError("every m must be positive");
  if (scenarios.empty()) throw DomainError("scenarios is empty");
  if (estimators.empty()) throw DomainError("estimators is empty");
  if (replications < 1) throw DomainError("replications must be at least 1");
  if (!(alpha > 0.0)) throw DomainError("alpha must be positive");
  if (!(mixing_weight >= 0.0 && mixing_weight <= 1.0)) throw DomainError("mixing_weight must lie in [0, 1]");
  if (tau && !(*tau >= 0.0)) throw DomainError("tau must be non-negative");
  sampler(1.0, 0).validate();
}

SamplerConfig ExperimentConfig::sampler(double lambda, std::uint64_t chain_seed) const {
  SamplerConfig sc;
  sc.lambda = lambda;
  sc.iterations = iterations;
  sc.burn_in = burn_in;
  sc.thinning = thinning;
  sc.seed = chain_seed;
  sc.proposal_halfwidth = proposal_halfwidth;
  return sc;
}

// --- Config file ----------------------------------------------------------------

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string item;
  while (std::getline(is, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename T>
T parse_number(const std::string& text) {
  std::size_t pos = 0;
  T v{};
  if constexpr (std::is_floating_point_v<T>) v = static_cast<T>(std::stod(text, &pos));
  else if constexpr (std::is_unsigned_v<T>) v = static_cast<T>(std::stoull(text, &pos));
  else v = static_cast<T>(std::stoll(text, &pos));
  if (pos != text.size()) throw std::invalid_argument("trailing characters");
  return v;
}

bool parse_bool(const std::string& text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw std::invalid_argument("not a boolean");
}

void set_key(ExperimentConfig& c, const std::string& key, const std::string& value) {
  if (key == "n") c.n = parse_number<int>(value);
  else if (key == "m_values") {
    c.m_values.clear();
    for (const auto& item : split_list(value)) c.m_values.push_back(parse_number<std::int64_t>(item));
  } else if (key == "scenarios") {
    c.scenarios.clear();
    for (const auto& item : split_list(value)) c.scenarios.push_back(StateScenario::parse(item));
  } else if (key == "estimators") {
    c.estimators.clear();
    for (const auto& item : split_list(value)) c.estimators.push_back(parse_estimator(item));
  } else if (key == "replications") c.replications = parse_number<int>(value);
  else if (key == "seed") c.seed = parse_number<std::uint64_t>(value);
  else if (key == "iterations") c.iterations = parse_number<std::int64_t>(value);
  else if (key == "burn_in") c.burn_in = parse_number<std::int64_t>(value);
  else if (key == "thinning") c.thinning = parse_number<std::int64_t>(value);
  else if (key == "alpha") c.alpha = parse_number<double>(value);
  else if (key == "proposal_halfwidth") c.proposal_halfwidth = parse_number<double>(value);
  else if (key == "lambda_prob") c.lambda_prob = LambdaChoice::parse(value);
  else if (key == "lambda_dens") c.lambda_dens = LambdaChoice::parse(value);
  else if (key == "tau") {
    if (value == "auto") c.tau.reset();
    else c.tau = parse_number<double>(value);
  } else if (key == "mixing_weight") c.mixing_weight = parse_number<double>(value);
  else if (key == "fixed_state") c.fixed_state = parse_bool(value);
  else if (key == "mse_scale") c.mse_scale = parse_mse_scale(value);
  else if (key == "record_timing") c.record_timing = parse_bool(value);
  else if (key == "threads") c.threads = parse_number<int>(value);
  else throw DomainError("unknown key '" + key + "'");
}

}  // namespace

ExperimentConfig parse_config(std::istream& is) {
  ExperimentConfig c;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(is, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string t = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ParseError(line, "expected 'key = value'");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (value.empty()) throw ParseError(line, "empty value for '" + key + "'");
    try {
      set_key(c, key, value);
    } catch (const DomainError& e) {
      throw ParseError(line, e.what());
    } catch (const std::exception&) {
      throw ParseError(line, "bad value '" + value + "' for '" + key + "'");
    }
  }
  for (auto& sc : c.scenarios) sc.mixing_weight = c.mixing_weight;
  try {
    c.validate();
  } catch (const DomainError& e) {
    throw ParseError(0, std::string("invalid config: ") + e.what());
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open config " + path.string());
  return parse_config(is);
}

void apply_env_overrides(ExperimentConfig& config) {
  if (const char* env = std::getenv("QTOMO_SEED"); env && *env) {
    try {
      config.seed = parse_number<std::uint64_t>(env);
    } catch (const std::exception&) {
      throw ParseError(0, std::string("QTOMO_SEED is not an unsigned integer: ") + env);
    }
  }
}

// --- Replicates ------------------------------------------------------------------

namespace {

struct Task {
  std::size_t scenario;
  std::size_t m_index;
  int replicate;
};

std::vector<Task> make_tasks(const ExperimentConfig& c) {
  std::vector<Task> tasks;
  for (std::size_t s = 0; s < c.scenarios.size(); ++s)
    for (std::size_t k = 0; k < c.m_values.size(); ++k)
      for (int r = 0; r < c.replications; ++r) tasks.push_back({s, k, r});
  return tasks;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag, const Task& t) {
  Rng rng = make_rng(seed, {tag, t.scenario, t.m_index, static_cast<std::uint64_t>(t.replicate)});
  return rng();
}

ReplicateRecord score(const Task& t, EstimatorKind kind, const Matrix& estimate, const DensityMatrix& truth,
                      double seconds) {
  ReplicateRecord rec;
  rec.scenario = t.scenario;
  rec.m_index = t.m_index;
  rec.replicate = t.replicate;
  rec.estimator = kind;
  rec.mse = mse(estimate, truth.matrix());
  rec.eigenvalues = sorted_eigenvalues(estimate);
  rec.min_eigenvalue = rec.eigenvalues.back();
  try {
    validate_density(estimate);
    rec.physical = true;
  } catch (const ValidationError&) {
    rec.physical = false;
  }
  rec.wall_time_s = seconds;
  return rec;
}

// Runs one estimator; returns the estimate as a raw matrix.
Matrix run_estimator(const ExperimentConfig& c, EstimatorKind kind, const ProbabilityTable& freqs,
                     std::int64_t m, const Task& t) {
  switch (kind) {
    case EstimatorKind::Inversion:
      return inversion_estimator(freqs);
    case EstimatorKind::Thresholding:
      return thresholding_estimator(freqs, c.tau ? *c.tau : default_threshold(c.n, m)).matrix();
    case EstimatorKind::Prob:
    case EstimatorKind::Dens: {
      const bool prob = kind == EstimatorKind::Prob;
      const LossKind loss = prob ? LossKind::prob(freqs) : LossKind::dens(freqs);
      const double lambda = (prob ? c.lambda_prob : c.lambda_dens).resolve(c.n, m);
      const auto seed = derive_seed(c.seed, prob ? kProbStream : kDensStream, t);
      const auto d = static_cast<Eigen::Index>(ipow(2, c.n));
      return run_chain(loss, c.sampler(lambda, seed), PriorParams::symmetric(d, c.alpha)).estimate.matrix();
    }
  }
  throw DomainError("unknown estimator");
}

DensityMatrix truth_for(const ExperimentConfig& c, const Task& t) {
  Rng rng = make_rng(c.seed, {kTruthStream, t.scenario,
                              c.fixed_state ? 0u : static_cast<std::uint64_t>(t.replicate)});
  return generate_state(c.scenarios[t.scenario], c.n, rng);
}

void run_task(const ExperimentConfig& c, const Task& t, ReplicateRecord* out) {
  using clock = std::chrono::steady_clock;
  const std::int64_t m = c.m_values[t.m_index];
  const DensityMatrix truth = truth_for(c, t);
  const Dataset data = simulate_dataset(truth, m, derive_seed(c.seed, kDataStream, t));
  const ProbabilityTable freqs = empirical_frequencies(data);
  for (std::size_t e = 0; e < c.estimators.size(); ++e) {
    const auto start = clock::now();
    const Matrix est = run_estimator(c, c.estimators[e], freqs, m, t);
    const double seconds =
        c.record_timing ? std::chrono::duration<double>(clock::now() - start).count() : 0.0;
    out[e] = score(t, c.estimators[e], est, truth, seconds);
  }
}

std::string where(const ExperimentConfig& c, const Task& t) {
  return "scenario=" + c.scenarios[t.scenario].name() + " m=" + std::to_string(c.m_values[t.m_index]) +
         " replicate=" + std::to_string(t.replicate);
}

}  // namespace

std::vector<ReplicateRecord> run_replicates(const ExperimentConfig& config) {
  config.validate();
  if (config.threads > 0) set_threads(config.threads);
  const auto tasks = make_tasks(config);
  const std::size_t per_task = config.estimators.size();
  std::vector<ReplicateRecord> records(tasks.size() * per_task);
  std::vector<std::string> errors(tasks.size());
  const auto count = static_cast<std::int64_t>(tasks.size());

  QTOMO_OMP_PRAGMA("omp parallel for schedule(dynamic, 1)")
  for (std::int64_t i = 0; i < count; ++i) {
    try {
      run_task(config, tasks[i], records.data() + i * per_task);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  for (std::size_t i = 0; i < tasks.size(); ++i)
    if (!errors[i].empty()) throw NumericalError(where(config, tasks[i]) + ": " + errors[i]);
  return records;
}

namespace serial {

std::vector<ReplicateRecord> run_replicates(const ExperimentConfig& config) {
  config.validate();
  const auto tasks = make_tasks(config);
  const std::size_t per_task = config.estimators.size();
  std::vector<ReplicateRecord> records(tasks.size() * per_task);
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    try {
      run_task(config, tasks[i], records.data() + i * per_task);
    } catch (const std::exception& e) {
      throw NumericalError(where(config, tasks[i]) + ": " + e.what());
    }
  }
  return records;
}

}  // namespace serial

std::vector<ResultRow> aggregate(const ExperimentConfig& config, const std::vector<ReplicateRecord>& records) {
  const double d = static_cast<double>(ipow(2, config.n));
  const double scale = config.mse_scale == MseScale::Entrywise ? 1.0 / (d * d) : 1.0;
  std::vector<ResultRow> rows;
  for (std::size_t s = 0; s < config.scenarios.size(); ++s)
    for (auto kind : config.estimators)
      for (std::size_t k = 0; k < config.m_values.size(); ++k) {
        std::vector<double> values;
        double time = 0.0;
        for (const auto& r : records)
          if (r.scenario == s && r.m_index == k && r.estimator == kind) {
            values.push_back(r.mse * scale);
            time += r.wall_time_s;
          }
        if (values.empty()) continue;
        double mean = 0.0;
        for (double v : values) mean += v;
        mean /= static_cast<double>(values.size());
        double var = 0.0;
        for (double v : values) var += (v - mean) * (v - mean);
        var /= static_cast<double>(values.size());
        rows.push_back({config.scenarios[s].name(), to_string(kind), config.n, config.m_values[k], mean,
                        std::sqrt(var), time / static_cast<double>(values.size()), config.seed});
      }
  return rows;
}

std::vector<ResultRow> run_benchmark(const ExperimentConfig& config) {
  return aggregate(config, run_replicates(config));
}

void write_results_csv(std::ostream& os, const std::vector<ResultRow>& rows) {
  os << "scenario,estimator,n,m,mse_mean,mse_std,wall_time_s,seed\n";
  char buf[512];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%s,%d,%lld,%.9e,%.9e,%.6f,%llu\n", r.scenario.c_str(),
                  r.estimator.c_str(), r.n, static_cast<long long>(r.m), r.mse_mean, r.mse_std, r.wall_time_s,
                  static_cast<unsigned long long>(r.seed));
    os << buf;
  }
}

std::vector<EigenvalueColumn> eigenvalue_report(const ExperimentConfig& config) {
  config.validate();
  const StateScenario scenario{ScenarioKind::ApproxRank2, config.mixing_weight};
  ExperimentConfig c = config;
  c.scenarios = {scenario};
  const Task t{0, 0, 0};
  const std::int64_t m = c.m_values.front();
  const DensityMatrix truth = truth_for(c, t);
  const Dataset data = simulate_dataset(truth, m, derive_seed(c.seed, kDataStream, t));
  const ProbabilityTable freqs = empirical_frequencies(data);

  std::vector<EigenvalueColumn> cols;
  cols.push_back({"truth", scenario_eigenvalues(scenario, c.n)});
  for (auto kind : c.estimators)
    cols.push_back({to_string(kind), sorted_eigenvalues(run_estimator(c, kind, freqs, m, t))});
  return cols;
}

void write_eigenvalues_csv(std::ostream& os, const std::vector<EigenvalueColumn>& columns) {
  os << "source,rank_index,eigenvalue\n";
  char buf[256];
  for (const auto& col : columns)
    for (std::size_t i = 0; i < col.eigenvalues.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%s,%zu,%.12e\n", col.source.c_str(), i + 1, col.eigenvalues[i]);
      os << buf;
    }
}

}  // namespace qtomo
