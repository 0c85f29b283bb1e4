#include "qtomo/measurement.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "qtomo/errors.hpp"
#include "qtomo/parallel.hpp"

namespace qtomo {

Dataset::Dataset(int n, std::int64_t m, std::vector<std::int64_t> counts)
    : n_(n), m_(m), counts_(std::move(counts)) {
  if (n < 1 || n > 10) throw DomainError("qubit count out of range");
  if (m < 1) throw DomainError("shots per setting must be at least 1");
  const auto d = outcome_count(n);
  if (counts_.size() != setting_count(n) * d)
    throw DimensionError("dataset for n=" + std::to_string(n) + " needs " +
                         std::to_string(setting_count(n) * d) + " counts");
  for (std::size_t a = 0; a < setting_count(n); ++a) {
    std::int64_t sum = 0;
    for (std::size_t s = 0; s < d; ++s) {
      const auto c = counts_[a * d + s];
      if (c < 0) throw DomainError("negative count in setting " + Setting::from_index(n, a).str());
      sum += c;
    }
    if (sum != m)
      throw DomainError("setting " + Setting::from_index(n, a).str() + " has " + std::to_string(sum) +
                        " shots, expected m=" + std::to_string(m));
  }
}

std::int64_t Dataset::count(const Setting& a, const Outcome& s) const {
  if (a.qubits() != n_ || s.qubits() != n_) throw DimensionError("setting/outcome length differs from dataset");
  return count(a.index(), s.index());
}

std::vector<std::int64_t> sample_multinomial(std::int64_t m, std::span<const double> p, Rng& rng) {
  std::vector<std::int64_t> out(p.size(), 0);
  std::int64_t left = m;
  double mass = 1.0;
  for (std::size_t k = 0; k + 1 < p.size() && left > 0; ++k) {
    const double pk = std::clamp(p[k], 0.0, 1.0);
    const double q = mass > 0.0 ? std::clamp(pk / mass, 0.0, 1.0) : 0.0;
    std::binomial_distribution<std::int64_t> binom(left, q);
    out[k] = binom(rng);
    left -= out[k];
    mass -= pk;
  }
  if (!p.empty()) out.back() += left;
  return out;
}

namespace {

void simulate_setting(const ProbabilityTable& probs, std::int64_t m, std::uint64_t seed, std::size_t a,
                      std::vector<std::int64_t>& counts) {
  Rng rng = make_rng(seed, {a});
  const auto row = probs.row(a);
  const auto drawn = sample_multinomial(m, row, rng);
  std::copy(drawn.begin(), drawn.end(), counts.begin() + static_cast<std::ptrdiff_t>(a * row.size()));
}

}  // namespace

Dataset simulate_dataset(const DensityMatrix& rho, std::int64_t m, std::uint64_t seed) {
  if (m < 1) throw DomainError("shots per setting must be at least 1");
  const ProbabilityTable probs = forward_probabilities(rho);
  std::vector<std::int64_t> counts(probs.size());
  const auto settings = static_cast<std::int64_t>(probs.settings());
  QTOMO_OMP_PRAGMA("omp parallel for schedule(static)")
  for (std::int64_t a = 0; a < settings; ++a)
    simulate_setting(probs, m, seed, static_cast<std::size_t>(a), counts);
  return Dataset(rho.qubits(), m, std::move(counts));
}

namespace serial {

Dataset simulate_dataset(const DensityMatrix& rho, std::int64_t m, std::uint64_t seed) {
  if (m < 1) throw DomainError("shots per setting must be at least 1");
  const ProbabilityTable probs = qtomo::forward_probabilities(rho);
  std::vector<std::int64_t> counts(probs.size());
  for (std::size_t a = 0; a < probs.settings(); ++a) simulate_setting(probs, m, seed, a, counts);
  return Dataset(rho.qubits(), m, std::move(counts));
}

}  // namespace serial

ProbabilityTable empirical_frequencies(const Dataset& data) {
  ProbabilityTable table(data.qubits());
  const double inv_m = 1.0 / static_cast<double>(data.shots_per_setting());
  const auto& counts = data.counts();
  auto values = table.values();
  for (std::size_t i = 0; i < counts.size(); ++i) values[i] = static_cast<double>(counts[i]) * inv_m;
  return table;
}

void write_dataset(std::ostream& os, const Dataset& data) {
  const int n = data.qubits();
  os << "# n=" << n << " m=" << data.shots_per_setting() << '\n';
  os << "setting,outcome,count\n";
  for (std::size_t a = 0; a < setting_count(n); ++a) {
    const std::string sa = Setting::from_index(n, a).str();
    for (std::size_t s = 0; s < outcome_count(n); ++s)
      os << sa << ',' << Outcome::from_index(n, s).str() << ',' << data.count(a, s) << '\n';
  }
}

namespace {

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::int64_t parse_int(const std::string& text, std::size_t line, const char* what) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(text, &pos);
    if (pos != text.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ParseError(line, std::string("bad ") + what + " '" + text + "'");
  }
}

}  // namespace

Dataset read_dataset(std::istream& is) {
  std::string raw;
  std::size_t line = 0;
  int n = -1;
  std::int64_t m = -1;

  // Metadata line.
  while (std::getline(is, raw)) {
    ++line;
    const std::string t = trim(raw);
    if (t.empty()) continue;
    if (t.rfind('#', 0) != 0) throw ParseError(line, "expected metadata line '# n=<int> m=<int>'");
    std::istringstream meta(t.substr(1));
    std::string tok;
    while (meta >> tok) {
      if (tok.rfind("n=", 0) == 0) n = static_cast<int>(parse_int(tok.substr(2), line, "n"));
      else if (tok.rfind("m=", 0) == 0) m = parse_int(tok.substr(2), line, "m");
      else throw ParseError(line, "unknown metadata token '" + tok + "'");
    }
    break;
  }
  if (n < 0 || m < 0) throw ParseError(line, "missing n or m in metadata line");
  if (n < 1 || n > 10) throw ParseError(line, "n out of range");
  if (m < 1) throw ParseError(line, "m must be at least 1");

  bool header = false;
  while (!header && std::getline(is, raw)) {
    ++line;
    const std::string t = trim(raw);
    if (t.empty() || t[0] == '#') continue;
    if (t != "setting,outcome,count") throw ParseError(line, "expected header 'setting,outcome,count'");
    header = true;
  }
  if (!header) throw ParseError(line, "missing header 'setting,outcome,count'");

  const auto d = outcome_count(n);
  std::vector<std::int64_t> counts(setting_count(n) * d, 0);
  std::vector<char> seen(counts.size(), 0);
  std::vector<char> setting_seen(setting_count(n), 0);

  while (std::getline(is, raw)) {
    ++line;
    const std::string t = trim(raw);
    if (t.empty() || t[0] == '#') continue;
    std::vector<std::string> fields;
    std::istringstream row(t);
    std::string f;
    while (std::getline(row, f, ',')) fields.push_back(trim(f));
    if (fields.size() != 3) throw ParseError(line, "expected 3 fields, got " + std::to_string(fields.size()));
    Setting a;
    Outcome s;
    try {
      a = Setting::parse(fields[0]);
      s = Outcome::parse(fields[1]);
    } catch (const DomainError& e) {
      throw ParseError(line, e.what());
    }
    if (a.qubits() != n || s.qubits() != n)
      throw ParseError(line, "setting/outcome length differs from n=" + std::to_string(n));
    const auto c = parse_int(fields[2], line, "count");
    if (c < 0) throw ParseError(line, "negative count");
    const auto idx = a.index() * d + s.index();
    if (seen[idx]) throw ParseError(line, "duplicate row for " + fields[0] + "," + fields[1]);
    seen[idx] = 1;
    setting_seen[a.index()] = 1;
    counts[idx] = c;
  }

  for (std::size_t a = 0; a < setting_seen.size(); ++a)
    if (!setting_seen[a]) throw ParseError(line, "missing setting " + Setting::from_index(n, a).str());
  for (std::size_t a = 0; a < setting_seen.size(); ++a) {
    std::int64_t sum = 0;
    for (std::size_t s = 0; s < d; ++s) sum += counts[a * d + s];
    if (sum != m)
      throw ParseError(line, "setting " + Setting::from_index(n, a).str() + " counts sum to " +
                                 std::to_string(sum) + ", expected m=" + std::to_string(m));
  }
  return Dataset(n, m, std::move(counts));
}

void save_dataset(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  write_dataset(os, data);
  if (!os) throw Error("write to " + path.string() + " failed");
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path.string());
  return read_dataset(is);
}

}  // namespace qtomo
