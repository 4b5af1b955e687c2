#include "bvvi/model.hpp"
#include "bvvi/history_table.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace bvvi {

CapExceeded::CapExceeded(const std::string& what, std::uint64_t count, std::uint64_t cap)
    : Error(what + ": " + (count == std::numeric_limits<std::uint64_t>::max() ? std::string(">= 2^64")
                                                                               : std::to_string(count)) +
            " exceeds cap " + std::to_string(cap)),
      count_(count),
      cap_(cap) {}

std::uint64_t saturating_pow(std::uint64_t base, std::uint64_t exp) {
  std::uint64_t out = 1;
  for (std::uint64_t i = 0; i < exp; ++i) {
    if (base != 0 && out > std::numeric_limits<std::uint64_t>::max() / base) {
      return std::numeric_limits<std::uint64_t>::max();
    }
    out *= base;
  }
  return out;
}

void require_within_cap(const std::string& what, std::uint64_t count, std::uint64_t cap) {
  if (count > cap) throw CapExceeded(what, count, cap);
}

// ---------------------------------------------------------------------------
// CounterRng

namespace {
constexpr std::uint64_t kPhi = 0x9E3779B97F4A7C15ull;
}

std::uint64_t CounterRng::mix(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept
    : key_(mix(seed ^ mix(stream + kPhi))) {}

std::uint64_t CounterRng::next_u64() noexcept {
  ++counter_;
  return mix(key_ + counter_ * kPhi);
}

double CounterRng::uniform() noexcept {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

int CounterRng::categorical(std::span<const double> probs) noexcept {
  const double u = uniform();
  double acc = 0.0;
  int last_positive = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    last_positive = static_cast<int>(i);
    acc += probs[i];
    if (u < acc) return last_positive;
  }
  return last_positive;
}

// ---------------------------------------------------------------------------
// TabularPomdp

TabularPomdp TabularPomdp::zeros(int S, int O, int A, int H) {
  if (S < 1 || O < 1 || A < 1 || H < 1) {
    throw std::invalid_argument("model dimensions must be positive");
  }
  TabularPomdp m;
  m.S = S;
  m.O = O;
  m.A = A;
  m.H = H;
  m.mu1.assign(S, 0.0);
  m.trans_table.assign(static_cast<std::size_t>(H) * A * S * S, 0.0);
  m.emit_table.assign(static_cast<std::size_t>(H) * S * O, 0.0);
  m.reward_table.assign(static_cast<std::size_t>(H) * S * A, 0.0);
  return m;
}

std::string ValidationReport::to_string() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < violations.size(); ++i) {
    if (i) os << "; ";
    os << violations[i];
  }
  return os.str();
}

namespace {

constexpr double kRowTolerance = 1e-12;

void check_distribution(const std::string& label, std::span<const double> row, ValidationReport& report) {
  double sum = 0.0;
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (!(row[i] >= 0.0) || !std::isfinite(row[i])) {
      std::ostringstream os;
      os << label << " entry " << i << " is negative or not finite (" << row[i] << ")";
      report.violations.push_back(os.str());
    }
    sum += row[i];
  }
  if (!(std::abs(sum - 1.0) <= kRowTolerance)) {
    std::ostringstream os;
    os.precision(17);
    os << label << " row sums " << sum;
    report.violations.push_back(os.str());
  }
}

}  // namespace

ValidationReport validate_model(const TabularPomdp& m) {
  ValidationReport report;
  if (m.S < 1 || m.O < 1 || m.A < 1 || m.H < 1) {
    report.violations.push_back("dimensions must be >= 1 (S=" + std::to_string(m.S) + ", O=" + std::to_string(m.O) +
                                ", A=" + std::to_string(m.A) + ", H=" + std::to_string(m.H) + ")");
    return report;
  }
  const auto S = static_cast<std::size_t>(m.S);
  const auto H = static_cast<std::size_t>(m.H);
  const auto A = static_cast<std::size_t>(m.A);
  const auto O = static_cast<std::size_t>(m.O);
  bool shapes_ok = true;
  auto shape = [&](const char* name, std::size_t got, std::size_t want) {
    if (got != want) {
      report.violations.push_back(std::string(name) + " has " + std::to_string(got) + " entries, expected " +
                                  std::to_string(want));
      shapes_ok = false;
    }
  };
  shape("mu1", m.mu1.size(), S);
  shape("trans", m.trans_table.size(), H * A * S * S);
  shape("emit", m.emit_table.size(), H * S * O);
  shape("reward", m.reward_table.size(), H * S * A);
  if (!shapes_ok) return report;

  check_distribution("mu1", m.mu1, report);
  for (int h = 1; h <= m.H; ++h) {
    for (int a = 0; a < m.A; ++a) {
      for (int s = 0; s < m.S; ++s) {
        check_distribution("trans[h=" + std::to_string(h) + "][a=" + std::to_string(a) + "][s=" + std::to_string(s) +
                               "]",
                           m.trans_row(h, a, s), report);
      }
    }
  }
  for (int step = 2; step <= m.H + 1; ++step) {
    for (int s = 0; s < m.S; ++s) {
      check_distribution("emit[step=" + std::to_string(step) + "][s=" + std::to_string(s) + "]", m.emit_row(step, s),
                         report);
    }
  }
  for (int h = 1; h <= m.H; ++h) {
    for (int s = 0; s < m.S; ++s) {
      for (int a = 0; a < m.A; ++a) {
        const double r = m.reward(h, s, a);
        if (!(r >= 0.0 && r <= 1.0)) {
          std::ostringstream os;
          os << "reward[h=" << h << "][s=" << s << "][a=" << a << "] = " << r << ": reward out of [0,1]";
          report.violations.push_back(os.str());
        }
      }
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Histories

History History::child(int action, int observation) const {
  History out = *this;
  out.actions.push_back(action);
  out.observations.push_back(observation);
  return out;
}

std::string History::key() const {
  std::string out = std::to_string(step()) + ":";
  for (std::size_t i = 0; i < actions.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(actions[i]);
    out += ',';
    out += std::to_string(observations[i]);
  }
  return out;
}

History History::from_key(const std::string& key) {
  const auto colon = key.find(':');
  if (colon == std::string::npos) throw ParseError("history key '" + key + "' has no ':'");
  int step = 0;
  try {
    step = std::stoi(key.substr(0, colon));
  } catch (const std::exception&) {
    throw ParseError("history key '" + key + "' has a malformed step");
  }
  std::vector<int> symbols;
  std::string rest = key.substr(colon + 1);
  std::size_t pos = 0;
  while (pos < rest.size()) {
    auto comma = rest.find(',', pos);
    if (comma == std::string::npos) comma = rest.size();
    try {
      symbols.push_back(std::stoi(rest.substr(pos, comma - pos)));
    } catch (const std::exception&) {
      throw ParseError("history key '" + key + "' has a malformed symbol");
    }
    pos = comma + 1;
  }
  if (symbols.size() != 2 * static_cast<std::size_t>(step - 1) || step < 1) {
    throw ParseError("history key '" + key + "' does not hold 2(h-1) symbols");
  }
  History f;
  for (std::size_t i = 0; i < symbols.size(); i += 2) {
    f.actions.push_back(symbols[i]);
    f.observations.push_back(symbols[i + 1]);
  }
  return f;
}

std::uint64_t history_count(int A, int O, int h) {
  return saturating_pow(static_cast<std::uint64_t>(A) * static_cast<std::uint64_t>(O),
                        static_cast<std::uint64_t>(h - 1));
}

std::size_t history_index(const History& f, int A, int O) {
  std::size_t index = 0;
  for (std::size_t i = 0; i < f.actions.size(); ++i) {
    if (f.actions[i] < 0 || f.actions[i] >= A || f.observations[i] < 0 || f.observations[i] >= O) {
      throw std::out_of_range("history " + f.key() + " has a symbol out of range");
    }
    index = child_index(index, A, O, f.actions[i], f.observations[i]);
  }
  return index;
}

History history_at(std::size_t index, int A, int O, int h) {
  History f;
  f.actions.resize(h - 1);
  f.observations.resize(h - 1);
  const std::size_t base = static_cast<std::size_t>(A) * O;
  for (int i = h - 2; i >= 0; --i) {
    const std::size_t symbol = index % base;
    index /= base;
    f.actions[i] = static_cast<int>(symbol / O);
    f.observations[i] = static_cast<int>(symbol % O);
  }
  return f;
}

std::vector<History> enumerate_histories(int A, int O, int h, std::uint64_t cap) {
  const std::uint64_t count = history_count(A, O, h);
  require_within_cap("histories at step " + std::to_string(h), count, cap);
  std::vector<History> out;
  out.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) out.push_back(history_at(i, A, O, h));
  return out;
}

// ---------------------------------------------------------------------------
// Policies

namespace {

std::vector<std::size_t> level_offsets(int A, int O, int H, std::uint64_t cap) {
  std::vector<std::size_t> offsets(H + 1, 0);
  for (int h = 1; h <= H; ++h) {
    const std::uint64_t count = history_count(A, O, h);
    require_within_cap("histories at step " + std::to_string(h), count, cap);
    offsets[h] = offsets[h - 1] + count;
  }
  return offsets;
}

}  // namespace

Policy::Policy(int A, int O, int H, std::uint64_t cap) : A_(A), O_(O), H_(H), offsets_(level_offsets(A, O, H, cap)) {
  actions_.assign(offsets_.back(), 0);
}

Policy Policy::constant(int A, int O, int H, int action) {
  Policy p(A, O, H);
  std::fill(p.actions_.begin(), p.actions_.end(), action);
  return p;
}

StochasticPolicy::StochasticPolicy(int A, int O, int H, std::uint64_t cap)
    : A_(A), O_(O), H_(H), offsets_(level_offsets(A, O, H, cap)) {
  probs_.assign(offsets_.back() * A_, 1.0 / A_);
}

StochasticPolicy::StochasticPolicy(const Policy& deterministic)
    : StochasticPolicy(deterministic.A(), deterministic.O(), deterministic.H()) {
  std::fill(probs_.begin(), probs_.end(), 0.0);
  const auto flat = deterministic.flat();
  for (std::size_t i = 0; i < flat.size(); ++i) probs_[i * A_ + flat[i]] = 1.0;
}

void StochasticPolicy::set(int h, std::size_t index, std::span<const double> dist) {
  if (dist.size() != static_cast<std::size_t>(A_)) throw std::invalid_argument("action distribution has wrong size");
  std::copy(dist.begin(), dist.end(), probs_.begin() + (offsets_[h - 1] + index) * A_);
}

// ---------------------------------------------------------------------------
// Simulation

EpisodeRecord sample_episode(const TabularPomdp& model, const Policy& policy, CounterRng& rng) {
  if (policy.A() != model.A || policy.O() != model.O || policy.H() != model.H) {
    throw std::invalid_argument("policy shape does not match model");
  }
  EpisodeRecord rec;
  rec.actions.reserve(model.H);
  rec.observations.reserve(model.H);
  rec.rewards.reserve(model.H);
  rec.states.reserve(model.H + 1);

  int s = rng.categorical(model.mu1);
  rec.states.push_back(s);
  std::size_t index = 0;
  for (int h = 1; h <= model.H; ++h) {
    const int a = policy.action(h, index);
    rec.actions.push_back(a);
    rec.rewards.push_back(model.reward(h, s, a));
    s = rng.categorical(model.trans_row(h, a, s));
    rec.states.push_back(s);
    const int o = rng.categorical(model.emit_row(h + 1, s));
    rec.observations.push_back(o);
    index = child_index(index, model.A, model.O, a, o);
  }
  return rec;
}

RiskParams RiskParams::make(double gamma, double delta, int K, int S, int O, int A, int H) {
  if (gamma == 0.0 || !std::isfinite(gamma)) throw NumericRangeError("risk level gamma must be finite and nonzero");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0,1)");
  if (K < 1) throw std::invalid_argument("episode count K must be >= 1");
  RiskParams p;
  p.gamma = gamma;
  p.delta = delta;
  p.iota = std::log(static_cast<double>(K) * H * S * O * A / delta);
  return p;
}

}  // namespace bvvi

// ---------------------------------------------------------------------------
// HistoryTable

namespace bvvi {

HistoryTable::HistoryTable(int A, int O, int last_step, int width, double fill, std::uint64_t cap) : width_(width) {
  require_within_cap("histories at step " + std::to_string(last_step), history_count(A, O, last_step), cap);
  levels_.reserve(last_step);
  for (int h = 1; h <= last_step; ++h) {
    levels_.emplace_back(history_count(A, O, h) * static_cast<std::size_t>(width), fill);
  }
}

}  // namespace bvvi
