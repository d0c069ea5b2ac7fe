#include "spinenv/rate_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace spinenv {

namespace {

std::string word_string(std::uint32_t word, int width) {
  std::string s(static_cast<std::size_t>(width), '0');
  for (int i = 0; i < width; ++i) {
    if ((word >> (width - 1 - i)) & 1u) s[static_cast<std::size_t>(i)] = '1';
  }
  return s;
}

void check_rate_value(double v, const char* what) {
  if (!std::isfinite(v) || v < 0.0) {
    std::ostringstream os;
    os << what << ": rate " << v << " must be finite and nonnegative";
    throw ModelError(os.str());
  }
}

bool is_binary_word(const std::string& w) {
  return std::all_of(w.begin(), w.end(), [](char ch) { return ch == '0' || ch == '1'; });
}

}  // namespace

std::string Triple::str() const { return word_string(index(), 3); }

LocalSpinRates::LocalSpinRates(const std::array<double, 8>& values) : values_(values) {
  for (double v : values_) check_rate_value(v, "spin rate table");
}

LocalSpinRates LocalSpinRates::constant(double rate) {
  std::array<double, 8> v{};
  v.fill(rate);
  return LocalSpinRates(v);
}

LocalSpinRates LocalSpinRates::contact(double lambda, double death) {
  std::array<double, 8> v{};
  for (unsigned i = 0; i < 8; ++i) {
    const Triple t = Triple::from_index(i);
    v[i] = t.center == 0 ? lambda * (t.left + t.right) : death;
  }
  return LocalSpinRates(v);
}

double LocalSpinRates::sup_with_center(int center) const {
  double best = 0.0;
  for (unsigned i = 0; i < 8; ++i) {
    if (Triple::from_index(i).center == center) best = std::max(best, values_[i]);
  }
  return best;
}

bool LocalSpinRates::reflection_symmetric() const { return reflected() == *this; }

LocalSpinRates LocalSpinRates::reflected() const {
  std::array<double, 8> v{};
  for (unsigned i = 0; i < 8; ++i) {
    const Triple t = Triple::from_index(i);
    v[Triple{t.right, t.center, t.left}.index()] = values_[i];
  }
  return LocalSpinRates(v);
}

EnvRateSpec::EnvRateSpec(int range, std::vector<double> table)
    : range_(range), table_(std::move(table)) {
  if (range_ < 0 || range_ > 10) throw ModelError("background range must lie in [0, 10]");
  const std::size_t expected = std::size_t{1} << (2 * range_ + 1);
  if (table_.size() != expected) {
    std::ostringstream os;
    os << "background table for range " << range_ << " needs " << expected << " entries, got "
       << table_.size();
    throw ModelError(os.str());
  }
  for (double v : table_) check_rate_value(v, "background rate table");
}

EnvRateSpec EnvRateSpec::independent(double up, double down) { return EnvRateSpec(0, {up, down}); }

double EnvRateSpec::sup_with_center(int center) const {
  double best = 0.0;
  for (std::uint32_t w = 0; w < table_.size(); ++w) {
    if (center_bit(w) == center) best = std::max(best, table_[w]);
  }
  return best;
}

Boundary Boundary::frozen(std::string spin_left, std::string spin_right, std::string env_left,
                          std::string env_right) {
  Boundary b;
  b.kind = BoundaryKind::frozen;
  b.spin_left = std::move(spin_left);
  b.spin_right = std::move(spin_right);
  b.env_left = std::move(env_left);
  b.env_right = std::move(env_right);
  return b;
}

Boundary Boundary::parse(std::string_view text) {
  if (text == "periodic") return periodic();
  constexpr std::string_view prefix = "frozen:";
  if (text.substr(0, prefix.size()) != prefix) {
    throw ModelError("boundary must be 'periodic' or 'frozen:L|R[/L|R]', got '" +
                     std::string(text) + "'");
  }
  std::string_view body = text.substr(prefix.size());
  auto split_pair = [&](std::string_view part) {
    const auto bar = part.find('|');
    if (bar == std::string_view::npos) {
      throw ModelError("frozen boundary needs 'L|R' words, got '" + std::string(part) + "'");
    }
    std::string l(part.substr(0, bar));
    std::string r(part.substr(bar + 1));
    if (l.empty() || r.empty() || !is_binary_word(l) || !is_binary_word(r)) {
      throw ModelError("frozen boundary words must be nonempty 0/1 strings, got '" +
                       std::string(part) + "'");
    }
    return std::pair{l, r};
  };
  const auto slash = body.find('/');
  auto [sl, sr] = split_pair(body.substr(0, slash));
  if (slash == std::string_view::npos) return frozen(sl, sr, sl, sr);
  auto [el, er] = split_pair(body.substr(slash + 1));
  return frozen(sl, sr, el, er);
}

std::string Boundary::str() const {
  if (is_periodic()) return "periodic";
  std::string s = "frozen:" + spin_left + "|" + spin_right;
  if (env_left != spin_left || env_right != spin_right) s += "/" + env_left + "|" + env_right;
  return s;
}

void ModelSpec::check_structure() const {
  if (lattice_size < 1) throw ModelError("lattice size must be positive");
  if (boundary.is_periodic()) return;
  const auto env_min = static_cast<std::size_t>(std::max(1, env.range()));
  for (const auto* w : {&boundary.spin_left, &boundary.spin_right}) {
    if (w->empty() || !is_binary_word(*w)) {
      throw ModelError("frozen spin boundary words must be nonempty 0/1 strings");
    }
  }
  for (const auto* w : {&boundary.env_left, &boundary.env_right}) {
    if (w->size() < env_min || !is_binary_word(*w)) {
      std::ostringstream os;
      os << "frozen background boundary words need length >= " << env_min;
      throw ModelError(os.str());
    }
  }
}

std::string AttractivityViolation::describe() const {
  std::ostringstream os;
  os << "(" << word_string(lower, width) << ") <= (" << word_string(upper, width)
     << ") with centre " << center << ": rate " << lower_rate
     << (center == 0 ? " > " : " < ") << upper_rate;
  return os.str();
}

std::string CompatibilityViolation::describe() const {
  std::ostringstream os;
  if (triple.center == 0) {
    os << "c0(" << triple.str() << ") = " << c0 << " > c1(" << triple.str() << ") = " << c1
       << ", violates c0(a0b) <= c1(a0b)";
  } else {
    os << "c1(" << triple.str() << ") = " << c1 << " > c0(" << triple.str() << ") = " << c0
       << ", violates c1(a1b) <= c0(a1b)";
  }
  return os.str();
}

AttractivityReport check_attractive_table(std::span<const double> table, int width) {
  AttractivityReport report;
  const int center_shift = width / 2;
  const auto n = static_cast<std::uint32_t>(table.size());
  for (std::uint32_t lo = 0; lo < n; ++lo) {
    for (std::uint32_t hi = 0; hi < n; ++hi) {
      if (lo == hi || (lo & ~hi) != 0) continue;
      const int center = static_cast<int>((lo >> center_shift) & 1u);
      if (center != static_cast<int>((hi >> center_shift) & 1u)) continue;
      const bool bad = center == 0 ? table[lo] > table[hi] : table[lo] < table[hi];
      if (bad) {
        report.attractive = false;
        report.violations.push_back({lo, hi, width, center, table[lo], table[hi]});
      }
    }
  }
  return report;
}

AttractivityReport check_attractive(const LocalSpinRates& rates) {
  return check_attractive_table(rates.values(), 3);
}

AttractivityReport check_attractive(const EnvRateSpec& env) {
  return check_attractive_table(env.table(), env.window());
}

CompatibilityReport check_compatible(const SpinRatePair& pair) {
  CompatibilityReport report;
  for (unsigned i = 0; i < 8; ++i) {
    const Triple t = Triple::from_index(i);
    const double a = pair.c0[i];
    const double b = pair.c1[i];
    const bool bad = t.center == 0 ? a > b : b > a;
    if (bad) {
      report.compatible = false;
      report.violations.push_back({t, a, b});
    }
  }
  return report;
}

double compute_C(const SpinRatePair& pair) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const auto& ci = pair.for_background(i);
      const auto& cj = pair.for_background(j);
      best = std::min({best, ci.at(1, 0, 0) + cj.at(1, 1, 0), ci.at(0, 0, 1) + cj.at(0, 1, 1),
                       ci.at(0, 1, 1) + cj.at(1, 1, 0), ci.at(1, 0, 0) + cj.at(0, 0, 1)});
    }
  }
  return best;
}

double compute_K(const SpinRatePair& pair) {
  const auto& a = pair.c0.values();
  const auto& b = pair.c1.values();
  return std::max(*std::max_element(a.begin(), a.end()), *std::max_element(b.begin(), b.end()));
}

DerivedConstants dominating_rates(const ModelSpec& spec) {
  DerivedConstants d;
  d.C = compute_C(spec.spin);
  d.K = compute_K(spec.spin);
  d.b_bar = spec.env.sup_with_center(0) + spec.env.sup_with_center(1);
  d.c_bar0 = spec.spin.c0.sup_with_center(0) + spec.spin.c0.sup_with_center(1);
  d.c_bar1 = spec.spin.c1.sup_with_center(0) + spec.spin.c1.sup_with_center(1);
  d.c_bar = d.c_bar0 + d.c_bar1;
  return d;
}

ValidationReport validate(const ModelSpec& spec) {
  spec.check_structure();
  ValidationReport r;
  r.c0 = check_attractive(spec.spin.c0);
  r.c1 = check_attractive(spec.spin.c1);
  r.env = check_attractive(spec.env);
  r.compatibility = check_compatible(spec.spin);
  r.constants = dominating_rates(spec);
  return r;
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"cpree", "contact", "remark_iv", "remark_vi"};
  return names;
}

ModelSpec preset(std::string_view name, const PresetParams& params, int lattice_size,
                 const Boundary& boundary) {
  const auto& q = params;
  for (double v : {q.gamma, q.delta0, q.delta1, q.lambda}) {
    if (!std::isfinite(v) || v < 0.0) throw ModelError("preset parameters must be nonnegative");
  }
  if (!(q.p >= 0.0 && q.p <= 1.0)) throw ModelError("preset parameter p must lie in [0, 1]");

  ModelSpec spec;
  spec.lattice_size = lattice_size;
  spec.boundary = boundary;

  if (name == "cpree" || name == "contact") {
    const double d1 = name == "contact" ? q.delta0 : q.delta1;
    if (d1 > q.delta0) {
      std::ostringstream os;
      os << "cpree requires delta1 <= delta0 (got delta1 = " << d1 << ", delta0 = " << q.delta0
         << "): violates c1(a1b) <= c0(a1b)";
      throw CompatibilityError(os.str());
    }
    if (q.gamma <= 0.0) throw ModelError("cpree requires gamma > 0");
    spec.spin = {LocalSpinRates::contact(q.lambda, q.delta0), LocalSpinRates::contact(q.lambda, d1)};
    spec.env = EnvRateSpec::independent(q.gamma * q.p, q.gamma * (1.0 - q.p));
  } else if (name == "remark_iv") {
    // Voter background: a site flips at gamma per disagreeing neighbour.
    std::vector<double> table(8);
    for (unsigned w = 0; w < 8; ++w) {
      const Triple t = Triple::from_index(w);
      table[w] = q.gamma * ((t.left != t.center) + (t.right != t.center));
    }
    spec.env = EnvRateSpec(1, std::move(table));
    const auto c = LocalSpinRates::contact(q.lambda, q.delta0);
    spec.spin = {c, c};
  } else if (name == "remark_vi") {
    if (q.delta1 > q.delta0) {
      throw CompatibilityError("remark_vi requires delta1 <= delta0: violates c1(a1b) <= c0(a1b)");
    }
    std::array<double, 8> c0{};
    std::array<double, 8> c1{};
    for (unsigned i = 0; i < 8; ++i) {
      const Triple t = Triple::from_index(i);
      if (t.center == 0) {
        c0[i] = c1[i] = q.lambda * t.left;
      } else {
        c0[i] = q.delta0;
        c1[i] = q.delta1 * (1 - t.right);
      }
    }
    spec.spin = {LocalSpinRates(c0), LocalSpinRates(c1)};
    spec.env = EnvRateSpec::independent(q.gamma, 0.0);
  } else {
    throw ModelError("unknown preset '" + std::string(name) + "'");
  }
  spec.check_structure();
  return spec;
}

}  // namespace spinenv
