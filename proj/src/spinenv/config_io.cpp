#include "spinenv/config_io.hpp"

#include <array>
#include <charconv>
#include <map>
#include <optional>
#include <sstream>

namespace spinenv {

ConfigError::ConfigError(int line, const std::string& message)
    : ModelError(line > 0 ? "line " + std::to_string(line) + ": " + message : message),
      line_(line) {}

std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct Entry {
  std::string value;
  int line = 0;
};

using Section = std::map<std::string, Entry>;

double parse_number(const Entry& e, const std::string& key) {
  double v = 0;
  const char* first = e.value.data();
  const char* last = first + e.value.size();
  auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last) {
    throw ConfigError(e.line, "key '" + key + "': expected a number, got '" + e.value + "'");
  }
  return v;
}

const Entry& require(const Section& s, const std::string& section, const std::string& key) {
  auto it = s.find(key);
  if (it == s.end()) throw ConfigError(0, "section [" + section + "] is missing key '" + key + "'");
  return it->second;
}

std::string word(unsigned value, int width) {
  std::string s(static_cast<std::size_t>(width), '0');
  for (int i = 0; i < width; ++i) {
    if ((value >> (width - 1 - i)) & 1u) s[static_cast<std::size_t>(i)] = '1';
  }
  return s;
}

LocalSpinRates read_spin(const std::map<std::string, Section>& doc, const std::string& name,
                         const std::map<std::string, int>& header_lines) {
  auto it = doc.find(name);
  if (it == doc.end()) throw ConfigError(0, "missing section [" + name + "]");
  const Section& s = it->second;
  std::array<double, 8> v{};
  for (unsigned i = 0; i < 8; ++i) {
    const auto key = word(i, 3);
    const Entry& e = require(s, name, key);
    v[i] = parse_number(e, key);
  }
  if (s.size() != 8) {
    for (const auto& [k, e] : s) {
      if (k.size() != 3 || k.find_first_not_of("01") != std::string::npos) {
        throw ConfigError(e.line, "unknown key '" + k + "' in [" + name + "]");
      }
    }
  }
  try {
    return LocalSpinRates(v);
  } catch (const ModelError& err) {
    throw ConfigError(header_lines.at(name), std::string("[") + name + "] " + err.what());
  }
}

}  // namespace

ModelSpec parse_model_config(std::string_view text) {
  std::map<std::string, Section> doc;
  std::map<std::string, int> header_lines;
  std::string current;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    ++line_no;
    auto line = trim(text.substr(pos, nl - pos));
    pos = nl + 1;
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(line_no, "unterminated section header");
      current = std::string(trim(line.substr(1, line.size() - 2)));
      static const std::array<std::string_view, 4> known{"spin.c0", "spin.c1", "env", "lattice"};
      bool ok = false;
      for (auto k : known) ok = ok || k == current;
      if (!ok) throw ConfigError(line_no, "unknown section [" + current + "]");
      if (doc.count(current)) throw ConfigError(line_no, "duplicate section [" + current + "]");
      doc[current];
      header_lines[current] = line_no;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(line_no, "expected 'key = value'");
    if (current.empty()) throw ConfigError(line_no, "key outside of any section");
    std::string key(trim(line.substr(0, eq)));
    std::string value(trim(line.substr(eq + 1)));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    if (key.empty()) throw ConfigError(line_no, "empty key");
    auto& sec = doc[current];
    if (sec.count(key)) throw ConfigError(line_no, "duplicate key '" + key + "'");
    sec[key] = Entry{value, line_no};
  }

  ModelSpec spec;
  spec.spin.c0 = read_spin(doc, "spin.c0", header_lines);
  spec.spin.c1 = read_spin(doc, "spin.c1", header_lines);

  auto env_it = doc.find("env");
  if (env_it == doc.end()) throw ConfigError(0, "missing section [env]");
  const Section& env = env_it->second;
  const Entry& range_entry = require(env, "env", "range");
  const double range_value = parse_number(range_entry, "range");
  if (range_value < 0 || range_value > 10 || range_value != static_cast<int>(range_value)) {
    throw ConfigError(range_entry.line, "range must be an integer in [0, 10]");
  }
  const int range = static_cast<int>(range_value);
  const int width = 2 * range + 1;
  const unsigned count = 1u << width;
  std::vector<double> table(count);
  for (unsigned w = 0; w < count; ++w) {
    const auto key = word(w, width);
    table[w] = parse_number(require(env, "env", key), key);
  }
  for (const auto& [k, e] : env) {
    if (k == "range") continue;
    if (k.size() != static_cast<std::size_t>(width) || k.find_first_not_of("01") != std::string::npos) {
      throw ConfigError(e.line, "unknown key '" + k + "' in [env] for range " + std::to_string(range));
    }
  }
  try {
    spec.env = EnvRateSpec(range, std::move(table));
  } catch (const ModelError& err) {
    throw ConfigError(header_lines.at("env"), std::string("[env] ") + err.what());
  }

  auto lat_it = doc.find("lattice");
  if (lat_it == doc.end()) throw ConfigError(0, "missing section [lattice]");
  const Section& lat = lat_it->second;
  for (const auto& [k, e] : lat) {
    if (k != "size" && k != "boundary") throw ConfigError(e.line, "unknown key '" + k + "' in [lattice]");
  }
  const Entry& size_entry = require(lat, "lattice", "size");
  const double size = parse_number(size_entry, "size");
  if (size < 1 || size != static_cast<int>(size)) {
    throw ConfigError(size_entry.line, "size must be a positive integer");
  }
  spec.lattice_size = static_cast<int>(size);
  auto b = lat.find("boundary");
  if (b != lat.end()) {
    try {
      spec.boundary = Boundary::parse(b->second.value);
    } catch (const ModelError& err) {
      throw ConfigError(b->second.line, err.what());
    }
  }
  try {
    spec.check_structure();
  } catch (const ModelError& err) {
    const int line = b != lat.end() ? b->second.line : size_entry.line;
    throw ConfigError(line, err.what());
  }
  return spec;
}

std::string write_model_config(const ModelSpec& spec) {
  std::ostringstream os;
  for (int layer = 0; layer < 2; ++layer) {
    os << "[spin.c" << layer << "]\n";
    const auto& c = spec.spin.for_background(layer);
    for (unsigned i = 0; i < 8; ++i) os << word(i, 3) << " = " << format_double(c[i]) << "\n";
    os << "\n";
  }
  os << "[env]\nrange = " << spec.env.range() << "\n";
  for (unsigned w = 0; w < spec.env.size(); ++w) {
    os << word(w, spec.env.window()) << " = " << format_double(spec.env.rate(w)) << "\n";
  }
  os << "\n[lattice]\nsize = " << spec.lattice_size << "\nboundary = " << spec.boundary.str()
     << "\n";
  return os.str();
}

}  // namespace spinenv
