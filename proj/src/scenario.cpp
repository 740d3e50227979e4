#include "slitflow/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "slitflow/errors.hpp"

namespace slitflow {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

struct KeyValue {
  std::string value;
  int line;
  bool used = false;
};

// One parsed [section] block with its key=value pairs.
struct Section {
  std::string name;
  int line;
  std::map<std::string, KeyValue> entries;
};

std::vector<Section> tokenize(const std::string& text) {
  std::vector<Section> sections;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  Section* current = nullptr;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigParseError(line_no, "unterminated section header");
      }
      const std::string name = trim(line.substr(1, line.size() - 2));
      if (name.empty()) {
        throw ConfigParseError(line_no, "empty section name");
      }
      sections.push_back({name, line_no, {}});
      current = &sections.back();
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigParseError(line_no,
                             "expected 'key = value' or '[section]'");
    }
    if (current == nullptr) {
      throw ConfigParseError(line_no, "key=value before any [section]");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigParseError(line_no, "empty key");
    if (value.empty()) {
      throw ConfigParseError(line_no, "empty value for key '" + key + "'");
    }
    if (current->entries.count(key)) {
      throw ConfigParseError(line_no, "duplicate key '" + key + "' in [" +
                                          current->name + "]");
    }
    current->entries[key] = {value, line_no, false};
  }
  return sections;
}

double parse_double(const KeyValue& kv, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(kv.value, &pos);
    if (pos != kv.value.size()) throw std::invalid_argument("trailing junk");
    if (!std::isfinite(v)) throw std::invalid_argument("not finite");
    return v;
  } catch (const std::exception&) {
    throw ConfigParseError(kv.line, "field '" + key +
                                        "': expected a finite number, got '" +
                                        kv.value + "'");
  }
}

long parse_int(const KeyValue& kv, const std::string& key) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(kv.value, &pos);
    if (pos != kv.value.size()) throw std::invalid_argument("trailing junk");
    return v;
  } catch (const std::exception&) {
    throw ConfigParseError(kv.line, "field '" + key +
                                        "': expected an integer, got '" +
                                        kv.value + "'");
  }
}

bool parse_bool(const KeyValue& kv, const std::string& key) {
  if (kv.value == "true") return true;
  if (kv.value == "false") return false;
  throw ConfigParseError(kv.line, "field '" + key +
                                      "': expected true or false, got '" +
                                      kv.value + "'");
}

std::vector<double> parse_double_list(const KeyValue& kv,
                                      const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(kv.value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) {
      throw ConfigParseError(kv.line, "field '" + key + "': empty list item");
    }
    try {
      std::size_t pos = 0;
      const double v = std::stod(item, &pos);
      if (pos != item.size()) throw std::invalid_argument("junk");
      out.push_back(v);
    } catch (const std::exception&) {
      throw ConfigParseError(kv.line, "field '" + key +
                                          "': bad list item '" + item + "'");
    }
  }
  if (out.empty()) {
    throw ConfigParseError(kv.line, "field '" + key + "': empty list");
  }
  return out;
}

// Access helpers that mark keys used, so unknown keys can be rejected.
class SectionReader {
 public:
  SectionReader(Section& s) : s_(s) {}

  const KeyValue* find(const std::string& key) {
    auto it = s_.entries.find(key);
    if (it == s_.entries.end()) return nullptr;
    it->second.used = true;
    return &it->second;
  }
  const KeyValue& require(const std::string& key) {
    const KeyValue* kv = find(key);
    if (!kv) {
      throw ConfigParseError(s_.line, "section [" + s_.name +
                                          "] is missing required key '" +
                                          key + "'");
    }
    return *kv;
  }
  double number(const std::string& key, double fallback) {
    const KeyValue* kv = find(key);
    return kv ? parse_double(*kv, key) : fallback;
  }
  double required_number(const std::string& key) {
    return parse_double(require(key), key);
  }
  long integer(const std::string& key, long fallback) {
    const KeyValue* kv = find(key);
    return kv ? parse_int(*kv, key) : fallback;
  }
  bool boolean(const std::string& key, bool fallback) {
    const KeyValue* kv = find(key);
    return kv ? parse_bool(*kv, key) : fallback;
  }
  void reject_unknown() const {
    for (const auto& [key, kv] : s_.entries) {
      if (!kv.used) {
        throw ConfigParseError(kv.line, "unknown key '" + key +
                                            "' in section [" + s_.name + "]");
      }
    }
  }

 private:
  Section& s_;
};

const std::set<std::string> kKnownSections = {
    "physics", "slit",   "grid",      "ensemble",
    "screen",  "output", "nparticle", "numerics"};

}  // namespace

GridSpec Scenario::resolved_grid() const {
  GridSpec g = grid;
  if (grid_auto_x) {
    double lo = 1e300, hi = -1e300;
    for (const SlitSpec& s : slits) {
      const WaveMode m(s, physics);
      const double reach =
          grid_auto_sigmas * std::max(m.sigma_at(g.t_min), m.sigma_at(g.t_max));
      lo = std::min({lo, s.center + s.forward_phase_velocity * g.t_min - reach,
                     s.center + s.forward_phase_velocity * g.t_max - reach});
      hi = std::max({hi, s.center + s.forward_phase_velocity * g.t_min + reach,
                     s.center + s.forward_phase_velocity * g.t_max + reach});
    }
    g.x_min = lo;
    g.x_max = hi;
  }
  return g;
}

std::vector<WaveMode> Scenario::make_modes() const {
  std::vector<WaveMode> modes;
  modes.reserve(slits.size());
  for (const SlitSpec& s : slits) modes.emplace_back(s, physics);
  return modes;
}

void Scenario::validate() const {
  physics.validate();
  if (slits.empty()) {
    throw InvalidParameterError("scenario needs at least one [slit]");
  }
  for (const SlitSpec& s : slits) s.validate();
  resolved_grid().validate();
  if (ensemble.n_traj < 1) {
    throw InvalidParameterError("[ensemble] n_traj must be >= 1");
  }
  if (!(ensemble.tol > 0.0)) {
    throw InvalidParameterError("[ensemble] tol must be > 0");
  }
  if (screen.bins < 1) {
    throw InvalidParameterError("[screen] bins must be >= 1");
  }
  if (!(node_threshold > 0.0)) {
    throw InvalidParameterError("[numerics] node_threshold must be > 0");
  }
  if (nparticle) {
    if (nparticle->masses.size() != 2) {
      throw InvalidParameterError("[nparticle] masses must list 2 entries");
    }
    const int n = static_cast<int>(slits.size());
    if (nparticle->mode_a < 0 || nparticle->mode_a >= n ||
        nparticle->mode_b < 0 || nparticle->mode_b >= n) {
      throw InvalidParameterError("[nparticle] mode index out of range");
    }
    if (nparticle->n_configs < 1) {
      throw InvalidParameterError("[nparticle] n_configs must be >= 1");
    }
  }
}

Scenario parse_scenario_string(const std::string& text) {
  std::vector<Section> sections = tokenize(text);
  Scenario sc;
  sc.grid = GridSpec{};
  bool have_grid = false;

  for (Section& section : sections) {
    if (!kKnownSections.count(section.name)) {
      throw ConfigParseError(section.line,
                             "unknown section [" + section.name + "]");
    }
    SectionReader r(section);
    if (section.name == "physics") {
      const double hbar = r.number("hbar", 1.0);
      const double mass = r.number("mass", 1.0);
      r.reject_unknown();
      try {
        sc.physics = PhysicalParams::make(hbar, mass);
      } catch (const InvalidParameterError& e) {
        throw ConfigParseError(section.line, e.what());
      }
    } else if (section.name == "slit") {
      SlitSpec s;
      s.center = r.required_number("center");
      s.width_sigma = r.required_number("sigma");
      s.forward_phase_velocity = r.number("velocity", 0.0);
      s.relative_phase_offset = r.number("phase_offset", 0.0);
      s.amplitude_weight = r.number("weight", 1.0);
      r.reject_unknown();
      try {
        s.validate();
      } catch (const InvalidParameterError& e) {
        throw ConfigParseError(section.line, e.what());
      }
      sc.slits.push_back(s);
    } else if (section.name == "grid") {
      have_grid = true;
      const KeyValue* xmin = r.find("x_min");
      const KeyValue* xmax = r.find("x_max");
      if ((xmin == nullptr) != (xmax == nullptr)) {
        throw ConfigParseError(section.line,
                               "[grid] needs both x_min and x_max, or neither");
      }
      if (xmin) {
        sc.grid_auto_x = false;
        sc.grid.x_min = parse_double(*xmin, "x_min");
        sc.grid.x_max = parse_double(*xmax, "x_max");
      }
      sc.grid_auto_sigmas = r.number("auto_sigmas", 8.0);
      sc.grid.nx = static_cast<int>(r.integer("nx", 400));
      sc.grid.t_min = r.number("t_min", 0.0);
      sc.grid.t_max = r.required_number("t_max");
      sc.grid.nt = static_cast<int>(r.integer("nt", 400));
      r.reject_unknown();
    } else if (section.name == "ensemble") {
      const KeyValue* sampler = r.find("sampler");
      if (sampler) {
        if (sampler->value == "born") {
          sc.ensemble.sampler = SamplerKind::BornRule;
        } else if (sampler->value == "per_slit") {
          sc.ensemble.sampler = SamplerKind::PerSlit;
        } else {
          throw ConfigParseError(sampler->line,
                                 "sampler must be 'born' or 'per_slit'");
        }
      }
      sc.ensemble.n_traj = static_cast<int>(r.integer("n_traj", 1000));
      sc.ensemble.seed = static_cast<std::uint64_t>(r.integer("seed", 1));
      sc.ensemble.tol = r.number("tol", 1e-8);
      sc.ensemble.dump_trajectories =
          static_cast<int>(r.integer("dump_trajectories", 100));
      sc.ensemble.record_acceleration =
          r.boolean("record_acceleration", false);
      r.reject_unknown();
    } else if (section.name == "screen") {
      sc.screen.t_screen = r.required_number("t_screen");
      sc.screen.bins = static_cast<int>(r.integer("bins", 50));
      r.reject_unknown();
    } else if (section.name == "output") {
      sc.output_dir = r.require("dir").value;
      r.reject_unknown();
    } else if (section.name == "numerics") {
      sc.node_threshold = r.number("node_threshold", 1e-300);
      r.reject_unknown();
    } else if (section.name == "nparticle") {
      NParticleSpec np;
      const KeyValue* masses = r.find("masses");
      if (masses) np.masses = parse_double_list(*masses, "masses");
      const KeyValue& state = r.require("state");
      if (state.value == "factorized") {
        np.state = NParticleSpec::State::Factorized;
      } else if (state.value == "symmetric") {
        np.state = NParticleSpec::State::Symmetric;
      } else if (state.value == "antisymmetric") {
        np.state = NParticleSpec::State::Antisymmetric;
      } else {
        throw ConfigParseError(
            state.line,
            "state must be factorized, symmetric or antisymmetric");
      }
      np.mode_a = static_cast<int>(r.integer("mode_a", 0));
      np.mode_b = static_cast<int>(r.integer("mode_b", 1));
      np.t_end = r.required_number("t_end");
      np.n_configs = static_cast<int>(r.integer("n_configs", 1000));
      np.displacement = r.number("displacement", 0.0);
      r.reject_unknown();
      sc.nparticle = np;
    }
  }

  if (sc.slits.empty()) {
    throw ConfigParseError(0, "scenario needs at least one [slit] section");
  }
  if (!have_grid) {
    throw ConfigParseError(0, "scenario needs a [grid] section");
  }
  try {
    sc.validate();
  } catch (const InvalidParameterError& e) {
    throw ConfigParseError(0, e.what());
  }
  return sc;
}

Scenario parse_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigParseError(0, "cannot open config file '" + path + "'");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario_string(ss.str());
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string canonical_serialization(const Scenario& s) {
  std::ostringstream out;
  out << "[physics]\nhbar = " << fmt(s.physics.hbar)
      << "\nmass = " << fmt(s.physics.mass) << "\n";
  for (const SlitSpec& slit : s.slits) {
    out << "[slit]\ncenter = " << fmt(slit.center)
        << "\nsigma = " << fmt(slit.width_sigma)
        << "\nvelocity = " << fmt(slit.forward_phase_velocity)
        << "\nphase_offset = " << fmt(slit.relative_phase_offset)
        << "\nweight = " << fmt(slit.amplitude_weight) << "\n";
  }
  const GridSpec g = s.resolved_grid();
  out << "[grid]\nx_min = " << fmt(g.x_min) << "\nx_max = " << fmt(g.x_max)
      << "\nnx = " << g.nx << "\nt_min = " << fmt(g.t_min)
      << "\nt_max = " << fmt(g.t_max) << "\nnt = " << g.nt << "\n";
  out << "[ensemble]\nsampler = "
      << (s.ensemble.sampler == SamplerKind::BornRule ? "born" : "per_slit")
      << "\nn_traj = " << s.ensemble.n_traj << "\nseed = " << s.ensemble.seed
      << "\ntol = " << fmt(s.ensemble.tol)
      << "\ndump_trajectories = " << s.ensemble.dump_trajectories
      << "\nrecord_acceleration = "
      << (s.ensemble.record_acceleration ? "true" : "false") << "\n";
  out << "[screen]\nt_screen = " << fmt(s.screen.t_screen)
      << "\nbins = " << s.screen.bins << "\n";
  out << "[numerics]\nnode_threshold = " << fmt(s.node_threshold) << "\n";
  if (s.nparticle) {
    const NParticleSpec& np = *s.nparticle;
    out << "[nparticle]\nmasses = " << fmt(np.masses[0]) << ", "
        << fmt(np.masses[1]) << "\nstate = ";
    switch (np.state) {
      case NParticleSpec::State::Factorized:
        out << "factorized";
        break;
      case NParticleSpec::State::Symmetric:
        out << "symmetric";
        break;
      case NParticleSpec::State::Antisymmetric:
        out << "antisymmetric";
        break;
    }
    out << "\nmode_a = " << np.mode_a << "\nmode_b = " << np.mode_b
        << "\nt_end = " << fmt(np.t_end) << "\nn_configs = " << np.n_configs
        << "\ndisplacement = " << fmt(np.displacement) << "\n";
  }
  return out.str();
}

std::uint64_t scenario_hash(const Scenario& s) {
  const std::string text = canonical_serialization(s);
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace slitflow
