#include "cqed/io.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace cqed {

namespace {

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

std::int64_t parse_int(std::string_view s, std::size_t line_no) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw ParseError("malformed integer field '" + std::string(s) +
                         "' at line " + std::to_string(line_no),
                     line_no);
  return v;
}

double parse_double(std::string_view s, std::size_t line_no) {
  errno = 0;
  char* end = nullptr;
  const std::string tmp(s);
  const double v = std::strtod(tmp.c_str(), &end);
  if (errno != 0 || end != tmp.c_str() + tmp.size() || tmp.empty())
    throw ParseError("malformed numeric field '" + tmp + "' at line " +
                         std::to_string(line_no),
                     line_no);
  return v;
}

}  // namespace

void atomic_write(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp + " for writing");
    out.write(content.data(),
              static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("short write to " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("cannot rename " + tmp + " to " + path);
}

std::string format_click_stream(const ClickStream& stream) {
  std::string out;
  out.reserve(stream.clicks.size() * 18 + 128);
  out += "# cqed-clicks v1, tau_period_ns=";
  out += std::to_string(stream.tau_period_ns);
  out += ", tau_pump_ns=" + std::to_string(stream.tau_pump_ns);
  out += ", pulses_per_cycle=" + std::to_string(stream.pulses_per_cycle);
  out += ", cycles=" + std::to_string(stream.cycles);
  out += ", seed=" + std::to_string(stream.seed);
  out += "\n";
  char buf[64];
  for (const ClickRecord& c : stream.clicks) {
    const int len = std::snprintf(buf, sizeof(buf), "%lld,%d,%lld\n",
                                  static_cast<long long>(c.cycle_id),
                                  c.detector,
                                  static_cast<long long>(c.timestamp_ns));
    out.append(buf, static_cast<std::size_t>(len));
  }
  return out;
}

void save_click_stream(const std::string& path, const ClickStream& stream) {
  atomic_write(path, format_click_stream(stream));
}

ClickStream load_click_stream(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);

  std::string line;
  if (!std::getline(in, line))
    throw ParseError("empty click-stream file " + path, 1);
  if (line.rfind("# cqed-clicks v1", 0) != 0)
    throw ParseError("bad click-stream header (expected '# cqed-clicks v1')",
                     1);

  ClickStream stream;
  // Header fields: key=value pairs separated by commas after the magic.
  std::stringstream hdr(line.substr(std::strlen("# cqed-clicks v1")));
  std::string tok;
  while (std::getline(hdr, tok, ',')) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) continue;
    const std::string key(trim(tok.substr(0, eq)));
    const std::string val(trim(tok.substr(eq + 1)));
    if (key == "tau_period_ns")
      stream.tau_period_ns = parse_int(val, 1);
    else if (key == "tau_pump_ns")
      stream.tau_pump_ns = parse_int(val, 1);
    else if (key == "pulses_per_cycle")
      stream.pulses_per_cycle = parse_int(val, 1);
    else if (key == "cycles")
      stream.cycles = parse_int(val, 1);
    else if (key == "seed")
      stream.seed = static_cast<std::uint64_t>(parse_int(val, 1));
    else
      throw ParseError("unknown header field '" + key + "'", 1);
  }
  if (stream.tau_period_ns <= 0 || stream.pulses_per_cycle <= 0 ||
      stream.cycles <= 0)
    throw ParseError("incomplete click-stream header", 1);

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view row = trim(line);
    if (row.empty()) continue;
    const auto c1 = row.find(',');
    const auto c2 = c1 == std::string_view::npos
                        ? std::string_view::npos
                        : row.find(',', c1 + 1);
    if (c1 == std::string_view::npos || c2 == std::string_view::npos)
      throw ParseError("malformed click row at line " +
                           std::to_string(line_no),
                       line_no);
    ClickRecord rec;
    rec.cycle_id = parse_int(row.substr(0, c1), line_no);
    rec.detector =
        static_cast<std::int32_t>(parse_int(row.substr(c1 + 1, c2 - c1 - 1),
                                            line_no));
    rec.timestamp_ns = parse_int(row.substr(c2 + 1), line_no);
    if (rec.detector != 1 && rec.detector != 2)
      throw ParseError("detector must be 1 or 2 at line " +
                           std::to_string(line_no),
                       line_no);
    if (rec.timestamp_ns < 0 || rec.timestamp_ns >= stream.cycle_window_ns())
      throw ParseError("timestamp outside cycle window at line " +
                           std::to_string(line_no),
                       line_no);
    stream.clicks.push_back(rec);
  }
  return stream;
}

void save_truth(const std::string& path,
                const std::vector<TruthFlag>& truth) {
  std::string out = "# cqed-truth v1\n";
  out.reserve(truth.size() * 14 + 32);
  char buf[64];
  for (const TruthFlag& t : truth) {
    const int len = std::snprintf(buf, sizeof(buf), "%lld,%d,%d,%d\n",
                                  static_cast<long long>(t.cycle_id),
                                  t.pulse_index, t.atom_id,
                                  static_cast<int>(t.emitted));
    out.append(buf, static_cast<std::size_t>(len));
  }
  atomic_write(path, out);
}

std::vector<TruthFlag> load_truth(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("# cqed-truth v1", 0) != 0)
    throw ParseError("bad truth header", 1);

  std::vector<TruthFlag> truth;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view row = trim(line);
    if (row.empty()) continue;
    TruthFlag t;
    std::size_t pos = 0;
    std::int64_t fields[4];
    for (int f = 0; f < 4; ++f) {
      const auto next = f < 3 ? row.find(',', pos) : row.size();
      if (next == std::string_view::npos)
        throw ParseError("malformed truth row at line " +
                             std::to_string(line_no),
                         line_no);
      fields[f] = parse_int(row.substr(pos, next - pos), line_no);
      pos = next + 1;
    }
    t.cycle_id = fields[0];
    t.pulse_index = static_cast<std::int32_t>(fields[1]);
    t.atom_id = static_cast<std::int32_t>(fields[2]);
    t.emitted = fields[3] != 0;
    truth.push_back(t);
  }
  return truth;
}

std::string format_config(const SimConfig& c) {
  std::ostringstream out;
  out << "# cqed simulation config\n";
  out << "# angular frequencies are given as nu = omega/2pi in Hz\n";
  out << "g_max_hz = " << fmt_double(c.cavity.g_max / kTwoPi) << "\n";
  out << "kappa_hz = " << fmt_double(c.cavity.kappa / kTwoPi) << "\n";
  out << "gamma_perp_hz = " << fmt_double(c.cavity.gamma_perp / kTwoPi)
      << "\n";
  out << "delta_hz = " << fmt_double(c.cavity.delta / kTwoPi) << "\n";
  out << "omega_max_hz = " << fmt_double(c.cavity.omega_max / kTwoPi) << "\n";
  out << "escape_fraction = " << fmt_double(c.cavity.escape_fraction) << "\n";
  out << "tau_pump_ns = " << c.schedule.tau_pump_ns() << "\n";
  out << "tau_recycle_ns = "
      << llround(c.schedule.tau_recycle * 1e9) << "\n";
  out << "pulses_per_cycle = " << c.schedule.pulses_per_cycle << "\n";
  out << "rate_lambda_hz = " << fmt_double(c.flux.rate_lambda) << "\n";
  out << "velocity = " << fmt_double(c.flux.velocity) << "\n";
  out << "waist = " << fmt_double(c.flux.waist) << "\n";
  out << "recycle_success = " << fmt_double(c.flux.recycle_success) << "\n";
  out << "qe = " << fmt_double(c.detector.qe) << "\n";
  out << "path_efficiency = " << fmt_double(c.detector.path_efficiency)
      << "\n";
  out << "splitter_ratio = " << fmt_double(c.detector.splitter_ratio) << "\n";
  out << "dark_rate_hz = " << fmt_double(c.detector.dark_rate) << "\n";
  out << "classical_source = " << (c.classical_source ? 1 : 0) << "\n";
  return out.str();
}

void save_config(const std::string& path, const SimConfig& config) {
  atomic_write(path, format_config(config));
}

SimConfig parse_config(const std::string& text) {
  SimConfig c;
  std::map<std::string, double> values;

  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view row = trim(line);
    if (row.empty() || row.front() == '#') continue;
    const auto eq = row.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("config line " + std::to_string(line_no) +
                            " is not 'key = value'",
                        std::string(row));
    const std::string key(trim(row.substr(0, eq)));
    values[key] = parse_double(trim(row.substr(eq + 1)), line_no);
  }

  for (const auto& [key, v] : values) {
    if (key == "g_max_hz")
      c.cavity.g_max = kTwoPi * v;
    else if (key == "kappa_hz")
      c.cavity.kappa = kTwoPi * v;
    else if (key == "gamma_perp_hz")
      c.cavity.gamma_perp = kTwoPi * v;
    else if (key == "delta_hz")
      c.cavity.delta = kTwoPi * v;
    else if (key == "omega_max_hz")
      c.cavity.omega_max = kTwoPi * v;
    else if (key == "escape_fraction")
      c.cavity.escape_fraction = v;
    else if (key == "tau_pump_ns") {
      c.cavity.tau_pump = v * 1e-9;
      c.schedule.tau_pump = v * 1e-9;
    } else if (key == "tau_recycle_ns")
      c.schedule.tau_recycle = v * 1e-9;
    else if (key == "pulses_per_cycle")
      c.schedule.pulses_per_cycle = static_cast<std::int64_t>(v);
    else if (key == "rate_lambda_hz")
      c.flux.rate_lambda = v;
    else if (key == "velocity")
      c.flux.velocity = v;
    else if (key == "waist")
      c.flux.waist = v;
    else if (key == "recycle_success")
      c.flux.recycle_success = v;
    else if (key == "qe")
      c.detector.qe = v;
    else if (key == "path_efficiency")
      c.detector.path_efficiency = v;
    else if (key == "splitter_ratio")
      c.detector.splitter_ratio = v;
    else if (key == "dark_rate_hz")
      c.detector.dark_rate = v;
    else if (key == "classical_source")
      c.classical_source = v != 0;
    else
      throw ConfigError("unknown config key '" + key + "'", key);
  }

  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what(), "");
  }
  return c;
}

SimConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path, path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

void save_csv(const std::string& path, const std::string& header,
              const std::vector<std::vector<double>>& rows) {
  std::string out = header + "\n";
  for (const std::vector<double>& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      // Integral values print without exponent noise.
      if (row[i] == std::floor(row[i]) && std::abs(row[i]) < 1e15) {
        out += std::to_string(static_cast<long long>(row[i]));
      } else {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.10g", row[i]);
        out += buf;
      }
    }
    out += '\n';
  }
  atomic_write(path, out);
}

}  // namespace cqed
