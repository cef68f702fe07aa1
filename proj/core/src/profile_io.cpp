#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "contraction/curvature.hpp"

namespace contraction {

namespace {

std::string format_double(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

double parse_double(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const double value = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return value;
  } catch (const std::exception&) {
    throw std::invalid_argument("profile csv: cannot parse " + what + " '" + text + "'");
  }
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

void write_profile_csv(std::ostream& out, const CurvatureProfile& profile) {
  out << "r,kappa\n";
  for (const auto& k : profile.knots()) {
    out << format_double(k.r) << ',' << format_double(k.kappa) << '\n';
  }
  out << "tail=" << format_double(profile.tail_value())
      << ",alpha=" << format_double(profile.metric().alpha())
      << ",norm=" << to_string(profile.metric().norm_kind()) << '\n';
}

CurvatureProfile read_profile_csv(std::istream& in) {
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (!line.empty() && line[0] != '#') break;
  }
  if (line != "r,kappa") {
    throw std::invalid_argument("profile csv: expected header 'r,kappa'");
  }
  std::vector<Knot> knots;
  bool have_meta = false;
  double tail = 0.0;
  double alpha = 1.0;
  NormKind norm = NormKind::intrinsic;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    if (line.rfind("tail=", 0) == 0) {
      std::stringstream fields(line);
      std::string field;
      bool have_tail = false;
      while (std::getline(fields, field, ',')) {
        const auto eq = field.find('=');
        if (eq == std::string::npos) {
          throw std::invalid_argument("profile csv: malformed metadata field '" + field + "'");
        }
        const auto key = trim(field.substr(0, eq));
        const auto value = trim(field.substr(eq + 1));
        if (key == "tail") {
          tail = parse_double(value, "tail");
          have_tail = true;
        } else if (key == "alpha") {
          alpha = parse_double(value, "alpha");
        } else if (key == "norm") {
          norm = parse_norm_kind(value);
        } else {
          throw std::invalid_argument("profile csv: unknown metadata key '" + key + "'");
        }
      }
      if (!have_tail) throw std::invalid_argument("profile csv: metadata lacks tail");
      have_meta = true;
      break;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw std::invalid_argument("profile csv: malformed row '" + line + "'");
    }
    knots.push_back({parse_double(trim(line.substr(0, comma)), "r"),
                     parse_double(trim(line.substr(comma + 1)), "kappa")});
  }
  if (!have_meta) {
    throw std::invalid_argument("profile csv: missing trailing line tail=...,alpha=...,norm=...");
  }
  return CurvatureProfile(std::move(knots), tail, MetricSpec::from_alpha(norm, alpha));
}

void save_profile_csv(const std::string& path, const CurvatureProfile& profile) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_profile_csv(out, profile);
}

CurvatureProfile load_profile_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open profile '" + path + "'");
  return read_profile_csv(in);
}

}  // namespace contraction
