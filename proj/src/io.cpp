#include "calabi/io.h"

#include "calabi/errors.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace calabi::io {

namespace {

std::ifstream open(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FileError("cannot open " + path.string());
  return in;
}

// Next non-empty, non-comment line split into tokens.
bool next_tokens(std::istream& in, std::vector<std::string>& tokens, int& line_no) {
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    tokens.clear();
    for (std::string tok; ss >> tok;) tokens.push_back(tok);
    if (!tokens.empty()) return true;
  }
  return false;
}

template <class T>
T parse_number(const std::string& tok, const std::string& where) {
  T value{};
  const char* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, value);
  if (ec != std::errc() || ptr != end) throw ParseError(where + ": cannot parse '" + tok + "'");
  return value;
}

std::string at(const std::string& source, int line) { return source + ":" + std::to_string(line); }

} // namespace

TriangulatedSurface parse_mesh(std::istream& in, const std::string& source) {
  std::vector<std::string> tok;
  int line = 0;
  if (!next_tokens(in, tok, line)) throw ParseError(source + ": empty mesh file");
  if (tok.size() != 2) throw ParseError(at(source, line) + ": expected header 'N F'");
  const int n = parse_number<int>(tok[0], at(source, line));
  const int f = parse_number<int>(tok[1], at(source, line));
  if (n <= 0 || f <= 0) throw ParseError(at(source, line) + ": N and F must be positive");

  std::vector<Face> faces;
  faces.reserve(f);
  for (int k = 0; k < f; ++k) {
    if (!next_tokens(in, tok, line)) throw ParseError(source + ": expected " + std::to_string(f) + " faces, found " + std::to_string(k));
    if (tok.size() != 3) throw ParseError(at(source, line) + ": a face needs three vertex indices");
    Face face{};
    for (int c = 0; c < 3; ++c) {
      face[c] = parse_number<int>(tok[c], at(source, line));
      if (face[c] < 0 || face[c] >= n) throw ParseError(at(source, line) + ": vertex index out of range");
    }
    faces.push_back(face);
  }
  if (next_tokens(in, tok, line)) throw ParseError(at(source, line) + ": trailing data after the face list");
  return TriangulatedSurface::build(std::move(faces), n);
}

TriangulatedSurface read_mesh(const std::filesystem::path& path) {
  auto in = open(path);
  return parse_mesh(in, path.string());
}

WeightAssignment parse_weights(std::istream& in, const TriangulatedSurface& surface, const std::string& source) {
  WeightAssignment w(surface);
  std::vector<std::string> tok;
  int line = 0;
  while (next_tokens(in, tok, line)) {
    if (tok.size() != 3) throw ParseError(at(source, line) + ": expected 'i j phi'");
    const int i = parse_number<int>(tok[0], at(source, line));
    const int j = parse_number<int>(tok[1], at(source, line));
    const double phi = parse_number<double>(tok[2], at(source, line));
    try {
      w.set(surface, i, j, phi);
    } catch (const DomainError& e) {
      throw ParseError(at(source, line) + ": " + e.what());
    }
  }
  return w;
}

WeightAssignment read_weights(const std::filesystem::path& path, const TriangulatedSurface& surface) {
  auto in = open(path);
  return parse_weights(in, surface, path.string());
}

Vector parse_vector(std::istream& in, const std::string& source) {
  std::vector<double> values;
  std::vector<std::string> tok;
  int line = 0;
  while (next_tokens(in, tok, line))
    for (const auto& t : tok) values.push_back(parse_number<double>(t, at(source, line)));
  return Eigen::Map<Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

Vector read_vector(const std::filesystem::path& path, int expected_size) {
  auto in = open(path);
  Vector v = parse_vector(in, path.string());
  if (v.size() != expected_size)
    throw ParseError(path.string() + ": expected " + std::to_string(expected_size) + " values, found " + std::to_string(v.size()));
  return v;
}

Vector random_radii(int vertex_count, std::uint64_t seed, double lo, double hi) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(std::log(lo), std::log(hi));
  Vector r(vertex_count);
  for (int i = 0; i < vertex_count; ++i) r[i] = std::exp(unif(rng));
  return r;
}

Vector radii_from_spec(const std::string& spec, int vertex_count) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw ParseError("radii spec '" + spec + "' must be const:<x>, rand:<seed> or file:<path>");
  const std::string kind = spec.substr(0, colon), arg = spec.substr(colon + 1);
  Vector r;
  if (kind == "const") {
    r = Vector::Constant(vertex_count, parse_number<double>(arg, "--radii"));
  } else if (kind == "rand") {
    r = random_radii(vertex_count, parse_number<std::uint64_t>(arg, "--radii"));
  } else if (kind == "file") {
    r = read_vector(arg, vertex_count);
  } else {
    throw ParseError("unknown radii spec kind '" + kind + "'");
  }
  for (double x : r)
    if (!(x > 0) || !std::isfinite(x)) throw ParseError("radii must be strictly positive");
  return r;
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

void write_trajectory_csv(const FlowTrajectory& trajectory, std::ostream& out) {
  out << "t,energy,max_abs_K,min_r,max_r,h_used,lambda1\n";
  for (const auto& s : trajectory.samples) {
    out << format_double(s.t) << ',' << format_double(s.energy) << ',' << format_double(s.max_abs_K) << ','
        << format_double(s.min_r) << ',' << format_double(s.max_r) << ',' << format_double(s.h_used) << ','
        << (s.lambda1 ? format_double(*s.lambda1) : "") << '\n';
  }
}

nlohmann::json trajectory_json(const FlowTrajectory& trajectory) {
  using nlohmann::json;
  auto vec = [](const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  json samples = json::array();
  for (const auto& s : trajectory.samples) {
    json j = {{"t", s.t}, {"energy", s.energy}, {"max_abs_K", s.max_abs_K}, {"max_K", s.max_K}, {"min_r", s.min_r},
              {"max_r", s.max_r}, {"h_used", s.h_used}, {"above_ceiling", s.above_ceiling}};
    j["lambda1"] = s.lambda1 ? json(*s.lambda1) : json(nullptr);
    if (s.u.size()) j["u"] = vec(s.u);
    if (s.K.size()) j["K"] = vec(s.K);
    samples.push_back(std::move(j));
  }
  json doc = {{"schema", kTrajectorySchema},
              {"termination", to_string(trajectory.termination)},
              {"rejected_steps", trajectory.rejected_steps},
              {"ceiling_flags", trajectory.ceiling_flags},
              {"zero_weights", trajectory.zero_weights},
              {"samples", std::move(samples)}};
  doc["fitted_rate"] = trajectory.fitted_rate ? json(*trajectory.fitted_rate) : json(nullptr);
  if (trajectory.final_u.size()) doc["final_u"] = vec(trajectory.final_u);
  if (trajectory.final_K.size()) doc["final_K"] = vec(trajectory.final_K);
  return doc;
}

} // namespace calabi::io
