#include "lingbayes/trace_io.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "lingbayes/error.hpp"

namespace lingbayes {

namespace {

using nlohmann::json;

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') {
      quoted = !quoted;
    } else if (c == ',' && !quoted) {
      cells.push_back(trim(cell));
      cell.clear();
    } else {
      cell += c;
    }
  }
  cells.push_back(trim(cell));
  return cells;
}

bool is_missing_token(const std::string& cell) {
  static const char* const kTokens[] = {"", "NA", "na", "N/A", "NaN", "nan", "NAN", "?", "null", "NULL"};
  return std::any_of(std::begin(kTokens), std::end(kTokens), [&](const char* t) { return cell == t; });
}

bool parse_number(const std::string& cell, double& out) {
  if (cell.empty()) return false;
  errno = 0;
  char* end = nullptr;
  out = std::strtod(cell.c_str(), &end);
  return end == cell.c_str() + cell.size() && errno != ERANGE && std::isfinite(out);
}

}  // namespace

DataMatrix read_data_csv(std::istream& in, const CsvOptions& options, const std::string& source) {
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    rows.push_back(split_csv_line(line));
  }
  if (rows.empty()) fail(ErrorCode::InvalidArgument, fmt::format("{}: no data rows", source));

  bool header = false;
  for (const auto& cell : rows.front()) {
    double v = 0.0;
    if (!parse_number(cell, v) && !is_missing_token(cell)) header = true;
  }
  const std::size_t p = rows.front().size();
  const std::size_t first = header ? 1 : 0;
  const std::size_t n = rows.size() - first;

  Eigen::MatrixXd values(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  for (std::size_t r = first; r < rows.size(); ++r) {
    if (rows[r].size() != p) {
      fail(ErrorCode::RaggedRows, fmt::format("{}: row {} has {} cells, expected {}", source, r + 1, rows[r].size(), p));
    }
    for (std::size_t c = 0; c < p; ++c) {
      const auto& cell = rows[r][c];
      double v = 0.0;
      if (parse_number(cell, v)) {
        values(static_cast<Eigen::Index>(r - first), static_cast<Eigen::Index>(c)) = v;
      } else if (is_missing_token(cell)) {
        fail(ErrorCode::MissingValue, fmt::format("{}: missing value '{}' at row {}, column {}", source, cell, r + 1, c + 1));
      } else {
        fail(ErrorCode::NonNumericCell, fmt::format("{}: non-numeric cell '{}' at row {}, column {}", source, cell, r + 1, c + 1));
      }
    }
  }

  DataMatrix data = make_data(std::move(values));
  if (header) data.names = rows.front();
  data.validate();
  if (options.standardize) standardize(data);
  return data;
}

DataMatrix read_data_csv(const std::string& path, const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, fmt::format("cannot open {}", path));
  return read_data_csv(in, options, path);
}

void write_data_csv(std::ostream& out, const DataMatrix& data) {
  for (int j = 0; j < data.p(); ++j) out << (j ? "," : "") << data.names[static_cast<std::size_t>(j)];
  out << '\n';
  for (int q = 0; q < data.n(); ++q) {
    for (int j = 0; j < data.p(); ++j) out << (j ? "," : "") << fmt::format("{:.17g}", data.values(q, j));
    out << '\n';
  }
}

namespace {

std::string num(double x) {
  if (!std::isfinite(x)) fail(ErrorCode::InvalidArgument, fmt::format("cannot serialize non-finite value {}", x));
  return fmt::format("{:.17g}", x);
}

std::string num_array(const std::vector<double>& xs) {
  std::string s = "[";
  for (std::size_t k = 0; k < xs.size(); ++k) {
    if (k) s += ',';
    s += num(xs[k]);
  }
  return s + "]";
}

std::string str_array(const std::vector<std::string>& xs) {
  std::string s = "[";
  for (std::size_t k = 0; k < xs.size(); ++k) {
    if (k) s += ',';
    s += json(xs[k]).dump();
  }
  return s + "]";
}

const char* flag(bool b) { return b ? "true" : "false"; }

std::string config_json(const ChainConfig& c) {
  return fmt::format(
      "{{\"iterations\":{},\"burn_in\":{},\"thin\":{},\"anneal_T0\":{},\"seed\":{},\"a_gamma\":{},\"b_gamma\":{},"
      "\"a_gamma1\":{},\"b_gamma1\":{},\"K\":{},\"dirichlet_alpha\":{},\"mean_prior_var\":{},"
      "\"var_prior_shape\":{},\"var_prior_scale\":{},\"mh_step\":{},\"adapt\":{},\"random_scan\":{},"
      "\"pair_moves\":{},\"progress_every\":{}}}",
      c.iterations, c.burn_in, c.thin, num(c.anneal_T0), c.seed, num(c.prior.a_gamma), num(c.prior.b_gamma),
      num(c.prior.a_gamma1), num(c.prior.b_gamma1), c.K, num(c.mixture.dirichlet_alpha), num(c.mixture.mean_prior_var),
      num(c.mixture.var_prior_shape), num(c.mixture.var_prior_scale), num(c.mh_step), flag(c.adapt),
      flag(c.random_scan), flag(c.pair_moves), c.progress_every);
}

std::string header_json(const TraceMeta& m) {
  return fmt::format(
      "{{\"format\":\"lingbayes-trace\",\"format_version\":{},\"model_kind\":\"{}\",\"p\":{},\"n\":{},\"K\":{},"
      "\"seed\":{},\"chains\":{},\"created\":{},\"config\":{},\"names\":{},\"center\":{},\"scale\":{}}}",
      m.format_version, to_string(m.model_kind), m.p, m.n, m.K, m.seed, m.chains, json(m.created).dump(),
      config_json(m.config), str_array(m.names), num_array(m.center), num_array(m.scale));
}

std::string sample_json(const Sample& s) {
  std::string edges = "[";
  std::string coef = "[";
  bool first = true;
  for (const auto& e : s.graph.edges()) {
    if (!first) {
      edges += ',';
      coef += ',';
    }
    first = false;
    edges += fmt::format("[{},{}]", e.target + 1, e.source + 1);
    coef += num(s.B(e.target, e.source));
  }
  edges += ']';
  coef += ']';
  std::string noise = "[";
  for (std::size_t i = 0; i < s.noise.per_node.size(); ++i) {
    const auto& mix = s.noise.per_node[i];
    if (i) noise += ',';
    noise += fmt::format("{{\"w\":{},\"m\":{},\"v\":{}}}", num_array(mix.weights), num_array(mix.means),
                         num_array(mix.variances));
  }
  noise += ']';
  return fmt::format("{{\"iter\":{},\"edges\":{},\"coef\":{},\"gamma\":{},\"gamma1\":{},\"noise\":{}}}", s.iteration,
                     edges, coef, num(s.gamma), num(s.gamma1), noise);
}

[[noreturn]] void truncated(int line_no, const std::string& why) {
  fail(ErrorCode::TruncatedRecord, fmt::format("trace line {}: {}", line_no, why));
}

ChainConfig config_from_json(const json& j) {
  ChainConfig c;
  c.iterations = j.at("iterations").get<int>();
  c.burn_in = j.at("burn_in").get<int>();
  c.thin = j.at("thin").get<int>();
  c.anneal_T0 = j.at("anneal_T0").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.prior.a_gamma = j.at("a_gamma").get<double>();
  c.prior.b_gamma = j.at("b_gamma").get<double>();
  c.prior.a_gamma1 = j.at("a_gamma1").get<double>();
  c.prior.b_gamma1 = j.at("b_gamma1").get<double>();
  c.K = j.at("K").get<int>();
  c.mixture.dirichlet_alpha = j.at("dirichlet_alpha").get<double>();
  c.mixture.mean_prior_var = j.at("mean_prior_var").get<double>();
  c.mixture.var_prior_shape = j.at("var_prior_shape").get<double>();
  c.mixture.var_prior_scale = j.at("var_prior_scale").get<double>();
  c.mh_step = j.at("mh_step").get<double>();
  c.adapt = j.at("adapt").get<bool>();
  c.random_scan = j.at("random_scan").get<bool>();
  c.pair_moves = j.at("pair_moves").get<bool>();
  c.progress_every = j.at("progress_every").get<int>();
  return c;
}

TraceMeta meta_from_json(const json& j) {
  TraceMeta m;
  m.format_version = j.at("format_version").get<int>();
  if (m.format_version != 1) {
    fail(ErrorCode::VersionMismatch, fmt::format("trace format version {} is not supported (expected 1)", m.format_version));
  }
  m.model_kind = parse_model_kind(j.at("model_kind").get<std::string>());
  m.p = j.at("p").get<int>();
  m.n = j.at("n").get<int>();
  m.K = j.at("K").get<int>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.chains = j.at("chains").get<int>();
  m.created = j.at("created").get<std::string>();
  m.config = config_from_json(j.at("config"));
  m.names = j.at("names").get<std::vector<std::string>>();
  m.center = j.at("center").get<std::vector<double>>();
  m.scale = j.at("scale").get<std::vector<double>>();
  if (m.p < 1) fail(ErrorCode::InvalidArgument, "trace header has no nodes");
  return m;
}

Sample sample_from_json(const json& j, const TraceMeta& meta, int line_no) {
  Sample s;
  s.iteration = j.at("iter").get<int>();
  s.graph = Graph(meta.p);
  s.B = Eigen::MatrixXd::Zero(meta.p, meta.p);
  const auto& edges = j.at("edges");
  const auto coef = j.at("coef").get<std::vector<double>>();
  if (coef.size() != edges.size()) truncated(line_no, "coefficient list does not match the edge list");
  std::pair<int, int> previous{0, 0};
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const int target = edges[k].at(0).get<int>();
    const int source = edges[k].at(1).get<int>();
    if (edges[k].size() != 2 || target < 1 || source < 1 || target > meta.p || source > meta.p || target == source) {
      fail(ErrorCode::IndexOutOfRange, fmt::format("trace line {}: invalid edge [{},{}]", line_no, target, source));
    }
    const std::pair<int, int> current{target, source};
    if (k > 0 && !(previous < current)) {
      fail(ErrorCode::UnsortedEdges, fmt::format("trace line {}: edge list is not sorted by (target, source)", line_no));
    }
    previous = current;
    s.graph.set(target - 1, source - 1, true);
    s.B(target - 1, source - 1) = coef[k];
  }
  s.gamma = j.at("gamma").get<double>();
  s.gamma1 = j.at("gamma1").get<double>();
  const auto& noise = j.at("noise");
  if (static_cast<int>(noise.size()) != meta.p) truncated(line_no, "noise model does not cover every node");
  for (const auto& node : noise) {
    GaussianMixture mix;
    mix.weights = node.at("w").get<std::vector<double>>();
    mix.means = node.at("m").get<std::vector<double>>();
    mix.variances = node.at("v").get<std::vector<double>>();
    if (mix.size() != meta.K || mix.means.size() != mix.weights.size() || mix.variances.size() != mix.weights.size()) {
      truncated(line_no, "mixture does not have K components");
    }
    s.noise.per_node.push_back(std::move(mix));
  }
  return s;
}

}  // namespace

void write_trace(std::ostream& out, const Trace& trace) {
  out << header_json(trace.meta) << '\n';
  for (const auto& s : trace.samples) out << sample_json(s) << '\n';
}

void write_trace(const Trace& trace, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoError, fmt::format("cannot write {}", path));
  write_trace(out, trace);
  if (!out) fail(ErrorCode::IoError, fmt::format("write to {} failed", path));
}

Trace read_trace(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) truncated(1, "missing header");
  Trace trace;
  {
    json header;
    try {
      header = json::parse(line);
    } catch (const json::exception& e) {
      truncated(1, e.what());
    }
    try {
      trace.meta = meta_from_json(header);
    } catch (const json::exception& e) {
      truncated(1, e.what());
    }
  }
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) truncated(line_no, "empty record");
    try {
      trace.samples.push_back(sample_from_json(json::parse(line), trace.meta, line_no));
    } catch (const json::exception& e) {
      truncated(line_no, e.what());
    }
  }
  return trace;
}

Trace read_trace(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, fmt::format("cannot open {}", path));
  return read_trace(in);
}

}  // namespace lingbayes
