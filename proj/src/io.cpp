#include "sfde/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace sfde {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, value >>= 4) out[static_cast<std::size_t>(i)] = kDigits[value & 0xf];
  return out;
}

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const Json& j, const std::string& what) {
  require(j.is_array(), ErrorKind::Io, what + " must be an array of rows");
  if (j.empty()) return Matrix(0, 0);
  const std::size_t cols = j.front().size();
  Matrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < j.size(); ++i) {
    require(j[i].is_array() && j[i].size() == cols, ErrorKind::Io, what + " rows must have equal length");
    for (std::size_t k = 0; k < cols; ++k)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = j[i][k].get<double>();
  }
  return m;
}

namespace {

Json vector_to_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Vector vector_from_json(const Json& j, const std::string& what) {
  require(j.is_array(), ErrorKind::Io, what + " must be an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

const Json& field(const Json& j, const char* key) {
  require(j.is_object() && j.contains(key), ErrorKind::Io, std::string("missing field '") + key + "'");
  return j.at(key);
}

template <typename T>
T get(const Json& j, const char* key) {
  try {
    return field(j, key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Io, std::string("field '") + key + "': " + e.what());
  }
}

std::string csv_line(std::initializer_list<std::string> cells) {
  std::string out;
  bool first = true;
  for (const auto& c : cells) {
    if (!first) out += ',';
    out += c;
    first = false;
  }
  out += '\n';
  return out;
}

}  // namespace

Json mdp_to_json(const TabularMdp& mdp) {
  Json j;
  j["num_states"] = mdp.num_states();
  j["num_actions"] = mdp.num_actions();
  j["gamma"] = mdp.gamma();
  j["transition"] = matrix_to_json(mdp.transition());
  j["features"] = matrix_to_json(mdp.features().phi);
  j["weights"] = vector_to_json(mdp.weights().w);
  Json terminal = Json::array();
  for (bool t : mdp.terminal()) terminal.push_back(t);
  j["terminal"] = terminal;
  j["start_state"] = mdp.start_state();
  if (mdp.grid()) {
    j["grid"] = {{"width", mdp.grid()->width}, {"height", mdp.grid()->height}};
    const LayoutInfo& l = mdp.layout();
    j["layout"] = {{"family", l.family},         {"obstacle_cells", l.obstacle_cells},
                   {"goal_cell", l.goal_cell},   {"object_cells", l.object_cells},
                   {"object_types", l.object_types}, {"type_rewards", l.type_rewards},
                   {"terminal_cell", l.terminal_cell}};
  }
  return j;
}

TabularMdp mdp_from_json(const Json& j) {
  const int states = get<int>(j, "num_states");
  const int actions = get<int>(j, "num_actions");
  Matrix p = matrix_from_json(field(j, "transition"), "transition");
  Matrix phi = matrix_from_json(field(j, "features"), "features");
  require(p.rows() == static_cast<Eigen::Index>(states) * actions && phi.rows() == p.rows(),
          ErrorKind::Io, "transition and features need num_states * num_actions rows");
  const auto terminal = get<std::vector<bool>>(j, "terminal");
  TabularMdp mdp(states, actions, std::move(p), terminal, get<double>(j, "gamma"),
                 FeatureMap{std::move(phi)}, RewardMapper{vector_from_json(field(j, "weights"), "weights")});
  if (j.contains("start_state")) mdp = mdp.with_start_state(get<int>(j, "start_state"));
  if (j.contains("grid")) {
    const Json& g = j.at("grid");
    LayoutInfo layout;
    if (j.contains("layout")) {
      const Json& l = j.at("layout");
      layout.family = get<std::string>(l, "family");
      layout.obstacle_cells = get<std::vector<int>>(l, "obstacle_cells");
      layout.goal_cell = get<int>(l, "goal_cell");
      layout.object_cells = get<std::vector<int>>(l, "object_cells");
      layout.object_types = get<std::vector<int>>(l, "object_types");
      layout.type_rewards = get<std::vector<double>>(l, "type_rewards");
      layout.terminal_cell = get<int>(l, "terminal_cell");
    }
    mdp = mdp.with_grid(GridShape{get<int>(g, "width"), get<int>(g, "height")}, layout);
  }
  return mdp;
}

Json bundle_to_json(const SourceBundle& bundle) {
  Json records = Json::array();
  for (const SfRecord& r : bundle.dataset.records)
    records.push_back(Json::array({r.state, r.action, vector_to_json(r.psi), r.reward, r.next_state}));
  Json j;
  j["index"] = bundle.index;
  j["policy"] = bundle.policy.action;
  j["sf"] = {{"psi", matrix_to_json(bundle.sf.psi)}, {"visit_counts", bundle.sf.visit_counts}};
  j["dataset"] = {{"source_index", bundle.dataset.source_index},
                  {"feature_dim", bundle.dataset.feature_dim},
                  {"fields", {"state", "action", "psi", "reward", "next_state"}},
                  {"records", std::move(records)}};
  return j;
}

SourceBundle bundle_from_json(const Json& j) {
  SourceBundle b;
  b.index = get<int>(j, "index");
  b.policy.action = get<std::vector<int>>(j, "policy");
  const Json& sf = field(j, "sf");
  b.sf.psi = matrix_from_json(field(sf, "psi"), "sf.psi");
  b.sf.visit_counts = get<std::vector<int>>(sf, "visit_counts");
  const Json& ds = field(j, "dataset");
  b.dataset.source_index = get<int>(ds, "source_index");
  b.dataset.feature_dim = get<int>(ds, "feature_dim");
  for (const Json& r : field(ds, "records")) {
    require(r.is_array() && r.size() == 5, ErrorKind::Io, "dataset records have five fields");
    b.dataset.append({r[0].get<int>(), r[1].get<int>(), vector_from_json(r[2], "record psi"),
                      r[3].get<double>(), r[4].get<int>()});
  }
  return b;
}

Json qtable_to_json(const QTable& table) {
  return {{"q", matrix_to_json(table.q)},
          {"iterations", table.iterations},
          {"residual", table.residual}};
}

Json gp_to_json(const GpSfModel& model) {
  const int n = model.num_source();
  const Matrix x = model.inputs();
  const Matrix y = model.targets();
  return {{"lengthscale", model.kernel().lengthscale},
          {"sigma_sq", model.noise().sigma_sq},
          {"sigma_s_sq", model.noise().sigma_s_sq},
          {"input_dim", model.input_dim()},
          {"output_dim", model.output_dim()},
          {"source_inputs", matrix_to_json(x.leftCols(n).transpose())},
          {"source_targets", matrix_to_json(y.topRows(n))},
          {"target_inputs", matrix_to_json(x.rightCols(model.num_target()).transpose())},
          {"target_targets", matrix_to_json(y.bottomRows(model.num_target()))}};
}

GpSfModel gp_from_json(const Json& j) {
  const int in_dim = get<int>(j, "input_dim");
  const int out_dim = get<int>(j, "output_dim");
  // Row-stacked blocks; empty arrays carry no column count.
  auto block = [&](const char* key, int cols) {
    Matrix m = matrix_from_json(field(j, key), key);
    if (m.rows() == 0) return Matrix(0, cols);
    require(m.cols() == cols, ErrorKind::Io, std::string(key) + " has the wrong width");
    return m;
  };
  return GpSfModel::fit(block("source_inputs", in_dim).transpose(), block("source_targets", out_dim),
                        block("target_inputs", in_dim).transpose(), block("target_targets", out_dim),
                        Kernel{get<double>(j, "lengthscale")},
                        NoiseConfig{get<double>(j, "sigma_sq"), get<double>(j, "sigma_s_sq")});
}

std::string trace_csv(const PhaseTrace& trace) {
  std::string out =
      "step,phase,cumulative_episode_reward,episode_index,chosen_source,action,epsilon\n";
  out.reserve(trace.rows.size() * 48);
  for (const TraceRow& r : trace.rows)
    out += csv_line({std::to_string(r.step), to_string(r.phase),
                     format_double(r.cumulative_episode_reward), std::to_string(r.episode_index),
                     std::to_string(r.chosen_source), std::to_string(r.action),
                     format_double(r.epsilon)});
  return out;
}

std::string episodes_csv(const PhaseTrace& trace) {
  std::string out = "episode_index,phase,first_step,length,total_reward,completed\n";
  for (const EpisodeSummary& e : trace.episodes)
    out += csv_line({std::to_string(e.index), to_string(e.phase), std::to_string(e.first_step),
                     std::to_string(e.length), format_double(e.total_reward),
                     e.completed ? "1" : "0"});
  return out;
}

std::string learning_trace_csv(const std::vector<EpisodeRecord>& trace) {
  std::string out = "episode,total_reward,epsilon\n";
  for (const EpisodeRecord& r : trace)
    out += csv_line({std::to_string(r.episode), format_double(r.total_reward), format_double(r.epsilon)});
  return out;
}

std::string bound_csv(const BoundReport& report) {
  std::string out = "s,a,lhs,rhs,slack,term1,term2,term3\n";
  for (const BoundRow& r : report.rows)
    out += csv_line({std::to_string(r.s), std::to_string(r.a), format_double(r.lhs),
                     format_double(r.rhs), format_double(r.slack), format_double(r.term1),
                     format_double(r.term2), format_double(r.term3)});
  return out;
}

Json bound_summary_json(const BoundReport& report) {
  Json params = Json::object();
  for (const auto& [k, v] : report.parameters) params[k] = v;
  return {{"name", report.name},
          {"rows", report.rows.size()},
          {"violations", report.violations},
          {"min_slack", report.rows.empty() ? Json(nullptr) : Json(report.min_slack)},
          {"precondition_met", report.precondition_met},
          {"parameters", params}};
}

std::vector<EpisodeSummary> parse_episodes_csv(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  require(static_cast<bool>(std::getline(in, line)) &&
              line == "episode_index,phase,first_step,length,total_reward,completed",
          ErrorKind::Io, origin + ": unexpected episodes header");
  std::vector<EpisodeSummary> out;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    require(cells.size() == 6, ErrorKind::Io, origin + ":" + std::to_string(line_no) + ": expected 6 cells");
    EpisodeSummary e;
    try {
      e.index = std::stoi(cells[0]);
      if (cells[1] == "adaptation") e.phase = Phase::kAdaptation;
      else if (cells[1] == "testing") e.phase = Phase::kTesting;
      else if (cells[1] == "learning") e.phase = Phase::kLearning;
      else throw Error(ErrorKind::Io, "unknown phase '" + cells[1] + "'");
      e.first_step = std::stoi(cells[2]);
      e.length = std::stoi(cells[3]);
      e.total_reward = std::stod(cells[4]);
      e.completed = cells[5] == "1";
    } catch (const std::logic_error& ex) {
      throw Error(ErrorKind::Io, origin + ":" + std::to_string(line_no) + ": " + ex.what());
    }
    out.push_back(e);
  }
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::Io, "file not found or unreadable: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json read_json_file(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Io, path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  require(!ec, ErrorKind::Io, "cannot create directory " + path.parent_path().string());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(out), ErrorKind::Io, "cannot write " + tmp.string());
    out << content;
    require(static_cast<bool>(out), ErrorKind::Io, "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path, ec);
  require(!ec, ErrorKind::Io, "cannot rename " + tmp.string() + " to " + path.string());
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

}  // namespace sfde
