#include "csched/contention.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "csched/error.hpp"

namespace csched {

std::string_view to_string(ModelClass model) {
  switch (model) {
    case ModelClass::GNN: return "GNN";
    case ModelClass::IMG: return "IMG";
    case ModelClass::DLRM: return "DLRM";
    case ModelClass::LM: return "LM";
    case ModelClass::FSDP: return "FSDP";
    case ModelClass::MoE: return "MoE";
  }
  return "?";
}

std::string_view to_string(CommPattern pattern) {
  switch (pattern) {
    case CommPattern::AllReduce: return "AllReduce";
    case CommPattern::ReduceScatterAllGather: return "ReduceScatter+AllGather";
    case CommPattern::AllToAll: return "AllToAll";
  }
  return "?";
}

std::optional<ModelClass> parse_model_class(std::string_view name) {
  auto upper = [](std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
  };
  const std::string key = upper(name);
  for (ModelClass m : kAllModelClasses)
    if (upper(to_string(m)) == key) return m;
  return std::nullopt;
}

void ModelProfile::validate() const {
  if (!(avg_bandwidth > 0.0)) throw ValidationError("avg_bandwidth must be > 0");
  if (!(comm_comp_ratio > 0.0)) throw ValidationError("comm_comp_ratio must be > 0");
}

const ModelProfile& default_profile(ModelClass model) {
  static const std::array<ModelProfile, kNumModelClasses> profiles = {{
      {ModelClass::GNN, 24.63, 0.57, CommPattern::AllReduce},
      {ModelClass::IMG, 211.25, 2.43, CommPattern::AllReduce},
      {ModelClass::DLRM, 170.28, 13.36, CommPattern::AllReduce},
      {ModelClass::LM, 854.82, 1.87, CommPattern::AllReduce},
      {ModelClass::FSDP, 2672.40, 7.32, CommPattern::ReduceScatterAllGather},
      {ModelClass::MoE, 929.48, 13.79, CommPattern::AllToAll},
  }};
  return profiles[static_cast<std::size_t>(model)];
}

void CSTable::set(const CSKey& key, double value) {
  if (!std::isfinite(value) || value < 1.0)
    throw ValidationError("contention sensitivity must be >= 1, got " + std::to_string(value));
  entries_[key] = value;
}

std::optional<double> CSTable::find(const CSKey& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

int parse_count(const std::string& field, std::size_t line, const char* what) {
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(field, &used);
  } catch (const std::exception&) {
    throw ParseError(std::string("bad ") + what + " '" + field + "'", line);
  }
  if (used != field.size()) throw ParseError(std::string("bad ") + what + " '" + field + "'", line);
  return v;
}

Shape parse_shape(const std::string& nodes_field, const std::string& gpus_field, std::size_t line) {
  const int nodes = parse_count(nodes_field, line, "node count");
  const int gpus = parse_count(gpus_field, line, "GPUs per node");
  if (!is_power_of_two(nodes)) throw ParseError("node count must be a power of two", line);
  if (gpus < 1) throw ParseError("GPUs per node must be >= 1", line);
  return Shape{std::countr_zero(static_cast<unsigned>(nodes)), gpus};
}

ModelClass parse_model(const std::string& field, std::size_t line) {
  auto m = parse_model_class(field);
  if (!m) throw ParseError("unknown model class '" + field + "'", line);
  return *m;
}

}  // namespace

CSTable parse_cs_table(std::istream& in) {
  CSTable table;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, ',');) fields.push_back(trim(f));
    if (fields.size() != 7)
      throw ParseError("expected 7 comma-separated fields, got " + std::to_string(fields.size()), line_no);
    CSKey key{parse_model(fields[0], line_no), parse_shape(fields[1], fields[2], line_no),
              parse_model(fields[3], line_no), parse_shape(fields[4], fields[5], line_no)};
    double value = 0.0;
    std::size_t used = 0;
    try {
      value = std::stod(fields[6], &used);
    } catch (const std::exception&) {
      throw ParseError("bad CS value '" + fields[6] + "'", line_no);
    }
    if (used != fields[6].size()) throw ParseError("bad CS value '" + fields[6] + "'", line_no);
    if (!std::isfinite(value) || value < 1.0)
      throw ValidationError("line " + std::to_string(line_no) + ": contention sensitivity " + fields[6] +
                            " is below 1");
    table.set(key, value);
  }
  return table;
}

CSTable load_cs_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileError("cannot open CS table '" + path + "'");
  return parse_cs_table(in);
}

void write_cs_table(std::ostream& out, const CSTable& table) {
  out << "# target_model,target_nodes,target_gpus_per_node,coloc_model,coloc_nodes,coloc_gpus_per_node,cs\n";
  for (const auto& [key, value] : table.entries()) {
    out << to_string(key.target) << ',' << key.target_shape.num_nodes() << ','
        << key.target_shape.gpus_per_node << ',' << to_string(key.colocated) << ','
        << key.colocated_shape.num_nodes() << ',' << key.colocated_shape.gpus_per_node << ','
        << std::setprecision(17) << value << '\n';
  }
}

const std::shared_ptr<const CSTable>& default_cs_table() {
  static const std::shared_ptr<const CSTable> table = [] {
    std::istringstream in{std::string(default_cs_table_text())};
    return std::make_shared<const CSTable>(parse_cs_table(in));
  }();
  return table;
}

void ContentionParams::validate() const {
  if (mode == ContentionMode::Table && !table) throw ConfigError("table contention mode requires a CS table");
}

namespace {

bool shares_node(const Placement& a, const Placement& b) {
  for (int x : a.nodes)
    for (int y : b.nodes)
      if (x == y) return true;
  return false;
}

bool on_node(const Placement& p, int node) {
  return std::find(p.nodes.begin(), p.nodes.end(), node) != p.nodes.end();
}

double per_node_demand(const PlacedJob& j) {
  return j.profile->avg_bandwidth / static_cast<double>(j.placement->num_nodes());
}

// Bandwidth-sharing model. A job spanning nodes loads each of its nodes' network
// links with avg_bandwidth / |nodes|; a single-node job loads the node's internal
// bus instead. A link is oversubscribed when total load exceeds both its capacity
// and the job's own load (so an isolated job is never penalised).
double synthetic_cs(const PlacedJob& job, std::span<const PlacedJob> others, const ClusterConfig& config) {
  const bool uses_network = job.placement->spans_nodes();
  const double capacity = uses_network ? config.inter_node_bandwidth : config.intra_node_bandwidth;
  const double own = per_node_demand(job);
  const double reference = std::max(capacity, own);
  double worst = 1.0;
  for (int node : job.placement->nodes) {
    double load = own;
    for (const PlacedJob& o : others)
      if (o.placement->spans_nodes() == uses_network && on_node(*o.placement, node)) load += per_node_demand(o);
    worst = std::max(worst, load / reference);
  }
  return 1.0 + job.profile->comm_fraction() * (worst - 1.0);
}

Shape shape_of(const Placement& p) { return Shape{p.level(), p.gpus_per_node_used}; }

void check_placed(const PlacedJob& j) {
  if (j.profile == nullptr || j.placement == nullptr || j.placement->nodes.empty())
    throw PreconditionError("contention sensitivity requires a placed job");
}

}  // namespace

double contention_sensitivity(const PlacedJob& job, std::span<const PlacedJob> others,
                              const ContentionParams& params, const ClusterConfig& config) {
  check_placed(job);
  if (!params.enabled) return 1.0;
  std::vector<PlacedJob> sharing;
  for (const PlacedJob& o : others) {
    check_placed(o);
    if (o.placement != job.placement && shares_node(*job.placement, *o.placement)) sharing.push_back(o);
  }
  if (sharing.empty()) return 1.0;

  if (params.mode == ContentionMode::Synthetic) return synthetic_cs(job, sharing, config);

  params.validate();
  double cs = 1.0;
  for (const PlacedJob& o : sharing) {
    CSKey key{job.profile->model_class, shape_of(*job.placement), o.profile->model_class, shape_of(*o.placement)};
    auto v = params.table->find(key);
    cs = std::max(cs, v ? *v : synthetic_cs(job, std::span<const PlacedJob>(&o, 1), config));
  }
  return cs;
}

double contended_throughput(double ideal_throughput, const PlacedJob& job,
                            std::span<const PlacedJob> others, const ContentionParams& params,
                            const ClusterConfig& config) {
  return ideal_throughput / contention_sensitivity(job, others, params, config);
}

}  // namespace csched
