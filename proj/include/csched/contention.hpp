#pragma once

#include <array>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "csched/cluster.hpp"

namespace csched {

enum class ModelClass { GNN, IMG, DLRM, LM, FSDP, MoE };
inline constexpr int kNumModelClasses = 6;
inline constexpr std::array<ModelClass, kNumModelClasses> kAllModelClasses = {
    ModelClass::GNN, ModelClass::IMG, ModelClass::DLRM, ModelClass::LM, ModelClass::FSDP, ModelClass::MoE};

enum class CommPattern { AllReduce, ReduceScatterAllGather, AllToAll };

std::string_view to_string(ModelClass model);
std::string_view to_string(CommPattern pattern);
// Case-insensitive. Returns nullopt for unknown names.
std::optional<ModelClass> parse_model_class(std::string_view name);

struct ModelProfile {
  ModelClass model_class = ModelClass::GNN;
  double avg_bandwidth = 0.0;   // MB/s
  double comm_comp_ratio = 0.0;  // communication time / computation time
  CommPattern comm_pattern = CommPattern::AllReduce;

  // Fraction of an iteration spent communicating, r / (1 + r), assuming no
  // overlap between communication and computation.
  double comm_fraction() const { return comm_comp_ratio / (1.0 + comm_comp_ratio); }
  void validate() const;
};

// Measured characteristics of the six workload classes.
const ModelProfile& default_profile(ModelClass model);

struct CSKey {
  ModelClass target = ModelClass::GNN;
  Shape target_shape;
  ModelClass colocated = ModelClass::GNN;
  Shape colocated_shape;

  friend auto operator<=>(const CSKey&, const CSKey&) = default;
};

// Pairwise contention sensitivities indexed by (target model, target shape,
// co-located model, co-located shape). Values are directional: CS(A|B) and
// CS(B|A) are independent entries.
class CSTable {
 public:
  // Throws ValidationError when value < 1.
  void set(const CSKey& key, double value);
  std::optional<double> find(const CSKey& key) const;
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::map<CSKey, double>& entries() const { return entries_; }

 private:
  std::map<CSKey, double> entries_;
};

// Parses the comma-separated table format:
//   target_model,target_nodes,target_gpus_per_node,coloc_model,coloc_nodes,coloc_gpus_per_node,cs
// Blank lines and '#' comments are ignored. Throws ParseError, ValidationError.
CSTable parse_cs_table(std::istream& in);
CSTable load_cs_table(const std::string& path);
void write_cs_table(std::ostream& out, const CSTable& table);

// Calibration table shipped with the simulator: the reported worst-case FSDP/MoE
// and FSDP/IMG pairs, with everything else left to the synthetic model.
std::string_view default_cs_table_text();
const std::shared_ptr<const CSTable>& default_cs_table();

enum class ContentionMode { Synthetic, Table };

struct ContentionParams {
  ContentionMode mode = ContentionMode::Synthetic;
  std::shared_ptr<const CSTable> table;
  // When false every job runs at its ideal throughput (CS == 1).
  bool enabled = true;

  // Throws ConfigError when table mode has no table.
  void validate() const;
  static ContentionParams synthetic() { return {}; }
  static ContentionParams with_table(std::shared_ptr<const CSTable> t) {
    return {ContentionMode::Table, std::move(t), true};
  }
  static ContentionParams disabled() { return {ContentionMode::Synthetic, nullptr, false}; }
};

struct PlacedJob {
  const ModelProfile* profile = nullptr;
  const Placement* placement = nullptr;
};

// Ideal-to-contended throughput ratio of `job` given the other placed jobs.
// Jobs in `others` that share no node with `job` are ignored.
// Throws PreconditionError for an unplaced job.
double contention_sensitivity(const PlacedJob& job, std::span<const PlacedJob> others,
                              const ContentionParams& params, const ClusterConfig& config);

double contended_throughput(double ideal_throughput, const PlacedJob& job,
                            std::span<const PlacedJob> others, const ContentionParams& params,
                            const ClusterConfig& config);

}  // namespace csched
