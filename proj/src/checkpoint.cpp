#include "csched/checkpoint.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "csched/error.hpp"
#include "csched/workload.hpp"

namespace csched {

std::string NetArchitecture::describe() const {
  std::ostringstream s;
  s << "input_dim=" << input_dim << " hidden=" << hidden << " heads=" << heads << " head_size=" << head_size
    << " activation=" << activation;
  return s.str();
}

namespace {

constexpr std::string_view kMagic = "csched-policy-checkpoint";

std::map<std::string, std::string> fields_of(std::istringstream& ss) {
  std::map<std::string, std::string> f;
  for (std::string tok; ss >> tok;) {
    auto eq = tok.find('=');
    if (eq != std::string::npos) f[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  return f;
}

template <typename T>
T number(const std::map<std::string, std::string>& f, const std::string& key, std::size_t line) {
  auto it = f.find(key);
  if (it == f.end()) throw ParseError("checkpoint missing '" + key + "'", line);
  T v{};
  const std::string& s = it->second;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) throw ParseError("bad value for '" + key + "'", line);
  return v;
}

bool next_line(std::istream& in, std::string& line, std::size_t& line_no) {
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty()) return true;
  }
  return false;
}

}  // namespace

void write_checkpoint(std::ostream& out, const PolicyNetd& policy, const CheckpointMeta& meta) {
  out << kMagic << ' ' << kCheckpointVersion << '\n';
  out << "arch " << policy.architecture().describe() << '\n';
  out << "meta seed=" << meta.seed << " w1=" << format_double(meta.weights.w1)
      << " w2=" << format_double(meta.weights.w2()) << " episodes=" << meta.episodes
      << " trace_id=" << (meta.trace_id.empty() ? "-" : meta.trace_id) << '\n';
  policy.params().visit([&](const char* name, const auto& m) {
    out << "tensor " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) out << (c ? " " : "") << format_double(m(r, c));
      out << '\n';
    }
  });
  out << "end\n";
}

Checkpoint read_checkpoint(std::istream& in, const std::optional<NetArchitecture>& expected) {
  std::string line;
  std::size_t line_no = 0;
  if (!next_line(in, line, line_no)) throw ParseError("empty checkpoint", 1);
  {
    std::istringstream ss(line);
    std::string magic;
    int version = 0;
    ss >> magic >> version;
    if (magic != kMagic) throw ParseError("not a policy checkpoint", line_no);
    if (version != kCheckpointVersion)
      throw LoadError("checkpoint format version " + std::to_string(version) + " does not match supported version " +
                      std::to_string(kCheckpointVersion));
  }

  if (!next_line(in, line, line_no) || line.rfind("arch ", 0) != 0) throw ParseError("missing arch line", line_no);
  NetArchitecture arch;
  {
    std::istringstream ss(line.substr(5));
    auto f = fields_of(ss);
    arch.input_dim = number<int>(f, "input_dim", line_no);
    arch.hidden = number<int>(f, "hidden", line_no);
    arch.heads = number<int>(f, "heads", line_no);
    arch.head_size = number<int>(f, "head_size", line_no);
    arch.activation = f.count("activation") ? f["activation"] : "";
    if (arch.input_dim < 1 || arch.hidden < 1 || arch.heads < 1 || arch.head_size < 1)
      throw ParseError("invalid architecture", line_no);
  }
  if (arch.activation != "tanh")
    throw LoadError("unsupported activation '" + arch.activation + "' in checkpoint (" + arch.describe() + ")");
  if (expected && !(*expected == arch))
    throw LoadError("checkpoint architecture (" + arch.describe() + ") does not match expected (" +
                    expected->describe() + ")");

  if (!next_line(in, line, line_no) || line.rfind("meta ", 0) != 0) throw ParseError("missing meta line", line_no);
  CheckpointMeta meta;
  {
    std::istringstream ss(line.substr(5));
    auto f = fields_of(ss);
    meta.seed = number<std::uint64_t>(f, "seed", line_no);
    meta.weights = RewardWeights::from_pair(number<double>(f, "w1", line_no), number<double>(f, "w2", line_no));
    meta.episodes = number<int>(f, "episodes", line_no);
    meta.trace_id = f.count("trace_id") && f["trace_id"] != "-" ? f["trace_id"] : "";
  }

  auto params = PolicyNetd::Params::zeros(arch);
  params.visit([&](const char* name, auto& m) {
    if (!next_line(in, line, line_no)) throw ParseError("truncated checkpoint: missing tensor " + std::string(name), line_no);
    std::istringstream header(line);
    std::string tag, tname;
    Eigen::Index rows = -1, cols = -1;
    header >> tag >> tname >> rows >> cols;
    if (tag != "tensor" || tname != name) throw ParseError("expected tensor " + std::string(name), line_no);
    if (rows != m.rows() || cols != m.cols())
      throw ParseError("tensor " + std::string(name) + " has wrong dimensions", line_no);
    for (Eigen::Index r = 0; r < rows; ++r) {
      if (!next_line(in, line, line_no)) throw ParseError("truncated checkpoint in tensor " + std::string(name), line_no);
      const char* p = line.data();
      const char* end = line.data() + line.size();
      for (Eigen::Index c = 0; c < cols; ++c) {
        while (p < end && *p == ' ') ++p;
        double v = 0.0;
        auto res = std::from_chars(p, end, v);
        if (res.ec != std::errc{}) throw ParseError("bad value in tensor " + std::string(name), line_no);
        m(r, c) = v;
        p = res.ptr;
      }
      while (p < end && *p == ' ') ++p;
      if (p != end) throw ParseError("extra values in tensor " + std::string(name), line_no);
    }
  });
  if (!next_line(in, line, line_no) || line != "end") throw ParseError("truncated checkpoint: missing end marker", line_no);
  return Checkpoint{PolicyNetd(arch, std::move(params)), meta};
}

void save_checkpoint(const std::string& path, const PolicyNetd& policy, const CheckpointMeta& meta) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FileError("cannot write checkpoint '" + tmp + "'");
    write_checkpoint(out, policy, meta);
    out.flush();
    if (!out) throw FileError("failed writing checkpoint '" + tmp + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw FileError("cannot move checkpoint into place at '" + path + "': " + ec.message());
}

Checkpoint load_checkpoint(const std::string& path, const std::optional<NetArchitecture>& expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError("cannot open checkpoint '" + path + "'");
  return read_checkpoint(in, expected);
}

}  // namespace csched
