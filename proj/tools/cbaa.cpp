// cbaa: super-host detection over IP-pair traces.
//
//   cbaa synth    --planted 50:2048-16384 --background-hosts 100000 -o trace.txt --truth truth.csv
//   cbaa update   -i trace.txt -o sketch.cba
//   cbaa merge    a.cba b.cba -o global.cba
//   cbaa recover  -i global.cba --theta 1024 --report-format csv -o report.csv
//   cbaa oracle   -i trace.txt --theta 1024
//   cbaa evaluate --report report.csv --trace trace.txt
//   cbaa pipeline -i trace.txt --routers 4 --policy hash-by-pair --evaluate
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 tuple-cap overflow.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "cbaa/distributed.hpp"
#include "cbaa/metrics.hpp"
#include "cbaa/recovery.hpp"
#include "cbaa/report.hpp"
#include "cbaa/trace.hpp"
#include "cbaa/update.hpp"

namespace {

using namespace cbaa;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitOverflow = 3;

// Usage errors discovered after CLI11 parsing (bad enum values and the like).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TraceInput {
  std::string path;
  std::string format = "text";
  std::vector<std::string> innerCidrs;

  void add_to(CLI::App* cmd) {
    cmd->add_option("-i,--input", path, "trace file")->required();
    cmd->add_option("--format", format, "trace format: text, binary or binary-ts")
        ->check(CLI::IsMember({"text", "binary", "binary-ts"}));
    cmd->add_option("--inner-cidr", innerCidrs,
                    "treat addresses in these prefixes as inner and reorder raw pairs; others are skipped");
  }

  std::vector<TraceRecord> load() const {
    auto records = read_trace_file(path, *parse_trace_format(format));
    if (innerCidrs.empty()) return records;
    std::vector<Cidr> nets;
    for (const auto& text : innerCidrs) {
      auto c = parse_cidr(text);
      if (!c) throw UsageError("bad --inner-cidr '" + text + "'");
      nets.push_back(*c);
    }
    Classified c = classify_direction(records, nets);
    if (c.skipped > 0) std::cerr << "skipped " << c.skipped << " pairs without exactly one inner address\n";
    return std::move(c.records);
  }
};

struct Windowing {
  std::uint64_t seconds = 0;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--window-seconds", seconds, "split the trace into windows of this length (needs timestamps)");
  }

  std::vector<TimeWindow> apply(std::vector<TraceRecord> records) const {
    if (seconds == 0) {
      std::vector<TimeWindow> one(1);
      one[0].records = std::move(records);
      return one;
    }
    return split_windows(records, seconds);
  }
};

struct RecoverFlags {
  double theta = 1024;
  std::uint64_t tupleCap = std::uint64_t{1} << 24;
  std::string formula = "paper";
  unsigned workers = 1;
  std::string reportFormat = "text";

  void add_to(CLI::App* cmd) {
    cmd->add_option("--theta", theta, "cardinality threshold")->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--tuple-cap", tupleCap, "skip sketches with more candidate tuples than this")
        ->capture_default_str();
    cmd->add_option("--threshold-formula", formula, "paper or inverted")
        ->check(CLI::IsMember({"paper", "inverted"}))
        ->capture_default_str();
    cmd->add_option("--workers", workers, "worker threads")->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--report-format", reportFormat, "text or csv")
        ->check(CLI::IsMember({"text", "csv"}))
        ->capture_default_str();
  }

  RecoveryOptions options() const {
    RecoveryOptions o;
    o.theta = theta;
    o.tupleCap = tupleCap;
    o.formula = formula == "inverted" ? ThresholdFormula::Inverted : ThresholdFormula::Paper;
    o.workers = workers;
    return o;
  }

  ReportFormat report_format() const { return reportFormat == "csv" ? ReportFormat::Csv : ReportFormat::Text; }
};

SketchConfig load_config(const std::string& path) { return path.empty() ? default_config() : load_config_file(path); }

// Writes to the named file, or stdout when the name is empty or "-".
template <typename Fn>
void with_output(const std::string& path, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  fn(out);
  if (!out) throw std::runtime_error("write failed on " + path);
}

std::string window_path(const std::string& base, const TimeWindow& w) { return base + ".w" + std::to_string(w.start); }

void write_truth(std::ostream& out, const GroundTruth& truth, double minCardinality) {
  std::vector<std::pair<std::uint32_t, std::uint64_t>> rows;
  for (const auto& [ip, card] : truth.cardinalities)
    if (static_cast<double>(card) >= minCardinality) rows.emplace_back(ip, card);
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  out << "ip,cardinality\n";
  for (const auto& [ip, card] : rows) out << format_ipv4(ip) << ',' << card << '\n';
}

GroundTruth read_truth(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  GroundTruth truth;
  std::string line;
  std::uint64_t lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    if (line.empty() || line[0] == '#' || line.rfind("ip,", 0) == 0) continue;
    const auto comma = line.find(',');
    const auto ip = parse_ipv4(std::string_view(line).substr(0, comma));
    std::uint64_t card = 0;
    try {
      if (comma == std::string::npos || !ip) throw std::invalid_argument("");
      card = std::stoull(line.substr(comma + 1));
    } catch (const std::exception&) {
      throw TraceError(lineNo, "truth line " + std::to_string(lineNo) + ": expected ip,cardinality");
    }
    truth.cardinalities[*ip] = card;
    truth.flowCount += card;
  }
  return truth;
}

int cmd_update(const TraceInput& input, const Windowing& windowing, const std::string& configPath,
               const std::string& output, unsigned workers) {
  const SketchConfig config = load_config(configPath);
  const auto windows = windowing.apply(input.load());
  for (const auto& w : windows) {
    CubeOfBitsArrays cube(config);
    const auto pairs = to_pairs(w.records);
    record_stream(cube, pairs, {workers, StreamOptions{}.batchSize});
    const std::string path = windowing.seconds ? window_path(output, w) : output;
    write_sketch_file(path, cube);
    std::cerr << "wrote " << path << " (" << pairs.size() << " pairs)\n";
  }
  return kExitOk;
}

int cmd_merge(const std::vector<std::string>& inputs, const std::string& output) {
  GlobalMerger merger;
  for (const auto& path : inputs) merger.add(read_file_bytes(path), path);
  write_sketch_file(output, merger.take());
  return kExitOk;
}

int report_recovery(const RecoveryResult& result, const RecoverFlags& flags, const std::optional<GroundTruth>& truth,
                    const std::string& output, const std::string& heading = {}) {
  ReportContext ctx;
  ctx.theta = flags.theta;
  ctx.overflows = result.overflows;
  if (truth) ctx.metrics = score_detection(std::span<const SuperHostRecord>(result.hosts), *truth, flags.theta);
  with_output(output, [&](std::ostream& out) {
    if (!heading.empty()) out << (flags.report_format() == ReportFormat::Csv ? "# " : "") << heading << '\n';
    write_report(out, result.hosts, ctx, flags.report_format());
  });
  for (const auto& o : result.overflows)
    std::cerr << "tuple cap exceeded in sketch " << o.csIdx << " (" << o.tupleCount << " tuples)\n";
  return result.overflows.empty() ? kExitOk : kExitOverflow;
}

int cmd_recover(const std::string& input, const RecoverFlags& flags, const std::string& output) {
  const CubeOfBitsArrays cube = read_sketch_file(input);
  return report_recovery(recover_all(cube, flags.options()), flags, std::nullopt, output);
}

int cmd_oracle(const TraceInput& input, double theta, const std::string& output) {
  const auto records = input.load();
  const GroundTruth truth = exact_cardinalities(to_pairs(records));
  with_output(output, [&](std::ostream& out) { write_truth(out, truth, theta); });
  return kExitOk;
}

int cmd_evaluate(const std::string& reportPath, const TraceInput& input, const std::string& truthPath, double theta,
                 const std::string& output) {
  std::ifstream in(reportPath);
  if (!in) throw std::runtime_error("cannot open " + reportPath);
  const auto hosts = read_report_csv(in);
  const GroundTruth truth = truthPath.empty() ? exact_cardinalities(to_pairs(input.load())) : read_truth(truthPath);
  const MetricsReport m = score_detection(std::span<const SuperHostRecord>(hosts), truth, theta);
  with_output(output, [&](std::ostream& out) { write_metrics(out, m, theta); });
  return kExitOk;
}

struct SynthFlags {
  SynthSpec spec;
  std::vector<std::string> planted;
  std::string output;
  std::string truthPath;
  std::string format = "text";

  void add_to(CLI::App* cmd) {
    cmd->add_option("--background-hosts", spec.backgroundHosts, "number of ordinary hosts")->capture_default_str();
    cmd->add_option("--background-min", spec.backgroundCardinality.min)->capture_default_str();
    cmd->add_option("--background-max", spec.backgroundCardinality.max)->capture_default_str();
    cmd->add_option("--planted", planted, "planted hosts as COUNT:MIN-MAX or COUNT:CARD (repeatable)");
    cmd->add_option("--dup", spec.duplicationFactor, "mean packets per flow (>= 1)")->capture_default_str();
    cmd->add_option("--seed", spec.seed)->capture_default_str();
    cmd->add_option("--start-time", spec.startTime, "first timestamp");
    cmd->add_option("--duration", spec.durationSeconds, "spread timestamps over this many seconds (0 = none)");
    cmd->add_option("-o,--output", output, "trace file")->required();
    cmd->add_option("--truth", truthPath, "also write exact cardinalities (ip,cardinality)");
    cmd->add_option("--format", format)->check(CLI::IsMember({"text", "binary", "binary-ts"}));
  }

  SynthSpec resolved() const {
    SynthSpec s = spec;
    for (const auto& text : planted) {
      unsigned long long count = 0, lo = 0, hi = 0;
      char extra = 0;
      if (std::sscanf(text.c_str(), "%llu:%llu-%llu%c", &count, &lo, &hi, &extra) == 3) {
      } else if (std::sscanf(text.c_str(), "%llu:%llu%c", &count, &lo, &extra) == 2) {
        hi = lo;
      } else {
        throw UsageError("bad --planted '" + text + "', expected COUNT:MIN-MAX");
      }
      if (lo > hi) throw UsageError("bad --planted '" + text + "', MIN > MAX");
      s.planted.push_back({count, {lo, hi}});
    }
    if (s.backgroundCardinality.min > s.backgroundCardinality.max)
      throw UsageError("--background-min exceeds --background-max");
    return s;
  }
};

int cmd_synth(const SynthFlags& flags) {
  const SynthTrace t = synth_trace(flags.resolved());
  write_trace_file(flags.output, t.records, *parse_trace_format(flags.format));
  if (!flags.truthPath.empty()) with_output(flags.truthPath, [&](std::ostream& out) { write_truth(out, t.truth, 0); });
  std::cerr << "wrote " << t.records.size() << " records, " << t.truth.cardinalities.size() << " hosts, "
            << t.truth.flowCount << " flows\n";
  return kExitOk;
}

struct PipelineFlags {
  unsigned routers = 1;
  std::string policy = "hash-by-pair";
  bool evaluate = false;
  std::string truthPath;
  std::string sketchDir;
};

// Each router builds and serializes a local cube; the collector folds the
// serialized cubes and runs recovery on the result.
int cmd_pipeline(const TraceInput& input, const Windowing& windowing, const std::string& configPath,
                 const RecoverFlags& flags, const PipelineFlags& p, const std::string& output) {
  const SketchConfig config = load_config(configPath);
  const PartitionPolicy policy{*parse_partition_mode(p.policy), p.routers};
  const auto windows = windowing.apply(input.load());
  const std::optional<GroundTruth> fileTruth =
      p.truthPath.empty() ? std::nullopt : std::optional<GroundTruth>(read_truth(p.truthPath));

  int status = kExitOk;
  for (const auto& w : windows) {
    const auto pairs = to_pairs(w.records);
    const auto parts = partition_trace(pairs, policy);
    GlobalMerger merger;
    for (unsigned r = 0; r < parts.size(); ++r) {
      CubeOfBitsArrays local(config);
      record_stream(local, parts[r], {flags.workers, StreamOptions{}.batchSize});
      const auto bytes = serialize(local);
      const std::string label = "router " + std::to_string(r);
      if (!p.sketchDir.empty()) {
        std::ofstream f(p.sketchDir + "/router" + std::to_string(r) + ".w" + std::to_string(w.start) + ".cba",
                        std::ios::binary);
        f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
      }
      merger.add(bytes, label);
    }
    const CubeOfBitsArrays global = merger.take();
    const RecoveryResult result = recover_all(global, flags.options());

    std::optional<GroundTruth> truth = fileTruth;
    if (!truth && p.evaluate) truth = exact_cardinalities(pairs);
    const std::string heading = windowing.seconds ? "window " + std::to_string(w.start) : std::string{};
    const std::string path = windowing.seconds && !output.empty() && output != "-" ? window_path(output, w) : output;
    status = std::max(status, report_recovery(result, flags, truth, path, heading));
  }
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Super-host detection with a cube of bits arrays"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "cbaa 0.1.0");

  std::string configPath;
  std::string output;
  unsigned workers = 1;
  TraceInput traceIn;
  Windowing windowing;
  RecoverFlags recover;
  double theta = 1024;

  auto* update = app.add_subcommand("update", "trace -> sketch file");
  traceIn.add_to(update);
  windowing.add_to(update);
  update->add_option("--config", configPath, "key=value sketch config file");
  update->add_option("-o,--output", output, "sketch file (windows get a .w<start> suffix)")->required();
  update->add_option("--workers", workers)->check(CLI::PositiveNumber);

  std::vector<std::string> mergeInputs;
  auto* merge = app.add_subcommand("merge", "sketch files -> merged sketch file");
  merge->add_option("inputs", mergeInputs, "sketch files")->required();
  merge->add_option("-o,--output", output)->required();

  std::string sketchIn;
  auto* recoverCmd = app.add_subcommand("recover", "sketch file -> super-host report");
  recoverCmd->add_option("-i,--input", sketchIn, "sketch file")->required();
  recoverCmd->add_option("-o,--output", output, "report file (default stdout)");
  recover.add_to(recoverCmd);

  auto* oracle = app.add_subcommand("oracle", "trace -> exact super hosts");
  traceIn.add_to(oracle);
  oracle->add_option("--theta", theta)->capture_default_str();
  oracle->add_option("-o,--output", output);

  std::string reportPath, truthPath;
  TraceInput evalTrace;
  auto* evaluate = app.add_subcommand("evaluate", "CSV report + trace or truth -> FNR/FPR");
  evaluate->add_option("--report", reportPath, "CSV report from recover")->required();
  evaluate->add_option("--trace", evalTrace.path, "trace to compute exact cardinalities from");
  evaluate->add_option("--format", evalTrace.format, "trace format")
      ->check(CLI::IsMember({"text", "binary", "binary-ts"}));
  evaluate->add_option("--inner-cidr", evalTrace.innerCidrs);
  evaluate->add_option("--truth", truthPath, "ip,cardinality file from synth or oracle");
  evaluate->add_option("--theta", theta)->capture_default_str();
  evaluate->add_option("-o,--output", output);

  SynthFlags synth;
  auto* synthCmd = app.add_subcommand("synth", "generate a trace with known cardinalities");
  synth.add_to(synthCmd);

  PipelineFlags pipeline;
  auto* pipe = app.add_subcommand("pipeline", "partition, build local sketches, merge, recover");
  traceIn.add_to(pipe);
  windowing.add_to(pipe);
  pipe->add_option("--config", configPath);
  recover.add_to(pipe);
  pipe->add_option("--routers", pipeline.routers, "number of edge routers")->check(CLI::PositiveNumber);
  pipe->add_option("--policy", pipeline.policy, "hash-by-pair, hash-by-inner or round-robin")
      ->check(CLI::IsMember({"hash-by-pair", "hash-by-inner", "round-robin"}));
  pipe->add_flag("--evaluate", pipeline.evaluate, "score against exact cardinalities of the trace");
  pipe->add_option("--truth", pipeline.truthPath, "score against this ip,cardinality file");
  pipe->add_option("--sketch-dir", pipeline.sketchDir, "also write each router's sketch here");
  pipe->add_option("-o,--output", output, "report file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*update) return cmd_update(traceIn, windowing, configPath, output, workers);
    if (*merge) return cmd_merge(mergeInputs, output);
    if (*recoverCmd) return cmd_recover(sketchIn, recover, output);
    if (*oracle) return cmd_oracle(traceIn, theta, output);
    if (*evaluate) {
      if (evalTrace.path.empty() == truthPath.empty()) throw UsageError("evaluate needs exactly one of --trace, --truth");
      return cmd_evaluate(reportPath, evalTrace, truthPath, theta, output);
    }
    if (*synthCmd) return cmd_synth(synth);
    if (*pipe) return cmd_pipeline(traceIn, windowing, configPath, recover, pipeline, output);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
