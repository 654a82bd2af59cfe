#include "coinc/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include "coinc/validation.hpp"

namespace coinc {

namespace {

// Writes to `<path>.partial` and renames on commit; the partial file is
// removed if the writer is destroyed uncommitted.
class AtomicFile {
 public:
  explicit AtomicFile(std::filesystem::path path)
      : path_(std::move(path)), temp_(path_.string() + ".partial") {
    stream_.open(temp_, std::ios::binary | std::ios::trunc);
    if (!stream_) throw std::domain_error("cannot write " + path_.string());
  }
  AtomicFile(const AtomicFile&) = delete;
  AtomicFile& operator=(const AtomicFile&) = delete;
  ~AtomicFile() {
    if (!committed_) {
      stream_.close();
      std::error_code ec;
      std::filesystem::remove(temp_, ec);
    }
  }

  std::ostream& stream() { return stream_; }

  void commit() {
    stream_.close();
    if (!stream_) throw std::domain_error("failed writing " + path_.string());
    std::filesystem::rename(temp_, path_);
    committed_ = true;
  }

 private:
  std::filesystem::path path_;
  std::filesystem::path temp_;
  std::ofstream stream_;
  bool committed_ = false;
};

/// Routes a writer to the output file, or to `out` when none is set.
template <class Writer>
void emit(const std::filesystem::path& path, std::ostream& out, Writer&& write) {
  if (path.empty()) {
    write(out);
    return;
  }
  AtomicFile file(path);
  write(file.stream());
  file.commit();
}

std::filesystem::path sibling(const std::filesystem::path& path,
                              const std::string& suffix) {
  return path.string() + suffix;
}

std::vector<std::int64_t> resolve_lags(const RunConfig& config,
                                       std::int64_t horizon) {
  if (config.lags && config.max_lag) {
    throw UsageError("--lags and --max-lag are mutually exclusive");
  }
  if (config.lags) return parse_lags(*config.lags);
  if (config.max_lag) {
    if (*config.max_lag < 0) throw UsageError("--max-lag must be >= 0");
    std::vector<std::int64_t> lags;
    for (std::int64_t lag = 0; lag <= *config.max_lag; ++lag) lags.push_back(lag);
    return lags;
  }
  std::vector<std::int64_t> lags;
  for (std::int64_t lag = 0; lag <= ScanLag::sqrt_horizon().resolve(horizon); ++lag) {
    lags.push_back(lag);
  }
  return lags;
}

std::size_t find_label(const Recording& recording, const std::string& label) {
  const auto& labels = recording.labels();
  const auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) throw std::domain_error("no channel labeled '" + label + "'");
  return static_cast<std::size_t>(it - labels.begin());
}

std::pair<EventSequence, EventSequence> analysis_pair(const RunConfig& config) {
  if (config.inputs.size() == 2) {
    if (config.pair) throw UsageError("--pair needs a single input recording");
    const auto a = ingest_events(config.inputs[0], config.format, config.bin_size);
    const auto b = ingest_events(config.inputs[1], config.format, config.bin_size);
    if (a.recording.size() != 1 || b.recording.size() != 1) {
      throw std::domain_error("two-file analyze expects one channel per file");
    }
    if (a.recording.horizon() != b.recording.horizon()) {
      throw std::domain_error("input horizons differ");
    }
    return {a.recording.channels()[0], b.recording.channels()[0]};
  }
  if (config.inputs.size() != 1) throw UsageError("analyze takes one or two inputs");
  const auto in = ingest_events(config.inputs[0], config.format, config.bin_size);
  const auto& rec = in.recording;
  if (config.pair) {
    return {rec.channels()[find_label(rec, config.pair->first)],
            rec.channels()[find_label(rec, config.pair->second)]};
  }
  if (rec.size() != 2) {
    throw UsageError("recording has " + std::to_string(rec.size()) +
                     " channels; select two with --pair");
  }
  return {rec.channels()[0], rec.channels()[1]};
}

void analyze(const RunConfig& config, std::ostream& out) {
  const auto [x, y] = analysis_pair(config);
  const auto lags = resolve_lags(config, x.horizon());
  const auto profile = z_profile(x, y, lags);
  emit(config.output, out, [&](std::ostream& s) { write_profile_csv(s, profile); });
}

void screen_recording(const RunConfig& config, std::ostream& out) {
  if (config.inputs.size() != 1) throw UsageError("screen takes one input");
  const auto in = ingest_events(config.inputs[0], config.format, config.bin_size);
  const auto lags = resolve_lags(config, in.recording.horizon());
  const auto edges = screen(in.recording, lags,
                            {config.threshold, config.two_sided, config.workers});
  if (config.output.empty()) {
    write_edges_csv(out, edges);
    return;
  }
  AtomicFile csv(config.output);
  write_edges_csv(csv.stream(), edges);
  AtomicFile meta(sibling(config.output, ".meta.json"));
  auto record = edges_metadata(edges);
  record["duplicates_collapsed"] = in.duplicates;
  meta.stream() << record.dump(2) << '\n';
  csv.commit();
  meta.commit();
}

void simulate(const RunConfig& config) {
  if (config.inputs.size() != 1) throw UsageError("simulate takes one config file");
  if (config.output.empty()) throw UsageError("simulate needs -o");
  if (config.bin_size) throw UsageError("--bin-size does not apply to simulate");
  std::ifstream in(config.inputs[0]);
  if (!in) throw std::domain_error("cannot open " + config.inputs[0].string());
  auto spec = parse_generator_config(in);
  if (config.seed) spec.seed = *config.seed;
  auto channels = generate(spec);
  std::vector<std::string> labels;
  for (std::size_t c = 0; c < channels.size(); ++c) {
    labels.push_back("ch" + std::to_string(c));
  }
  const auto meta_record = generator_metadata(spec, channels);
  const Recording recording(std::move(channels), std::move(labels));

  AtomicFile events(config.output);
  write_events(events.stream(), recording, config.format, recording.size() > 1);
  AtomicFile meta(sibling(config.output, ".meta.json"));
  meta.stream() << meta_record.dump(2) << '\n';
  events.commit();
  meta.commit();
}

int validate(const RunConfig& config, std::ostream& out) {
  if (!config.inputs.empty()) throw UsageError("validate takes no inputs");
  ValidationOptions options;
  if (config.seed) options.seed = *config.seed;
  options.workers = config.workers;
  const auto ids = config.criteria.empty() ? criterion_ids() : config.criteria;
  const auto known = criterion_ids();
  for (const int id : ids) {
    if (std::find(known.begin(), known.end(), id) == known.end()) {
      throw UsageError("unknown criterion " + std::to_string(id));
    }
  }
  if (!config.output.empty()) std::filesystem::create_directories(config.output);

  bool all_passed = true;
  nlohmann::json summary = nlohmann::json::array();
  for (const int id : ids) {
    const auto outcome = run_criterion(id, options);
    all_passed = all_passed && outcome.passed;
    out << (outcome.passed ? "PASS" : "FAIL") << " criterion " << id << ": "
        << outcome.title << '\n';
    for (const auto& line : outcome.lines) out << line << '\n';
    out.flush();
    summary.push_back({{"criterion", id}, {"title", outcome.title},
                       {"passed", outcome.passed}});
    if (config.output.empty()) continue;
    const auto prefix = "criterion_" + std::to_string(id);
    emit(config.output / (prefix + ".json"), out, [&](std::ostream& s) {
      s << nlohmann::json{{"criterion", id},
                          {"title", outcome.title},
                          {"passed", outcome.passed},
                          {"findings", outcome.lines},
                          {"seed", options.seed},
                          {"results", outcome.data}}
                  .dump(1)
        << '\n';
    });
    for (const auto& [name, contents] : outcome.tables) {
      emit(config.output / (prefix + "_" + name), out,
           [&](std::ostream& s) { s << contents; });
    }
  }
  if (!config.output.empty()) {
    emit(config.output / "summary.json", out, [&](std::ostream& s) {
      s << nlohmann::json{{"seed", options.seed},
                          {"workers", options.workers},
                          {"version", kVersion},
                          {"criteria", summary}}
                  .dump(2)
        << '\n';
    });
  }
  return all_passed ? kExitOk : kExitValidation;
}

void report_error(std::ostream& err, std::string_view kind,
                  const std::string& message, std::optional<std::size_t> line) {
  nlohmann::json record{{"error", kind}, {"message", message}};
  if (line && *line > 0) record["line"] = *line;
  err << record.dump() << '\n';
}

}  // namespace

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    if (config.workers < 1) throw UsageError("--workers must be >= 1");
    if (config.threshold <= 0.0) throw UsageError("--threshold must be > 0");
    switch (config.command) {
      case Command::analyze:
        analyze(config, out);
        return kExitOk;
      case Command::screen:
        screen_recording(config, out);
        return kExitOk;
      case Command::simulate:
        simulate(config);
        return kExitOk;
      case Command::validate:
        return validate(config, out);
    }
    return kExitUsage;
  } catch (const UsageError& e) {
    report_error(err, "usage", e.what(), std::nullopt);
    return kExitUsage;
  } catch (const ParseError& e) {
    report_error(err, "parse", e.what(), e.line());
    return kExitData;
  } catch (const std::exception& e) {
    report_error(err, "data", e.what(), std::nullopt);
    return kExitData;
  }
}

}  // namespace coinc
