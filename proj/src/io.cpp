#include "coinc/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <variant>

namespace coinc {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string_view trim(std::string_view s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string_view::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

bool skippable(std::string_view line) {
  const auto t = trim(line);
  return t.empty() || t.front() == '#';
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  auto is_sep = [](char c) { return c == ' ' || c == '\t' || c == ',' || c == '\r'; };
  while (i < line.size()) {
    while (i < line.size() && is_sep(line[i])) ++i;
    const auto start = i;
    while (i < line.size() && !is_sep(line[i])) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

template <class T>
std::optional<T> parse_number(std::string_view text) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return value;
}

struct ChannelBuilder {
  std::vector<std::string> labels;
  std::vector<std::vector<std::int64_t>> offsets;
  std::map<std::string, std::size_t, std::less<>> index;

  std::vector<std::int64_t>& channel(std::string_view label) {
    auto it = index.find(label);
    if (it == index.end()) {
      it = index.emplace(std::string(label), labels.size()).first;
      labels.emplace_back(label);
      offsets.emplace_back();
    }
    return offsets[it->second];
  }
};

IngestResult finish(ChannelBuilder& builder, std::int64_t horizon) {
  std::size_t duplicates = 0;
  std::vector<EventSequence> channels;
  for (auto& raw : builder.offsets) {
    const auto before = raw.size();
    channels.push_back(EventSequence::from_offsets(horizon, std::move(raw)));
    duplicates += before - channels.back().size();
  }
  return {Recording(std::move(channels), std::move(builder.labels)), duplicates};
}

IngestResult read_timestamps(std::istream& in, std::optional<double> bin_size) {
  std::string line;
  std::size_t line_no = 0;
  bool any_content = false;
  std::optional<double> declared;
  std::int64_t horizon = 0;
  ChannelBuilder builder;
  std::optional<bool> labeled;

  while (std::getline(in, line)) {
    ++line_no;
    if (skippable(line)) continue;
    any_content = true;
    const auto text = trim(line);
    if (!declared) {
      if (text.size() < 2 || text.substr(0, 2) != "T=") {
        throw ParseError(line_no, "missing 'T=<horizon>' header");
      }
      const auto value = trim(text.substr(2));
      if (bin_size) {
        const auto t = parse_number<double>(value);
        if (!t || !(*t > 0.0) || !std::isfinite(*t)) {
          throw ParseError(line_no, "invalid duration in header");
        }
        declared = *t;
        horizon = static_cast<std::int64_t>(std::floor(*t / *bin_size));
        if (horizon < 1) throw ParseError(line_no, "duration shorter than one bin");
      } else {
        const auto t = parse_number<std::int64_t>(value);
        if (!t || *t < 1) throw ParseError(line_no, "invalid horizon in header");
        declared = static_cast<double>(*t);
        horizon = *t;
      }
      continue;
    }

    if (text.substr(0, 9) == "channels=") {
      if (labeled) throw ParseError(line_no, "channel declaration must precede events");
      const auto declared_labels = split_fields(text.substr(9));
      if (declared_labels.empty()) throw ParseError(line_no, "empty channel declaration");
      for (const auto label : declared_labels) builder.channel(label);
      labeled = true;
      continue;
    }
    const auto fields = split_fields(text);
    if (fields.size() > 2) throw ParseError(line_no, "expected '[label] index'");
    const bool has_label = fields.size() == 2;
    if (labeled && *labeled != has_label) {
      throw ParseError(line_no, "mixed labeled and unlabeled events");
    }
    labeled = has_label;
    const auto value = fields.back();
    auto& target = builder.channel(has_label ? fields.front() : "ch0");

    if (bin_size) {
      const auto t = parse_number<double>(value);
      if (!t || !std::isfinite(*t)) throw ParseError(line_no, "invalid event time");
      if (*t < 0.0 || *t >= *declared) {
        throw ParseError(line_no, "event time " + std::string(value) +
                                      " outside [0, T)");
      }
      const auto bin = static_cast<std::int64_t>(std::floor(*t / *bin_size));
      // Arrivals in the trailing partial bin fall outside the discrete horizon.
      if (bin < horizon) target.push_back(bin);
    } else {
      const auto index = parse_number<std::int64_t>(value);
      if (!index) throw ParseError(line_no, "invalid event index");
      if (*index < 1 || *index > horizon) {
        throw ParseError(line_no, "event index " + std::to_string(*index) +
                                      " outside [1, " + std::to_string(horizon) +
                                      "]");
      }
      target.push_back(*index - 1);
    }
  }
  if (!any_content) throw std::domain_error("empty event file");
  if (!declared) throw ParseError(line_no, "missing 'T=<horizon>' header");
  if (builder.labels.empty()) builder.channel("ch0");
  return finish(builder, horizon);
}

IngestResult read_dense(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> labels;
  std::vector<EventSequence> channels;
  while (std::getline(in, line)) {
    ++line_no;
    if (skippable(line)) continue;
    const auto fields = split_fields(trim(line));
    if (fields.size() > 2) throw ParseError(line_no, "expected '[label] bits'");
    const auto bits = fields.back();
    std::vector<std::int64_t> offsets;
    for (std::size_t i = 0; i < bits.size(); ++i) {
      if (bits[i] == '1') {
        offsets.push_back(static_cast<std::int64_t>(i));
      } else if (bits[i] != '0') {
        throw ParseError(line_no, "dense format accepts only '0' and '1'");
      }
    }
    labels.push_back(fields.size() == 2
                         ? std::string(fields.front())
                         : "ch" + std::to_string(channels.size()));
    channels.push_back(EventSequence::from_offsets(
        static_cast<std::int64_t>(bits.size()), std::move(offsets)));
  }
  if (channels.empty()) throw std::domain_error("empty event file");
  return {Recording(std::move(channels), std::move(labels)), 0};
}

std::string optional_number(const std::optional<double>& v) {
  return v ? format_double(*v) : "null";
}

nlohmann::json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

ParseError::ParseError(std::size_t line, const std::string& message)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message
                                  : message),
      line_(line) {}

EventFormat parse_event_format(std::string_view name) {
  if (name == "timestamps") return EventFormat::timestamps;
  if (name == "dense") return EventFormat::dense;
  throw ParseError(0, "unknown event format '" + std::string(name) + "'");
}

IngestResult ingest_events(std::istream& in, EventFormat format,
                           std::optional<double> bin_size) {
  if (bin_size && !(*bin_size > 0.0)) {
    throw std::domain_error("bin size must be > 0");
  }
  if (format == EventFormat::dense) {
    if (bin_size) throw std::domain_error("bin size applies to timestamps only");
    return read_dense(in);
  }
  return read_timestamps(in, bin_size);
}

IngestResult ingest_events(const std::filesystem::path& path,
                           EventFormat format, std::optional<double> bin_size) {
  std::ifstream in(path);
  if (!in) throw std::domain_error("cannot open " + path.string());
  return ingest_events(in, format, bin_size);
}

void write_events(std::ostream& out, const Recording& recording,
                  EventFormat format, bool labeled) {
  labeled = labeled || recording.size() != 1;
  const auto& labels = recording.labels();
  const auto& channels = recording.channels();
  if (format == EventFormat::dense) {
    for (std::size_t c = 0; c < channels.size(); ++c) {
      std::string bits(static_cast<std::size_t>(channels[c].horizon()), '0');
      for (const auto offset : channels[c].offsets()) {
        bits[static_cast<std::size_t>(offset)] = '1';
      }
      if (labeled) out << labels[c] << ' ';
      out << bits << '\n';
    }
    return;
  }
  out << "T=" << recording.horizon() << '\n';
  if (labeled) {
    out << "channels=";
    for (std::size_t c = 0; c < labels.size(); ++c) out << (c ? "," : "") << labels[c];
    out << '\n';
  }
  for (std::size_t c = 0; c < channels.size(); ++c) {
    for (const auto offset : channels[c].offsets()) {
      if (labeled) out << labels[c] << ' ';
      out << offset + 1 << '\n';
    }
  }
}

std::string format_double(double value) {
  if (!std::isfinite(value)) return "null";
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  return std::string(buffer, ptr);
}

void write_profile_csv(std::ostream& out, const LagProfile& profile) {
  const double sqrt_t = std::sqrt(static_cast<double>(profile.horizon));
  out << "lag,observed,expected,sigma_sqrtT,z,dz\n";
  for (std::size_t k = 0; k < profile.stats.size(); ++k) {
    const auto& s = profile.stats[k];
    const std::string dz = k == 0 ? "null" : optional_number(profile.dz[k - 1]);
    out << s.lag << ',' << s.observed << ',' << format_double(s.expected) << ','
        << format_double(s.sigma * sqrt_t) << ',' << optional_number(s.z) << ','
        << dz << '\n';
  }
}

void write_edges_csv(std::ostream& out, const EdgeList& edges) {
  out << "label_a,label_b,lag,z,observed,expected\n";
  for (const auto& e : edges.edges) {
    out << e.label_a << ',' << e.label_b << ',' << e.lag << ','
        << format_double(e.z) << ',' << e.observed << ','
        << format_double(e.expected) << '\n';
  }
}

nlohmann::json edges_metadata(const EdgeList& edges) {
  nlohmann::json undefined = nlohmann::json::array();
  for (const auto& u : edges.undefined) {
    undefined.push_back(
        {{"label_a", u.label_a}, {"label_b", u.label_b}, {"lags", u.lags}});
  }
  return {{"threshold", edges.threshold},
          {"two_sided", edges.two_sided},
          {"pair_count", edges.pair_count},
          {"tests_per_pair", edges.tests_per_pair},
          {"edge_count", edges.edges.size()},
          {"multiple_comparison_correction", "none"},
          {"undefined_pairs", undefined},
          {"version", kVersion}};
}

void write_agreement_csv(std::ostream& out, const MonteCarloReport& report) {
  out << "lag,empirical_mean,empirical_std,standard_error,analytical_mean,"
         "analytical_std,nrmse_mean,nrmse_std\n";
  for (const auto& l : report.lags) {
    out << l.lag << ',' << format_double(l.empirical_mean) << ','
        << format_double(l.empirical_std) << ','
        << format_double(l.standard_error) << ','
        << format_double(l.analytical_mean) << ','
        << format_double(l.analytical_std) << ','
        << optional_number(l.nrmse_mean) << ',' << optional_number(l.nrmse_std)
        << '\n';
  }
}

nlohmann::json to_json(const MonteCarloReport& report) {
  nlohmann::json lags = nlohmann::json::array();
  for (const auto& l : report.lags) {
    lags.push_back({{"lag", l.lag},
                    {"empirical_mean", l.empirical_mean},
                    {"empirical_std", l.empirical_std},
                    {"standard_error", l.standard_error},
                    {"analytical_mean", l.analytical_mean},
                    {"analytical_std", l.analytical_std},
                    {"nrmse_mean", optional_json(l.nrmse_mean)},
                    {"nrmse_std", optional_json(l.nrmse_std)},
                    {"set_means", l.set_means},
                    {"set_stds", l.set_stds}});
  }
  return {{"sets", report.sets},
          {"pairs_per_set", report.pairs_per_set},
          {"trials", report.trials},
          {"seed", report.seed},
          {"horizon", report.horizon},
          {"rates", {report.rates.x, report.rates.y}},
          {"analytic_rates", to_string(report.analytic)},
          {"nrmse_normalization", "mean_abs_analytical"},
          {"version", kVersion},
          {"lags", lags}};
}

void write_scan_csv(std::ostream& out, const NormalityScan& scan) {
  out << "rate,lag,horizon,resolved_lag,statistic,p_value,onset\n";
  for (const auto& cell : scan.cells) {
    for (const auto& step : cell.steps) {
      out << format_double(cell.rate) << ',' << cell.lag.label() << ','
          << step.horizon << ',' << step.lag << ','
          << format_double(step.ks.statistic) << ','
          << format_double(step.ks.p_value) << ','
          << (cell.onset ? std::to_string(*cell.onset) : "null") << '\n';
    }
  }
}

nlohmann::json to_json(const NormalityScan& scan) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& cell : scan.cells) {
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& step : cell.steps) {
      steps.push_back({{"horizon", step.horizon},
                       {"lag", step.lag},
                       {"statistic", step.ks.statistic},
                       {"p_value", step.ks.p_value}});
    }
    cells.push_back({{"rate", cell.rate},
                     {"lag", cell.lag.label()},
                     {"onset", cell.onset ? nlohmann::json(*cell.onset)
                                          : nlohmann::json(nullptr)},
                     {"steps", steps}});
  }
  return {{"horizons", scan.horizons},
          {"estimates_per_cell", scan.estimates_per_cell},
          {"seed", scan.seed},
          {"version", kVersion},
          {"cells", cells}};
}

nlohmann::json to_json(const ZProfileSummary& summary) {
  return {{"lags", summary.lags},
          {"mean_z", summary.mean_z},
          {"std_z", summary.std_z},
          {"defined", summary.defined},
          {"exceed_fraction", summary.exceed_fraction},
          {"mean_dz", summary.mean_dz},
          {"trials", summary.trials},
          {"seed", summary.seed},
          {"standardization", summary.standardization ==
                                      Standardization::known_rates
                                  ? "known_rates"
                                  : "plug_in"},
          {"version", kVersion}};
}

nlohmann::json to_json(const LagProfile& profile) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t k = 0; k < profile.stats.size(); ++k) {
    const auto& s = profile.stats[k];
    rows.push_back({{"lag", s.lag},
                    {"observed", s.observed},
                    {"expected", s.expected},
                    {"sigma", s.sigma},
                    {"z", optional_json(s.z)},
                    {"dz", k == 0 ? nlohmann::json(nullptr)
                                  : optional_json(profile.dz[k - 1])}});
  }
  return {{"horizon", profile.horizon},
          {"n_x", profile.n_x},
          {"n_y", profile.n_y},
          {"version", kVersion},
          {"rows", rows}};
}

GeneratorSpec parse_generator_config(std::istream& in) {
  std::map<std::string, std::pair<std::string, std::size_t>, std::less<>> kv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (skippable(line)) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(line_no, "expected key = value");
    const auto key = std::string(trim(std::string_view(line).substr(0, eq)));
    const auto value = std::string(trim(std::string_view(line).substr(eq + 1)));
    if (key.empty() || value.empty()) {
      throw ParseError(line_no, "expected key = value");
    }
    if (!kv.emplace(key, std::pair{value, line_no}).second) {
      throw ParseError(line_no, "duplicate key '" + key + "'");
    }
  }

  std::vector<std::string> used;
  auto take = [&](std::string_view key) -> const std::pair<std::string, std::size_t>& {
    const auto it = kv.find(key);
    if (it == kv.end()) throw ParseError(0, "missing key '" + std::string(key) + "'");
    used.emplace_back(key);
    return it->second;
  };
  auto real = [&](std::string_view key) {
    const auto& [text, where] = take(key);
    const auto v = parse_number<double>(text);
    if (!v) throw ParseError(where, "invalid number for '" + std::string(key) + "'");
    return *v;
  };
  auto integer = [&](std::string_view key) {
    const auto& [text, where] = take(key);
    const auto v = parse_number<std::int64_t>(text);
    if (!v) throw ParseError(where, "invalid integer for '" + std::string(key) + "'");
    return *v;
  };

  GeneratorSpec spec;
  const auto model = take("model").first;
  if (model == "bernoulli") {
    spec.model = BernoulliModel{real("p"), integer("horizon")};
  } else if (model == "binned_poisson") {
    spec.model = BinnedPoissonModel{real("lambda"), real("bin_size"),
                                    real("duration")};
  } else if (model == "geometric_ar1") {
    spec.model = GeometricAr1Model{real("p_target"), real("alpha"),
                                   integer("horizon")};
  } else if (model == "common_shock") {
    spec.model = CommonShockModel{real("lambda_y1"), real("lambda_y2"),
                                  real("lambda_z"),  real("mu_delay"),
                                  real("sigma_delay"), integer("horizon")};
  } else {
    throw ParseError(kv.at("model").second, "unknown model '" + model + "'");
  }
  if (kv.contains("seed")) {
    const auto& [text, where] = take("seed");
    const auto v = parse_number<std::uint64_t>(text);
    if (!v) throw ParseError(where, "invalid seed");
    spec.seed = *v;
  }
  if (kv.contains("channels")) {
    const auto n = integer("channels");
    if (n < 1) throw ParseError(kv.at("channels").second, "channels must be >= 1");
    spec.channels = static_cast<std::size_t>(n);
  }
  for (const auto& [key, value] : kv) {
    if (std::find(used.begin(), used.end(), key) == used.end()) {
      throw ParseError(value.second, "unknown key '" + key + "' for model " + model);
    }
  }
  validate(spec.model);
  return spec;
}

std::string format_generator_config(const GeneratorSpec& spec) {
  std::ostringstream out;
  out << "model = " << model_name(spec.model) << '\n';
  std::visit(
      Overloaded{
          [&](const BernoulliModel& m) {
            out << "p = " << format_double(m.p) << '\n'
                << "horizon = " << m.horizon << '\n';
          },
          [&](const BinnedPoissonModel& m) {
            out << "lambda = " << format_double(m.lambda) << '\n'
                << "bin_size = " << format_double(m.bin_size) << '\n'
                << "duration = " << format_double(m.duration) << '\n';
          },
          [&](const GeometricAr1Model& m) {
            out << "p_target = " << format_double(m.p_target) << '\n'
                << "alpha = " << format_double(m.alpha) << '\n'
                << "horizon = " << m.horizon << '\n';
          },
          [&](const CommonShockModel& m) {
            out << "lambda_y1 = " << format_double(m.lambda_y1) << '\n'
                << "lambda_y2 = " << format_double(m.lambda_y2) << '\n'
                << "lambda_z = " << format_double(m.lambda_z) << '\n'
                << "mu_delay = " << format_double(m.mu_delay) << '\n'
                << "sigma_delay = " << format_double(m.sigma_delay) << '\n'
                << "horizon = " << m.horizon << '\n';
          },
      },
      spec.model);
  out << "seed = " << spec.seed << '\n';
  out << "channels = " << spec.channels << '\n';
  return out.str();
}

nlohmann::json generator_metadata(const GeneratorSpec& spec,
                                  const std::vector<EventSequence>& channels) {
  nlohmann::json params;
  std::visit(
      Overloaded{
          [&](const BernoulliModel& m) {
            params = {{"p", m.p}, {"horizon", m.horizon}};
          },
          [&](const BinnedPoissonModel& m) {
            params = {{"lambda", m.lambda},
                      {"bin_size", m.bin_size},
                      {"duration", m.duration},
                      {"corrected_p", poisson_to_bernoulli(m.lambda, m.bin_size)},
                      {"expected_lost",
                       binning_loss(m.lambda, m.bin_size, m.duration)}};
          },
          [&](const GeometricAr1Model& m) {
            params = {{"p_target", m.p_target},
                      {"alpha", m.alpha},
                      {"theta", m.p_target},
                      {"horizon", m.horizon}};
          },
          [&](const CommonShockModel& m) {
            params = {{"lambda_y1", m.lambda_y1}, {"lambda_y2", m.lambda_y2},
                      {"lambda_z", m.lambda_z},   {"mu_delay", m.mu_delay},
                      {"sigma_delay", m.sigma_delay}, {"horizon", m.horizon}};
          },
      },
      spec.model);
  nlohmann::json realized = nlohmann::json::array();
  for (const auto& c : channels) {
    realized.push_back({{"events", c.size()}, {"rate", c.rate()}});
  }
  return {{"model", model_name(spec.model)},
          {"parameters", params},
          {"seed", spec.seed},
          {"channels", realized},
          {"nominal_rate", nominal_rate(spec.model)},
          {"version", kVersion}};
}

std::vector<std::int64_t> parse_lags(std::string_view text) {
  std::vector<std::int64_t> lags;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find(',', start);
    if (end == std::string_view::npos) end = text.size();
    const auto item = trim(text.substr(start, end - start));
    if (item.empty()) throw ParseError(0, "empty item in lag list");
    const auto dots = item.find("..");
    if (dots == std::string_view::npos) {
      const auto v = parse_number<std::int64_t>(item);
      if (!v || *v < 0) throw ParseError(0, "invalid lag '" + std::string(item) + "'");
      lags.push_back(*v);
    } else {
      const auto lo = parse_number<std::int64_t>(trim(item.substr(0, dots)));
      const auto hi = parse_number<std::int64_t>(trim(item.substr(dots + 2)));
      if (!lo || !hi || *lo < 0 || *hi < *lo) {
        throw ParseError(0, "invalid lag range '" + std::string(item) + "'");
      }
      for (auto v = *lo; v <= *hi; ++v) lags.push_back(v);
    }
    start = end + 1;
  }
  std::sort(lags.begin(), lags.end());
  lags.erase(std::unique(lags.begin(), lags.end()), lags.end());
  return lags;
}

}  // namespace coinc
