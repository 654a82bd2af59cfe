#include <gtest/gtest.h>

#include <cstring>
#include <random>
#include <sstream>

#include "coinc/io.hpp"
#include "coinc/parallel.hpp"
#include "oracles.hpp"

using namespace coinc;

namespace {

IngestResult parse(const std::string& text, EventFormat format = EventFormat::timestamps,
                   std::optional<double> bin = std::nullopt) {
  std::istringstream in(text);
  return ingest_events(in, format, bin);
}

std::size_t error_line(const std::string& text, EventFormat format = EventFormat::timestamps) {
  try {
    parse(text, format);
  } catch (const ParseError& e) {
    return e.line();
  }
  ADD_FAILURE() << "no parse error for: " << text;
  return 0;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

}  // namespace

TEST(Ingest, TimestampsExample) {
  const auto r = parse("T=5\n2\n4\n");
  ASSERT_EQ(r.recording.size(), 1u);
  EXPECT_EQ(r.recording.channels()[0], EventSequence::from_indices(5, {2, 4}));
  EXPECT_EQ(r.recording.labels()[0], "ch0");
}

TEST(Ingest, DenseExample) {
  const auto r = parse("01010", EventFormat::dense);
  EXPECT_EQ(r.recording.channels()[0], EventSequence::from_indices(5, {2, 4}));
}

TEST(Ingest, Errors) {
  EXPECT_EQ(error_line("T=5\n7\n"), 2u);
  EXPECT_EQ(error_line("# header\nT=5\n\n0\n"), 4u);
  EXPECT_EQ(error_line("3\n4\n"), 1u);
  EXPECT_EQ(error_line("T=x\n"), 1u);
  EXPECT_EQ(error_line("T=5\na 1\n2\n"), 3u);
  EXPECT_EQ(error_line("0110\n01x1\n", EventFormat::dense), 2u);
  EXPECT_THROW(parse(""), std::domain_error);
  EXPECT_THROW(parse("# only a comment\n\n"), std::domain_error);
  EXPECT_THROW(parse("", EventFormat::dense), std::domain_error);
  EXPECT_THROW(parse("01\n011\n", EventFormat::dense), std::domain_error);
  try {
    parse("T=5\n7\n");
  } catch (const ParseError& e) {
    EXPECT_NE(std::strstr(e.what(), "line 2"), nullptr);
  }
}

TEST(Ingest, LabeledChannelsAndDuplicates) {
  const auto r = parse("T=10\n# comment\nb 3\na 1\nb 3\nb 10\na 2\n");
  ASSERT_EQ(r.recording.size(), 2u);
  EXPECT_EQ(r.recording.labels(), (std::vector<std::string>{"b", "a"}));
  EXPECT_EQ(r.recording.channels()[0], EventSequence::from_indices(10, {3, 10}));
  EXPECT_EQ(r.recording.channels()[1], EventSequence::from_indices(10, {1, 2}));
  EXPECT_EQ(r.duplicates, 1u);
}

TEST(Ingest, HeaderOnlyGivesEmptyChannel) {
  const auto r = parse("T=4\n");
  ASSERT_EQ(r.recording.size(), 1u);
  EXPECT_TRUE(r.recording.channels()[0].empty());
}

TEST(Ingest, BinsContinuousTimes) {
  // Bins of 0.5 over [0, 2.2): four full bins, the trailing partial bin dropped.
  const auto r = parse("T=2.2\n0.0\n0.49\n0.5\n1.99\n2.1\n", EventFormat::timestamps, 0.5);
  EXPECT_EQ(r.recording.channels()[0], EventSequence::from_indices(4, {1, 2, 4}));
  EXPECT_EQ(r.duplicates, 1u);
  EXPECT_THROW(parse("T=2\n2.5\n", EventFormat::timestamps, 0.5), ParseError);
  EXPECT_THROW(parse("T=2\n1\n", EventFormat::dense, 0.5), std::domain_error);
}

TEST(Ingest, RoundTripBothFormats) {
  std::mt19937_64 rng(6);
  for (int n = 0; n < 100; ++n) {
    const auto horizon = std::uniform_int_distribution<std::int64_t>(1, 300)(rng);
    const auto channels = std::uniform_int_distribution<int>(1, 4)(rng);
    std::vector<EventSequence> seqs;
    std::vector<std::string> labels;
    for (int c = 0; c < channels; ++c) {
      seqs.push_back(oracle::random_sequence(horizon, 0.2, rng));
      labels.push_back("ch" + std::to_string(c));
    }
    const Recording rec(seqs, labels);
    for (const auto format : {EventFormat::timestamps, EventFormat::dense}) {
      for (const bool labeled : {true, false}) {
        std::ostringstream out;
        write_events(out, rec, format, labeled);
        const auto back = parse(out.str(), format);
        ASSERT_EQ(back.recording.channels(), rec.channels());
        ASSERT_EQ(back.recording.labels(), rec.labels());
      }
    }
  }
}

TEST(FormatDouble, RoundTripsExactly) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> mantissa(-1.0, 1.0);
  std::uniform_int_distribution<int> exponent(-300, 300);
  for (int n = 0; n < 10000; ++n) {
    const double v = std::ldexp(mantissa(rng), exponent(rng));
    ASSERT_EQ(std::stod(format_double(v)), v);
  }
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(std::nan("")), "null");
}

TEST(ProfileCsv, ColumnsNullsAndExactValues) {
  const auto x = EventSequence::from_indices(30, {3, 9, 14, 20, 27});
  const auto y = EventSequence::from_indices(30, {4, 9, 21});
  const std::vector<std::int64_t> lags{0, 1, 5};
  const auto profile = z_profile(x, y, lags);
  std::ostringstream out;
  write_profile_csv(out, profile);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "lag,observed,expected,sigma_sqrtT,z,dz");
  for (std::size_t k = 0; k < lags.size(); ++k) {
    ASSERT_TRUE(std::getline(in, line));
    const auto cells = split(line, ',');
    ASSERT_EQ(cells.size(), 6u);
    EXPECT_EQ(std::stoll(cells[0]), lags[k]);
    EXPECT_EQ(std::stoll(cells[1]), profile.stats[k].observed);
    EXPECT_EQ(std::stod(cells[2]), profile.stats[k].expected);
    EXPECT_EQ(std::stod(cells[4]), *profile.stats[k].z);
    if (k == 0) {
      EXPECT_EQ(cells[5], "null");
    } else {
      EXPECT_EQ(std::stod(cells[5]), *profile.dz[k - 1]);
    }
  }

  const auto empty = EventSequence::from_indices(30, {});
  std::ostringstream degenerate;
  write_profile_csv(degenerate, z_profile(empty, y, lags));
  EXPECT_NE(degenerate.str().find(",null,null"), std::string::npos);
}

TEST(EdgesCsv, HeaderAndMetadata) {
  EdgeList list;
  list.edges.push_back({"a", "b", 3, 2.5, 10, 4.25});
  list.undefined.push_back({"a", "z", {0, 1}});
  list.threshold = 1.96;
  list.pair_count = 3;
  list.tests_per_pair = 2;
  std::ostringstream out;
  write_edges_csv(out, list);
  EXPECT_EQ(out.str(), "label_a,label_b,lag,z,observed,expected\na,b,3,2.5,10,4.25\n");
  const auto meta = edges_metadata(list);
  EXPECT_EQ(meta["pair_count"], 3);
  EXPECT_EQ(meta["undefined_pairs"][0]["lags"], nlohmann::json::array({0, 1}));
}

TEST(Lags, Parse) {
  EXPECT_EQ(parse_lags("0..3,7"), (std::vector<std::int64_t>{0, 1, 2, 3, 7}));
  EXPECT_EQ(parse_lags(" 5, 1 ,1"), (std::vector<std::int64_t>{1, 5}));
  EXPECT_THROW(parse_lags(""), ParseError);
  EXPECT_THROW(parse_lags("3..1"), ParseError);
  EXPECT_THROW(parse_lags("-2"), ParseError);
  EXPECT_THROW(parse_lags("1,,2"), ParseError);
}

TEST(GeneratorConfig, RoundTripsEveryModel) {
  const std::vector<GeneratorSpec> specs{
      {BernoulliModel{0.125, 1000}, 5, 3},
      {BinnedPoissonModel{0.3, 0.5, 1234.5}, 6, 1},
      {GeometricAr1Model{0.01, 0.1, 5000}, 7, 2},
      {CommonShockModel{0.01, 0.02, 0.03, 50.0, 10.0, 10000}, 8, 1}};
  for (const auto& spec : specs) {
    const auto text = format_generator_config(spec);
    std::istringstream in(text);
    const auto back = parse_generator_config(in);
    EXPECT_EQ(format_generator_config(back), text);
    EXPECT_EQ(back.seed, spec.seed);
    EXPECT_EQ(back.channels, spec.channels);
    EXPECT_EQ(back.model.index(), spec.model.index());
  }
}

TEST(GeneratorConfig, Errors) {
  auto line_of = [](const std::string& text) -> std::size_t {
    std::istringstream in(text);
    try {
      parse_generator_config(in);
    } catch (const ParseError& e) {
      return e.line() + 1000;
    } catch (const std::domain_error&) {
      return 1;
    }
    return 0;
  };
  EXPECT_EQ(line_of("model = bernoulli\np = 0.1\nhorizon = 10\nrate = 3\n"), 1004u);
  EXPECT_EQ(line_of("model = bernoulli\np = x\nhorizon = 10\n"), 1002u);
  EXPECT_EQ(line_of("model = bernoulli\np = 0.1\n"), 1000u);
  EXPECT_EQ(line_of("model = wave\n"), 1001u);
  EXPECT_EQ(line_of("model = bernoulli\nmodel = bernoulli\n"), 1002u);
  EXPECT_EQ(line_of("no equals sign\n"), 1001u);
  EXPECT_EQ(line_of("model = bernoulli\np = 1.5\nhorizon = 10\n"), 1u);
}

TEST(GeneratorMetadata, RecordsParametersAndRealizedRates) {
  const GeneratorSpec spec{GeometricAr1Model{0.05, 0.2, 2000}, 11, 2};
  const auto channels = generate(spec);
  const auto meta = generator_metadata(spec, channels);
  EXPECT_EQ(meta["model"], "geometric_ar1");
  EXPECT_EQ(meta["parameters"]["theta"], 0.05);
  EXPECT_EQ(meta["channels"].size(), 2u);
  EXPECT_EQ(meta["channels"][1]["events"], channels[1].size());
}

TEST(Ingest, ChannelDeclarationKeepsSilentChannels) {
  const auto r = parse("T=6\nchannels=a,quiet,b\nb 2\na 5\n");
  EXPECT_EQ(r.recording.labels(), (std::vector<std::string>{"a", "quiet", "b"}));
  EXPECT_TRUE(r.recording.channels()[1].empty());
  EXPECT_EQ(error_line("T=6\na 1\nchannels=a\n"), 3u);
  EXPECT_EQ(error_line("T=6\nchannels=\n"), 2u);
}
