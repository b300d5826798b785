#include <gtest/gtest.h>

#include <map>

#include "fixtures.hpp"
#include "neurolgp/errors.hpp"
#include "neurolgp/genome.hpp"

using namespace nlgp;
using nlgp::test::ins;

TEST(Genome, ExampleListingEffectiveLines) {
  const Genome g = from_text(test::kExampleListing);
  ASSERT_EQ(g.size(), 5u);
  EXPECT_EQ(effective_indices(g), (std::vector<std::size_t>{0, 2, 3, 4}));
  ASSERT_EQ(introns(g).size(), 1u);
  EXPECT_EQ(introns(g)[0], g.instructions[1]);
}

TEST(Genome, ExampleListingDecodes) {
  const auto arch = decode(from_text(test::kExampleListing), {64, 64, 3});
  EXPECT_EQ(arch.layers, (std::vector<LayerOp>{LayerOp::conv(32, 3), LayerOp::max_pool(3), LayerOp::batch_norm(),
                                               LayerOp::dense()}));
  EXPECT_EQ(arch.input, (TensorShape{64, 64, 3}));
}

TEST(Genome, NothingWritesOutput) {
  const Genome g{{ins(3, "Conv8k3", 1)}};
  EXPECT_TRUE(effective_indices(g).empty());
  EXPECT_THROW(decode(g, {16, 16, 1}), EmptyEffectiveCode);
}

TEST(Genome, SingleEffectiveLine) {
  const Genome g{{ins(0, "Conv8k3", 1)}};
  EXPECT_EQ(decode(g, {16, 16, 1}).layers, std::vector<LayerOp>{LayerOp::conv(8, 3)});
  EXPECT_EQ(to_text(g), "r[0] := Conv8k3(r[1])");
}

TEST(Genome, LastWriteToOutputWins) {
  // The first write to r[0] is overwritten and so is dead code.
  const Genome g{{ins(0, "Conv8k3", 1), ins(0, "Conv16k3", 2)}};
  EXPECT_EQ(effective_indices(g), std::vector<std::size_t>{1});
}

TEST(Genome, ReadsRegisterWrittenEarlier) {
  const Genome g{{ins(2, "Conv8k3", 0), ins(5, "MaxPool2", 7), ins(0, "Dense", 2)}};
  EXPECT_EQ(effective_indices(g), (std::vector<std::size_t>{0, 2}));
}

TEST(Genome, UnknownOperandIsParseError) {
  try {
    from_text("r[0] := Conv8k3(r[1])\nr[0] := Frobnicate(r[1])\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(Genome, MalformedLinesAreRejected) {
  for (const char* bad : {"r[0] = Conv8k3(r[1])", "r[12] := Conv8k3(r[1])", "r[0] := Conv8k3(r[-1])",
                          "r[0] := Conv8k3 r[1]", "x[0] := Conv8k3(r[1])", "r[0] := Conv8k3(r[1]) extra"})
    EXPECT_THROW(from_text(bad), ParseError) << bad;
}

TEST(Genome, CommentsAndBlankLinesAreSkipped) {
  const Genome g = from_text("# header\n\n  r[0] := Conv8k3(r[1])  \n");
  EXPECT_EQ(g.size(), 1u);
}

TEST(Genome, AnnotatedListingMarksIntrons) {
  const Genome g = from_text(test::kExampleListing);
  const auto text = to_text(g, {}, true);
  EXPECT_NE(text.find("// r[4] := BatchNorm(r[3])"), std::string::npos);
  EXPECT_EQ(from_text(text), g);
}

TEST(Genome, RoundTripRandomGenomes) {
  Rng rng(11);
  for (int i = 0; i < 1000; ++i) {
    const Genome g = random_genome(rng);
    EXPECT_EQ(from_text(to_text(g)), g);
    EXPECT_EQ(from_text(to_text(g, {}, true)), g);
  }
}

TEST(Genome, IntronInvariance) {
  Rng rng(12);
  for (int i = 0; i < 1000; ++i) {
    const Genome g = random_genome(rng);
    const Genome s = strip_introns(g);
    if (effective_indices(g).empty()) {
      EXPECT_TRUE(s.instructions.empty());
      continue;
    }
    EXPECT_EQ(decode(g, {16, 16, 1}), decode(s, {16, 16, 1}));
    EXPECT_EQ(effective_indices(s).size(), s.size());
  }
}

TEST(Genome, EffectiveIndicesFormAChain) {
  Rng rng(13);
  for (int i = 0; i < 1000; ++i) {
    const Genome g = random_genome(rng);
    const auto eff = effective_indices(g);
    if (eff.empty()) continue;
    EXPECT_TRUE(std::is_sorted(eff.begin(), eff.end()));
    EXPECT_EQ(g.instructions[eff.back()].dest, 0);
    for (std::size_t k = 1; k < eff.size(); ++k)
      EXPECT_EQ(g.instructions[eff[k]].src, g.instructions[eff[k - 1]].dest);
  }
}

TEST(Genome, RandomGenomeIsDeterministic) {
  Rng a(5), b(5);
  for (int i = 0; i < 20; ++i) EXPECT_EQ(random_genome(a), random_genome(b));
}

TEST(Genome, RandomGenomeRanges) {
  Rng rng(14);
  const GenomeConfig cfg;
  for (int i = 0; i < 10000; ++i) {
    const Genome g = random_genome(rng, cfg);
    ASSERT_GE(g.size(), cfg.min_length);
    ASSERT_LE(g.size(), cfg.max_length);
    for (const auto& in : g.instructions) {
      ASSERT_TRUE(in.dest >= 0 && in.dest < cfg.registers);
      ASSERT_TRUE(in.src >= 0 && in.src < cfg.registers);
      ASSERT_TRUE(in.op >= 0 && in.op < static_cast<int>(cfg.catalogue.size()));
    }
    ASSERT_TRUE(is_valid(g, cfg));
  }
}

TEST(Genome, RandomLengthIsUniform) {
  // Pearson chi-square against the uniform law on [1, 15]: 14 degrees of
  // freedom, 36.12 is the 0.999 quantile.
  Rng rng(15);
  const GenomeConfig cfg;
  constexpr int kSamples = 10000;
  std::map<std::size_t, int> counts;
  for (int i = 0; i < kSamples; ++i) ++counts[random_genome(rng, cfg).size()];
  const double expected = kSamples / 15.0;
  double chi2 = 0.0;
  for (std::size_t len = 1; len <= 15; ++len) {
    const double d = counts[len] - expected;
    chi2 += d * d / expected;
  }
  EXPECT_LT(chi2, 36.12);
}

TEST(Genome, ConfigValidation) {
  GenomeConfig cfg;
  cfg.min_length = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.max_length = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.registers = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Catalogue, StandardOrderAndAliases) {
  const auto& cat = Catalogue::standard();
  ASSERT_EQ(cat.size(), 12u);
  EXPECT_EQ(layer_name(cat[0]), "Conv8k3");
  EXPECT_EQ(layer_name(cat[11]), "Dense");
  EXPECT_EQ(cat.find("Conv"), cat.find("Conv32k3"));
  EXPECT_EQ(cat.find("MaxPool"), cat.find("MaxPool3"));
  EXPECT_EQ(cat.find("Dropout"), cat.find("Dropout50"));
  EXPECT_FALSE(cat.find("Conv7k7").has_value());
  EXPECT_EQ(cat[static_cast<std::size_t>(cat.smallest_conv())], LayerOp::conv(8, 3));
  EXPECT_EQ(cat[static_cast<std::size_t>(cat.smallest_pool())], LayerOp::max_pool(2));
  for (std::size_t i = 0; i < cat.size(); ++i) EXPECT_EQ(cat.find(layer_name(cat[i])), static_cast<int>(i));
}

TEST(Catalogue, ParseShape) {
  EXPECT_EQ(parse_shape("16x16x1"), (TensorShape{16, 16, 1}));
  EXPECT_EQ(parse_shape("64x64x3"), (TensorShape{64, 64, 3}));
  EXPECT_FALSE(parse_shape("16x16").has_value());
  EXPECT_FALSE(parse_shape("0x16x1").has_value());
  EXPECT_FALSE(parse_shape("axbxc").has_value());
}
