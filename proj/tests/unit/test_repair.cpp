#include <gtest/gtest.h>

#include <algorithm>

#include "fixtures.hpp"
#include "neurolgp/nn/shape.hpp"
#include "neurolgp/repair.hpp"

using namespace nlgp;
using nlgp::test::ins;

namespace {

const TensorShape kInput{16, 16, 1};

void expect_compilable(const Genome& g, const TensorShape& input, const RepairConfig& cfg) {
  const auto arch = decode(g, input, cfg.num_classes, cfg.genome);
  ASSERT_FALSE(arch.layers.empty());
  EXPECT_EQ(arch.layers.front().kind, LayerKind::Conv);
  EXPECT_EQ(arch.layers.back().kind, LayerKind::Dense);
  std::vector<TensorShape> shapes;
  ASSERT_NO_THROW(shapes = propagate_shape(arch));
  EXPECT_LE(shapes.back().size(), cfg.max_flatten);
}

}  // namespace

TEST(Repair, EmptyEffectiveCodeGetsAConv) {
  const Genome g{{ins(3, "Conv8k3", 1)}};
  const auto r = repair(g, kInput);
  ASSERT_FALSE(r.report.rules_applied.empty());
  EXPECT_EQ(r.report.rules_applied.front(), RepairRule::InsertConvEmpty);
  const auto arch = decode(r.genome, kInput);
  EXPECT_EQ(arch.layers.front().kind, LayerKind::Conv);
  expect_compilable(r.genome, kInput, {});
}

TEST(Repair, EmptyGenomeIsRepaired) {
  const auto r = repair(Genome{}, kInput);
  EXPECT_EQ(r.report.rules_applied,
            (std::vector<RepairRule>{RepairRule::InsertConvEmpty, RepairRule::InsertDense}));
  expect_compilable(r.genome, kInput, {});
}

TEST(Repair, ValidChainIsUntouched) {
  const Genome g{{ins(0, "Conv8k3", 1), ins(0, "MaxPool2", 0), ins(0, "Dense", 0)}};
  const auto r = repair(g, kInput);
  EXPECT_TRUE(r.report.empty());
  EXPECT_EQ(r.genome, g);
  EXPECT_TRUE(is_compilable(g, kInput));
}

TEST(Repair, ExhaustedPoolingLosesOneLayer) {
  const Genome g{{ins(0, "Conv8k3", 1), ins(0, "MaxPool3", 0), ins(0, "MaxPool3", 0), ins(0, "MaxPool3", 0)}};
  const auto r = repair(g, kInput);
  EXPECT_EQ(std::count(r.report.rules_applied.begin(), r.report.rules_applied.end(), RepairRule::RemoveReducing), 1);
  EXPECT_EQ(r.report.instructions_removed, 1u);
  const auto arch = decode(r.genome, kInput);
  EXPECT_EQ(arch.layers, (std::vector<LayerOp>{LayerOp::conv(8, 3), LayerOp::max_pool(3), LayerOp::max_pool(3),
                                               LayerOp::dense()}));
}

TEST(Repair, MissingConvIsPrepended) {
  const Genome g{{ins(0, "MaxPool2", 4), ins(0, "Dense", 0)}};
  const auto r = repair(g, kInput);
  EXPECT_EQ(r.report.rules_applied, std::vector<RepairRule>{RepairRule::PrependConv});
  EXPECT_EQ(decode(r.genome, kInput).layers,
            (std::vector<LayerOp>{LayerOp::conv(8, 3), LayerOp::max_pool(2), LayerOp::dense()}));
}

TEST(Repair, MissingDenseIsAppended) {
  const Genome g{{ins(0, "Conv8k3", 1)}};
  const auto r = repair(g, kInput);
  EXPECT_EQ(r.report.rules_applied, std::vector<RepairRule>{RepairRule::InsertDense});
  EXPECT_EQ(decode(r.genome, kInput).layers.back(), LayerOp::dense());
}

TEST(Repair, WideFlattenGetsAnotherDense) {
  // 16*16*32 = 8192 features into the head exceeds max_flatten.
  const Genome g{{ins(0, "Conv32k3", 1), ins(0, "Dense", 0)}};
  RepairConfig cfg;
  cfg.max_flatten = 4096;
  const auto arch = decode(g, kInput);
  ASSERT_EQ(propagate_shape(arch).back().size(), 128);
  EXPECT_TRUE(repair(g, kInput, cfg).report.empty());
  const Genome h{{ins(0, "Conv32k3", 1), ins(0, "Dropout25", 0)}};
  const auto r = repair(h, kInput, cfg);
  EXPECT_EQ(r.report.rules_applied, std::vector<RepairRule>{RepairRule::InsertDense});
}

TEST(Repair, ParameterBudgetInsertsPooling) {
  const Genome g{{ins(0, "Conv32k3", 1), ins(0, "Dense", 0)}};
  RepairConfig cfg;
  cfg.max_params = 200'000;
  ASSERT_GT(param_count(decode(g, kInput)), cfg.max_params);
  const auto r = repair(g, kInput, cfg);
  EXPECT_FALSE(r.report.empty());
  EXPECT_EQ(r.report.rules_applied.front(), RepairRule::InsertReducing);
  EXPECT_LE(param_count(decode(r.genome, kInput)), cfg.max_params);
}

TEST(Repair, TotalOnRandomGenomes) {
  Rng rng(21);
  const RepairConfig cfg;
  for (int i = 0; i < 10000; ++i) {
    const Genome g = random_genome(rng, cfg.genome);
    const auto r = repair(g, kInput, cfg);
    ASSERT_NO_FATAL_FAILURE(expect_compilable(r.genome, kInput, cfg)) << to_text(g);
    ASSERT_LE(param_count(decode(r.genome, kInput)), cfg.max_params);
    ASSERT_EQ(r.report.empty(), r.genome == g);
  }
}

TEST(Repair, TotalOnColourInput) {
  Rng rng(22);
  const RepairConfig cfg;
  const TensorShape input{64, 64, 3};
  for (int i = 0; i < 2000; ++i) {
    const auto r = repair(random_genome(rng, cfg.genome), input, cfg);
    ASSERT_NO_FATAL_FAILURE(expect_compilable(r.genome, input, cfg));
    ASSERT_LE(param_count(decode(r.genome, input)), cfg.max_params);
  }
}

TEST(Repair, Idempotent) {
  Rng rng(23);
  for (int i = 0; i < 2000; ++i) {
    const auto once = repair(random_genome(rng), kInput);
    const auto twice = repair(once.genome, kInput);
    ASSERT_TRUE(twice.report.empty());
    ASSERT_EQ(twice.genome, once.genome);
  }
}

TEST(Repair, IntronsSurviveVerbatim) {
  Rng rng(24);
  for (int i = 0; i < 2000; ++i) {
    const Genome g = random_genome(rng);
    const auto r = repair(g, kInput);
    if (effective_indices(g).empty()) continue;
    ASSERT_EQ(introns(r.genome), introns(g)) << to_text(g);
  }
}

TEST(Repair, RemoveEffectiveKeepsChainConnected) {
  Rng rng(25);
  int checked = 0;
  for (int i = 0; i < 2000; ++i) {
    const Genome g = random_genome(rng);
    const auto eff = effective_indices(g);
    if (eff.size() < 2) continue;
    const std::size_t pos = rng.index(eff.size());
    const Genome h = remove_effective(g, pos);
    auto want = effective_ops(g);
    want.erase(want.begin() + static_cast<std::ptrdiff_t>(pos));
    ASSERT_EQ(effective_ops(h), want) << to_text(g);
    ASSERT_EQ(h.size() + 1, g.size());
    ASSERT_EQ(introns(h), introns(g));
    ++checked;
  }
  EXPECT_GT(checked, 200);
}

TEST(Repair, RuleNames) {
  EXPECT_EQ(to_string(RepairRule::InsertConvEmpty), "InsertConvEmpty");
  EXPECT_EQ(to_string(RepairRule::InsertReducing), "InsertReducing");
}
