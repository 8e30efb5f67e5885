#include <gtest/gtest.h>

#include <random>

#include "densnet/error.hpp"
#include "densnet/irreps.hpp"

using namespace densnet;

namespace {
const char* kOxygen = "12x0e+5x1o+4x2e+2x3o+1x4e";
}

TEST(Irreps, ParsesFiveChannelOxygenSpec) {
  const auto s = parse_irreps(kOxygen);
  ASSERT_EQ(s.size(), 5u);
  EXPECT_EQ(s[0].mul, 12);
  EXPECT_EQ(s[4].irrep, Irrep(4, Parity::even));
  EXPECT_EQ(s[3].irrep, Irrep(3, Parity::odd));
  EXPECT_EQ(format_irreps(s), kOxygen);
}

TEST(Irreps, SingleScalar) {
  const auto s = parse_irreps("1x0e");
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(dim(s), 1);
}

TEST(Irreps, RepeatedChannelsStaySeparate) {
  const auto s = parse_irreps("3x1o+3x1o");
  EXPECT_EQ(s.size(), 2u);
  EXPECT_EQ(s.str(), "3x1o+3x1o");
  EXPECT_EQ(s.count(Irrep(1, Parity::odd)), 6);
}

TEST(Irreps, ToleratesWhitespace) { EXPECT_EQ(parse_irreps(" 2x0e +  1x1o ").str(), "2x0e+1x1o"); }

TEST(Irreps, RejectsMalformedTermsNamingThem) {
  for (const char* bad : {"", "0x1e", "2x-1e", "2x1q", "x1e", "2y1e", "2x1e+", "2x1e++1x0e", "2.5x1e", "2x1"}) {
    try {
      parse_irreps(bad);
      ADD_FAILURE() << "accepted '" << bad << "'";
    } catch (const Error& e) {
      EXPECT_FALSE(std::string(e.what()).empty());
    }
  }
  try {
    parse_irreps("2x0e+3y1o");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("3y1o"), std::string::npos) << e.what();
  }
}

TEST(Irreps, Dimensions) {
  EXPECT_EQ(dim(parse_irreps(kOxygen)), 12 + 15 + 20 + 14 + 9);
  EXPECT_EQ(dim(parse_irreps("315x0e+315x0o+35x1e+35x1o+21x2e+21x2o")), 1050);
}

TEST(Irreps, Slices) {
  const auto a = slices(parse_irreps("2x0e+1x1o"));
  ASSERT_EQ(a.size(), 2u);
  EXPECT_EQ(a[0], (ChannelSlice{0, 0, 2}));
  EXPECT_EQ(a[1], (ChannelSlice{1, 2, 3}));
  EXPECT_EQ(slices(parse_irreps("1x0e")), (std::vector<ChannelSlice>{{0, 0, 1}}));
  const auto o = slices(parse_irreps(kOxygen));
  EXPECT_EQ(o.back().offset, 61u);
  EXPECT_EQ(o.back().length, 9u);
}

TEST(Irreps, Truncation) {
  const auto o = parse_irreps(kOxygen);
  EXPECT_EQ(truncate_spec(o, 1).str(), "12x0e+5x1o");
  EXPECT_EQ(truncate_spec(o, 4), o);
  EXPECT_EQ(truncate_spec(o, 0).str(), "12x0e");
  EXPECT_THROW(truncate_spec(parse_irreps("2x1o"), 0), Error);
  EXPECT_THROW(truncate_spec(o, -1), Error);
}

TEST(Irreps, TensorSelection) {
  const Irrep e0(0, Parity::even), o1(1, Parity::odd), e2(2, Parity::even), o3(3, Parity::odd);
  EXPECT_EQ(tensor_selection(o1, o1),
            (std::vector<Irrep>{{0, Parity::even}, {1, Parity::even}, {2, Parity::even}}));
  EXPECT_EQ(tensor_selection(e0, o3), (std::vector<Irrep>{o3}));
  EXPECT_EQ(tensor_selection(e2, o1), (std::vector<Irrep>{{1, Parity::odd}, {2, Parity::odd}, {3, Parity::odd}}));
}

TEST(Irreps, HiddenConfigRows) {
  EXPECT_EQ(hidden_config(0, 105).str(), "525x0e+525x0o");
  EXPECT_EQ(hidden_config(1, 105).str(), "420x0e+420x0o+35x1e+35x1o");
  EXPECT_EQ(hidden_config(2, 105).str(), "315x0e+315x0o+35x1e+35x1o+21x2e+21x2o");
  EXPECT_EQ(hidden_config(3, 105).str(), "210x0e+210x0o+35x1e+35x1o+21x2e+21x2o+15x3e+15x3o");
  for (int lh = 0; lh <= 4; ++lh) EXPECT_EQ(dim(hidden_config(lh, 105)), 1050) << lh;
}

TEST(Irreps, HiddenConfigSkipsEmptyChannelsAndRejectsExhaustion) {
  EXPECT_EQ(hidden_config(2, 2).str(), "10x0e+10x0o");
  EXPECT_EQ(dim(hidden_config(3, 8)), 80);
  EXPECT_THROW(hidden_config(-1, 8), Error);
  EXPECT_THROW(hidden_config(0, 0), Error);
}

// Property: format/parse round trip, truncation conserves dimension and
// selection size is 2 min(la, lb) + 1.
TEST(IrrepsProperty, RandomSpecs) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> nch(1, 6), mul(1, 40), l(0, 8), par(0, 1);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<MulIrrep> ch;
    const int n = nch(rng);
    for (int k = 0; k < n; ++k) ch.push_back({mul(rng), Irrep(l(rng), par(rng) ? Parity::odd : Parity::even)});
    const IrrepsSpec s(ch);
    EXPECT_EQ(parse_irreps(format_irreps(s)), s);
    const int cut = l(rng);
    int removed = 0;
    for (const auto& c : s)
      if (c.irrep.l > cut) removed += c.dim();
    if (removed < s.dim()) EXPECT_EQ(truncate_spec(s, cut).dim() + removed, s.dim());
    const Irrep a = ch.front().irrep, b = ch.back().irrep;
    EXPECT_EQ(static_cast<int>(tensor_selection(a, b).size()), 2 * std::min(a.l, b.l) + 1);
  }
}
